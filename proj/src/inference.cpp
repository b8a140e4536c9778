#include "profmix/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "profmix/densities.hpp"
#include "profmix/likelihood.hpp"
#include "profmix/sampler.hpp"

namespace profmix {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    const double h = static_cast<double>(n - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

void require_states(const PosteriorSamples& samples) {
    if (samples.states.empty()) {
        throw DataError("no retained posterior samples");
    }
}

LambdaBox box_stats(std::vector<double> draws) {
    std::sort(draws.begin(), draws.end());
    return {quantile_sorted(draws, 0.25), quantile_sorted(draws, 0.5),
            quantile_sorted(draws, 0.75)};
}

// Covariate-only log membership terms for one state, on the model scale.
Eigen::VectorXd membership_log_terms(const ChainState& state, const Eigen::VectorXd& x) {
    const int k_total = state.n_clusters();
    Eigen::VectorXd log_terms(k_total);
    for (int k = 0; k < k_total; ++k) {
        double acc = std::log(state.weights[k]);
        for (int j = 0; j < x.size(); ++j) {
            acc += gaussian_logpdf(x[j], state.cluster_means(k, j), state.variances[j]);
        }
        log_terms[k] = acc;
    }
    return log_terms;
}

}  // namespace

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw DataError("quantile of an empty set");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw DataError("quantile level outside [0, 1]");
    }
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

SummaryStat summarize(const std::vector<double>& draws) {
    if (draws.empty()) {
        throw DataError("summary of an empty set");
    }
    const double n = static_cast<double>(draws.size());
    SummaryStat stat;
    stat.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : draws) {
        const double diff = v - stat.mean;
        ss += diff * diff;
    }
    stat.sd = draws.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    stat.lo = quantile_sorted(sorted, 0.025);
    stat.hi = quantile_sorted(sorted, 0.975);
    return stat;
}

int free_parameter_count(int k, int p) { return k * p + 3 * p + k + (k - 1); }

ChainState posterior_mean_state(const PosteriorSamples& samples) {
    require_states(samples);
    const ChainState& first = samples.states.front();
    const int k_total = first.n_clusters();
    const int p = first.n_variables();
    const double n = static_cast<double>(samples.states.size());

    ChainState mean;
    mean.weights = Eigen::VectorXd::Zero(k_total);
    mean.cluster_means = Eigen::MatrixXd::Zero(k_total, p);
    mean.common_means = Eigen::VectorXd::Zero(p);
    mean.shrinkage = Eigen::VectorXd::Zero(p);
    mean.variances = Eigen::VectorXd::Zero(p);
    mean.intercepts = Eigen::VectorXd::Zero(k_total);
    const bool has_logit = first.logit_weights.size() == k_total;
    if (has_logit) {
        mean.logit_weights = Eigen::VectorXd::Zero(k_total);
    }
    for (const ChainState& state : samples.states) {
        mean.weights += state.weights;
        mean.cluster_means += state.cluster_means;
        mean.common_means += state.common_means;
        mean.shrinkage += state.shrinkage;
        mean.variances += state.variances;
        mean.intercepts += state.intercepts;
        if (has_logit) {
            mean.logit_weights += state.logit_weights;
        }
    }
    mean.weights /= n;
    mean.weights /= mean.weights.sum();
    mean.cluster_means /= n;
    mean.common_means /= n;
    mean.shrinkage /= n;
    mean.variances /= n;
    mean.intercepts /= n;
    if (has_logit) {
        mean.logit_weights /= n;
    }
    // Averaging preserves the ordering, so the increments stay nonnegative.
    mean.increments.resize(std::max(k_total - 1, 0));
    for (int k = 0; k + 1 < k_total; ++k) {
        mean.increments[k] = mean.intercepts[k + 1] - mean.intercepts[k];
    }
    return mean;
}

InformationCriteria compute_ic(const PosteriorSamples& samples, const Dataset& data, int k) {
    require_states(samples);
    if (samples.states.front().n_clusters() != k) {
        throw DataError("requested K does not match the posterior samples");
    }
    const ChainState plug_in = posterior_mean_state(samples);
    InformationCriteria ic;
    ic.k = k;
    ic.deviance = -2.0 * observed_loglik(plug_in, data);
    ic.nu_k = free_parameter_count(k, static_cast<int>(data.n_variables()));
    ic.aic = ic.deviance + 2.0 * ic.nu_k;
    ic.bic = ic.deviance + ic.nu_k * std::log(static_cast<double>(data.n_subjects()));
    return ic;
}

ModelSpec spec_for_k(const ModelSpec& base, int k) {
    ModelSpec spec = base;
    spec.k = k;
    auto fit_alpha = [k](Eigen::VectorXd& alpha, const char* what) {
        if (alpha.size() == 0) {
            alpha = Eigen::VectorXd::Ones(k);
        } else if (alpha.size() == 1) {
            alpha = Eigen::VectorXd::Constant(k, alpha[0]);
        } else if (alpha.size() != k) {
            throw DataError(std::string(what) + " length matches neither 1 nor K");
        }
    };
    fit_alpha(spec.hyper.alpha, "hyperparameter alpha");
    if (spec.weight_prior.kind == WeightPriorKind::Dirichlet) {
        fit_alpha(spec.weight_prior.dirichlet_alpha, "Dirichlet weight prior alpha");
    }
    spec.validate();
    return spec;
}

int choose_k(const std::vector<InformationCriteria>& criteria) {
    if (criteria.empty()) {
        throw DataError("no criteria rows to choose from");
    }
    int chosen = criteria.front().k;
    double best_bic = criteria.front().bic;
    for (const InformationCriteria& ic : criteria) {
        if (ic.bic < best_bic) {
            best_bic = ic.bic;
            chosen = ic.k;
        }
    }
    return chosen;
}

SelectionResult select_k(const Dataset& data, const ModelSpec& base, int k_min, int k_max,
                         const McmcSchedule& schedule) {
    if (k_min < 1 || k_max < k_min) {
        throw DataError("invalid K range");
    }
    SelectionResult result;
    for (int k = k_min; k <= k_max; ++k) {
        McmcSchedule chain_schedule = schedule;
        chain_schedule.seed = mix_seed(schedule.seed, static_cast<std::uint64_t>(k));
        const PosteriorSamples samples = run_chain(spec_for_k(base, k), data, chain_schedule);
        result.criteria.push_back(compute_ic(samples, data, k));
        const std::size_t m = result.criteria.size();
        if (m >= 2 && result.criteria[m - 1].aic > result.criteria[m - 2].aic &&
            result.criteria[m - 1].bic > result.criteria[m - 2].bic) {
            break;
        }
    }
    result.chosen_k = choose_k(result.criteria);
    return result;
}

ProfileReport profile_report(const PosteriorSamples& samples, const Dataset& data) {
    require_states(samples);
    const int k_total = samples.states.front().n_clusters();
    const int p = samples.states.front().n_variables();
    if (data.n_variables() != p) {
        throw DataError("dataset does not match the posterior samples");
    }
    const std::size_t n_states = samples.states.size();
    const Standardization& std_info = samples.meta.standardization;

    ProfileReport report;
    report.variable_names = data.variable_names;
    report.cluster_means.resize(p);
    std::vector<double> draws(n_states);
    for (int j = 0; j < p; ++j) {
        report.cluster_means[j].resize(k_total);
        for (int k = 0; k < k_total; ++k) {
            for (std::size_t t = 0; t < n_states; ++t) {
                double value = samples.states[t].cluster_means(k, j);
                if (std_info.enabled) {
                    value = std_info.mean[j] + std_info.sd[j] * value;
                }
                draws[t] = value;
            }
            report.cluster_means[j][k] = summarize(draws);
        }
    }
    report.theta.resize(k_total);
    report.weights.resize(k_total);
    for (int k = 0; k < k_total; ++k) {
        for (std::size_t t = 0; t < n_states; ++t) {
            draws[t] = samples.states[t].theta(k);
        }
        report.theta[k] = summarize(draws);
        for (std::size_t t = 0; t < n_states; ++t) {
            draws[t] = samples.states[t].weights[k];
        }
        report.weights[k] = summarize(draws);
    }
    report.dstar.resize(p);
    for (int j = 0; j < p; ++j) {
        report.dstar[j] = Eigen::MatrixXd::Zero(k_total, k_total);
        for (int k = 0; k < k_total; ++k) {
            for (int kp = 0; kp < k_total; ++kp) {
                if (k != kp) {
                    report.dstar[j](k, kp) = compute_dstar(samples, j, k, kp);
                }
            }
        }
    }
    report.shrinkage.resize(p);
    for (int j = 0; j < p; ++j) {
        for (std::size_t t = 0; t < n_states; ++t) {
            draws[t] = samples.states[t].shrinkage[j];
        }
        report.shrinkage[j] = box_stats(draws);
    }
    return report;
}

double compute_dstar(const PosteriorSamples& samples, int j, int k, int k_prime) {
    require_states(samples);
    const ChainState& first = samples.states.front();
    if (j < 0 || j >= first.n_variables() || k < 0 || k >= first.n_clusters() || k_prime < 0 ||
        k_prime >= first.n_clusters()) {
        throw DataError("D* index out of range");
    }
    if (k == k_prime) {
        throw DataError("D* needs two distinct clusters");
    }
    std::size_t exceed = 0;
    for (const ChainState& state : samples.states) {
        if (state.cluster_means(k, j) > state.cluster_means(k_prime, j)) {
            ++exceed;
        }
    }
    return static_cast<double>(exceed) / static_cast<double>(samples.states.size());
}

MembershipPosterior membership_posterior(const PosteriorSamples& samples,
                                         const Eigen::VectorXd& x_new) {
    require_states(samples);
    const int k_total = samples.states.front().n_clusters();
    const int p = samples.states.front().n_variables();
    if (x_new.size() != p) {
        throw DataError("covariate vector length does not match the fitted model");
    }
    Eigen::VectorXd x = x_new;
    const Standardization& std_info = samples.meta.standardization;
    if (std_info.enabled) {
        x = (x_new - std_info.mean).cwiseQuotient(std_info.sd);
    }

    MembershipPosterior out;
    const std::size_t n_states = samples.states.size();
    out.per_sample.resize(static_cast<Eigen::Index>(n_states), k_total);
    for (std::size_t t = 0; t < n_states; ++t) {
        const Eigen::VectorXd log_terms = membership_log_terms(samples.states[t], x);
        const Eigen::VectorXd shifted = (log_terms.array() - log_sum_exp(log_terms)).exp();
        out.per_sample.row(static_cast<Eigen::Index>(t)) = (shifted / shifted.sum()).transpose();
    }
    out.mean = out.per_sample.colwise().mean().transpose();
    out.mean /= out.mean.sum();
    return out;
}

OddsRatio odds_ratio(const PosteriorSamples& samples, const Eigen::VectorXd& x_new, int k,
                     int k_prime) {
    require_states(samples);
    const int k_total = samples.states.front().n_clusters();
    if (k < 0 || k >= k_total || k_prime < 0 || k_prime >= k_total) {
        throw DataError("odds-ratio cluster index out of range");
    }
    if (k == k_prime) {
        throw DataError("odds ratio needs two distinct clusters");
    }
    const MembershipPosterior membership = membership_posterior(samples, x_new);
    OddsRatio odds;
    odds.value = membership.mean[k] / membership.mean[k_prime];
    // Denominators can underflow to zero or to a denormal whose reciprocal
    // overflows; both cases are reported as an infinite ratio.
    if (membership.mean[k_prime] <= 0.0 || !std::isfinite(odds.value)) {
        odds.value = std::numeric_limits<double>::infinity();
        odds.infinite = true;
    }
    return odds;
}

PpcSummary posterior_predictive(const PosteriorSamples& samples, int n_rep, RngStream& rng) {
    require_states(samples);
    if (n_rep < 1) {
        throw DataError("posterior predictive needs at least one replicate");
    }
    const std::size_t n_states = samples.states.size();
    std::vector<std::vector<long>> reps(n_states, std::vector<long>(n_rep));
    long max_count = 0;
    for (std::size_t t = 0; t < n_states; ++t) {
        const ChainState& state = samples.states[t];
        const std::span<const double> weights{state.weights.data(),
                                              static_cast<std::size_t>(state.weights.size())};
        for (int i = 0; i < n_rep; ++i) {
            const int z = rng.categorical(weights);
            reps[t][i] = rng.poisson(state.theta(z));
            max_count = std::max(max_count, reps[t][i]);
        }
        std::sort(reps[t].begin(), reps[t].end());
    }

    PpcSummary summary;
    summary.ranks.resize(n_rep);
    std::vector<double> draws(n_states);
    for (int i = 0; i < n_rep; ++i) {
        for (std::size_t t = 0; t < n_states; ++t) {
            draws[t] = static_cast<double>(reps[t][i]);
        }
        summary.ranks[i] = summarize(draws);
    }
    summary.count_values.resize(max_count + 1);
    summary.count_freq.resize(max_count + 1);
    std::vector<std::vector<double>> freq(max_count + 1, std::vector<double>(n_states, 0.0));
    for (std::size_t t = 0; t < n_states; ++t) {
        for (long value : reps[t]) {
            freq[value][t] += 1.0 / n_rep;
        }
    }
    for (long value = 0; value <= max_count; ++value) {
        summary.count_values[value] = value;
        summary.count_freq[value] = summarize(freq[value]);
    }
    return summary;
}

std::vector<RelevanceEntry> relevance_ranking(const PosteriorSamples& samples) {
    require_states(samples);
    const int p = samples.states.front().n_variables();
    const std::size_t n_states = samples.states.size();
    std::vector<RelevanceEntry> entries(p);
    std::vector<double> draws(n_states);
    for (int j = 0; j < p; ++j) {
        for (std::size_t t = 0; t < n_states; ++t) {
            draws[t] = samples.states[t].shrinkage[j];
        }
        entries[j].variable = j;
        entries[j].box = box_stats(draws);
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RelevanceEntry& a, const RelevanceEntry& b) {
                         return a.box.median < b.box.median;
                     });
    return entries;
}

}  // namespace profmix
