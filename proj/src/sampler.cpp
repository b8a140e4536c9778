#include "profmix/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "profmix/densities.hpp"
#include "profmix/likelihood.hpp"

namespace profmix {

namespace {

constexpr double kTargetAcceptance = 0.44;
constexpr int kAdaptBatch = 50;
constexpr double kMinLogStep = -9.2;  // ~1e-4
constexpr double kMaxLogStep = 4.6;   // ~1e2
constexpr double kMinIncrement = 1e-300;

// Per-sweep scratch for the assignment block; keeps the inner loop free of
// log calls by precomputing every per-cluster and per-variable constant.
struct AssignmentWorkspace {
    Eigen::VectorXd log_norm_const;  // -0.5 ln(2 pi sigma_j^2), per variable
    Eigen::VectorXd inv_two_var;     // 1 / (2 sigma_j^2), per variable
    Eigen::VectorXd log_weight;      // ln pi_k
    Eigen::VectorXd theta;           // exp(gamma_k)
    Eigen::VectorXd log_terms;       // scratch, per cluster

    void prepare(const ChainState& state) {
        const int p = state.n_variables();
        const int k_total = state.n_clusters();
        log_norm_const.resize(p);
        inv_two_var.resize(p);
        for (int j = 0; j < p; ++j) {
            log_norm_const[j] = -0.5 * std::log(2.0 * std::numbers::pi * state.variances[j]);
            inv_two_var[j] = 0.5 / state.variances[j];
        }
        log_weight = state.weights.array().log();
        theta = state.intercepts.array().exp();
        log_terms.resize(k_total);
    }

    // Unnormalized log conditional of z_i; the lgamma(y_i + 1) term is the
    // same for every k and is dropped.
    void fill(const ChainState& state, const Dataset& data, int subject) {
        const int p = state.n_variables();
        const int k_total = state.n_clusters();
        const double y = static_cast<double>(data.counts[subject]);
        for (int k = 0; k < k_total; ++k) {
            double acc = log_weight[k] + y * state.intercepts[k] - theta[k];
            for (int j = 0; j < p; ++j) {
                const double diff = data.covariates(subject, j) - state.cluster_means(k, j);
                acc += log_norm_const[j] - diff * diff * inv_two_var[j];
            }
            log_terms[k] = acc;
        }
    }

    // Normalize log_terms in place into probabilities; returns false when
    // every conditional weight underflows.
    bool normalize() {
        const double m = log_terms.maxCoeff();
        if (!std::isfinite(m)) {
            return false;
        }
        log_terms = (log_terms.array() - m).exp();
        const double total = log_terms.sum();
        if (!(total > 0.0) || !std::isfinite(total)) {
            return false;
        }
        log_terms /= total;
        return true;
    }
};

}  // namespace

NormalParams cluster_mean_conditional(const ChainState& state, const Dataset& data, int k, int j) {
    double sum = 0.0;
    int occupancy = 0;
    for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
        if (state.assignments[i] == k) {
            sum += data.covariates(i, j);
            ++occupancy;
        }
    }
    const double lambda = state.shrinkage[j];
    const double denom = occupancy * lambda + 1.0;
    return {(lambda * sum + state.common_means[j]) / denom,
            state.variances[j] * lambda / denom};
}

NormalParams common_mean_conditional(const ChainState& state, int j) {
    const int k_total = state.n_clusters();
    return {state.cluster_means.col(j).mean(),
            state.variances[j] * state.shrinkage[j] / k_total};
}

InvGammaParams variance_conditional(const ChainState& state, const Dataset& data,
                                    const Hyperparameters& hyper, int j) {
    double resid = 0.0;
    for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
        const double diff = data.covariates(i, j) - state.cluster_means(state.assignments[i], j);
        resid += diff * diff;
    }
    double prior_quad = 0.0;
    for (int k = 0; k < state.n_clusters(); ++k) {
        const double diff = state.cluster_means(k, j) - state.common_means[j];
        prior_quad += diff * diff;
    }
    prior_quad /= state.shrinkage[j];
    const double shape = hyper.r + 0.5 * (data.n_subjects() + state.n_clusters());
    return {shape, hyper.s + 0.5 * (resid + prior_quad)};
}

Eigen::VectorXd dirichlet_posterior_alpha(const WeightPrior& prior, const Eigen::VectorXi& counts) {
    if (prior.kind != WeightPriorKind::Dirichlet) {
        throw std::logic_error("dirichlet_posterior_alpha called with a non-Dirichlet prior");
    }
    return prior.dirichlet_alpha + counts.cast<double>();
}

Eigen::VectorXd assignment_conditional(const ChainState& state, const Dataset& data, int subject) {
    AssignmentWorkspace ws;
    ws.prepare(state);
    ws.fill(state, data, subject);
    if (!ws.normalize()) {
        throw NumericalError("assignment conditional underflowed for subject " +
                             std::to_string(subject + 1));
    }
    return ws.log_terms;
}

double shrinkage_quadratic(const ChainState& state, int j) {
    double quad = 0.0;
    for (int k = 0; k < state.n_clusters(); ++k) {
        const double diff = state.cluster_means(k, j) - state.common_means[j];
        quad += diff * diff;
    }
    return quad / (2.0 * state.variances[j]);
}

double shrinkage_log_target(double lambda, double quadratic, const Hyperparameters& hyper,
                            int n_clusters) {
    return (hyper.c - 1.0 - 0.5 * n_clusters) * std::log(lambda) - hyper.d * lambda -
           quadratic / lambda;
}

ClusterCountStats cluster_count_stats(const ChainState& state, const Dataset& data) {
    ClusterCountStats stats;
    stats.occupancy = Eigen::VectorXi::Zero(state.n_clusters());
    stats.count_sum = Eigen::VectorXd::Zero(state.n_clusters());
    for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
        const int k = state.assignments[i];
        stats.occupancy[k] += 1;
        stats.count_sum[k] += static_cast<double>(data.counts[i]);
    }
    return stats;
}

double intercept_log_target(double gamma1, const Eigen::VectorXd& increments,
                            const ClusterCountStats& stats, double sigma0_sq) {
    double target = -gamma1 * gamma1 / (2.0 * sigma0_sq);
    target -= increments.squaredNorm() / (2.0 * sigma0_sq);
    double gamma_k = gamma1;
    const int k_total = static_cast<int>(stats.occupancy.size());
    for (int k = 0; k < k_total; ++k) {
        if (k > 0) {
            gamma_k += increments[k - 1];
        }
        target += stats.count_sum[k] * gamma_k - stats.occupancy[k] * std::exp(gamma_k);
    }
    return target;
}

StepAdapter::StepAdapter(double initial_step, bool adapt)
    : log_step_(std::log(initial_step)), adapting_(adapt) {}

void StepAdapter::record(bool accepted) {
    if (!adapting_) {
        return;
    }
    batch_accepts_ += accepted ? 1 : 0;
    if (++batch_count_ < kAdaptBatch) {
        return;
    }
    const double rate = static_cast<double>(batch_accepts_) / batch_count_;
    batches_done_ += 1;
    log_step_ += (rate - kTargetAcceptance) / std::sqrt(static_cast<double>(batches_done_));
    log_step_ = std::clamp(log_step_, kMinLogStep, kMaxLogStep);
    batch_accepts_ = batch_count_ = 0;
}

void update_assignments(ChainState& state, const Dataset& data, RngStream& rng) {
    AssignmentWorkspace ws;
    ws.prepare(state);
    for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
        ws.fill(state, data, static_cast<int>(i));
        if (!ws.normalize()) {
            throw NumericalError("assignment conditional underflowed for subject " +
                                 std::to_string(i + 1));
        }
        state.assignments[i] =
            rng.categorical({ws.log_terms.data(), static_cast<std::size_t>(ws.log_terms.size())});
    }
}

void update_weights(ChainState& state, const WeightPrior& prior, RngStream& rng,
                    StepAdapter* logit_step, MhCounter* logit_counter) {
    const int k_total = state.n_clusters();
    if (prior.kind == WeightPriorKind::Dirichlet) {
        const Eigen::VectorXd alpha = dirichlet_posterior_alpha(prior, state.cluster_counts());
        const std::vector<double> draw =
            rng.dirichlet({alpha.data(), static_cast<std::size_t>(alpha.size())});
        for (int k = 0; k < k_total; ++k) {
            state.weights[k] = draw[k];
        }
        state.weights /= state.weights.sum();
        return;
    }

    if (logit_step == nullptr || logit_counter == nullptr) {
        throw std::logic_error("multinomial-logit weight updates need a step adapter and counter");
    }
    if (state.logit_weights.size() != k_total) {
        throw std::logic_error("logit weight parameters not initialized");
    }
    const Eigen::VectorXi counts = state.cluster_counts();
    const double inv_two_var = 0.5 / (prior.logit_sd * prior.logit_sd);
    auto log_target = [&](const Eigen::VectorXd& g) {
        const double lse = log_sum_exp(g);
        double t = 0.0;
        for (int k = 0; k < k_total; ++k) {
            t += counts[k] * (g[k] - lse);
        }
        // g[0] is pinned to 0 and carries no prior term.
        for (int k = 1; k < k_total; ++k) {
            t -= g[k] * g[k] * inv_two_var;
        }
        return t;
    };
    double current = log_target(state.logit_weights);
    for (int k = 1; k < k_total; ++k) {
        Eigen::VectorXd proposal = state.logit_weights;
        proposal[k] += logit_step->step() * rng.normal();
        const double proposed = log_target(proposal);
        const bool accept = std::log(rng.uniform()) < proposed - current;
        if (accept) {
            state.logit_weights = proposal;
            current = proposed;
        }
        logit_step->record(accept);
        logit_counter->record(accept);
    }
    const Eigen::ArrayXd shifted =
        (state.logit_weights.array() - state.logit_weights.maxCoeff()).exp();
    state.weights = (shifted / shifted.sum()).matrix();
}

void update_cluster_means(ChainState& state, const Dataset& data, RngStream& rng) {
    const int p = state.n_variables();
    const int k_total = state.n_clusters();

    Eigen::VectorXi occupancy = Eigen::VectorXi::Zero(k_total);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k_total, p);
    for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
        const int k = state.assignments[i];
        occupancy[k] += 1;
        sums.row(k) += data.covariates.row(i);
    }
    for (int k = 0; k < k_total; ++k) {
        for (int j = 0; j < p; ++j) {
            const double lambda = state.shrinkage[j];
            const double denom = occupancy[k] * lambda + 1.0;
            const double mean = (lambda * sums(k, j) + state.common_means[j]) / denom;
            const double variance = state.variances[j] * lambda / denom;
            state.cluster_means(k, j) = rng.normal(mean, std::sqrt(variance));
        }
    }
}

void update_common_means(ChainState& state, RngStream& rng) {
    for (int j = 0; j < state.n_variables(); ++j) {
        const NormalParams cond = common_mean_conditional(state, j);
        state.common_means[j] = rng.normal(cond.mean, std::sqrt(cond.variance));
    }
}

void update_variances(ChainState& state, const Dataset& data, const Hyperparameters& hyper,
                      RngStream& rng) {
    for (int j = 0; j < state.n_variables(); ++j) {
        const InvGammaParams cond = variance_conditional(state, data, hyper, j);
        state.variances[j] = rng.inv_gamma(cond.shape, cond.scale);
    }
}

void update_shrinkage(ChainState& state, const Hyperparameters& hyper, StepAdapter& step,
                      MhCounter& counter, RngStream& rng) {
    const int k_total = state.n_clusters();
    for (int j = 0; j < state.n_variables(); ++j) {
        const double quad = shrinkage_quadratic(state, j);
        const double lambda = state.shrinkage[j];
        const double log_lambda = std::log(lambda);
        const double proposal_log = log_lambda + step.step() * rng.normal();
        const double proposal = std::exp(proposal_log);
        // Log-scale walk: the Jacobian adds +ln(lambda) to each side.
        const double delta = shrinkage_log_target(proposal, quad, hyper, k_total) + proposal_log -
                             shrinkage_log_target(lambda, quad, hyper, k_total) - log_lambda;
        const bool accept = proposal > 0.0 && std::isfinite(delta) &&
                            std::log(rng.uniform()) < delta;
        if (accept) {
            state.shrinkage[j] = proposal;
        }
        step.record(accept);
        counter.record(accept);
    }
}

void update_intercepts(ChainState& state, const Dataset& data, const Hyperparameters& hyper,
                       StepAdapter& step, MhCounter& counter, RngStream& rng) {
    const ClusterCountStats stats = cluster_count_stats(state, data);
    const int k_total = state.n_clusters();

    double gamma1 = state.intercepts[0];
    double current = intercept_log_target(gamma1, state.increments, stats, hyper.sigma0_sq);

    {
        const double proposal = gamma1 + step.step() * rng.normal();
        const double proposed =
            intercept_log_target(proposal, state.increments, stats, hyper.sigma0_sq);
        const bool accept =
            std::isfinite(proposed) && std::log(rng.uniform()) < proposed - current;
        if (accept) {
            gamma1 = proposal;
            current = proposed;
        }
        step.record(accept);
        counter.record(accept);
    }

    for (int k = 0; k < k_total - 1; ++k) {
        const double eta = state.increments[k];
        const double log_eta = std::log(eta);
        const double proposal_log = log_eta + step.step() * rng.normal();
        const double proposal = std::exp(proposal_log);
        bool accept = false;
        if (proposal >= kMinIncrement && std::isfinite(proposal)) {
            Eigen::VectorXd trial = state.increments;
            trial[k] = proposal;
            const double proposed = intercept_log_target(gamma1, trial, stats, hyper.sigma0_sq);
            const double delta = proposed + proposal_log - current - log_eta;
            accept = std::isfinite(delta) && std::log(rng.uniform()) < delta;
            if (accept) {
                state.increments[k] = proposal;
                current = proposed;
            }
        }
        step.record(accept);
        counter.record(accept);
    }

    state.rebuild_intercepts(gamma1);
}

void update_label_swaps(ChainState& state, const Dataset& data, const WeightPrior& prior,
                        RngStream& rng) {
    const int k_total = state.n_clusters();
    if (k_total < 2) {
        return;
    }
    ClusterCountStats stats = cluster_count_stats(state, data);
    for (int k = 0; k + 1 < k_total; ++k) {
        const double gamma_a = state.intercepts[k];
        const double gamma_b = state.intercepts[k + 1];
        const double theta_a = std::exp(gamma_a);
        const double theta_b = std::exp(gamma_b);
        // Only the Poisson terms of the two clusters change; the covariate
        // likelihood and the cluster-mean prior move with the contents.
        double delta = (stats.count_sum[k + 1] - stats.count_sum[k]) * (gamma_a - gamma_b) +
                       (stats.occupancy[k] - stats.occupancy[k + 1]) * (theta_a - theta_b);
        Eigen::VectorXd logit_proposal;
        if (prior.kind == WeightPriorKind::Dirichlet) {
            delta += (prior.dirichlet_alpha[k] - prior.dirichlet_alpha[k + 1]) *
                     (std::log(state.weights[k + 1]) - std::log(state.weights[k]));
        } else {
            // Re-express the swapped weights in logit coordinates with the
            // first entry pinned back to zero (a shift, Jacobian one).
            logit_proposal = state.logit_weights;
            if (k == 0) {
                const double pivot = state.logit_weights[1];
                logit_proposal.array() -= pivot;
                logit_proposal[0] = 0.0;
                logit_proposal[1] = -pivot;
            } else {
                std::swap(logit_proposal[k], logit_proposal[k + 1]);
            }
            const double inv_two_var = 0.5 / (prior.logit_sd * prior.logit_sd);
            for (int c = 1; c < k_total; ++c) {
                delta -= (logit_proposal[c] * logit_proposal[c] -
                          state.logit_weights[c] * state.logit_weights[c]) *
                         inv_two_var;
            }
        }
        if (std::log(rng.uniform()) < delta) {
            state.cluster_means.row(k).swap(state.cluster_means.row(k + 1));
            std::swap(state.weights[k], state.weights[k + 1]);
            if (prior.kind == WeightPriorKind::MultinomialLogit) {
                state.logit_weights = logit_proposal;
            }
            for (int& z : state.assignments) {
                if (z == k) {
                    z = k + 1;
                } else if (z == k + 1) {
                    z = k;
                }
            }
            std::swap(stats.count_sum[k], stats.count_sum[k + 1]);
            std::swap(stats.occupancy[k], stats.occupancy[k + 1]);
        }
    }
}

ChainState initial_state(const ModelSpec& spec, const Dataset& data) {
    const int k_total = spec.k;
    const int n = static_cast<int>(data.n_subjects());
    const int p = static_cast<int>(data.n_variables());

    // Quantile bins over the counts; ties broken by subject index so the
    // start is deterministic.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return data.counts[a] != data.counts[b] ? data.counts[a] < data.counts[b] : a < b;
    });

    ChainState state;
    state.assignments.assign(n, 0);
    for (int pos = 0; pos < n; ++pos) {
        const int bin = std::min(static_cast<int>((static_cast<long long>(pos) * k_total) / n),
                                 k_total - 1);
        state.assignments[order[pos]] = bin;
    }

    Eigen::VectorXi occupancy = Eigen::VectorXi::Zero(k_total);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k_total, p);
    Eigen::VectorXd count_sum = Eigen::VectorXd::Zero(k_total);
    for (int i = 0; i < n; ++i) {
        const int k = state.assignments[i];
        occupancy[k] += 1;
        sums.row(k) += data.covariates.row(i);
        count_sum[k] += static_cast<double>(data.counts[i]);
    }

    const Eigen::RowVectorXd column_means = data.covariates.colwise().mean();
    state.cluster_means.resize(k_total, p);
    for (int k = 0; k < k_total; ++k) {
        state.cluster_means.row(k) =
            occupancy[k] > 0 ? (sums.row(k) / occupancy[k]).eval() : column_means;
    }
    state.common_means = column_means.transpose();

    state.variances.resize(p);
    for (int j = 0; j < p; ++j) {
        const double centered =
            (data.covariates.col(j).array() - column_means[j]).square().sum();
        state.variances[j] = std::max(n > 1 ? centered / (n - 1) : 0.0, 1e-6);
    }
    state.shrinkage = Eigen::VectorXd::Ones(p);

    const double overall_count_mean =
        data.counts.cast<double>().mean();
    Eigen::VectorXd gamma(k_total);
    for (int k = 0; k < k_total; ++k) {
        const double bin_mean =
            occupancy[k] > 0 ? count_sum[k] / occupancy[k] : overall_count_mean;
        gamma[k] = std::log(std::max(bin_mean, 0.1));
    }
    for (int k = 1; k < k_total; ++k) {
        gamma[k] = std::max(gamma[k], gamma[k - 1]);
    }
    state.increments.resize(std::max(k_total - 1, 0));
    for (int k = 0; k + 1 < k_total; ++k) {
        // The log-walk cannot leave an exactly-zero increment, so floor it.
        state.increments[k] = std::max(gamma[k + 1] - gamma[k], 1e-3);
    }
    state.intercepts.resize(k_total);
    state.rebuild_intercepts(gamma[0]);

    state.weights.resize(k_total);
    for (int k = 0; k < k_total; ++k) {
        state.weights[k] = (occupancy[k] + 0.5) / (n + 0.5 * k_total);
    }
    state.weights /= state.weights.sum();

    if (spec.weight_prior.kind == WeightPriorKind::MultinomialLogit) {
        state.logit_weights.resize(k_total);
        for (int k = 0; k < k_total; ++k) {
            state.logit_weights[k] = std::log(state.weights[k]) - std::log(state.weights[0]);
        }
    }
    return state;
}

PosteriorSamples run_chain(const ModelSpec& spec, const Dataset& data,
                           const McmcSchedule& schedule) {
    spec.validate();
    schedule.validate();
    data.validate();

    RngStream rng(schedule.seed);
    ChainState state = initial_state(spec, data);

    StepAdapter lambda_step(schedule.mh_step_lambda, schedule.adapt_during_burnin);
    StepAdapter gamma_step(schedule.mh_step_gamma, schedule.adapt_during_burnin);
    StepAdapter logit_step(0.5, schedule.adapt_during_burnin);
    MhCounter lambda_counter, gamma_counter, logit_counter;

    PosteriorSamples out;
    const int n_retained = (schedule.n_iter + schedule.thin - 1) / schedule.thin;
    out.states.reserve(n_retained);
    out.observed_loglik.reserve(n_retained);

    const int total = schedule.burn_in + schedule.n_iter;
    for (int iter = 0; iter < total; ++iter) {
        if (iter == schedule.burn_in) {
            lambda_step.freeze();
            gamma_step.freeze();
            logit_step.freeze();
            lambda_counter.reset();
            gamma_counter.reset();
            logit_counter.reset();
        }
        update_assignments(state, data, rng);
        update_weights(state, spec.weight_prior, rng, &logit_step, &logit_counter);
        update_cluster_means(state, data, rng);
        update_common_means(state, rng);
        update_variances(state, data, spec.hyper, rng);
        update_shrinkage(state, spec.hyper, lambda_step, lambda_counter, rng);
        update_intercepts(state, data, spec.hyper, gamma_step, gamma_counter, rng);
        update_label_swaps(state, data, spec.weight_prior, rng);

        const int post = iter - schedule.burn_in;
        if (post >= 0 && post % schedule.thin == 0) {
            const double loglik = observed_loglik(state, data);
            if (!std::isfinite(loglik)) {
                throw NumericalError("non-finite log-likelihood at iteration " +
                                     std::to_string(iter + 1));
            }
            state.validate(&data);
            out.states.push_back(state);
            out.observed_loglik.push_back(loglik);
        }
    }

    out.meta.seed = schedule.seed;
    out.meta.burn_in = schedule.burn_in;
    out.meta.n_iter = schedule.n_iter;
    out.meta.thin = schedule.thin;
    out.meta.acceptance.shrinkage = lambda_counter.rate();
    out.meta.acceptance.intercepts = gamma_counter.rate();
    out.meta.acceptance.logit_weights =
        spec.weight_prior.kind == WeightPriorKind::MultinomialLogit ? logit_counter.rate() : -1.0;
    out.meta.adapted_step_lambda = lambda_step.step();
    out.meta.adapted_step_gamma = gamma_step.step();
    out.meta.standardization = data.standardization;
    return out;
}

}  // namespace profmix
