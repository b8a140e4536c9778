// Acceptance runner: exercises every release criterion end to end and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
//
// Long-running sections (the repeated-seed benchmark fits) print progress as
// they go; the verdict block at the end is the authoritative output.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "profmix/commands.hpp"
#include "profmix/datagen.hpp"
#include "profmix/inference.hpp"
#include "profmix/io.hpp"
#include "profmix/rng.hpp"
#include "profmix/sampler.hpp"
#include "profmix/types.hpp"

#include "geweke_harness.hpp"
#include "support.hpp"

using namespace profmix;
using testsupport::TempDir;
using testsupport::iid_se;
using testsupport::mean_of;
using testsupport::read_text;
using testsupport::var_of;
using testsupport::var_se;
using testsupport::write_text;

namespace {

struct CriterionResult {
    bool pass = false;
    std::string detail;
};

// Criterion 5 is a property of every retained sample produced anywhere in
// this run, so each fit feeds its samples through this tally.
struct InvariantTally {
    long long states = 0;
    long long ordering_violations = 0;
    long long simplex_violations = 0;

    void scan(const PosteriorSamples& samples) {
        for (const ChainState& state : samples.states) {
            states += 1;
            for (int k = 0; k + 1 < state.n_clusters(); ++k) {
                if (state.intercepts[k] > state.intercepts[k + 1]) {
                    ordering_violations += 1;
                    break;
                }
            }
            if (std::abs(state.weights.sum() - 1.0) >= 1e-12) {
                simplex_violations += 1;
            }
        }
    }
};

// Hyperparameters and weight prior matching the CLI defaults.
ModelSpec default_spec(int k) {
    ModelSpec spec;
    spec.k = k;
    spec.hyper.alpha = Eigen::VectorXd::Ones(k);
    spec.weight_prior = WeightPrior::dirichlet(Eigen::VectorXd::Ones(k));
    spec.validate();
    return spec;
}

McmcSchedule ci_schedule(std::uint64_t seed) {
    McmcSchedule schedule;
    schedule.burn_in = 2000;
    schedule.n_iter = 20000;
    schedule.thin = 10;
    schedule.seed = seed;
    return schedule;
}

Eigen::VectorXd posterior_mean_weights(const PosteriorSamples& samples) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(samples.states.front().n_clusters());
    for (const ChainState& state : samples.states) {
        sum += state.weights;
    }
    return sum / samples.n_states();
}

Eigen::VectorXd posterior_mean_theta(const PosteriorSamples& samples) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(samples.states.front().n_clusters());
    for (const ChainState& state : samples.states) {
        for (int k = 0; k < state.n_clusters(); ++k) {
            sum[k] += state.theta(k);
        }
    }
    return sum / samples.n_states();
}

std::string fmt(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4g", value);
    return buffer;
}

// --- criterion 1: benchmark recovery --------------------------------------

CriterionResult criterion_benchmark_recovery(InvariantTally& tally) {
    const GenerativeTruth truth = benchmark_truth();
    const Dataset data = generate(truth).data;
    const ModelSpec spec = default_spec(truth.k);

    int passes = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const PosteriorSamples samples = run_chain(spec, data, ci_schedule(seed));
        tally.scan(samples);
        const Eigen::VectorXd pi_hat = posterior_mean_weights(samples);
        const Eigen::VectorXd theta_hat = posterior_mean_theta(samples);
        double worst_pi = 0.0;
        double worst_theta = 0.0;
        for (int k = 0; k < truth.k; ++k) {
            worst_pi = std::max(worst_pi, std::abs(pi_hat[k] - truth.weights[k]));
            worst_theta = std::max(
                worst_theta, std::abs(theta_hat[k] - truth.theta[k]) / truth.theta[k]);
        }
        const bool ok = worst_pi <= 0.05 && worst_theta <= 0.15;
        passes += ok ? 1 : 0;
        std::cout << "  [1] seed " << seed << ": max |pi error| " << fmt(worst_pi)
                  << ", max relative theta error " << fmt(worst_theta)
                  << (ok ? "" : "  <-- outside tolerance") << "\n"
                  << std::flush;
    }
    CriterionResult result;
    result.pass = passes >= 9;
    result.detail = "weights within 0.05 and rates within 15% in " + std::to_string(passes) +
                    "/10 seeds (need 9)";
    return result;
}

// --- criterion 2: model selection -----------------------------------------

CriterionResult criterion_model_selection() {
    const GenerativeTruth truth = benchmark_truth();
    const Dataset data = generate(truth).data;
    // Scalar alpha so the base spec adapts to each K, as the CLI does.
    ModelSpec base;
    base.k = 3;
    base.hyper.alpha = Eigen::VectorXd::Ones(1);
    base.weight_prior = WeightPrior::dirichlet(Eigen::VectorXd::Ones(1));

    int chose_three = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SelectionResult selection = select_k(data, base, 2, 4, ci_schedule(seed));
        chose_three += selection.chosen_k == 3 ? 1 : 0;
        std::cout << "  [2] seed " << seed << ": chose K=" << selection.chosen_k << "\n"
                  << std::flush;
    }
    CriterionResult result;
    result.pass = chose_three >= 9;
    result.detail =
        "BIC chose K=3 in " + std::to_string(chose_three) + "/10 seeds (need 9)";
    return result;
}

// --- criterion 3: conjugate kernels ---------------------------------------

Dataset conjugate_data() {
    Dataset d;
    d.covariates.resize(4, 2);
    d.covariates << 0.5, -0.2, 1.1, 0.7, -0.3, 0.4, 2.0, -1.5;
    d.counts.resize(4);
    d.counts << 1, 3, 0, 2;
    d.variable_names = {"v1", "v2"};
    return d;
}

ChainState conjugate_state() {
    ChainState st;
    st.weights.resize(2);
    st.weights << 0.45, 0.55;
    st.cluster_means.resize(2, 2);
    st.cluster_means << 0.2, -0.1, 1.3, 0.6;
    st.common_means.resize(2);
    st.common_means << 0.5, 0.1;
    st.shrinkage.resize(2);
    st.shrinkage << 0.8, 1.6;
    st.variances.resize(2);
    st.variances << 0.9, 1.2;
    st.intercepts.resize(2);
    st.intercepts << std::log(0.9), std::log(2.2);
    st.increments.resize(1);
    st.increments << std::log(2.2) - std::log(0.9);
    st.assignments = {0, 1, 0, 1};
    return st;
}

CriterionResult criterion_conjugate_kernels() {
    const Dataset data = conjugate_data();
    const ChainState fixture = conjugate_state();
    Hyperparameters hyper;
    hyper.c = 1.1;
    hyper.d = 0.9;
    hyper.r = 1.5;
    hyper.s = 0.7;
    hyper.sigma0_sq = 4.0;
    hyper.alpha.resize(2);
    hyper.alpha << 1.5, 2.0;
    const WeightPrior prior = WeightPrior::dirichlet(hyper.alpha);

    bool formulas_ok = true;
    double worst_formula = 0.0;
    auto check = [&](double got, double want) {
        const double err = std::abs(got - want);
        worst_formula = std::max(worst_formula, err);
        if (err > 1e-10) {
            formulas_ok = false;
        }
    };

    // Cluster 0 holds subjects {0, 2}, cluster 1 holds {1, 3}.
    {
        const NormalParams p00 = cluster_mean_conditional(fixture, data, 0, 0);
        const double sum = 0.5 + -0.3;
        check(p00.mean, (0.8 * sum + 0.5) / (2.0 * 0.8 + 1.0));
        check(p00.variance, 0.9 * 0.8 / (2.0 * 0.8 + 1.0));

        const NormalParams p11 = cluster_mean_conditional(fixture, data, 1, 1);
        const double sum11 = 0.7 + -1.5;
        check(p11.mean, (1.6 * sum11 + 0.1) / (2.0 * 1.6 + 1.0));
        check(p11.variance, 1.2 * 1.6 / (2.0 * 1.6 + 1.0));
    }
    {
        const NormalParams p0 = common_mean_conditional(fixture, 0);
        check(p0.mean, (0.2 + 1.3) / 2.0);
        check(p0.variance, 0.9 * 0.8 / 2.0);
    }
    {
        const InvGammaParams v0 = variance_conditional(fixture, data, hyper, 0);
        const double resid = 0.3 * 0.3 + 0.2 * 0.2 + 0.5 * 0.5 + 0.7 * 0.7;
        const double spread = (0.3 * 0.3 + 0.8 * 0.8) / 0.8;
        check(v0.shape, 1.5 + (4.0 + 2.0) / 2.0);
        check(v0.scale, 0.7 + (resid + spread) / 2.0);
    }
    {
        Eigen::VectorXi counts(2);
        counts << 2, 2;
        const Eigen::VectorXd post = dirichlet_posterior_alpha(prior, counts);
        check(post[0], 3.5);
        check(post[1], 4.0);
    }
    // Assignment conditional of subject 0 against a literal softmax.
    Eigen::VectorXd assign_probs;
    {
        Eigen::VectorXd log_terms(2);
        for (int k = 0; k < 2; ++k) {
            double ll = std::log(fixture.weights[k]);
            for (int j = 0; j < 2; ++j) {
                const double var = fixture.variances[j];
                const double dx = data.covariates(0, j) - fixture.cluster_means(k, j);
                ll += -0.5 * std::log(2.0 * std::numbers::pi * var) - dx * dx / (2.0 * var);
            }
            const double theta = fixture.theta(k);
            ll += data.counts[0] * std::log(theta) - theta - std::lgamma(data.counts[0] + 1.0);
            log_terms[k] = ll;
        }
        const Eigen::VectorXd e = (log_terms.array() - log_terms.maxCoeff()).exp();
        const Eigen::VectorXd want = e / e.sum();
        assign_probs = assignment_conditional(fixture, data, 0);
        check(assign_probs[0], want[0]);
        check(assign_probs[1], want[1]);
    }

    // Monte-Carlo moments: each kernel redrawn from the same conditional,
    // which depends only on blocks the kernel does not touch.
    const int n_draws = 200000;
    bool moments_ok = true;
    double worst_sigma = 0.0;
    auto check_moments = [&](std::vector<double>& draws, double want_mean, double want_var) {
        const double mean_gap = std::abs(mean_of(draws) - want_mean);
        const double mean_band = 3.0 * std::sqrt(want_var / n_draws);
        const double var_gap = std::abs(var_of(draws) - want_var);
        const double var_band = 3.0 * var_se(draws);
        worst_sigma = std::max(worst_sigma, 3.0 * mean_gap / mean_band);
        worst_sigma = std::max(worst_sigma, 3.0 * var_gap / var_band);
        if (mean_gap >= mean_band || var_gap >= var_band) {
            moments_ok = false;
        }
    };

    std::vector<double> draws(static_cast<std::size_t>(n_draws));
    {
        RngStream rng(501);
        ChainState st = fixture;
        const NormalParams p00 = cluster_mean_conditional(fixture, data, 0, 0);
        for (auto& x : draws) {
            update_cluster_means(st, data, rng);
            x = st.cluster_means(0, 0);
        }
        check_moments(draws, p00.mean, p00.variance);
    }
    {
        RngStream rng(502);
        ChainState st = fixture;
        const NormalParams p0 = common_mean_conditional(fixture, 0);
        for (auto& x : draws) {
            update_common_means(st, rng);
            x = st.common_means[0];
        }
        check_moments(draws, p0.mean, p0.variance);
    }
    {
        RngStream rng(503);
        ChainState st = fixture;
        const InvGammaParams v0 = variance_conditional(fixture, data, hyper, 0);
        const double ig_mean = v0.scale / (v0.shape - 1.0);
        const double ig_var =
            v0.scale * v0.scale / ((v0.shape - 1.0) * (v0.shape - 1.0) * (v0.shape - 2.0));
        for (auto& x : draws) {
            update_variances(st, data, hyper, rng);
            x = st.variances[0];
        }
        check_moments(draws, ig_mean, ig_var);
    }
    {
        RngStream rng(504);
        ChainState st = fixture;
        // pi_1 marginal is Beta(3.5, 4) under the conjugate posterior.
        const double a = 3.5, b = 4.0;
        const double beta_mean = a / (a + b);
        const double beta_var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
        for (auto& x : draws) {
            update_weights(st, prior, rng);
            x = st.weights[0];
        }
        check_moments(draws, beta_mean, beta_var);
    }
    bool assign_ok = true;
    {
        RngStream rng(505);
        ChainState st = fixture;
        long hits = 0;
        for (int t = 0; t < n_draws; ++t) {
            update_assignments(st, data, rng);
            hits += st.assignments[0] == 0 ? 1 : 0;
        }
        const double p = assign_probs[0];
        const double freq = static_cast<double>(hits) / n_draws;
        const double band = 3.0 * std::sqrt(p * (1.0 - p) / n_draws);
        assign_ok = std::abs(freq - p) < band;
    }

    CriterionResult result;
    result.pass = formulas_ok && moments_ok && assign_ok;
    result.detail = "conditional parameters off by at most " + fmt(worst_formula) +
                    " (limit 1e-10); Monte-Carlo moments within 3 SE over " +
                    std::to_string(n_draws) + " draws" +
                    (result.pass ? "" : " -- VIOLATED");
    return result;
}

// --- criterion 4: Metropolis kernels --------------------------------------

bool shrinkage_prior_recovery(std::string& note) {
    // K=1 with the cluster mean pinned to the common mean leaves a pure
    // Gamma(c - 1/2, d) target; boost c so the draw targets Gamma(2.5, 1.5).
    ChainState st;
    st.weights = Eigen::VectorXd::Ones(1);
    st.cluster_means = Eigen::MatrixXd::Constant(1, 1, 0.7);
    st.common_means = Eigen::VectorXd::Constant(1, 0.7);
    st.shrinkage = Eigen::VectorXd::Ones(1);
    st.variances = Eigen::VectorXd::Ones(1);
    st.intercepts = Eigen::VectorXd::Zero(1);
    st.increments.resize(0);

    Hyperparameters hyper;
    hyper.c = 3.0;
    hyper.d = 1.5;
    const double shape = 2.5, rate = 1.5;

    RngStream rng(511);
    StepAdapter step(1.0, true);
    MhCounter counter;
    for (int t = 0; t < 5000; ++t) update_shrinkage(st, hyper, step, counter, rng);
    step.freeze();

    const int n = 1000000;
    std::vector<double> draws(static_cast<std::size_t>(n));
    for (auto& x : draws) {
        update_shrinkage(st, hyper, step, counter, rng);
        x = st.shrinkage[0];
    }
    const double mean_err = std::abs(mean_of(draws) / (shape / rate) - 1.0);
    const double var_err = std::abs(var_of(draws) / (shape / (rate * rate)) - 1.0);
    note += "shrinkage prior moments off " + fmt(mean_err) + "/" + fmt(var_err) + "; ";
    return mean_err < 0.02 && var_err < 0.02;
}

bool intercept_prior_recovery(std::string& note) {
    Dataset data;
    data.covariates.resize(0, 1);
    data.counts.resize(0);
    data.variable_names = {"v1"};

    ChainState st;
    st.weights = Eigen::VectorXd::Constant(2, 0.5);
    st.cluster_means = Eigen::MatrixXd::Zero(2, 1);
    st.common_means = Eigen::VectorXd::Zero(1);
    st.shrinkage = Eigen::VectorXd::Ones(1);
    st.variances = Eigen::VectorXd::Ones(1);
    st.increments = Eigen::VectorXd::Constant(1, 0.5);
    st.intercepts.resize(2);
    st.rebuild_intercepts(0.0);

    Hyperparameters hyper;
    hyper.sigma0_sq = 2.25;
    const double sigma0 = 1.5;

    RngStream rng(512);
    StepAdapter step(1.0, true);
    MhCounter counter;
    for (int t = 0; t < 5000; ++t) update_intercepts(st, data, hyper, step, counter, rng);
    step.freeze();

    const int n = 1000000;
    std::vector<double> gamma1(static_cast<std::size_t>(n)), eta(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        update_intercepts(st, data, hyper, step, counter, rng);
        gamma1[static_cast<std::size_t>(t)] = st.intercepts[0];
        eta[static_cast<std::size_t>(t)] = st.increments[0];
    }
    const double hn_mean = sigma0 * std::sqrt(2.0 / std::numbers::pi);
    const double hn_var = sigma0 * sigma0 * (1.0 - 2.0 / std::numbers::pi);
    const double g_mean_err = std::abs(mean_of(gamma1)) / sigma0;
    const double g_var_err = std::abs(var_of(gamma1) / (sigma0 * sigma0) - 1.0);
    const double e_mean_err = std::abs(mean_of(eta) / hn_mean - 1.0);
    const double e_var_err = std::abs(var_of(eta) / hn_var - 1.0);
    note += "intercept prior moments off " + fmt(g_mean_err) + "/" + fmt(g_var_err) + "/" +
            fmt(e_mean_err) + "/" + fmt(e_var_err) + "; ";
    return g_mean_err < 0.02 && g_var_err < 0.02 && e_mean_err < 0.02 && e_var_err < 0.02;
}

bool shrinkage_quadrature_oracle(std::string& note) {
    ChainState st;
    st.weights = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    st.cluster_means.resize(3, 1);
    const double a = std::sqrt(0.8);
    st.cluster_means << a, -a, 0.0;
    st.common_means = Eigen::VectorXd::Zero(1);
    st.shrinkage = Eigen::VectorXd::Ones(1);
    st.variances = Eigen::VectorXd::Ones(1);
    st.intercepts = Eigen::VectorXd::Zero(3);
    st.increments = Eigen::VectorXd::Zero(2);

    Hyperparameters hyper;
    hyper.c = 2.5;
    hyper.d = 1.5;
    const double quad = shrinkage_quadratic(st, 0);

    double w_sum = 0.0, lam_sum = 0.0;
    const int grid = 52001;
    const double u_lo = -16.0, u_hi = 10.0;
    const double h = (u_hi - u_lo) / (grid - 1);
    for (int i = 0; i < grid; ++i) {
        const double u = u_lo + i * h;
        const double w = std::exp(shrinkage_log_target(std::exp(u), quad, hyper, 3) + u);
        w_sum += w;
        lam_sum += w * std::exp(u);
    }
    const double quad_mean = lam_sum / w_sum;

    RngStream rng(513);
    StepAdapter step(1.0, true);
    MhCounter counter;
    for (int t = 0; t < 5000; ++t) update_shrinkage(st, hyper, step, counter, rng);
    step.freeze();
    const int n = 1000000;
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (auto& x : lam) {
        update_shrinkage(st, hyper, step, counter, rng);
        x = st.shrinkage[0];
    }
    const double err = std::abs(mean_of(lam) / quad_mean - 1.0);
    note += "shrinkage vs quadrature off " + fmt(err) + "; ";
    return err < 0.02;
}

bool intercept_quadrature_oracle(std::string& note) {
    Dataset data;
    data.covariates = Eigen::MatrixXd::Zero(5, 1);
    data.counts.resize(5);
    data.counts << 5, 4, 5, 19, 20;
    data.variable_names = {"v1"};

    ChainState st;
    st.weights = Eigen::VectorXd::Constant(2, 0.5);
    st.cluster_means = Eigen::MatrixXd::Zero(2, 1);
    st.common_means = Eigen::VectorXd::Zero(1);
    st.shrinkage = Eigen::VectorXd::Ones(1);
    st.variances = Eigen::VectorXd::Ones(1);
    st.increments = Eigen::VectorXd::Constant(1, 0.5);
    st.intercepts.resize(2);
    st.rebuild_intercepts(0.0);
    st.assignments = {0, 0, 0, 1, 1};

    Hyperparameters hyper;
    hyper.sigma0_sq = 1.0;
    const ClusterCountStats stats = cluster_count_stats(st, data);

    double w_sum = 0.0, g_sum = 0.0, e_sum = 0.0;
    const int ng = 1801, ne = 1601;
    const double g_lo = -1.0, g_hi = 3.5;
    const double e_lo = 1e-8, e_hi = 4.0;
    const double hg = (g_hi - g_lo) / (ng - 1);
    const double he = (e_hi - e_lo) / (ne - 1);
    Eigen::VectorXd eta(1);
    for (int ig = 0; ig < ng; ++ig) {
        const double g = g_lo + ig * hg;
        for (int ie = 0; ie < ne; ++ie) {
            eta[0] = e_lo + ie * he;
            const double w = std::exp(intercept_log_target(g, eta, stats, hyper.sigma0_sq));
            w_sum += w;
            g_sum += w * g;
            e_sum += w * eta[0];
        }
    }
    const double quad_gamma = g_sum / w_sum;
    const double quad_eta = e_sum / w_sum;

    RngStream rng(514);
    StepAdapter step(0.5, true);
    MhCounter counter;
    for (int t = 0; t < 20000; ++t) update_intercepts(st, data, hyper, step, counter, rng);
    step.freeze();
    const int n = 1000000;
    std::vector<double> g_draws(static_cast<std::size_t>(n)), e_draws(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        update_intercepts(st, data, hyper, step, counter, rng);
        g_draws[static_cast<std::size_t>(t)] = st.intercepts[0];
        e_draws[static_cast<std::size_t>(t)] = st.increments[0];
    }
    const double g_err = std::abs(mean_of(g_draws) / quad_gamma - 1.0);
    const double e_err = std::abs(mean_of(e_draws) / quad_eta - 1.0);
    note += "intercepts vs quadrature off " + fmt(g_err) + "/" + fmt(e_err) + "; ";
    return g_err < 0.02 && e_err < 0.02;
}

bool geweke_comparison(WeightPriorKind kind, std::uint64_t seed, std::string& note) {
    const geweke::Result result = geweke::run_comparison(kind, seed);
    double worst = 0.0;
    int worst_index = 0;
    for (int i = 0; i < geweke::kFunctions; ++i) {
        const geweke::FunctionStats& fs = result.functions[static_cast<std::size_t>(i)];
        const double sigmas = fs.gap() / (fs.se() + 1e-300);
        if (sigmas > worst) {
            worst = sigmas;
            worst_index = i;
        }
    }
    note += std::string("geweke worst |gap|/SE ") + fmt(worst) + " (" +
            geweke::function_name(worst_index) + "); ";
    return worst < 3.0;
}

CriterionResult criterion_metropolis_kernels() {
    std::string note;
    bool ok = true;
    ok = shrinkage_prior_recovery(note) && ok;
    ok = intercept_prior_recovery(note) && ok;
    ok = shrinkage_quadrature_oracle(note) && ok;
    ok = intercept_quadrature_oracle(note) && ok;
    ok = geweke_comparison(WeightPriorKind::Dirichlet, 521, note) && ok;
    ok = geweke_comparison(WeightPriorKind::MultinomialLogit, 531, note) && ok;
    CriterionResult result;
    result.pass = ok;
    if (!note.empty() && note.size() >= 2) {
        note.erase(note.size() - 2);
    }
    result.detail = note;
    return result;
}

// --- criterion 6: membership oracle equivalence ---------------------------

CriterionResult criterion_membership_oracle() {
    const GenerativeTruth truth = benchmark_truth();
    const int p = truth.n_variables();

    ChainState st;
    st.weights = truth.weights;
    st.cluster_means = truth.means;
    st.common_means = Eigen::VectorXd::Zero(p);
    st.shrinkage = Eigen::VectorXd::Ones(p);
    st.variances = truth.variances;
    st.intercepts = truth.theta.array().log().matrix();
    st.increments.resize(truth.k - 1);
    for (int k = 0; k + 1 < truth.k; ++k) {
        st.increments[k] = st.intercepts[k + 1] - st.intercepts[k];
    }

    PosteriorSamples samples;
    samples.states.push_back(st);
    samples.observed_loglik.push_back(0.0);
    samples.meta.standardization.enabled = false;

    RngStream rng(541);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(p);
        for (int j = 0; j < p; ++j) {
            x[j] = rng.normal(2.0, 2.0);
        }
        const Eigen::VectorXd via_model = membership_posterior(samples, x).mean;
        const Eigen::VectorXd via_truth = exact_assignment_posterior(truth, x);
        worst = std::max(worst, (via_model - via_truth).cwiseAbs().maxCoeff());
    }

    CriterionResult result;
    result.pass = worst <= 1e-12;
    result.detail = "max |difference| " + fmt(worst) + " over 100 profiles (limit 1e-12)";
    return result;
}

// --- criterion 7: weight-prior sensitivity --------------------------------

CriterionResult criterion_prior_sensitivity(InvariantTally& tally) {
    const GenerativeTruth truth = benchmark_truth();
    const Dataset data = generate(truth).data;

    const ModelSpec dirichlet_spec = default_spec(truth.k);
    ModelSpec logit_spec = default_spec(truth.k);
    logit_spec.weight_prior = WeightPrior::multinomial_logit(1.0);

    const PosteriorSamples a = run_chain(dirichlet_spec, data, ci_schedule(1));
    const PosteriorSamples b = run_chain(logit_spec, data, ci_schedule(1));
    tally.scan(a);
    tally.scan(b);

    const Eigen::VectorXd pi_a = posterior_mean_weights(a);
    const Eigen::VectorXd pi_b = posterior_mean_weights(b);
    const double gap = (pi_a - pi_b).cwiseAbs().maxCoeff();

    CriterionResult result;
    result.pass = gap < 0.05;
    result.detail = "max |pi drift| between weight priors " + fmt(gap) + " (limit 0.05)";
    return result;
}

// --- criterion 8: relevance discrimination --------------------------------

CriterionResult criterion_relevance(InvariantTally& tally) {
    const GenerativeTruth truth = benchmark_truth_irrelevant();
    const Dataset data = generate(truth).data;
    const ModelSpec spec = default_spec(truth.k);

    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const PosteriorSamples samples = run_chain(spec, data, ci_schedule(seed));
        tally.scan(samples);
        const std::vector<RelevanceEntry> ranking = relevance_ranking(samples);
        const bool ok = ranking.front().variable == 0;
        hits += ok ? 1 : 0;
        std::cout << "  [8] seed " << seed << ": least relevant variable index "
                  << ranking.front().variable << " (median shrinkage "
                  << fmt(ranking.front().box.median) << ")" << (ok ? "" : "  <-- wrong") << "\n"
                  << std::flush;
    }
    CriterionResult result;
    result.pass = hits >= 9;
    result.detail = "flattened covariate ranked least relevant in " + std::to_string(hits) +
                    "/10 seeds (need 9)";
    return result;
}

// --- criterion 9: determinism ---------------------------------------------

bool directories_identical(const std::string& a, const std::string& b, std::string& note) {
    namespace fs = std::filesystem;
    std::vector<std::string> names_a, names_b;
    for (const auto& entry : fs::directory_iterator(a)) {
        names_a.push_back(entry.path().filename().string());
    }
    for (const auto& entry : fs::directory_iterator(b)) {
        names_b.push_back(entry.path().filename().string());
    }
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    if (names_a != names_b) {
        note += "file lists differ; ";
        return false;
    }
    for (const std::string& name : names_a) {
        if (read_text((fs::path(a) / name).string()) != read_text((fs::path(b) / name).string())) {
            note += name + " differs; ";
            return false;
        }
    }
    return true;
}

CriterionResult criterion_determinism() {
    TempDir dir("acceptance_determinism");
    std::string note;
    bool ok = true;

    const KeyValueList sim_base = {{"seed", "91"},
                                   {"truth_weights", "0.6,0.4"},
                                   {"truth_theta", "0.8,4.0"},
                                   {"truth_variances", "1.0,1.0"},
                                   {"truth_means", "0.0,0.0;2.5,2.0"},
                                   {"truth_n", "80"},
                                   {"truth_variable_names", "v1,v2"}};
    auto with_out = [](KeyValueList items, const std::string& out) {
        items.emplace_back("out", out);
        return items;
    };

    cmd_simulate(parse_config({}, with_out(sim_base, dir.file("sim_a"))));
    cmd_simulate(parse_config({}, with_out(sim_base, dir.file("sim_b"))));
    ok = directories_identical(dir.file("sim_a"), dir.file("sim_b"), note) && ok;

    const std::string data_path = dir.file("sim_a") + "/data.csv";
    const KeyValueList fit_base = {{"input", data_path}, {"seed", "17"},   {"k", "2"},
                                   {"burn_in", "200"},   {"n_iter", "600"}, {"thin", "3"}};
    cmd_fit(parse_config({}, with_out(fit_base, dir.file("fit_a"))));
    cmd_fit(parse_config({}, with_out(fit_base, dir.file("fit_b"))));
    ok = directories_identical(dir.file("fit_a"), dir.file("fit_b"), note) && ok;

    const KeyValueList select_base = {{"input", data_path}, {"seed", "29"},
                                      {"k_range", "2..3"},  {"burn_in", "200"},
                                      {"n_iter", "600"},    {"thin", "3"}};
    cmd_select(parse_config({}, with_out(select_base, dir.file("sel_a"))));
    cmd_select(parse_config({}, with_out(select_base, dir.file("sel_b"))));
    ok = directories_identical(dir.file("sel_a"), dir.file("sel_b"), note) && ok;

    write_text(dir.file("patients.csv"), "v1,v2\n0.1,0.2\n2.4,1.9\n");
    const KeyValueList predict_base = {{"model_dir", dir.file("fit_a")},
                                       {"input", dir.file("patients.csv")}};
    cmd_predict(parse_config({}, with_out(predict_base, dir.file("pred_a"))));
    cmd_predict(parse_config({}, with_out(predict_base, dir.file("pred_b"))));
    ok = directories_identical(dir.file("pred_a"), dir.file("pred_b"), note) && ok;

    const KeyValueList ppc_base = {{"model_dir", dir.file("fit_a")},
                                   {"seed", "23"},
                                   {"n_rep", "37"}};
    cmd_ppc(parse_config({}, with_out(ppc_base, dir.file("ppc_a"))));
    cmd_ppc(parse_config({}, with_out(ppc_base, dir.file("ppc_b"))));
    ok = directories_identical(dir.file("ppc_a"), dir.file("ppc_b"), note) && ok;

    CriterionResult result;
    result.pass = ok;
    result.detail = ok ? "simulate, fit, select, predict, and ppc reruns byte-identical"
                       : "byte differences: " + note;
    return result;
}

}  // namespace

int main() {
    std::cout << "acceptance: running 9 criteria (benchmark refits dominate the runtime)\n"
              << std::flush;

    InvariantTally tally;
    CriterionResult results[9];
    const char* labels[9] = {
        "benchmark recovery of mixture weights and cluster count rates",
        "BIC model selection picks K=3 on the three-cluster benchmark",
        "conjugate kernels match their analytic full conditionals",
        "Metropolis kernels pass prior-recovery, quadrature, and successive-conditional checks",
        "every retained sample keeps intercepts ordered and weights on the simplex",
        "membership prediction equals the exact assignment posterior on a frozen state",
        "posterior mean weights are stable across Dirichlet and logit weight priors",
        "the flattened covariate carries the smallest posterior-median shrinkage",
        "every command rerun with the same config and seed is byte-identical",
    };

    results[0] = criterion_benchmark_recovery(tally);
    results[1] = criterion_model_selection();
    results[2] = criterion_conjugate_kernels();
    results[3] = criterion_metropolis_kernels();
    results[5] = criterion_membership_oracle();
    results[6] = criterion_prior_sensitivity(tally);
    results[7] = criterion_relevance(tally);
    results[8] = criterion_determinism();

    results[4].pass = tally.states > 0 && tally.ordering_violations == 0 &&
                      tally.simplex_violations == 0;
    results[4].detail = std::to_string(tally.states) + " retained states scanned, " +
                        std::to_string(tally.ordering_violations) + " ordering and " +
                        std::to_string(tally.simplex_violations) + " simplex violations";

    std::cout << "\n==== acceptance results ====\n";
    bool all_pass = true;
    for (int i = 0; i < 9; ++i) {
        all_pass = all_pass && results[i].pass;
        std::cout << (results[i].pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": "
                  << labels[i] << " -- " << results[i].detail << "\n";
    }
    std::cout << (all_pass ? "acceptance: all 9 criteria passed\n"
                           : "acceptance: at least one criterion FAILED\n");
    return all_pass ? 0 : 1;
}
