// Metropolis-within-Gibbs kernels for every parameter block, plus a seeded
// deterministic chain runner. Conjugate blocks expose their full-conditional
// parameters separately from the draw so tests can check the algebra and the
// sampling independently.
#ifndef PROFMIX_SAMPLER_HPP
#define PROFMIX_SAMPLER_HPP

#include <Eigen/Dense>

#include "profmix/rng.hpp"
#include "profmix/types.hpp"

namespace profmix {

struct NormalParams {
    double mean;
    double variance;
};

struct InvGammaParams {
    double shape;
    double scale;
};

// mu_{kj} | rest ~ N((lambda_j * sum_{i in k} x_ij + mu_j) / (n_k lambda_j + 1),
//                    sigma_j^2 lambda_j / (n_k lambda_j + 1));
// with n_k = 0 this is exactly the prior N(mu_j, sigma_j^2 lambda_j).
NormalParams cluster_mean_conditional(const ChainState& state, const Dataset& data, int k, int j);

// mu_j | rest ~ N(mean(mu_.j), sigma_j^2 lambda_j / K) under the flat prior.
NormalParams common_mean_conditional(const ChainState& state, int j);

// sigma_j^2 | rest ~ IG(r + (n+K)/2, s + [sum_i (x_ij - mu_{z_i j})^2
//                                         + sum_k (mu_{kj} - mu_j)^2 / lambda_j] / 2).
InvGammaParams variance_conditional(const ChainState& state, const Dataset& data,
                                    const Hyperparameters& hyper, int j);

// Dirichlet posterior concentration alpha + n under the conjugate weight prior.
Eigen::VectorXd dirichlet_posterior_alpha(const WeightPrior& prior, const Eigen::VectorXi& counts);

// Exact normalized categorical full conditional of z_i.
Eigen::VectorXd assignment_conditional(const ChainState& state, const Dataset& data, int subject);

// A_j = sum_k (mu_{kj} - mu_j)^2 / (2 sigma_j^2); the lambda_j conditional is
// proportional to lambda^{c-1-K/2} exp(-d lambda - A_j / lambda).
double shrinkage_quadratic(const ChainState& state, int j);
double shrinkage_log_target(double lambda, double quadratic, const Hyperparameters& hyper,
                            int n_clusters);

// Per-cluster Poisson sufficient statistics (occupancy and count sums).
struct ClusterCountStats {
    Eigen::VectorXi occupancy;
    Eigen::VectorXd count_sum;
};
ClusterCountStats cluster_count_stats(const ChainState& state, const Dataset& data);

// Joint log target of (gamma_1, eta) given assignments: the N(0, sigma0^2)
// prior on gamma_1, truncated-normal priors on the increments, and the
// Poisson likelihood of every cluster. Constant terms are dropped.
double intercept_log_target(double gamma1, const Eigen::VectorXd& increments,
                            const ClusterCountStats& stats, double sigma0_sq);

// Random-walk step size on the log scale with optional Robbins-Monro style
// adaptation toward 0.44 acceptance. Adaptation happens in batches and must
// be frozen after burn-in to preserve detailed balance.
class StepAdapter {
public:
    StepAdapter(double initial_step, bool adapt);

    double step() const { return std::exp(log_step_); }
    void record(bool accepted);
    void freeze() { adapting_ = false; }
    bool adapting() const { return adapting_; }

private:
    double log_step_;
    bool adapting_;
    int batch_accepts_ = 0;
    int batch_count_ = 0;
    int batches_done_ = 0;
};

struct MhCounter {
    long long accepted = 0;
    long long attempted = 0;

    void record(bool accept) {
        attempted += 1;
        accepted += accept ? 1 : 0;
    }
    void reset() { accepted = attempted = 0; }
    double rate() const { return attempted == 0 ? 0.0 : double(accepted) / double(attempted); }
};

// --- kernels (in-place, all other fields untouched) ---

void update_assignments(ChainState& state, const Dataset& data, RngStream& rng);

// Dirichlet kind draws the conjugate posterior exactly; the multinomial-logit
// kind takes a random-walk sweep over the free logit parameters (the first is
// pinned to 0) and recomputes pi through the softmax.
void update_weights(ChainState& state, const WeightPrior& prior, RngStream& rng,
                    StepAdapter* logit_step = nullptr, MhCounter* logit_counter = nullptr);

void update_cluster_means(ChainState& state, const Dataset& data, RngStream& rng);

void update_common_means(ChainState& state, RngStream& rng);

void update_variances(ChainState& state, const Dataset& data, const Hyperparameters& hyper,
                      RngStream& rng);

// One Metropolis random-walk step per variable on ln(lambda_j), with the
// Jacobian correction for the log transform.
void update_shrinkage(ChainState& state, const Hyperparameters& hyper, StepAdapter& step,
                      MhCounter& counter, RngStream& rng);

// Metropolis steps on gamma_1 and on each ln(eta_k); gamma is rebuilt from
// (gamma_1, eta) afterwards so the ordering holds by construction.
void update_intercepts(ChainState& state, const Dataset& data, const Hyperparameters& hyper,
                       StepAdapter& step, MhCounter& counter, RngStream& rng);

// Metropolis swap of two adjacent clusters' contents (mean rows, weights,
// members) with the intercepts left in place. The exchange is essentially
// free when two intercepts have collapsed onto each other, which lets the
// chain escape content-permuted modes that a random walk cannot cross;
// against a well-separated mode it is almost surely rejected.
void update_label_swaps(ChainState& state, const Dataset& data, const WeightPrior& prior,
                        RngStream& rng);

// Deterministic warm start: subjects quantile-binned by count (ascending, so
// bin labels already follow the ordering convention), covariate means and
// count means per bin, pooled variances, unit shrinkage.
ChainState initial_state(const ModelSpec& spec, const Dataset& data);

PosteriorSamples run_chain(const ModelSpec& spec, const Dataset& data, const McmcSchedule& schedule);

}  // namespace profmix

#endif
