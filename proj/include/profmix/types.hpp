// Core domain types for the profile-regression mixture model: the dataset,
// the prior hyperparameters, one full MCMC parameter configuration, and the
// retained posterior sample container.
#ifndef PROFMIX_TYPES_HPP
#define PROFMIX_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace profmix {

// Thrown for malformed inputs (files, configs, dimension mismatches). CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when sampling or post-processing produces non-finite results. CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Optional covariate centering/scaling applied at load time. Profiles are
// reported back on the original scale by inverting this transform.
struct Standardization {
    bool enabled = false;
    Eigen::VectorXd mean;  // per-variable sample mean
    Eigen::VectorXd sd;    // per-variable sample SD
};

struct Dataset {
    Eigen::MatrixXd covariates;               // n x P
    Eigen::VectorXi counts;                   // length n, nonnegative
    std::vector<std::string> variable_names;  // length P
    Standardization standardization;

    Eigen::Index n_subjects() const { return covariates.rows(); }
    Eigen::Index n_variables() const { return covariates.cols(); }

    // Enforced at load time; test fixtures may build degenerate instances directly.
    void validate() const;
};

struct Hyperparameters {
    double c = 0.5;          // Gamma shape for shrinkage
    double d = 0.5;          // Gamma rate for shrinkage
    double r = 0.1;          // Inverse-Gamma shape for variances
    double s = 0.1;          // Inverse-Gamma scale for variances
    double sigma0_sq = 10.0; // variance of the first intercept and of the increments
    Eigen::VectorXd alpha;   // Dirichlet concentration, length K

    void validate(int k) const;
};

enum class WeightPriorKind { Dirichlet, MultinomialLogit };

struct WeightPrior {
    WeightPriorKind kind = WeightPriorKind::Dirichlet;
    Eigen::VectorXd dirichlet_alpha;  // used iff Dirichlet
    double logit_sd = 1.0;            // used iff MultinomialLogit

    static WeightPrior dirichlet(Eigen::VectorXd alpha);
    static WeightPrior multinomial_logit(double sd);
    void validate(int k) const;
};

// One full parameter configuration of the chain. Cluster indices are 0-based
// in memory; all serialized output is 1-based.
struct ChainState {
    Eigen::VectorXd weights;        // pi, simplex of length K
    Eigen::MatrixXd cluster_means;  // mu_{kj}, K x P
    Eigen::VectorXd common_means;   // mu_j, length P
    Eigen::VectorXd shrinkage;      // lambda_j > 0, length P
    Eigen::VectorXd variances;      // sigma_j^2 > 0, length P
    Eigen::VectorXd intercepts;     // gamma_k, nondecreasing, length K
    Eigen::VectorXd increments;     // eta_k >= 0, length K-1
    std::vector<int> assignments;   // z_i in [0, K), length n
    // Logit weight parameters, only active under the multinomial-logit prior.
    // First entry pinned to 0 for identifiability.
    Eigen::VectorXd logit_weights;

    int n_clusters() const { return static_cast<int>(weights.size()); }
    int n_variables() const { return static_cast<int>(common_means.size()); }

    // Poisson mean of cluster k; theta is stored only through gamma.
    double theta(int k) const { return std::exp(intercepts[k]); }

    // Rebuild gamma from (gamma_1, eta); ordering holds by construction.
    void rebuild_intercepts(double gamma1);

    // Cluster occupancy counts from the current assignments.
    Eigen::VectorXi cluster_counts() const;

    void validate(const Dataset* data = nullptr) const;
};

struct McmcSchedule {
    int burn_in = 10000;    // iterations discarded
    int n_iter = 100000;    // post-burn-in iterations sampled from
    int thin = 10;
    std::uint64_t seed = 0;
    double mh_step_lambda = 0.5;
    double mh_step_gamma = 0.5;
    bool adapt_during_burnin = true;

    void validate() const;
};

struct ModelSpec {
    int k = 3;
    Hyperparameters hyper;
    WeightPrior weight_prior;

    void validate() const;
};

// Post-burn-in acceptance rates per Metropolis block.
struct MhBlockRates {
    double shrinkage = 0.0;
    double intercepts = 0.0;
    double logit_weights = -1.0;  // -1 when the Dirichlet prior is active
};

struct SampleMeta {
    std::uint64_t seed = 0;
    int burn_in = 0;
    int n_iter = 0;
    int thin = 0;
    MhBlockRates acceptance;
    double adapted_step_lambda = 0.0;
    double adapted_step_gamma = 0.0;
    Standardization standardization;  // copied from the dataset at run time
};

struct PosteriorSamples {
    std::vector<ChainState> states;       // retained, post-burn-in, thinned
    std::vector<double> observed_loglik;  // one entry per retained state
    SampleMeta meta;

    int n_states() const { return static_cast<int>(states.size()); }
    void validate() const;
};

}  // namespace profmix

#endif
