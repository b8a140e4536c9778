// Post-processing of retained posterior samples: information criteria and
// K selection, subgroup profile summaries, separation scores, variable
// relevance, membership prediction, and posterior predictive replication.
#ifndef PROFMIX_INFERENCE_HPP
#define PROFMIX_INFERENCE_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "profmix/rng.hpp"
#include "profmix/types.hpp"

namespace profmix {

// Empirical quantile with linear interpolation between order statistics
// (the common "type 7" definition). q in [0, 1].
double quantile(std::vector<double> values, double q);

struct SummaryStat {
    double mean = 0.0;
    double sd = 0.0;
    double lo = 0.0;  // 2.5% quantile
    double hi = 0.0;  // 97.5% quantile
};

// Mean, sample SD, and equal-tailed 95% interval of a set of draws.
SummaryStat summarize(const std::vector<double>& draws);

struct InformationCriteria {
    int k = 0;
    double deviance = 0.0;
    int nu_k = 0;
    double aic = 0.0;
    double bic = 0.0;
};

// K·P cluster means, 3P per-variable blocks, K intercept degrees of freedom
// via gamma_1 plus K-1 increments, K-1 free weights... spelled out so the
// K-to-K comparison is stable.
int free_parameter_count(int k, int p);

// Plug-in state with every parameter block averaged over the retained
// samples (weights renormalized); assignments are left empty.
ChainState posterior_mean_state(const PosteriorSamples& samples);

InformationCriteria compute_ic(const PosteriorSamples& samples, const Dataset& data, int k);

// The base spec's alpha vectors are adapted to each K: scalar entries are
// replicated, full-length vectors pass through.
ModelSpec spec_for_k(const ModelSpec& base, int k);

struct SelectionResult {
    int chosen_k = 0;
    std::vector<InformationCriteria> criteria;  // one row per K actually fit
};

// Argmin-BIC over the fitted rows; ties keep the earlier (smaller) K.
int choose_k(const std::vector<InformationCriteria>& criteria);

// Fits each K in [k_min, k_max] on its own substream, stopping early once
// both AIC and BIC worsen versus the previous K. Chooses the argmin-BIC K
// over the fitted rows; ties break to the smaller K.
SelectionResult select_k(const Dataset& data, const ModelSpec& base, int k_min, int k_max,
                         const McmcSchedule& schedule);

struct LambdaBox {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

struct ProfileReport {
    std::vector<std::string> variable_names;              // length P
    std::vector<std::vector<SummaryStat>> cluster_means;  // [j][k], original units
    std::vector<SummaryStat> theta;                       // [k]
    std::vector<SummaryStat> weights;                     // [k]
    std::vector<Eigen::MatrixXd> dstar;                   // per j, K x K, zero diagonal
    std::vector<LambdaBox> shrinkage;                     // per j
};

ProfileReport profile_report(const PosteriorSamples& samples, const Dataset& data);

// Fraction of retained samples in which cluster k's mean for variable j
// exceeds cluster k_prime's.
double compute_dstar(const PosteriorSamples& samples, int j, int k, int k_prime);

struct MembershipPosterior {
    Eigen::VectorXd mean;        // length K, sums to 1
    Eigen::MatrixXd per_sample;  // n_states x K, each row sums to 1
};

// Covariate-only membership probabilities for a new profile, averaged over
// the retained samples. x_new is on the original scale; any training-time
// standardization is replayed internally.
MembershipPosterior membership_posterior(const PosteriorSamples& samples,
                                         const Eigen::VectorXd& x_new);

struct OddsRatio {
    double value = 0.0;
    bool infinite = false;
};

OddsRatio odds_ratio(const PosteriorSamples& samples, const Eigen::VectorXd& x_new, int k,
                     int k_prime);

struct PpcSummary {
    std::vector<SummaryStat> ranks;       // per sorted rank, length n_rep
    std::vector<long> count_values;       // 0..max replicated count
    std::vector<SummaryStat> count_freq;  // relative frequency per count value
};

// Draws n_rep counts per retained state (assignment from pi, count from the
// cluster's Poisson mean) and summarizes both the sorted order statistics
// and the frequency of each count value.
PpcSummary posterior_predictive(const PosteriorSamples& samples, int n_rep, RngStream& rng);

struct RelevanceEntry {
    int variable = 0;  // 0-based column index
    LambdaBox box;
};

// Variables ordered by ascending posterior median shrinkage; ties keep the
// input column order.
std::vector<RelevanceEntry> relevance_ranking(const PosteriorSamples& samples);

}  // namespace profmix

#endif
