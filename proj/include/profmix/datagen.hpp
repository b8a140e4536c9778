// Synthetic data generation from a known mixture truth, plus the exact
// assignment posterior under that truth. Used by the simulate command and as
// a ground-truth oracle in tests.
#ifndef PROFMIX_DATAGEN_HPP
#define PROFMIX_DATAGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "profmix/types.hpp"

namespace profmix {

struct GenerativeTruth {
    int k = 0;
    Eigen::VectorXd weights;    // simplex, length K
    Eigen::MatrixXd means;      // K x P
    Eigen::VectorXd variances;  // length P, shared across clusters
    Eigen::VectorXd theta;      // Poisson means, length K
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> variable_names;  // length P

    int n_variables() const { return static_cast<int>(means.cols()); }
    void validate() const;
};

struct GeneratedData {
    Dataset data;
    std::vector<int> true_assignments;  // 0-based
};

// Draw order per subject: assignment, covariates in column order, count.
// Fully determined by truth.seed.
GeneratedData generate(const GenerativeTruth& truth);

// Exact P(z = k | x) under the truth, or P(z = k | x, y) when a count is
// supplied. Computed in log space and normalized.
Eigen::VectorXd exact_assignment_posterior(const GenerativeTruth& truth, const Eigen::VectorXd& x,
                                           const long* y = nullptr);

// The published weights (0.63, 0.27, 0.08) total this, so they are rescaled
// onto the simplex.
inline constexpr double kBenchmarkWeightNormalizer = 0.98;

// Three well-separated clusters, five relevant covariates, n = 300. The data
// seed is fixed so every consumer sees the same draw.
GenerativeTruth benchmark_truth();

// Same shape, but the first covariate's means are tied across clusters.
GenerativeTruth benchmark_truth_irrelevant();

}  // namespace profmix

#endif
