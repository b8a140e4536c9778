// Complete-data and observed-data log-likelihoods of the joint
// covariate + count mixture.
#ifndef PROFMIX_LIKELIHOOD_HPP
#define PROFMIX_LIKELIHOOD_HPP

#include <Eigen/Dense>

#include "profmix/types.hpp"

namespace profmix {

// Per-subject complete-data term given assignment k:
// ln pi_k + sum_j ln N(x_ij | mu_kj, sigma_j^2) + ln Po(y_i | exp(gamma_k)).
double subject_complete_term(const ChainState& state, const Dataset& data, int subject, int k);

// Log of all K complete-data terms for one subject (the unnormalized
// log assignment conditional).
Eigen::VectorXd subject_log_terms(const ChainState& state, const Dataset& data, int subject);

double complete_loglik(const ChainState& state, const Dataset& data);

// Mixture log-likelihood with the per-subject sum over k taken by log-sum-exp.
double observed_loglik(const ChainState& state, const Dataset& data);

// Numerically stable ln sum_k exp(v_k).
double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace profmix

#endif
