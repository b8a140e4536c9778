#include "profmix/likelihood.hpp"

#include <cmath>
#include <limits>

#include "profmix/densities.hpp"

namespace profmix {

namespace {

void check_dims(const ChainState& state, const Dataset& data) {
    if (state.n_variables() != data.n_variables()) {
        throw DataError("state/data variable dimensions disagree");
    }
}

void check_assignments(const ChainState& state, const Dataset& data) {
    if (static_cast<Eigen::Index>(state.assignments.size()) != data.n_subjects()) {
        throw DataError("state assignments do not cover every subject");
    }
}

}  // namespace

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) {
        return m;  // all -inf (or a NaN) propagates unchanged
    }
    return m + std::log((v.array() - m).exp().sum());
}

double subject_complete_term(const ChainState& state, const Dataset& data, int subject, int k) {
    double term = std::log(state.weights[k]);
    const int p = static_cast<int>(data.n_variables());
    for (int j = 0; j < p; ++j) {
        term += gaussian_logpdf(data.covariates(subject, j), state.cluster_means(k, j),
                                state.variances[j]);
    }
    term += poisson_logpmf(data.counts[subject], state.theta(k));
    return term;
}

Eigen::VectorXd subject_log_terms(const ChainState& state, const Dataset& data, int subject) {
    const int k_total = state.n_clusters();
    Eigen::VectorXd terms(k_total);
    for (int k = 0; k < k_total; ++k) {
        terms[k] = subject_complete_term(state, data, subject, k);
    }
    return terms;
}

double complete_loglik(const ChainState& state, const Dataset& data) {
    check_dims(state, data);
    check_assignments(state, data);
    double total = 0.0;
    for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
        total += subject_complete_term(state, data, static_cast<int>(i), state.assignments[i]);
    }
    return total;
}

double observed_loglik(const ChainState& state, const Dataset& data) {
    check_dims(state, data);
    double total = 0.0;
    for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
        total += log_sum_exp(subject_log_terms(state, data, static_cast<int>(i)));
    }
    return total;
}

}  // namespace profmix
