#include "profmix/types.hpp"

#include <cmath>
#include <utility>

namespace profmix {

namespace {

constexpr double kSimplexTol = 1e-12;
// Slack for checking gamma_k = gamma_{k-1} + eta_{k-1}; the chain maintains
// the identity exactly, the tolerance only covers serialization round trips.
constexpr double kReconstructTol = 1e-9;

}  // namespace

void Dataset::validate() const {
    if (covariates.rows() < 1 || covariates.cols() < 1) {
        throw DataError("dataset needs at least one subject and one covariate");
    }
    if (counts.size() != covariates.rows()) {
        throw DataError("count vector length does not match the covariate rows");
    }
    if (static_cast<Eigen::Index>(variable_names.size()) != covariates.cols()) {
        throw DataError("variable name list does not match the covariate columns");
    }
    for (Eigen::Index i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) {
            throw DataError("negative count at subject " + std::to_string(i + 1));
        }
    }
    if (!covariates.allFinite()) {
        throw DataError("covariate matrix contains non-finite values");
    }
    if (standardization.enabled &&
        (standardization.mean.size() != covariates.cols() ||
         standardization.sd.size() != covariates.cols())) {
        throw DataError("standardization vectors do not match the covariate columns");
    }
}

void Hyperparameters::validate(int k) const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) {
            throw DataError(std::string("hyperparameter ") + name + " must be positive");
        }
    };
    positive(c, "c");
    positive(d, "d");
    positive(r, "r");
    positive(s, "s");
    positive(sigma0_sq, "sigma0_sq");
    if (alpha.size() != k) {
        throw DataError("alpha length must equal the number of clusters");
    }
    if ((alpha.array() <= 0.0).any()) {
        throw DataError("all alpha entries must be positive");
    }
}

WeightPrior WeightPrior::dirichlet(Eigen::VectorXd alpha) {
    WeightPrior prior;
    prior.kind = WeightPriorKind::Dirichlet;
    prior.dirichlet_alpha = std::move(alpha);
    return prior;
}

WeightPrior WeightPrior::multinomial_logit(double sd) {
    WeightPrior prior;
    prior.kind = WeightPriorKind::MultinomialLogit;
    prior.logit_sd = sd;
    return prior;
}

void WeightPrior::validate(int k) const {
    if (kind == WeightPriorKind::Dirichlet) {
        if (dirichlet_alpha.size() != k || (dirichlet_alpha.array() <= 0.0).any()) {
            throw DataError("Dirichlet weight prior needs K positive concentrations");
        }
    } else {
        if (!(logit_sd > 0.0)) {
            throw DataError("multinomial-logit weight prior needs a positive SD");
        }
    }
}

void ChainState::rebuild_intercepts(double gamma1) {
    intercepts[0] = gamma1;
    for (int k = 1; k < n_clusters(); ++k) {
        intercepts[k] = intercepts[k - 1] + increments[k - 1];
    }
}

Eigen::VectorXi ChainState::cluster_counts() const {
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(n_clusters());
    for (int z : assignments) {
        counts[z] += 1;
    }
    return counts;
}

void ChainState::validate(const Dataset* data) const {
    const int k_total = n_clusters();
    const int p = n_variables();
    if (k_total < 1 || p < 1) {
        throw DataError("chain state needs K >= 1 and P >= 1");
    }
    if (cluster_means.rows() != k_total || cluster_means.cols() != p ||
        shrinkage.size() != p || variances.size() != p || intercepts.size() != k_total ||
        increments.size() != k_total - 1) {
        throw DataError("chain state field dimensions disagree");
    }
    if (std::abs(weights.sum() - 1.0) > kSimplexTol) {
        throw NumericalError("mixture weights do not sum to 1");
    }
    if ((weights.array() <= 0.0).any() || (k_total > 1 && (weights.array() >= 1.0).any())) {
        throw NumericalError("every mixture weight must lie in (0,1)");
    }
    if ((shrinkage.array() <= 0.0).any() || (variances.array() <= 0.0).any()) {
        throw NumericalError("shrinkage and variance parameters must be positive");
    }
    if ((increments.array() < 0.0).any()) {
        throw NumericalError("intercept increments must be nonnegative");
    }
    for (int k = 1; k < k_total; ++k) {
        if (intercepts[k] + kReconstructTol < intercepts[k - 1] ||
            std::abs(intercepts[k] - intercepts[k - 1] - increments[k - 1]) > kReconstructTol) {
            throw NumericalError("intercepts are not the cumulative sum of the increments");
        }
    }
    for (int z : assignments) {
        if (z < 0 || z >= k_total) {
            throw NumericalError("assignment outside [1, K]");
        }
    }
    if (data != nullptr) {
        if (static_cast<Eigen::Index>(assignments.size()) != data->n_subjects() ||
            p != data->n_variables()) {
            throw DataError("chain state does not match the dataset dimensions");
        }
    }
}

void McmcSchedule::validate() const {
    if (burn_in < 0) {
        throw DataError("burn_in must be nonnegative");
    }
    if (n_iter <= 0) {
        throw DataError("n_iter must be positive");
    }
    if (thin < 1) {
        throw DataError("thin must be at least 1");
    }
    if (!(mh_step_lambda > 0.0) || !(mh_step_gamma > 0.0)) {
        throw DataError("Metropolis step sizes must be positive");
    }
}

void ModelSpec::validate() const {
    if (k < 1) {
        throw DataError("number of clusters must be at least 1");
    }
    hyper.validate(k);
    weight_prior.validate(k);
}

void PosteriorSamples::validate() const {
    if (states.size() != observed_loglik.size()) {
        throw DataError("retained states and log-likelihoods differ in length");
    }
    for (const ChainState& state : states) {
        state.validate();
    }
}

}  // namespace profmix
