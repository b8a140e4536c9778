// Univariate log-densities used throughout the model. The diagonal covariance
// reduces every multivariate Gaussian term to a sum of these.
#ifndef PROFMIX_DENSITIES_HPP
#define PROFMIX_DENSITIES_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace profmix {

inline double gaussian_logpdf(double x, double mean, double variance) {
    if (!(variance > 0.0)) {
        throw std::domain_error("gaussian_logpdf: variance must be positive");
    }
    const double diff = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - diff * diff / (2.0 * variance);
}

// log Po(y | theta); ln(y!) via lgamma so arbitrary counts are supported.
inline double poisson_logpmf(long y, double theta) {
    if (!(theta > 0.0)) {
        throw std::domain_error("poisson_logpmf: theta must be positive");
    }
    if (y < 0) {
        throw std::domain_error("poisson_logpmf: y must be nonnegative");
    }
    return static_cast<double>(y) * std::log(theta) - theta - std::lgamma(static_cast<double>(y) + 1.0);
}

}  // namespace profmix

#endif
