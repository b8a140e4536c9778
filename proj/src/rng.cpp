#include "profmix/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace profmix {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) {
    return splitmix64(seed ^ splitmix64(label + 0x632BE59BD9B4E019ull));
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
    std::seed_seq sseq{static_cast<std::uint32_t>(splitmix64(seed)),
                       static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                       static_cast<std::uint32_t>(splitmix64(seed + 1)),
                       static_cast<std::uint32_t>(splitmix64(seed + 1) >> 32)};
    engine_.seed(sseq);
}

RngStream RngStream::substream(std::uint64_t label) const {
    return RngStream(mix_seed(seed_, label));
}

double RngStream::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0) {
        throw std::invalid_argument("gamma draw requires positive shape and rate");
    }
    if (shape < 1.0) {
        const double u = uniform();
        const double g = gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        return std::max(g, std::numeric_limits<double>::min());
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x ||
            std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return std::max(d * v / rate, std::numeric_limits<double>::min());
        }
    }
}

long RngStream::poisson(double mean) {
    if (!(mean > 0.0)) {
        throw std::invalid_argument("poisson draw requires positive mean");
    }
    if (mean < 30.0) {
        // Count unit-rate exponential arrivals before the budget runs out.
        double acc = exponential();
        long k = 0;
        while (acc < mean) {
            acc += exponential();
            ++k;
        }
        return k;
    }
    // Hormann (1993) PTRS, valid for mean >= 10.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) {
            return static_cast<long>(kf);
        }
        if (kf < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        if (lhs <= kf * log_mean - mean - std::lgamma(kf + 1.0)) {
            return static_cast<long>(kf);
        }
    }
}

int RngStream::categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    const int last = static_cast<int>(probs.size()) - 1;
    for (int k = 0; k < last; ++k) {
        acc += probs[k];
        if (u < acc) {
            return k;
        }
    }
    return last;
}

std::vector<double> RngStream::dirichlet(std::span<const double> alpha) {
    std::vector<double> draw(alpha.size());
    double total = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        draw[k] = gamma(alpha[k], 1.0);
        total += draw[k];
    }
    for (double& g : draw) {
        g /= total;
    }
    return draw;
}

}  // namespace profmix
