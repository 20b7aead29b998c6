#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace streamqoe {

// Monte-Carlo point estimate with a normal-approximation confidence interval.
struct EstimateWithCI {
    double point = 0.0;
    double half_width = 0.0;
    double confidence = 0.0;
    std::uint64_t n = 0;
};

// Standard normal quantile, solved on Phi(z) = 0.5*erfc(-z/sqrt(2)) by
// bisection. Only called once per estimate, so speed is irrelevant.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must be in (0, 1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Two-sided z value for a confidence level, e.g. 0.99 -> 2.5758.
inline double z_for_confidence(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::domain_error("confidence must be in (0, 1)");
    return normal_quantile(0.5 + confidence / 2.0);
}

// Binomial proportion with half-width max(sqrt(p(1-p)/n), 1/(2n)) * z.
// The 1/(2n) floor keeps the interval open at p_hat = 0 or 1.
inline EstimateWithCI proportion_estimate(std::uint64_t successes,
                                          std::uint64_t n,
                                          double confidence) {
    if (n == 0) throw std::invalid_argument("proportion_estimate: n == 0");
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const double floor = 0.5 / static_cast<double>(n);
    return {p, std::max(sd, floor) * z_for_confidence(confidence), confidence, n};
}

// Sample-mean estimate from accumulated sum and sum of squares.
inline EstimateWithCI mean_estimate(double sum, double sum_sq, std::uint64_t n,
                                    double confidence) {
    if (n < 2) throw std::invalid_argument("mean_estimate: need n >= 2");
    const double nd = static_cast<double>(n);
    const double mean = sum / nd;
    double var = (sum_sq - nd * mean * mean) / (nd - 1.0);
    if (var < 0.0) var = 0.0;
    return {mean, z_for_confidence(confidence) * std::sqrt(var / nd), confidence, n};
}

} // namespace streamqoe
