#pragma once

// Closed-form machinery behind the buffering bounds.
//
// The receiver buffer is Q(t) = D + A(t) - t with A a Poisson process of
// rate R (playback normalized to one packet per unit time). For r >= 0 the
// exponential tilt of the increment is
//
//     tilt(r, R) = r + R*(e^{-r} - 1),
//
// and e^{-r Q(t)} is a sub-martingale whenever tilt(r, R) >= 0, which gives
// the Doob/Chernoff interruption bound  p(D) <= e^{-rD + T*tilt(r)}.  The
// largest root of the tilt (zero for R <= 1) is the decay rate of the
// interruption probability in D; it always lies in a known bracket, so a
// plain bisection cannot miss it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace streamqoe {

inline double tilt(double r, double rate) {
    if (r < 0.0) throw std::domain_error("tilt: r must be nonnegative");
    if (rate < 0.0) throw std::domain_error("tilt: rate must be nonnegative");
    return r + rate * std::expm1(-r);
}

// Largest root of tilt(., rate), with the bracket that certified it.
struct TiltRoot {
    double rate = 0.0;
    double root = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double tolerance = 0.0;
};

// Bisection inside the regime bracket:
//   rate <= 1            -> root is exactly 0
//   1 < rate <= 2        -> [2(rate-1)/rate, 2(rate-1)]
//   rate > 2             -> [rate-1, rate]
// The tilt is increasing for r >= log(rate), so the sign change inside the
// bracket is the largest root.
inline TiltRoot largest_tilt_root(double rate, double tolerance = 1e-10) {
    if (rate < 0.0)
        throw std::domain_error("largest_tilt_root: rate must be nonnegative");
    if (!(tolerance > 0.0))
        throw std::domain_error("largest_tilt_root: tolerance must be positive");
    if (rate <= 1.0) return {rate, 0.0, 0.0, 0.0, tolerance};

    double lo, hi;
    if (rate <= 2.0) {
        lo = 2.0 * (rate - 1.0) / rate;
        hi = 2.0 * (rate - 1.0);
    } else {
        lo = rate - 1.0;
        hi = rate;
    }
    const double blo = lo, bhi = hi;
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (tilt(mid, rate) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return {rate, 0.5 * (lo + hi), blo, bhi, tolerance};
}

// Doob maximal-inequality bound  e^{-r*d + file_size*tilt(r)}  on the
// interruption probability. Valid for any r with tilt(r) >= 0; values above
// one are returned as-is (the bound is simply vacuous there).
inline double interruption_upper_bound(double d, double file_size, double rate,
                                       double r) {
    if (d < 0.0) throw std::domain_error("interruption_upper_bound: d < 0");
    if (file_size <= 0.0)
        throw std::domain_error("interruption_upper_bound: file_size <= 0");
    const double g = tilt(r, rate);
    // Absorb root-finder noise: a tilt within bisection tolerance of zero is
    // treated as zero, which can only loosen the bound (e^{-rD} dominates
    // e^{-r'D} for any r' >= r with tilt(r') = 0).
    const double slack = 1e-9 * std::max(1.0, rate);
    if (g < -slack)
        throw std::domain_error(
            "interruption_upper_bound: tilt(r) < 0, sub-martingale hypothesis fails");
    return std::exp(-r * d + file_size * std::max(g, 0.0));
}

namespace detail {
inline double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}
inline double poisson_log_pmf(double k, double lambda) {
    return k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
}
} // namespace detail

// Exact Pr{Poisson(lambda) <= floor(x)}, accumulated in log space from the
// mode outward; terms below 1e-30 of the running sum are dropped. Stable for
// lambda up to ~1e4 and beyond. This is the reference the closed-form tail
// bounds are checked against.
inline double poisson_cdf(double lambda, double x) {
    if (lambda <= 0.0) throw std::domain_error("poisson_cdf: lambda <= 0");
    if (x < 0.0) return 0.0;
    const double m = std::floor(x);
    const double start = std::min(m, std::floor(lambda));
    const double cutoff = std::log(1e-30);
    double log_sum = -std::numeric_limits<double>::infinity();
    for (double k = start; k >= 0.0; k -= 1.0) { // pmf decreasing below the mode
        const double lt = detail::poisson_log_pmf(k, lambda);
        log_sum = detail::log_add(log_sum, lt);
        if (lt < log_sum + cutoff) break;
    }
    for (double k = start + 1.0; k <= m; k += 1.0) { // decreasing above it
        const double lt = detail::poisson_log_pmf(k, lambda);
        log_sum = detail::log_add(log_sum, lt);
        if (lt < log_sum + cutoff) break;
    }
    return log_sum >= 0.0 ? 1.0 : std::exp(log_sum);
}

// Upper bound on Pr{Poisson(lambda) <= lambda - k}:  exp(-(k-3/2)^2/(2*lambda)).
// Requires lambda >= 2 and k >= 2. (The exponent is negative; the positive
// sign sometimes quoted for this bound would make it vacuous.)
inline double poisson_lower_tail_upper_bound(double lambda, double k) {
    if (lambda < 2.0)
        throw std::domain_error("poisson_lower_tail_upper_bound: lambda < 2");
    if (k < 2.0) throw std::domain_error("poisson_lower_tail_upper_bound: k < 2");
    const double t = k - 1.5;
    return std::exp(-t * t / (2.0 * lambda));
}

// Lower bound on Pr{Poisson(lambda) <= lambda - m*sqrt(lambda)}:
// (1/3)*exp(-(m+1/2)^2/1.9), valid for m <= sqrt(lambda)/20 - 1.
inline double poisson_lower_tail_lower_bound(double lambda, double m) {
    if (lambda <= 0.0)
        throw std::domain_error("poisson_lower_tail_lower_bound: lambda <= 0");
    if (m <= 0.0) throw std::domain_error("poisson_lower_tail_lower_bound: m <= 0");
    if (m > std::sqrt(lambda) / 20.0 - 1.0)
        throw std::domain_error(
            "poisson_lower_tail_lower_bound: requires m <= sqrt(lambda)/20 - 1");
    const double t = m + 0.5;
    return std::exp(-t * t / 1.9) / 3.0;
}

// Probability that Q(t) ever crosses the drifted boundary
// u(t) = D + delta + (rate + s - 1) t is at most exp(-s*delta/rate), for any
// horizon and any initial level D, provided s <= rate.
inline double boundary_crossing_bound(double rate, double delta, double s) {
    if (rate <= 0.0) throw std::domain_error("boundary_crossing_bound: rate <= 0");
    if (delta <= 0.0) throw std::domain_error("boundary_crossing_bound: delta <= 0");
    if (s <= 0.0) throw std::domain_error("boundary_crossing_bound: s <= 0");
    if (s > rate)
        throw std::domain_error("boundary_crossing_bound: requires s <= rate");
    return std::exp(-s * delta / rate);
}

} // namespace streamqoe
