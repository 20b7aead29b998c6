#pragma once

// Achievability and converse bounds on D*(eps), the minimum initial
// buffering whose interruption probability stays below eps.
//
// Upper bounds (sufficient buffering):
//   (a) for R > 1:            log(1/eps) / root(R)
//   (b) for R <= 1 + sqrt(log(1/eps)/(2T)):
//                             T(1-R) + sqrt(2 T R log(1/eps))
//   where both apply, the minimum is tighter.
// Lower bounds (necessary buffering):
//   (a) for R > 1:            -log(eps + 2 e^{-(R-1)^2 T / (4(R+1))}) / root(R)
//   (b) for R <= 1, eps <= 1/16, T >= 16/(alpha0^2 R) * log(1/eps):
//                             T(1-R) + (1/2) sqrt(2 T R log(1/eps))
// The converse-b constant is only certified for alpha0 in (0, 1/16]; outside
// its hypothesis the value is still computed but flagged not valid.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "analytic.hpp"

namespace streamqoe {

struct BoundQuery {
    double epsilon = 0.0;   // target interruption probability, in (0, 1)
    double file_size = 0.0; // T, packets
    double rate = 0.0;      // useful-arrival rate R

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("BoundQuery: epsilon must be in (0, 1)");
        if (!(file_size > 0.0))
            throw std::invalid_argument("BoundQuery: file_size must be > 0");
        if (!(rate > 0.0)) throw std::invalid_argument("BoundQuery: rate must be > 0");
    }
};

enum class UpperRegime { AchievabilityA, AchievabilityB, MinOfBoth };
enum class LowerRegime { ConverseA, ConverseB, Inapplicable };

inline const char* to_string(UpperRegime r) {
    switch (r) {
        case UpperRegime::AchievabilityA: return "achievability-a";
        case UpperRegime::AchievabilityB: return "achievability-b";
        default: return "min-of-both";
    }
}
inline const char* to_string(LowerRegime r) {
    switch (r) {
        case LowerRegime::ConverseA: return "converse-a";
        case LowerRegime::ConverseB: return "converse-b";
        default: return "inapplicable";
    }
}

struct UpperBoundResult {
    double value = 0.0;
    UpperRegime regime = UpperRegime::AchievabilityA;
    bool clamped = false; // true when the raw formula left [0, T]
};

struct LowerBoundResult {
    double value = 0.0;
    LowerRegime regime = LowerRegime::ConverseA;
    bool valid = false; // the bound's hypothesis is certified
    bool clamped = false;
};

inline UpperBoundResult min_buffer_upper(const BoundQuery& q) {
    q.validate();
    const double big_l = std::log(1.0 / q.epsilon);
    const double sqrt_term = std::sqrt(2.0 * q.file_size * q.rate * big_l);

    UpperBoundResult out;
    if (q.rate > 1.0) {
        const double root = largest_tilt_root(q.rate).root;
        const double a = big_l / root;
        if (q.rate <= 1.0 + std::sqrt(big_l / (2.0 * q.file_size))) {
            const double b = q.file_size * (1.0 - q.rate) + sqrt_term;
            out.value = std::min(a, b);
            out.regime = UpperRegime::MinOfBoth;
        } else {
            out.value = a;
            out.regime = UpperRegime::AchievabilityA;
        }
    } else {
        out.value = q.file_size * (1.0 - q.rate) + sqrt_term;
        out.regime = UpperRegime::AchievabilityB;
    }

    const double clamped = std::clamp(out.value, 0.0, q.file_size);
    out.clamped = clamped != out.value;
    out.value = clamped;
    return out;
}

inline LowerBoundResult min_buffer_lower(const BoundQuery& q,
                                         double alpha0 = 1.0 / 16.0) {
    q.validate();
    if (!(alpha0 > 0.0 && alpha0 <= 1.0 / 16.0))
        throw std::invalid_argument("min_buffer_lower: alpha0 must be in (0, 1/16]");

    LowerBoundResult out;
    if (q.rate > 1.0) {
        const double root = largest_tilt_root(q.rate).root;
        const double decay =
            (q.rate - 1.0) * (q.rate - 1.0) / (4.0 * (q.rate + 1.0));
        const double arg = q.epsilon + 2.0 * std::exp(-decay * q.file_size);
        out.regime = LowerRegime::ConverseA;
        out.valid = true;
        if (arg >= 1.0) { // bound is vacuous at this epsilon / file size
            out.value = 0.0;
            out.clamped = true;
        } else {
            out.value = -std::log(arg) / root;
        }
        return out;
    }

    const double big_l = std::log(1.0 / q.epsilon);
    out.regime = LowerRegime::ConverseB;
    out.value = q.file_size * (1.0 - q.rate) +
                0.5 * std::sqrt(2.0 * q.file_size * q.rate * big_l);
    out.valid = q.epsilon <= 1.0 / 16.0 &&
                q.file_size >= 16.0 / (alpha0 * alpha0 * q.rate) * big_l;
    const double clamped = std::clamp(out.value, 0.0, q.file_size);
    out.clamped = clamped != out.value;
    out.value = clamped;
    return out;
}

// Relative gap (upper - lower) / lower; the diagnostic that vanishes with
// growing file size wherever the bounds are certified.
inline double tightness_ratio(const BoundQuery& q, double alpha0 = 1.0 / 16.0) {
    const LowerBoundResult lo = min_buffer_lower(q, alpha0);
    if (!lo.valid || !(lo.value > 0.0))
        throw std::domain_error(
            "tightness_ratio: lower bound not valid or not positive");
    const UpperBoundResult up = min_buffer_upper(q);
    return (up.value - lo.value) / lo.value;
}

// User-facing summary. An uncertified lower bound is reported as absent
// (regime "inapplicable") with an explanatory note; the raw op above still
// exposes the uncertified value for diagnostics.
struct BoundReport {
    std::optional<double> lower;
    std::optional<double> upper;
    LowerRegime lower_regime = LowerRegime::Inapplicable;
    UpperRegime upper_regime = UpperRegime::AchievabilityA;
    std::vector<std::string> notes;
};

inline BoundReport bound_report(const BoundQuery& q, double alpha0 = 1.0 / 16.0) {
    BoundReport rep;
    const UpperBoundResult up = min_buffer_upper(q);
    rep.upper = up.value;
    rep.upper_regime = up.regime;
    if (up.clamped)
        rep.notes.push_back("upper bound clamped to [0, T]; D = T always suffices");

    const LowerBoundResult lo = min_buffer_lower(q, alpha0);
    if (lo.valid) {
        rep.lower = lo.value;
        rep.lower_regime = lo.regime;
        if (lo.clamped)
            rep.notes.push_back("lower bound clamped (vacuous at this epsilon)");
    } else {
        rep.lower_regime = LowerRegime::Inapplicable;
        rep.notes.push_back(
            "converse-b hypothesis not certified (needs epsilon <= 1/16 and "
            "T >= 16/(alpha0^2 R) log(1/epsilon)); uncertified value " +
            std::to_string(lo.value));
    }

    if (rep.lower && rep.upper && *rep.lower > *rep.upper)
        rep.notes.push_back("lower exceeds upper: numerical degeneracy");
    return rep;
}

} // namespace streamqoe
