#pragma once

// Monte-Carlo estimation of the interruption probability p(D) and search for
// the minimum feasible integer buffer D* (p(D*) <= eps).
//
// All probes share one arrival stream per path index (common random
// numbers), which makes the estimated p(D) exactly non-increasing in D and
// keeps the bracketed binary search coherent; the search itself is justified
// by the same monotonicity. Probes are classified against eps with their
// confidence interval; a straddling interval doubles the sample size up to a
// cap and then resolves pessimistically (infeasible), which can only bias D*
// upward, never below the target quality.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "simulate.hpp"

namespace streamqoe {

inline EstimateWithCI estimate_p(double d, StreamConfig base, std::uint64_t n,
                                 double confidence = 0.99) {
    if (n < 100) throw std::invalid_argument("estimate_p: need n >= 100");
    base.initial_buffer = d;
    base.validate();
    auto acc = detail::chunked_reduce<detail::CountAcc>(
        n, detail::kDefaultChunk,
        [&](std::uint64_t lo, std::uint64_t hi, detail::CountAcc& a) {
            for (std::uint64_t i = lo; i < hi; ++i)
                if (simulate_path(base, i).interrupted) ++a.count;
        });
    return proportion_estimate(acc.count, n, confidence);
}

struct ProbeSettings {
    std::uint64_t n_per_probe = 100000;
    double confidence = 0.99;
    unsigned max_doublings = 3;  // sample cap = n_per_probe * 2^max_doublings
    bool scan = false;           // linear increase-until-feasible search
    double alpha0 = 1.0 / 16.0;  // converse certification parameter
};

struct DStarResult {
    std::uint64_t d_star = 0;
    EstimateWithCI p_at_d;
    std::optional<EstimateWithCI> p_at_d_minus_1;
    std::uint64_t bracket_lo = 0;
    std::uint64_t bracket_hi = 0;
    std::vector<std::string> flags;
};

namespace detail {

enum class Verdict { Feasible, Infeasible };

struct ProbeOutcome {
    EstimateWithCI estimate;
    Verdict verdict = Verdict::Infeasible;
    bool capped = false; // indeterminate at the sample cap, resolved pessimistically
};

inline ProbeOutcome probe_feasibility(double d, const StreamConfig& base,
                                      double epsilon, const ProbeSettings& ps) {
    std::uint64_t n = ps.n_per_probe;
    for (unsigned attempt = 0;; ++attempt) {
        const EstimateWithCI est = estimate_p(d, base, n, ps.confidence);
        if (est.point + est.half_width <= epsilon)
            return {est, Verdict::Feasible, false};
        if (est.point - est.half_width > epsilon)
            return {est, Verdict::Infeasible, false};
        if (attempt == ps.max_doublings) return {est, Verdict::Infeasible, true};
        n *= 2;
    }
}

} // namespace detail

inline DStarResult find_d_star(double epsilon, StreamConfig base,
                               const ProbeSettings& ps = {}) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("find_d_star: epsilon must be in (0, 1)");
    base.initial_buffer = 0.0;
    base.validate();

    const BoundQuery query{epsilon, base.file_size, base.rate};
    const LowerBoundResult lower = min_buffer_lower(query, ps.alpha0);
    const UpperBoundResult upper = min_buffer_upper(query);

    std::uint64_t lo = 0;
    if (lower.valid && lower.value > 0.0)
        lo = static_cast<std::uint64_t>(std::floor(lower.value));
    const double d_max = std::floor(base.file_size); // D <= T
    std::uint64_t hi =
        static_cast<std::uint64_t>(std::min(std::ceil(upper.value), d_max));
    if (hi < lo) hi = lo;

    DStarResult out;
    out.bracket_lo = lo;
    out.bracket_hi = hi;

    unsigned capped_probes = 0;
    std::map<std::uint64_t, detail::ProbeOutcome> cache;
    auto probe = [&](std::uint64_t d) -> const detail::ProbeOutcome& {
        auto it = cache.find(d);
        if (it == cache.end()) {
            it = cache.emplace(d, detail::probe_feasibility(static_cast<double>(d),
                                                            base, epsilon, ps))
                     .first;
            if (it->second.capped) ++capped_probes;
        }
        return it->second;
    };

    if (ps.scan) { // the literal increase-until-feasible procedure
        std::uint64_t d = lo;
        while (d < hi && probe(d).verdict == detail::Verdict::Infeasible) ++d;
        out.d_star = d;
    } else {
        std::uint64_t a = lo, b = hi;
        while (a < b) {
            const std::uint64_t mid = a + (b - a) / 2;
            if (probe(mid).verdict == detail::Verdict::Feasible)
                b = mid;
            else
                a = mid + 1;
        }
        out.d_star = a;
    }

    const detail::ProbeOutcome& at_d = probe(out.d_star);
    out.p_at_d = at_d.estimate;
    if (at_d.verdict != detail::Verdict::Feasible)
        out.flags.push_back("boundary-unresolved");
    if (out.d_star > 0)
        out.p_at_d_minus_1 = probe(out.d_star - 1).estimate;
    if (capped_probes > 3) out.flags.push_back("low-confidence");
    if (!lower.valid) out.flags.push_back("bracket-lo-uncertified");
    return out;
}

enum class SweepKind { Epsilon, Rate };

struct SweepRow {
    double var = 0.0; // the grid value (epsilon or rate)
    BoundQuery query;
    BoundReport report;
    std::optional<DStarResult> result;
    std::string error; // nonempty when this point failed
};

// One D* search plus bound report per grid value; failures are recorded
// in-row and the sweep continues.
inline std::vector<SweepRow> sweep(SweepKind kind, const std::vector<double>& grid,
                                   double epsilon, const StreamConfig& base,
                                   const ProbeSettings& ps = {}) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (double v : grid) {
        SweepRow row;
        row.var = v;
        StreamConfig cfg = base;
        double eps = epsilon;
        if (kind == SweepKind::Epsilon)
            eps = v;
        else
            cfg.rate = v;
        row.query = BoundQuery{eps, cfg.file_size, cfg.rate};
        try {
            row.report = bound_report(row.query, ps.alpha0);
            row.result = find_d_star(eps, cfg, ps);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace streamqoe
