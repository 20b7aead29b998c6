#pragma once

// Event-driven simulation of the receiver buffer Q(t) = D + A(t) - t.
//
// Between arrivals the buffer drains linearly at rate one, so the level can
// reach the interruption threshold only strictly between arrival epochs:
// with post-arrival level q at epoch t_k, the threshold is hit iff the next
// inter-arrival gap exceeds q - threshold, and then the hitting instant is
// exactly t_k + (q - threshold). Drawing i.i.d. exponential gaps and applying
// this rule reproduces the continuous-time hitting times with no time
// discretization at all.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace streamqoe {

// Download completes at the arrival that delivers the last needed packet.
// The arrival count is integer, so "A(t) >= T - D" means the ceil of T - D;
// FloorRemaining instead calls the file done when less than one packet is
// outstanding (sensitivity mode for non-integer D).
enum class CompletionRule { CeilRemaining, FloorRemaining };

struct StreamConfig {
    double rate = 1.0;           // useful-packet Poisson rate R
    double file_size = 0.0;      // T, packets
    double initial_buffer = 0.0; // D, packets, 0 <= D <= T
    unsigned block_size = 0;     // W (coding block, packets)
    double threshold = 0.0;      // interruption level; 0 = extra-block convention
    std::uint64_t seed = 0;
    CompletionRule completion = CompletionRule::CeilRemaining;

    void validate() const {
        if (!(rate > 0.0)) throw std::invalid_argument("StreamConfig: rate must be > 0");
        if (file_size < 0.0) throw std::invalid_argument("StreamConfig: file_size < 0");
        if (initial_buffer < 0.0 || initial_buffer > file_size)
            throw std::invalid_argument("StreamConfig: need 0 <= initial_buffer <= file_size");
        if (threshold < 0.0) throw std::invalid_argument("StreamConfig: threshold < 0");
    }
};

struct TracePoint {
    double time;
    double level;
};

struct PathOutcome {
    bool interrupted = false;
    double stop_time = 0.0;       // hitting time if interrupted, else completion time
    std::uint64_t arrivals = 0;
    std::vector<TracePoint> trace; // filled only when requested
};

inline std::uint64_t packets_to_complete(const StreamConfig& cfg) {
    const double remaining = cfg.file_size - cfg.initial_buffer;
    const double n = cfg.completion == CompletionRule::CeilRemaining
                         ? std::ceil(remaining)
                         : std::floor(remaining);
    return n <= 0.0 ? 0 : static_cast<std::uint64_t>(n);
}

inline PathOutcome simulate_path(const StreamConfig& cfg, PathRng& rng,
                                 bool record_trace = false) {
    cfg.validate();
    PathOutcome out;
    const std::uint64_t needed = packets_to_complete(cfg);
    double level = cfg.initial_buffer;
    double now = 0.0;

    if (record_trace) out.trace.push_back({now, level});
    if (needed == 0) return out; // file effectively complete at t = 0
    if (level <= cfg.threshold) { // D at or below threshold: immediate underflow
        out.interrupted = true;
        if (record_trace) out.trace.push_back({now, level});
        return out;
    }

    for (;;) {
        const double gap = rng.exponential(cfg.rate);
        if (gap > level - cfg.threshold) {
            out.interrupted = true;
            out.stop_time = now + (level - cfg.threshold);
            if (record_trace) out.trace.push_back({out.stop_time, cfg.threshold});
            return out;
        }
        now += gap;
        level += 1.0 - gap;
        ++out.arrivals;
        if (record_trace) out.trace.push_back({now, level});
        if (out.arrivals == needed) {
            out.stop_time = now;
            return out;
        }
    }
}

inline PathOutcome simulate_path(const StreamConfig& cfg, std::uint64_t stream,
                                 bool record_trace = false) {
    PathRng rng(cfg.seed, stream);
    return simulate_path(cfg, rng, record_trace);
}

namespace detail {
struct MeanAcc {
    double sum = 0.0;
    double sum_sq = 0.0;
    void combine(const MeanAcc& o) { sum += o.sum; sum_sq += o.sum_sq; }
};
struct CountAcc {
    std::uint64_t count = 0;
    void combine(const CountAcc& o) { count += o.count; }
};
} // namespace detail

// Monte-Carlo estimate of E[e^{-r Q(t)}] from n free-running paths (no
// stopping). The sub-martingale identity gives the closed form
// e^{-r D + t*tilt(r)}, which this estimate is checked against.
inline EstimateWithCI exponential_moment(const StreamConfig& cfg, double r,
                                         double t, std::uint64_t n,
                                         double confidence = 0.99) {
    cfg.validate();
    if (r < 0.0) throw std::domain_error("exponential_moment: r < 0");
    if (t < 0.0) throw std::domain_error("exponential_moment: t < 0");
    if (n < 2) throw std::invalid_argument("exponential_moment: need n >= 2");

    auto acc = detail::chunked_reduce<detail::MeanAcc>(
        n, detail::kDefaultChunk,
        [&](std::uint64_t lo, std::uint64_t hi, detail::MeanAcc& a) {
            for (std::uint64_t i = lo; i < hi; ++i) {
                PathRng rng(cfg.seed, i);
                std::uint64_t arrivals = 0;
                for (double now = rng.exponential(cfg.rate); now <= t;
                     now += rng.exponential(cfg.rate))
                    ++arrivals;
                const double q = cfg.initial_buffer + static_cast<double>(arrivals) - t;
                const double x = std::exp(-r * q);
                a.sum += x;
                a.sum_sq += x * x;
            }
        });
    return mean_estimate(acc.sum, acc.sum_sq, n, confidence);
}

// Fraction of paths whose buffer level ever reaches the drifted boundary
// u(t) = D + delta + (rate + s - 1) t within [0, horizon]. The level only
// jumps up at arrivals while the boundary moves continuously, so crossings
// are checked at t = 0 and at arrival epochs only. At an arrival epoch t_k
// with k arrivals so far the condition reduces to k - (rate+s) t_k >= delta.
inline EstimateWithCI boundary_crossing_frequency(const StreamConfig& cfg,
                                                  double delta, double s,
                                                  double horizon, std::uint64_t n,
                                                  double confidence = 0.99) {
    cfg.validate();
    if (s <= 0.0) throw std::domain_error("boundary_crossing_frequency: s <= 0");
    if (s > cfg.rate)
        throw std::domain_error("boundary_crossing_frequency: requires s <= rate");
    if (!(horizon > 0.0))
        throw std::domain_error("boundary_crossing_frequency: horizon <= 0");
    if (n == 0) throw std::invalid_argument("boundary_crossing_frequency: n == 0");

    if (delta <= 0.0) // boundary starts at or below Q(0): crossed at t = 0
        return proportion_estimate(n, n, confidence);

    const double slope = cfg.rate + s;
    auto acc = detail::chunked_reduce<detail::CountAcc>(
        n, detail::kDefaultChunk,
        [&](std::uint64_t lo, std::uint64_t hi, detail::CountAcc& a) {
            for (std::uint64_t i = lo; i < hi; ++i) {
                PathRng rng(cfg.seed, i);
                double now = 0.0;
                double k = 0.0;
                while (true) {
                    now += rng.exponential(cfg.rate);
                    if (now > horizon) break;
                    k += 1.0;
                    if (k - slope * now >= delta) {
                        ++a.count;
                        break;
                    }
                }
            }
        });
    return proportion_estimate(acc.count, n, confidence);
}

} // namespace streamqoe
