#include "streamqoe/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "streamqoe/analytic.hpp"

namespace {
using namespace streamqoe;

StreamConfig make_cfg(double rate, double t, double d, std::uint64_t seed = 1) {
    StreamConfig cfg;
    cfg.rate = rate;
    cfg.file_size = t;
    cfg.initial_buffer = d;
    cfg.seed = seed;
    return cfg;
}

TEST(SimulatePath, FullBufferCompletesInstantly) {
    const auto out = simulate_path(make_cfg(0.7, 25.0, 25.0), 0);
    EXPECT_FALSE(out.interrupted);
    EXPECT_EQ(out.stop_time, 0.0);
    EXPECT_EQ(out.arrivals, 0u);
}

TEST(SimulatePath, EmptyBufferInterruptsAtTimeZero) {
    const auto out = simulate_path(make_cfg(5.0, 25.0, 0.0), 0);
    EXPECT_TRUE(out.interrupted);
    EXPECT_EQ(out.stop_time, 0.0);
}

TEST(SimulatePath, StopTimeNeverExceedsFileSize) {
    for (std::uint64_t i = 0; i < 2000; ++i) {
        PathRng pick(99, i);
        const double t = 1.0 + 29.0 * pick.uniform();
        const double d = t * pick.uniform();
        const double rate = 0.2 + 2.0 * pick.uniform();
        const auto out = simulate_path(make_cfg(rate, t, d, 7), i);
        EXPECT_LE(out.stop_time, t);
    }
}

TEST(SimulatePath, DeterministicTraceForSameSeed) {
    const auto cfg = make_cfg(1.1, 40.0, 4.0, 123);
    const auto a = simulate_path(cfg, 5, true);
    const auto b = simulate_path(cfg, 5, true);
    EXPECT_EQ(a.interrupted, b.interrupted);
    EXPECT_EQ(a.stop_time, b.stop_time);
    EXPECT_EQ(a.arrivals, b.arrivals);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        EXPECT_EQ(a.trace[i].time, b.trace[i].time);
        EXPECT_EQ(a.trace[i].level, b.trace[i].level);
    }
    ASSERT_FALSE(a.trace.empty());
    EXPECT_EQ(a.trace.front().time, 0.0);
    EXPECT_EQ(a.trace.front().level, 4.0);
    if (a.interrupted) EXPECT_EQ(a.trace.back().level, cfg.threshold);
}

// raising the threshold can only interrupt sooner on the same arrival stream
TEST(SimulatePath, ThresholdMonotoneUnderSharedArrivals) {
    auto base = make_cfg(1.0, 30.0, 5.0, 31);
    auto raw = base;
    raw.block_size = 2;
    raw.threshold = 2.0;
    for (std::uint64_t i = 0; i < 5000; ++i) {
        const auto easy = simulate_path(base, i);
        const auto strict = simulate_path(raw, i);
        if (easy.interrupted) {
            EXPECT_TRUE(strict.interrupted);
            EXPECT_LE(strict.stop_time, easy.stop_time);
        }
    }
}

// pathwise coupling: with common arrivals, interruption at D+1 implies it at D
TEST(SimulatePath, BufferMonotoneUnderSharedArrivals) {
    const auto lo = make_cfg(1.0, 30.0, 3.0, 77);
    const auto hi = make_cfg(1.0, 30.0, 4.0, 77);
    for (std::uint64_t i = 0; i < 10000; ++i)
        if (simulate_path(hi, i).interrupted)
            EXPECT_TRUE(simulate_path(lo, i).interrupted) << "stream " << i;
}

TEST(SimulatePath, MatchesDiscreteTimeOracle) {
    const struct { double rate, t, d; } grid[] = {{1.2, 6.0, 2.0}, {1.5, 10.0, 5.0}};
    std::mt19937_64 eng(2024);
    for (const auto& g : grid) {
        const auto cfg = make_cfg(g.rate, g.t, g.d, 5150);
        const std::uint64_t n_event = 400000, n_oracle = 50000;
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < n_event; ++i)
            hits += simulate_path(cfg, i).interrupted;
        std::uint64_t oracle_hits = 0;
        for (std::uint64_t i = 0; i < n_oracle; ++i)
            oracle_hits += testoracle::discrete_interrupted(cfg, 1e-3, eng);
        const double p1 = static_cast<double>(hits) / n_event;
        const double p2 = static_cast<double>(oracle_hits) / n_oracle;
        EXPECT_TRUE(testoracle::binomial_agree(p1, n_event, p2, n_oracle, 3.0))
            << "R=" << g.rate << " T=" << g.t << " D=" << g.d << " event=" << p1
            << " oracle=" << p2;
    }
}

TEST(SimulatePath, ValidatesConfig) {
    EXPECT_THROW(simulate_path(make_cfg(0.0, 10.0, 1.0), 0), std::invalid_argument);
    EXPECT_THROW(simulate_path(make_cfg(1.0, 10.0, 11.0), 0), std::invalid_argument);
    EXPECT_THROW(simulate_path(make_cfg(1.0, 10.0, -1.0), 0), std::invalid_argument);
}

TEST(ExponentialMoment, DegenerateAtZeroTilt) {
    const auto est = exponential_moment(make_cfg(1.2, 100.0, 10.0), 0.0, 50.0, 1000);
    EXPECT_EQ(est.point, 1.0);
    EXPECT_EQ(est.half_width, 0.0);
}

TEST(ExponentialMoment, MatchesClosedFormWithinThreeSigma) {
    const auto cfg = make_cfg(1.2, 100.0, 10.0, 42);
    const double root = largest_tilt_root(1.2).root;
    const struct { double r, t, closed_form; } grid[] = {
        {root, 50.0, 0.023181981246255736}, // martingale case: e^{-r*D}
        {0.45, 20.0, 0.015041768798723136},
        {0.60, 5.0, 0.0033221929618319271},
    };
    for (const auto& g : grid) {
        const auto est = exponential_moment(cfg, g.r, g.t, 100000);
        EXPECT_NEAR(est.point, g.closed_form, 3.0 * testoracle::sigma_of(est))
            << "r=" << g.r << " t=" << g.t;
    }
}

TEST(ExponentialMoment, ClosedFormArithmetic) {
    // e^{-r D + t*tilt(r)} at r=1, t=50, D=10, R=1.2
    EXPECT_NEAR(std::exp(-10.0 + 50.0 * tilt(1.0, 1.2)), 7.9467772592691432, 1e-12);
    // for tilt >= 0 the closed form is non-decreasing in t
    for (double t = 0.0; t < 50.0; t += 5.0)
        EXPECT_LE(std::exp(-4.5 + t * tilt(0.45, 1.2)),
                  std::exp(-4.5 + (t + 5.0) * tilt(0.45, 1.2)));
}

TEST(ExponentialMoment, Validation) {
    const auto cfg = make_cfg(1.2, 100.0, 10.0);
    EXPECT_THROW(exponential_moment(cfg, -0.1, 1.0, 100), std::domain_error);
    EXPECT_THROW(exponential_moment(cfg, 0.1, -1.0, 100), std::domain_error);
    EXPECT_THROW(exponential_moment(cfg, 0.1, 1.0, 1), std::invalid_argument);
}

TEST(BoundaryCrossing, UnreachableBoundary) {
    const auto est = boundary_crossing_frequency(make_cfg(1.0, 10.0, 2.0), 1000.0,
                                                 1.0, 10.0, 10000);
    EXPECT_EQ(est.point, 0.0);
}

TEST(BoundaryCrossing, DominatedByClosedFormBound) {
    const auto cfg = make_cfg(1.0, 10.0, 5.0, 9);
    const auto est = boundary_crossing_frequency(cfg, 5.0, 1.0, 200.0, 100000);
    const double bound = boundary_crossing_bound(1.0, 5.0, 1.0);
    EXPECT_LE(est.point, bound + 3.0 * testoracle::sigma_of(est));
}

// As delta -> 0+ the crossing probability tends to the probability that the
// dual random walk ever ladders up, which is rate/(rate+s) (=1/2 at s=rate).
TEST(BoundaryCrossing, TinyDeltaApproachesLadderProbability) {
    const auto cfg = make_cfg(1.0, 10.0, 2.0, 17);
    const auto est = boundary_crossing_frequency(cfg, 1e-3, 1.0, 200.0, 100000);
    EXPECT_NEAR(est.point, 0.5, 0.01);
}

TEST(BoundaryCrossing, ZeroDeltaStartsCrossed) {
    const auto est = boundary_crossing_frequency(make_cfg(1.0, 10.0, 2.0), 0.0, 1.0,
                                                 10.0, 5000);
    EXPECT_EQ(est.point, 1.0);
}

TEST(BoundaryCrossing, RejectsExcessSlope) {
    EXPECT_THROW(boundary_crossing_frequency(make_cfg(1.0, 10.0, 2.0), 5.0, 2.0,
                                             10.0, 1000),
                 std::domain_error);
}

TEST(PacketsToComplete, CeilVersusFloor) {
    auto cfg = make_cfg(1.0, 10.5, 3.2);
    EXPECT_EQ(packets_to_complete(cfg), 8u); // ceil(7.3)
    cfg.completion = CompletionRule::FloorRemaining;
    EXPECT_EQ(packets_to_complete(cfg), 7u);
}

} // namespace
