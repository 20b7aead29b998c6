#include "streamqoe/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "gtest/gtest.h"

namespace {
using namespace streamqoe;

TEST(MinBufferUpper, RegimeAExample) {
    const auto up = min_buffer_upper({0.01, 500.0, 1.2});
    EXPECT_NEAR(up.value, 12.233542361921282, 1e-7);
    EXPECT_EQ(up.regime, UpperRegime::AchievabilityA);
    EXPECT_FALSE(up.clamped);
}

TEST(MinBufferUpper, RegimeBExample) {
    const auto up = min_buffer_upper({0.01, 10000.0, 1.0});
    EXPECT_NEAR(up.value, 303.48542587702927, 1e-9);
    EXPECT_EQ(up.regime, UpperRegime::AchievabilityB);
}

TEST(MinBufferUpper, MinOfBothWindow) {
    // window edge 1 + sqrt(log(1000)/200) = 1.1859 > 1.05
    const auto up = min_buffer_upper({0.001, 100.0, 1.05});
    EXPECT_EQ(up.regime, UpperRegime::MinOfBoth);
    EXPECT_NEAR(up.value, 33.087118670047079, 1e-9); // part (b) wins here
}

TEST(MinBufferUpper, VanishesAsEpsilonApproachesOne) {
    EXPECT_LT(min_buffer_upper({0.999999, 100.0, 2.0}).value, 1e-5);
}

TEST(MinBufferUpper, ClampsToFileSize) {
    // raw part (b) value 51.79 > T = 50
    const auto up = min_buffer_upper({0.01, 50.0, 0.1});
    EXPECT_EQ(up.value, 50.0);
    EXPECT_TRUE(up.clamped);
}

TEST(MinBufferUpper, ValidatesQuery) {
    EXPECT_THROW(min_buffer_upper({0.0, 100.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(min_buffer_upper({1.0, 100.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(min_buffer_upper({0.5, 0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(min_buffer_upper({0.5, 100.0, 0.0}), std::invalid_argument);
}

TEST(MinBufferLower, ConverseAExamples) {
    const auto lo500 = min_buffer_lower({0.01, 500.0, 1.2});
    EXPECT_NEAR(lo500.value, 4.0702365487051315, 1e-7);
    EXPECT_EQ(lo500.regime, LowerRegime::ConverseA);
    EXPECT_TRUE(lo500.valid);

    // at T = 1e4 the file-size term is negligible and the bound meets log(1/eps)/root
    const auto lo1e4 = min_buffer_lower({0.01, 10000.0, 1.2});
    EXPECT_NEAR(lo1e4.value, 12.233542361921281, 1e-7);
}

TEST(MinBufferLower, ConverseBValidityFlag) {
    const auto uncertified = min_buffer_lower({0.01, 10000.0, 1.0});
    EXPECT_NEAR(uncertified.value, 151.74271293851464, 1e-9);
    EXPECT_EQ(uncertified.regime, LowerRegime::ConverseB);
    EXPECT_FALSE(uncertified.valid); // needs T >= 18862.8

    const auto certified = min_buffer_lower({0.01, 20000.0, 1.0});
    EXPECT_NEAR(certified.value, 214.59660262893472, 1e-9);
    EXPECT_TRUE(certified.valid);

    // high-epsilon regime is never certified for R <= 1
    EXPECT_FALSE(min_buffer_lower({0.2, 1e7, 1.0}).valid);
}

TEST(MinBufferLower, ClampsToZeroWhenVacuous) {
    const auto lo = min_buffer_lower({0.6, 10.0, 1.2});
    EXPECT_EQ(lo.value, 0.0);
    EXPECT_TRUE(lo.clamped);
    EXPECT_TRUE(lo.valid);
}

TEST(MinBufferLower, Alpha0Range) {
    EXPECT_THROW(min_buffer_lower({0.01, 100.0, 1.0}, 0.0), std::invalid_argument);
    EXPECT_THROW(min_buffer_lower({0.01, 100.0, 1.0}, 0.1), std::invalid_argument);
    EXPECT_NO_THROW(min_buffer_lower({0.01, 100.0, 1.0}, 1.0 / 16.0));
}

TEST(TightnessRatio, FigureThreePoint) {
    EXPECT_NEAR(tightness_ratio({0.01, 500.0, 1.2}), 2.0056096778486132, 1e-6);
}

TEST(TightnessRatio, VanishesWithFileSize) {
    const double r5e3 = tightness_ratio({0.01, 5000.0, 1.2});
    EXPECT_NEAR(r5e3, 5.8540331016463442e-9, 1e-13);
    EXPECT_LT(tightness_ratio({0.01, 10000.0, 1.2}), 1e-3);
    EXPECT_LT(tightness_ratio({0.01, 50000.0, 1.2}), 1e-12);
}

TEST(TightnessRatio, ExactlyOneAtUnitRate) {
    // upper and lower differ exactly by the factor 1/2 on the sqrt term
    EXPECT_DOUBLE_EQ(tightness_ratio({0.01, 20000.0, 1.0}), 1.0);
}

TEST(TightnessRatio, ErrorsWhenLowerUnusable) {
    EXPECT_THROW(tightness_ratio({0.01, 10000.0, 1.0}), std::domain_error);
    EXPECT_THROW(tightness_ratio({0.6, 10.0, 1.2}), std::domain_error);
}

TEST(BoundsProperties, SandwichOnGrid) {
    for (double eps : {0.1, 0.01, 0.001})
        for (double rate : {1.0, 1.05, 1.2, 2.0, 5.0})
            for (double t : {100.0, 1000.0, 10000.0}) {
                const BoundQuery q{eps, t, rate};
                const auto lo = min_buffer_lower(q);
                if (!lo.valid) continue;
                EXPECT_LE(lo.value, min_buffer_upper(q).value)
                    << "eps=" << eps << " R=" << rate << " T=" << t;
            }
}

TEST(BoundsProperties, UpperMonotoneInEpsilonAndRate) {
    const double epsilons[] = {0.001, 0.01, 0.1};
    const double rates[] = {1.0, 1.05, 1.2, 2.0, 5.0};
    for (double t : {100.0, 1000.0, 10000.0}) {
        for (double rate : rates)
            for (int i = 0; i + 1 < 3; ++i) // larger eps -> smaller bound
                EXPECT_GE(min_buffer_upper({epsilons[i], t, rate}).value,
                          min_buffer_upper({epsilons[i + 1], t, rate}).value);
        for (double eps : epsilons)
            for (int i = 0; i + 1 < 5; ++i) // faster arrivals -> smaller bound
                EXPECT_GE(min_buffer_upper({eps, t, rates[i]}).value + 1e-12,
                          min_buffer_upper({eps, t, rates[i + 1]}).value);
    }
}

TEST(BoundsProperties, UpperConstantInFileSizeAboveUnitRate) {
    for (double rate : {1.2, 2.0, 5.0})
        for (double eps : {0.1, 0.01, 0.001}) {
            const double v100 = min_buffer_upper({eps, 100.0, rate}).value;
            for (double t : {1000.0, 10000.0})
                EXPECT_DOUBLE_EQ(min_buffer_upper({eps, t, rate}).value, v100);
        }
}

TEST(BoundsProperties, SqrtScalingIdentityAtUnitRate) {
    for (double eps : {0.1, 0.01, 0.001}) {
        const double target = std::sqrt(2.0 * std::log(1.0 / eps));
        for (double t : {100.0, 1000.0, 10000.0})
            EXPECT_NEAR(min_buffer_upper({eps, t, 1.0}).value / std::sqrt(t), target,
                        1e-9);
    }
}

TEST(BoundsProperties, TightnessShrinksWithFileSizeAboveUnitRate) {
    const double r1 = tightness_ratio({0.01, 1000.0, 1.2});
    const double r2 = tightness_ratio({0.01, 10000.0, 1.2});
    const double r3 = tightness_ratio({0.01, 100000.0, 1.2});
    EXPECT_NEAR(r1, 0.32853433089911817, 1e-6);
    EXPECT_GE(r1, r2);
    EXPECT_GE(r2, r3);
    EXPECT_LT(r3, 1e-12);
}

TEST(BoundReportApi, CertifiedAndUncertifiedLower) {
    const BoundReport good = bound_report({0.01, 500.0, 1.2});
    ASSERT_TRUE(good.lower.has_value());
    ASSERT_TRUE(good.upper.has_value());
    EXPECT_LE(*good.lower, *good.upper);
    EXPECT_EQ(good.lower_regime, LowerRegime::ConverseA);

    const BoundReport iffy = bound_report({0.01, 10000.0, 1.0});
    EXPECT_FALSE(iffy.lower.has_value());
    EXPECT_EQ(iffy.lower_regime, LowerRegime::Inapplicable);
    EXPECT_FALSE(iffy.notes.empty());
}

TEST(BoundReportApi, RegimeLabels) {
    EXPECT_STREQ(to_string(UpperRegime::AchievabilityA), "achievability-a");
    EXPECT_STREQ(to_string(UpperRegime::AchievabilityB), "achievability-b");
    EXPECT_STREQ(to_string(UpperRegime::MinOfBoth), "min-of-both");
    EXPECT_STREQ(to_string(LowerRegime::ConverseA), "converse-a");
    EXPECT_STREQ(to_string(LowerRegime::ConverseB), "converse-b");
    EXPECT_STREQ(to_string(LowerRegime::Inapplicable), "inapplicable");
}

} // namespace
