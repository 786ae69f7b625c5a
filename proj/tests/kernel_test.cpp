#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dztp/errors.hpp"
#include "dztp/kernel.hpp"
#include "dztp/verify.hpp"

namespace {

using namespace dztp;

constexpr double kE = 2.718281828459045;

TEST(DegeneracyParams, AcceptsNonPositiveLambdaAboveBranchPoint) {
    EXPECT_NO_THROW(DegeneracyParams(2.0, -0.49));
    EXPECT_NO_THROW(DegeneracyParams(2.0, 0.0));
    EXPECT_FALSE(DegeneracyParams(2.0, -0.25).support_limit());
}

TEST(DegeneracyParams, RejectsBranchPointAndBeyond) {
    EXPECT_THROW(DegeneracyParams(2.0, -0.5), DomainError);
    EXPECT_THROW(DegeneracyParams(2.0, -0.6), DomainError);
    EXPECT_THROW(DegeneracyParams(0.0, 0.0), DomainError);
    EXPECT_THROW(DegeneracyParams(-1.0, 0.0), DomainError);
    EXPECT_THROW(DegeneracyParams(std::nan(""), 0.0), DomainError);
}

TEST(DegeneracyParams, PositiveLambdaOnlyAtUnitFractions) {
    EXPECT_THROW(DegeneracyParams(1.0, 0.7), DomainError);
    EXPECT_THROW(DegeneracyParams(1.0, 0.4), DomainError);
    EXPECT_THROW(DegeneracyParams(1.0, 2.0), DomainError);
    EXPECT_EQ(DegeneracyParams(1.0, 1.0).support_limit(), 1);
    EXPECT_EQ(DegeneracyParams(1.0, 0.5).support_limit(), 2);
    EXPECT_EQ(DegeneracyParams(3.0, 1.0 / 7.0).support_limit(), 7);
}

TEST(DegeneracyParams, SnapsNearUnitFractionToExactReciprocal) {
    const DegeneracyParams p(1.0, 0.1 + 1e-15);
    EXPECT_EQ(p.support_limit(), 10);
    EXPECT_EQ(p.lambda(), 1.0 / 10.0);
    // 1/49 is one of the denominators where m * (1.0/m) != 1 in binary64.
    EXPECT_EQ(DegeneracyParams(1.0, 1.0 / 49.0).support_limit(), 49);
}

TEST(DegeneracyParams, ErrorMessageNamesTheDomain) {
    try {
        DegeneracyParams(1.0, 0.7);
        FAIL();
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("lambda in (-1/alpha, 0]"), std::string::npos);
        EXPECT_NE(msg.find("lambda = 1/m"), std::string::npos);
    }
}

TEST(SeriesControl, Validates) {
    EXPECT_NO_THROW(SeriesControl{}.validate());
    EXPECT_THROW((SeriesControl{1.0, 10}.validate()), DomainError);
    EXPECT_THROW((SeriesControl{0.0, 10}.validate()), DomainError);
    EXPECT_THROW((SeriesControl{1e-10, 0}.validate()), DomainError);
}

TEST(FallingFactorial, Examples) {
    EXPECT_EQ(falling_factorial(5.0, 0, 0.3), 1.0);
    EXPECT_EQ(falling_factorial(1.0, 3, 0.0), 1.0);
    EXPECT_EQ(falling_factorial(1.0, 3, -1.0), 6.0);
    EXPECT_EQ(falling_factorial(4.0, 2, 1.0), 12.0);
}

TEST(FallingFactorial, VanishesPastUnitFractionSupport) {
    const double lambda = 1.0 / 49.0;
    EXPECT_GT(falling_factorial(1.0, 49, lambda), 0.0);
    EXPECT_EQ(falling_factorial(1.0, 50, lambda), 0.0);
    EXPECT_EQ(falling_factorial(1.0, 80, lambda), 0.0);
}

TEST(FallingFactorial, RecurrenceOverRandomInputs) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> xs(-4.0, 4.0);
    std::uniform_real_distribution<double> ls(-2.0, 2.0);
    std::uniform_int_distribution<int> ns(1, 25);
    for (int i = 0; i < 500; ++i) {
        const double x = xs(rng);
        const double l = ls(rng);
        const int n = ns(rng);
        const double lhs = falling_factorial(x, n, l);
        const double rhs = falling_factorial(x, n - 1, l) * (x - (n - 1) * l);
        EXPECT_NEAR(lhs, rhs, tol::kFallingFactorialRel * std::abs(rhs)) << x << ' ' << n << ' ' << l;
    }
}

TEST(FallingFactorial, SecondDifferenceIdentity) {
    for (double l : {-0.9, -0.25, 0.0, 0.3, 1.0}) {
        for (int k = 0; k < 20; ++k) {
            const double next = falling_factorial(1.0, k + 1, l);
            EXPECT_NEAR(falling_factorial(1.0, k + 2, l), next - l * (k + 1) * next,
                        1e-13 * std::abs(next) * (1 + k));
        }
    }
}

TEST(LogFallingFactorial, Examples) {
    const auto a = log_falling_factorial_one(0, -0.5);
    EXPECT_EQ(a.sign, 1);
    EXPECT_EQ(a.log_abs, 0.0);

    const auto b = log_falling_factorial_one(2, 1.0);
    EXPECT_EQ(b.sign, 0);
    EXPECT_EQ(b.log_abs, -std::numeric_limits<double>::infinity());
    EXPECT_EQ(b.value(), 0.0);

    const auto c = log_falling_factorial_one(3, -1.0);
    EXPECT_EQ(c.sign, 1);
    EXPECT_NEAR(c.log_abs, std::log(6.0), 1e-15);
}

TEST(LogFallingFactorial, TracksSign) {
    // (1)_{3,0.7} = 1 * 0.3 * (-0.4)
    const auto r = log_falling_factorial_one(3, 0.7);
    EXPECT_EQ(r.sign, -1);
    EXPECT_NEAR(r.value(), -0.12, 1e-15);
}

TEST(DegenerateExp, Examples) {
    EXPECT_DOUBLE_EQ(degenerate_exp(1.0, 2.0, 1.0), 3.0);
    EXPECT_DOUBLE_EQ(degenerate_exp(1.0, 1.0, 0.0), kE);
    EXPECT_NEAR(degenerate_exp(1.0, 1.0, -0.5), 4.0, 1e-14);
}

TEST(DegenerateExp, BranchPoint) {
    EXPECT_THROW(degenerate_exp(1.0, 2.0, -0.5), DomainError);
    EXPECT_THROW(degenerate_exp(1.0, 3.0, -0.5), DomainError);
    EXPECT_THROW(degenerate_expm1(2.0, -0.5), DomainError);
    EXPECT_NO_THROW(degenerate_exp(1.0, -100.0, 0.0));
}

TEST(DegenerateExp, ReciprocalIdentity) {
    for (double l : {-0.3, -0.1, 0.0, 0.5, 1.0}) {
        for (double t : {0.2, 1.0, 2.5}) {
            for (double x : {0.5, 1.0, 3.0}) {
                EXPECT_NEAR(degenerate_exp(x, t, l) * degenerate_exp(-x, t, l), 1.0,
                            tol::kDegenerateExpReciprocal);
            }
        }
    }
}

TEST(DegenerateExp, Expm1AgreesForSmallArgument) {
    // log1p(-5e-11)/(-0.5) = 1e-10 + 2.5e-21, then expm1 adds 5e-21.
    EXPECT_NEAR(degenerate_expm1(1e-10, -0.5), 1.000000000075e-10, 1e-24);
    EXPECT_NEAR(degenerate_expm1(1.0, 0.5), 1.25, 1e-15);
}

TEST(DegenerateExpPartial, Examples) {
    EXPECT_EQ(degenerate_exp_partial(3.0, 0, -0.2), 1.0);
    EXPECT_EQ(degenerate_exp_partial(1.0, 1, 1.0), 2.0);
    EXPECT_NEAR(degenerate_exp_partial(1.0, 200, -0.5), degenerate_exp(1.0, 1.0, -0.5), 1e-12);
}

TEST(DegenerateExpPartial, FiniteSupportIsExact) {
    // e_{1/2}(1) = 1.5^2; the series stops after k = 2.
    EXPECT_EQ(degenerate_exp_partial(1.0, 2, 0.5), 2.25);
    EXPECT_EQ(degenerate_exp_partial(1.0, 1000, 0.5), 2.25);
}

TEST(DegenerateExpPartial, MonotoneApproach) {
    for (double l : {-0.4, -0.1, 0.0}) {
        const double full = degenerate_exp(1.0, 2.0, l);
        double prev = std::abs(full - degenerate_exp_partial(2.0, 0, l));
        for (int b = 1; b < 250; ++b) {
            const double gap = std::abs(full - degenerate_exp_partial(2.0, b, l));
            EXPECT_LE(gap, prev + 1e-15 * full);
            prev = gap;
        }
        EXPECT_NEAR(prev, 0.0, tol::kPartialExpConvergence);
    }
}

TEST(DegenerateExpPartial, HugeBoundIsCheap) {
    EXPECT_NEAR(degenerate_exp_partial(2.0, std::numeric_limits<std::int64_t>::max(), -0.25),
                degenerate_exp(1.0, 2.0, -0.25), 1e-12);
}

TEST(StirlingClassical, Examples) {
    const auto t = stirling_classical(10);
    for (int n = 0; n <= 10; ++n) {
        EXPECT_EQ(t.at(n, n), 1.0);
    }
    EXPECT_EQ(t.at(4, 2), 7.0);
    EXPECT_EQ(t.at(3, 0), 0.0);
    EXPECT_EQ(t.at(2, 5), 0.0);
    EXPECT_EQ(t.exact(10, 4), 34105u);
}

TEST(StirlingClassical, ExactIntegersThroughRowTwenty) {
    const auto t = stirling_classical(22);
    // S_2(20, 10) = 5917584964655
    EXPECT_EQ(t.exact(20, 10), 5917584964655u);
    EXPECT_EQ(t.at(20, 10), 5917584964655.0);
    EXPECT_FALSE(t.exact(21, 10));
}

TEST(StirlingClassical, MatchesPartitionEnumeration) {
    const auto t = stirling_classical(10);
    for (int n = 0; n <= 10; ++n) {
        for (int k = 0; k <= n; ++k) {
            EXPECT_EQ(t.exact(n, k), verify::oracle_partitions_stirling(n, k)) << n << ',' << k;
        }
    }
}

TEST(StirlingDegenerate, DiagonalAndFirstColumn) {
    for (double l : {-0.9, -0.5, 0.3, 2.0}) {
        const auto t = stirling_degenerate(12, l);
        for (int n = 1; n <= 12; ++n) {
            EXPECT_EQ(t.at(n, n), 1.0);
            EXPECT_EQ(t.at(n, 0), 0.0);
            EXPECT_NEAR(t.at(n, 1), falling_factorial(1.0, n, l), 1e-12 * std::abs(t.at(n, 1)) + 1e-300);
        }
    }
}

TEST(StirlingDegenerate, LambdaOneIsIdentity) {
    const auto t = stirling_degenerate(8, 1.0);
    for (int n = 0; n <= 8; ++n) {
        for (int k = 0; k <= n; ++k) {
            EXPECT_EQ(t.at(n, k), n == k ? 1.0 : 0.0) << n << ',' << k;
        }
    }
}

TEST(StirlingDegenerate, RationalReferenceValues) {
    // Exact rationals from the alternating sum in rational arithmetic.
    EXPECT_NEAR(stirling_degenerate(5, -0.5).at(5, 2), 82.5, 1e-12);
    EXPECT_NEAR(stirling_degenerate(6, 0.5).at(6, 3), 1.875, 1e-13);
    EXPECT_NEAR(stirling_degenerate(20, -0.1).at(20, 10), 24582684829056.297, 1e-9 * 24582684829056.297);
}

TEST(StirlingDegenerate, NegativeMaxNThrows) { EXPECT_THROW(stirling_degenerate(-1, 0.0), DomainError); }

TEST(StirlingAltsum, Examples) {
    EXPECT_EQ(stirling_degenerate_altsum(2, 3, 0.1), 0.0);
    for (double l : {-0.7, 0.0, 0.25, 1.0}) {
        for (int k = 0; k <= 20; ++k) {
            EXPECT_NEAR(stirling_degenerate_altsum(k, k, l), 1.0, 1e-12);
        }
    }
    EXPECT_NEAR(stirling_degenerate_altsum(5, 2, -0.5), stirling_degenerate(5, -0.5).at(5, 2), 1e-10);
}

TEST(StirlingAltsum, AgreesWithRecurrenceThroughRowTwenty) {
    for (double l : {-0.9, -0.5, -0.1, 0.0, 0.5, 1.0}) {
        const auto t = stirling_degenerate(20, l);
        for (int n = 0; n <= 20; ++n) {
            for (int k = 0; k <= n; ++k) {
                const double a = t.at(n, k);
                const double b = stirling_degenerate_altsum(n, k, l);
                EXPECT_LE(std::abs(a - b), tol::kStirlingAltSumRel * std::max(std::abs(a), std::abs(b)))
                    << "lambda=" << l << " n=" << n << " k=" << k;
            }
        }
    }
}

TEST(WeightedStirlingRows, MatchPlainTriangleWhereBothFinite) {
    const double x = 0.7;
    const double l = -0.3;
    const auto w = weighted_stirling_rows(25, 4, l, x);
    const auto t = stirling_degenerate(25, l);
    for (int n = 0; n <= 25; ++n) {
        for (int k = 0; k <= std::min(n, 4); ++k) {
            const double expect = t.at(n, k) * std::pow(x, n) / std::tgamma(n + 1.0);
            EXPECT_NEAR(w[n][k], expect, 1e-12 * std::abs(expect) + 1e-300) << n << ',' << k;
        }
    }
}

TEST(BellClassical, Examples) {
    EXPECT_EQ(bell_classical(0, 3.7), 1.0);
    EXPECT_EQ(bell_classical(3, 1.0), 5.0);
    EXPECT_EQ(bell_classical(2, 2.0), 6.0);
    EXPECT_EQ(bell_classical(10, 1.0), 115975.0);
}

TEST(BellDegenerate, Examples) {
    EXPECT_EQ(bell_degenerate(0, 1.3, -0.2), 1.0);
    EXPECT_NEAR(bell_degenerate(1, 1.0, -0.5), 2.0, 1e-14);
    for (int n = 0; n <= 8; ++n) {
        EXPECT_EQ(bell_degenerate(n, 2.0, 0.0), bell_classical(n, 2.0));
    }
}

TEST(BellDegenerate, ReferenceValuesFromHighPrecisionSeries) {
    // Dobinski-type series summed at 40 digits.
    EXPECT_NEAR(bell_degenerate(3, 2.0, -0.25), 184.0, 1e-12 * 184.0);
    EXPECT_NEAR(bell_degenerate(5, 1.0, 0.5), 4.0, 1e-13);
    EXPECT_NEAR(bell_degenerate(4, 0.5, -1.5), 1432.0, 1e-11 * 1432.0);
    EXPECT_NEAR(bell_degenerate(6, 3.0, -0.1), 122042.41685012197, 1e-11 * 122042.41685012197);
}

TEST(BellDegenerate, ClosedFormMatchesSeries) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xs(0.1, 5.0);
    std::uniform_real_distribution<double> cs(-0.95, 0.0);
    for (int i = 0; i < 40; ++i) {
        const double x = xs(rng);
        const double l = cs(rng) / x;
        for (int n = 0; n <= 10; ++n) {
            const double closed = bell_degenerate(n, x, l);
            const double series = bell_degenerate(n, x, l, {}, BellMethod::series);
            EXPECT_LE(std::abs(closed - series), tol::kBellClosedVsSeriesRel * std::abs(series))
                << "x=" << x << " lambda=" << l << " n=" << n;
        }
    }
    for (int m : {1, 2, 3, 7}) {
        for (int n = 0; n <= 10; ++n) {
            const double closed = bell_degenerate(n, 1.5, 1.0 / m);
            const double series = bell_degenerate(n, 1.5, 1.0 / m, {}, BellMethod::series);
            EXPECT_LE(std::abs(closed - series), tol::kBellClosedVsSeriesRel * std::abs(series));
        }
    }
}

TEST(BellDegenerate, ContinuousAtLambdaZero) {
    for (double x : {0.5, 1.0, 2.0}) {
        for (int n = 0; n <= 8; ++n) {
            const double c = bell_classical(n, x);
            EXPECT_LT(std::abs(bell_degenerate(n, x, tol::kBellLimitLambda) - c) / c, tol::kBellLimitRel);
        }
    }
}

TEST(BellDegenerate, DomainAndConvergenceErrors) {
    EXPECT_THROW(bell_degenerate(2, 1.0, 0.7), DomainError);
    EXPECT_THROW(bell_degenerate(2, 2.0, -0.5), DomainError);
    EXPECT_THROW(bell_degenerate(2, 1.0, -0.9, SeriesControl{1e-15, 5}, BellMethod::series), ConvergenceError);
}

}  // namespace
