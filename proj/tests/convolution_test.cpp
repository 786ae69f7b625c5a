#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dztp/convolution.hpp"
#include "dztp/errors.hpp"

namespace {

using namespace dztp;

// mpmath, 40 digits.
constexpr double kClassicalPairAtTwo = 0.33869688733846589456;  // 1/(e-1)^2
constexpr double kHeteroOneTwoAtTwo = 0.1821792445888002427;    // 2/((e-1)(e^2-1))

IidSumSpec iid(int k, double a, double l) { return IidSumSpec(k, DegeneracyParams(a, l)); }

TEST(IidSumSpec, RequiresAtLeastOneSummand) {
    EXPECT_THROW(iid(0, 1.0, 0.0), DomainError);
    EXPECT_THROW(HeteroSumSpec(0.0, {}), DomainError);
    EXPECT_THROW(HeteroSumSpec(-0.6, {1.0, 2.0}), DomainError);
}

TEST(IidSumPmf, Examples) {
    EXPECT_EQ(iid_sum_pmf(iid(3, 2.0, -0.2), 2), 0.0);
    EXPECT_NEAR(iid_sum_pmf(iid(3, 2.0, 1.0), 3), 1.0, 1e-15);
    EXPECT_NEAR(iid_sum_pmf(iid(2, 1.0, 0.5), 2), 0.64, 1e-15);
    EXPECT_NEAR(iid_sum_pmf(iid(2, 1.0, 0.0), 2), kClassicalPairAtTwo, 1e-15);
    // Alternating sum at 40 digits.
    EXPECT_NEAR(iid_sum_pmf(iid(3, 2.0, -0.25), 7), 0.050666666666666666667, 1e-15);
    EXPECT_NEAR(iid_sum_pmf(iid(5, 5.0, -0.1), 30), 0.0044779165586796544239, 1e-12 * 0.0045);
}

TEST(IidSumPmfAltsum, Examples) {
    const DztpDist d(DegeneracyParams(2.0, -0.3));
    for (int n = 1; n <= 25; ++n) {
        EXPECT_NEAR(iid_sum_pmf_altsum(iid(1, 2.0, -0.3), n), d.pmf(n), 1e-12 * d.pmf(n));
    }
    EXPECT_NEAR(iid_sum_pmf_altsum(iid(2, 1.0, 0.5), 2), 0.64, 1e-15);
    EXPECT_NEAR(iid_sum_pmf_altsum(iid(2, 1.0, 0.0), 2), kClassicalPairAtTwo, 1e-15);
    EXPECT_EQ(iid_sum_pmf_altsum(iid(4, 1.0, 0.0), 3), 0.0);
}

TEST(IidSum, ThreeEvaluationsAgree) {
    for (auto [a, l] : {std::pair{0.5, -1.8}, {1.0, -0.5}, {2.0, -0.1}, {5.0, 0.0}, {2.0, 0.5}, {5.0, 1.0}}) {
        for (int k = 1; k <= 5; ++k) {
            const auto spec = iid(k, a, l);
            const auto conv = iid_sum_convolution_table(spec);
            for (int n = k; n <= 30; ++n) {
                const double c = iid_sum_pmf(spec, n);
                const double s = iid_sum_pmf_altsum(spec, n);
                EXPECT_LE(std::abs(c - s), tol::kIidAltSumRel * std::max(c, s)) << a << ' ' << l << ' ' << k << ' ' << n;
                EXPECT_NEAR(c, conv.at(n), tol::kIidConvolutionAbs);
            }
        }
    }
}

TEST(IidSum, LargeSupportStaysFinite) {
    // S_{2,lambda}(n,k) overflows here; the weighted rows keep the table finite.
    const auto t = iid_sum_table(iid(3, 0.5, -1.8));
    EXPECT_GT(t.support_end(), 300);
    for (double p : t.probs) {
        ASSERT_TRUE(std::isfinite(p));
        ASSERT_GE(p, 0.0);
    }
    EXPECT_NEAR(t.total() + t.tail_mass, 1.0, 1e-12);
}

TEST(IidSumTable, Examples) {
    const auto point = iid_sum_table(iid(2, 3.0, 1.0));
    EXPECT_EQ(point.support_start, 2);
    ASSERT_EQ(point.probs.size(), 1u);
    EXPECT_NEAR(point.probs[0], 1.0, 1e-15);

    const auto two = iid_sum_table(iid(2, 1.0, 0.5));
    ASSERT_EQ(two.probs.size(), 3u);
    EXPECT_NEAR(two.at(2), 0.64, 1e-15);
    EXPECT_NEAR(two.at(3), 0.32, 1e-15);
    EXPECT_NEAR(two.at(4), 0.04, 1e-15);

    const auto classical = iid_sum_table(iid(3, 1.0, 0.0), 1e-12);
    EXPECT_NEAR(classical.total() + classical.tail_mass, 1.0, 1e-12);
}

TEST(IidSum, PgfFactorizes) {
    const DegeneracyParams p(2.0, -0.3);
    const DztpDist d(p);
    for (int k = 1; k <= 5; ++k) {
        const auto t = iid_sum_table(IidSumSpec(k, p));
        for (double s : {0.25, 0.5, 0.9}) {
            double acc = 0.0;
            for (auto n = t.support_start; n <= t.support_end(); ++n) {
                acc += t.at(n) * std::pow(s, static_cast<double>(n));
            }
            EXPECT_NEAR(acc, std::pow(d.pgf(s), k), tol::kPgfFactorization);
        }
        EXPECT_NEAR(t.raw_moment(1), k * d.mean(), tol::kMeanAdditivityRel * k * d.mean());
    }
}

TEST(Convolve, TailsAddAndSupportShifts) {
    PmfTable a{1, {0.5, 0.5}, 1e-3};
    PmfTable b{2, {0.25, 0.75}, 2e-3};
    const auto c = convolve(a, b);
    EXPECT_EQ(c.support_start, 3);
    ASSERT_EQ(c.probs.size(), 3u);
    EXPECT_DOUBLE_EQ(c.probs[0], 0.125);
    EXPECT_DOUBLE_EQ(c.probs[1], 0.5);
    EXPECT_DOUBLE_EQ(c.probs[2], 0.375);
    EXPECT_DOUBLE_EQ(c.tail_mass, 3e-3);
    EXPECT_THROW(convolve_all({}), DomainError);
}

TEST(HeteroSumPmf, Examples) {
    const DztpDist d(DegeneracyParams(1.5, -0.2));
    const HeteroSumSpec single(-0.2, {1.5});
    for (int n = 1; n <= 15; ++n) {
        EXPECT_NEAR(hetero_sum_pmf(single, n), d.pmf(n), 1e-15);
        EXPECT_NEAR(hetero_sum_pmf(single, n, HeteroMethod::enumeration), d.pmf(n), 1e-15);
    }
    const HeteroSumSpec pair(0.0, {1.0, 2.0});
    EXPECT_NEAR(hetero_sum_pmf(pair, 2), kHeteroOneTwoAtTwo, 1e-15);
    EXPECT_NEAR(hetero_sum_pmf(pair, 2, HeteroMethod::enumeration), kHeteroOneTwoAtTwo, 1e-15);
    EXPECT_EQ(hetero_sum_pmf(pair, 1), 0.0);
}

TEST(HeteroSumPmf, EqualRatesMatchClosedForm) {
    const HeteroSumSpec spec(-0.1, {2.0, 2.0, 2.0});
    for (int n = 3; n <= 15; ++n) {
        const double c = iid_sum_pmf(iid(3, 2.0, -0.1), n);
        EXPECT_NEAR(hetero_sum_pmf(spec, n), c, tol::kHeteroAbs);
        EXPECT_NEAR(hetero_sum_pmf(spec, n, HeteroMethod::enumeration), c, tol::kHeteroAbs);
    }
}

TEST(HeteroSumPmf, EnumerationMatchesConvolution) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> as(0.2, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 2 + trial % 3;
        std::vector<double> alphas;
        for (int i = 0; i < k; ++i) {
            alphas.push_back(as(rng));
        }
        const double amax = *std::max_element(alphas.begin(), alphas.end());
        const double lambda = -0.9 / amax * (trial % 2);
        const HeteroSumSpec spec(lambda, alphas);
        const auto table = hetero_sum_table(spec);
        for (int n = k; n <= 15; ++n) {
            EXPECT_NEAR(hetero_sum_pmf(spec, n, HeteroMethod::enumeration), table.at(n), tol::kHeteroAbs);
        }
    }
}

TEST(HeteroSumPmf, PermutationInvariant) {
    const HeteroSumSpec a(-0.1, {0.5, 2.0, 5.0});
    const HeteroSumSpec b(-0.1, {5.0, 0.5, 2.0});
    for (int n = 3; n <= 40; ++n) {
        EXPECT_NEAR(hetero_sum_pmf(a, n), hetero_sum_pmf(b, n), tol::kHeteroAbs);
    }
}

TEST(HeteroSumPmf, EnumerationCap) {
    const HeteroSumSpec spec(0.0, {1.0, 2.0});
    EXPECT_NO_THROW(hetero_sum_pmf(spec, 15, HeteroMethod::enumeration));
    EXPECT_THROW(hetero_sum_pmf(spec, 16, HeteroMethod::enumeration), CombinatorialLimitError);
    const HeteroSumSpec five(0.0, {1, 1, 1, 1, 2});
    EXPECT_THROW(hetero_sum_pmf(five, 6, HeteroMethod::enumeration), CombinatorialLimitError);
}

TEST(HeteroSumTable, MeanAdditivity) {
    const HeteroSumSpec spec(-0.05, {0.5, 2.0, 5.0, 1.0});
    double expect = 0.0;
    for (const auto& d : spec.summands()) {
        expect += d.mean();
    }
    const auto t = hetero_sum_table(spec);
    EXPECT_NEAR(t.raw_moment(1), expect, tol::kMeanAdditivityRel * expect);
    EXPECT_NEAR(t.total() + t.tail_mass, 1.0, 1e-12);
}

}  // namespace
