#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "dztp/kernel.hpp"

namespace dztp {

/// Finite slice of a mass function on {support_start, support_start + 1, ...}.
///
/// tail_mass is a certified upper bound on the probability of every value
/// past the last entry.
struct PmfTable {
    std::int64_t support_start = 1;
    std::vector<double> probs;
    double tail_mass = 0.0;

    std::int64_t support_end() const noexcept {
        return support_start + static_cast<std::int64_t>(probs.size()) - 1;
    }
    /// Probability at n, 0 outside the tabulated range.
    double at(std::int64_t n) const noexcept;
    double total() const noexcept;
    /// sum_n n^order p(n) over the table.
    double raw_moment(int order) const noexcept;
};

/// Untruncated degenerate Poisson law on {0, 1, 2, ...}.
class DegeneratePoissonDist {
public:
    explicit DegeneratePoissonDist(DegeneracyParams params) : params_(params) {}

    const DegeneracyParams& params() const noexcept { return params_; }

    /// e_lambda^{-1}(alpha) alpha^i (1)_{i,lambda} / i!.
    double pmf(std::int64_t i) const;

private:
    DegeneracyParams params_;
};

/// Degenerate zero-truncated Poisson law on {1, 2, ...}.
class DztpDist {
public:
    explicit DztpDist(DegeneracyParams params);

    const DegeneracyParams& params() const noexcept { return params_; }
    double alpha() const noexcept { return params_.alpha(); }
    double lambda() const noexcept { return params_.lambda(); }

    /// e_lambda(alpha) - 1, the normalizing constant.
    double normalizer() const noexcept { return normalizer_; }

    /// P(n) = alpha^n (1)_{n,lambda} / (n! (e_lambda(alpha) - 1)).
    /// Direct product for n <= 20, log space above. DomainError for n < 1.
    double pmf(std::int64_t n) const;

    /// log P(n); -infinity where P(n) is exactly zero.
    double log_pmf(std::int64_t n) const;

    /// Table from n = 1 until the certified geometric tail drops below
    /// tail_tol. Exact (tail_mass == 0) when lambda == 1/m.
    PmfTable table(double tail_tol = tol::kTableTail, int max_terms = tol::kSeriesMaxTerms) const;

    /// (e_{lambda,[x]}(alpha) - 1) / (e_lambda(alpha) - 1); 0 for x < 1.
    double cdf(double x) const;

    double mean() const noexcept;
    /// Negative results within rounding of zero are returned as 0.
    double variance() const noexcept;
    /// E[X^n] = beta_{n,lambda}(alpha) / (1 - e_lambda^{-1}(alpha)).
    double moment(int n, const SeriesControl& ctl = {}) const;

    /// E[e^{tX}]. DomainError unless 1 + lambda alpha e^t > 0.
    double mgf(double t) const;
    /// E[s^X]. DomainError unless 1 + lambda alpha s > 0.
    double pgf(double s) const;

private:
    DegeneracyParams params_;
    double normalizer_;
};

enum class SampleMethod { inverse_cdf_sequential };

std::string_view to_string(SampleMethod m) noexcept;

/// Seeded source of DZTP variates. Single owner; not for concurrent use.
///
/// A given (seed, method, params) reproduces the same variates on one
/// platform: uniforms come from mt19937_64 mapped to (0, 1) by taking the top
/// 53 bits, and the inverse-CDF walk uses the ratio recurrence
/// P(n+1) = P(n) alpha (1 - n lambda) / (n + 1) in a fixed order.
class SampleStream {
public:
    SampleStream(std::uint64_t seed, DegeneracyParams params,
                 SampleMethod method = SampleMethod::inverse_cdf_sequential,
                 int max_terms = tol::kSeriesMaxTerms);

    std::uint64_t seed() const noexcept { return seed_; }
    SampleMethod method() const noexcept { return method_; }
    const DegeneracyParams& params() const noexcept { return params_; }

    /// Uniform in the open interval (0, 1).
    double next_uniform() noexcept;
    /// One DZTP variate.
    std::int64_t next();

private:
    std::uint64_t seed_;
    DegeneracyParams params_;
    SampleMethod method_;
    int max_terms_;
    std::mt19937_64 engine_;
    double ratio_scale_;
    // Running sums P(1) + ... + P(i + 1), extended on demand.
    std::vector<double> cumulative_;
    double last_prob_;
    bool exhausted_ = false;
};

/// count independent draws. DomainError if the stream belongs to other params.
std::vector<std::int64_t> sample(const DztpDist& dist, SampleStream& stream, std::size_t count);

}  // namespace dztp
