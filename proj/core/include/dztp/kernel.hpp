#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dztp/tolerances.hpp"

namespace dztp {

/// Rate alpha and degeneracy lambda of a degenerate (zero-truncated) Poisson law.
///
/// Construction enforces the domain on which the mass function is a genuine
/// probability law: alpha > 0 and either -1/alpha < lambda <= 0, or
/// lambda = 1/m for a positive integer m. In the second case the support is
/// finite ({1, ..., m} after truncation) and lambda is stored as exactly 1.0/m.
class DegeneracyParams {
public:
    /// Throws DomainError outside the valid domain.
    DegeneracyParams(double alpha, double lambda);

    double alpha() const noexcept { return alpha_; }
    double lambda() const noexcept { return lambda_; }

    /// m when lambda == 1/m, i.e. the largest value with positive mass.
    std::optional<int> support_limit() const noexcept { return support_limit_; }

    static bool is_valid(double alpha, double lambda) noexcept;

    friend bool operator==(const DegeneracyParams&, const DegeneracyParams&) = default;

private:
    double alpha_;
    double lambda_;
    std::optional<int> support_limit_;
};

/// Truncation policy for infinite series.
struct SeriesControl {
    double rel_tail_tol = tol::kSeriesRelTail;
    int max_terms = tol::kSeriesMaxTerms;

    /// Throws DomainError unless 0 < rel_tail_tol < 1 and max_terms >= 1.
    void validate() const;
};

/// m if lambda is within rounding of 1/m for a positive integer m.
std::optional<int> unit_fraction_denominator(double lambda) noexcept;

/// x - j*lambda, returned as exactly 0 when the difference is within a few
/// ulps of zero. (x)_{n,lambda} vanishes precisely on such factors.
double lambda_factor(double x, int j, double lambda) noexcept;

/// Sup over j >= k of |a (1 - j lambda) / (j + 1)|, the ratio bound for
/// successive terms a^j (1)_{j,lambda} / j! from index k on.
double series_ratio_bound(double a, std::int64_t k, double lambda) noexcept;

/// (x)_{n,lambda} = x (x - lambda) ... (x - (n-1) lambda); 1 for n == 0.
double falling_factorial(double x, int n, double lambda) noexcept;

/// Value carried as sign * exp(log_abs). sign == 0 means exactly zero.
struct SignedLog {
    int sign = 1;
    double log_abs = 0.0;

    double value() const noexcept;
};

SignedLog log_falling_factorial(double x, int n, double lambda) noexcept;

/// Log-space (1)_{n,lambda}.
inline SignedLog log_falling_factorial_one(int n, double lambda) noexcept {
    return log_falling_factorial(1.0, n, lambda);
}

/// e_lambda^x(t) = (1 + lambda t)^(x / lambda); exp(x t) when lambda == 0.
/// Throws DomainError when lambda != 0 and 1 + lambda t <= 0.
double degenerate_exp(double x, double t, double lambda);

/// e_lambda(t) - 1 without cancellation for small t. Same domain as degenerate_exp.
double degenerate_expm1(double t, double lambda);

/// e_{lambda,b}(a) = sum_{k=0}^{b} a^k (1)_{k,lambda} / k!.
///
/// Stops early once the remaining terms are exactly zero or provably below
/// the last bit of the partial sum, so huge b is cheap.
double degenerate_exp_partial(double a, std::int64_t b, double lambda) noexcept;

/// Triangle of S_{2,lambda}(n, k), 0 <= k <= n <= max_n. Immutable.
class StirlingTriangle {
public:
    double lambda() const noexcept { return lambda_; }
    int max_n() const noexcept { return max_n_; }

    /// S_{2,lambda}(n, k); 0 for k > n. Requires n <= max_n.
    double at(int n, int k) const;
    std::span<const double> row(int n) const;

    /// Integer value for the classical triangle (lambda == 0, n <= 20).
    std::optional<std::uint64_t> exact(int n, int k) const;

private:
    friend StirlingTriangle stirling_degenerate(int max_n, double lambda);

    StirlingTriangle(double lambda, int max_n);

    std::size_t index(int n, int k) const noexcept {
        return static_cast<std::size_t>(n) * (n + 1) / 2 + k;
    }

    double lambda_;
    int max_n_;
    std::vector<double> values_;
    std::vector<std::uint64_t> exact_;
};

/// S_{2,lambda} by S(n+1,k) = (k - n lambda) S(n,k) + S(n,k-1).
/// Any real lambda. lambda == 0 rows up to n = 20 are computed in integers.
StirlingTriangle stirling_degenerate(int max_n, double lambda);

/// Classical S_2(n, k); the lambda == 0 triangle.
StirlingTriangle stirling_classical(int max_n);

/// Rows W[n][k] = S_{2,lambda}(n, k) x^n / n! for n <= max_n, k <= max_k.
///
/// Same recurrence as stirling_degenerate with each row rescaled by
/// x / (n + 1), which keeps entries finite where S_{2,lambda} itself
/// overflows (large n with lambda < 0).
std::vector<std::vector<double>> weighted_stirling_rows(int max_n, int max_k, double lambda,
                                                        double x);

/// (1/k!) sum_{l=0}^{k} C(k,l) (-1)^{k-l} (l)_{n,lambda}; 0 when n < k.
double stirling_degenerate_altsum(int n, int k, double lambda);

/// Bel_n(x) = sum_k S_2(n, k) x^k.
double bell_classical(int n, double x);

enum class BellMethod {
    closed_form,  ///< sum_j S_2(n,j) (1)_{j,lambda} (x / (1 + lambda x))^j
    series,       ///< e_lambda^{-1}(x) sum_k k^n x^k (1)_{k,lambda} / k!, truncated
};

/// Degenerate Bell polynomial beta_{n,lambda}(x).
///
/// (x, lambda) must satisfy the DegeneracyParams domain; DomainError
/// otherwise. Series mode throws ConvergenceError if ctl.max_terms is reached
/// before the certified tail falls below ctl.rel_tail_tol of the sum.
/// Closed-form mode at lambda == 0 is exactly bell_classical(n, x).
double bell_degenerate(int n, double x, double lambda, const SeriesControl& ctl = {},
                       BellMethod method = BellMethod::closed_form);

}  // namespace dztp
