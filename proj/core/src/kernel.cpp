#include "dztp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dztp/errors.hpp"

namespace dztp {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string domain_message(double alpha, double lambda) {
    std::ostringstream os;
    os.precision(15);
    os << "invalid parameters alpha=" << alpha << " lambda=" << lambda
       << ": need alpha > 0 and lambda in (-1/alpha, 0] or lambda = 1/m for a positive integer m";
    return os.str();
}

}  // namespace

std::optional<int> unit_fraction_denominator(double lambda) noexcept {
    if (!(lambda > 0.0) || lambda > 1.0 + tol::kUnitFractionSnap) {
        return std::nullopt;
    }
    const double inv = 1.0 / lambda;
    if (inv > static_cast<double>(std::numeric_limits<int>::max())) {
        return std::nullopt;
    }
    const double m = std::nearbyint(inv);
    if (m < 1.0 || std::abs(m * lambda - 1.0) > tol::kUnitFractionSnap) {
        return std::nullopt;
    }
    return static_cast<int>(m);
}

DegeneracyParams::DegeneracyParams(double alpha, double lambda) : alpha_(alpha), lambda_(lambda) {
    if (!std::isfinite(alpha) || !(alpha > 0.0) || !std::isfinite(lambda)) {
        throw DomainError(domain_message(alpha, lambda));
    }
    if (lambda <= 0.0) {
        if (!(1.0 + alpha * lambda > 0.0)) {
            throw DomainError(domain_message(alpha, lambda));
        }
        return;
    }
    support_limit_ = unit_fraction_denominator(lambda);
    if (!support_limit_) {
        throw DomainError(domain_message(alpha, lambda));
    }
    lambda_ = 1.0 / *support_limit_;
}

bool DegeneracyParams::is_valid(double alpha, double lambda) noexcept {
    if (!std::isfinite(alpha) || !(alpha > 0.0) || !std::isfinite(lambda)) {
        return false;
    }
    if (lambda <= 0.0) {
        return 1.0 + alpha * lambda > 0.0;
    }
    return unit_fraction_denominator(lambda).has_value();
}

void SeriesControl::validate() const {
    if (!(rel_tail_tol > 0.0 && rel_tail_tol < 1.0)) {
        throw DomainError("series control: rel_tail_tol must lie in (0, 1)");
    }
    if (max_terms < 1) {
        throw DomainError("series control: max_terms must be >= 1");
    }
}

// The ratio is monotone in j towards |a lambda|, so the sup is attained at
// j = k or in the limit.
double series_ratio_bound(double a, std::int64_t k, double lambda) noexcept {
    const double kd = static_cast<double>(k);
    return std::abs(a) * std::max(std::abs(1.0 - kd * lambda) / (kd + 1.0), std::abs(lambda));
}

double lambda_factor(double x, int j, double lambda) noexcept {
    const double shift = j * lambda;
    const double f = x - shift;
    if (std::abs(f) <= 4.0 * kEps * std::max(std::abs(x), std::abs(shift))) {
        return 0.0;
    }
    return f;
}

double falling_factorial(double x, int n, double lambda) noexcept {
    double p = 1.0;
    for (int j = 0; j < n; ++j) {
        p *= lambda_factor(x, j, lambda);
        if (p == 0.0) {
            return 0.0;
        }
    }
    return p;
}

double SignedLog::value() const noexcept {
    return sign == 0 ? 0.0 : sign * std::exp(log_abs);
}

SignedLog log_falling_factorial(double x, int n, double lambda) noexcept {
    SignedLog out;
    for (int j = 0; j < n; ++j) {
        const double f = lambda_factor(x, j, lambda);
        if (f == 0.0) {
            return {0, kNegInf};
        }
        if (f < 0.0) {
            out.sign = -out.sign;
        }
        out.log_abs += std::log(std::abs(f));
    }
    return out;
}

double degenerate_exp(double x, double t, double lambda) {
    if (lambda == 0.0) {
        return std::exp(x * t);
    }
    const double base = 1.0 + lambda * t;
    if (!(base > 0.0)) {
        throw DomainError("degenerate exponential undefined: 1 + lambda*t <= 0");
    }
    // Extended precision: the exponent x log1p(lambda t) / lambda can be large
    // and exp amplifies its rounding error.
    const long double lt = static_cast<long double>(lambda) * t;
    return static_cast<double>(std::exp(x * std::log1p(lt) / lambda));
}

double degenerate_expm1(double t, double lambda) {
    if (lambda == 0.0) {
        return std::expm1(t);
    }
    if (!(1.0 + lambda * t > 0.0)) {
        throw DomainError("degenerate exponential undefined: 1 + lambda*t <= 0");
    }
    return std::expm1(std::log1p(lambda * t) / lambda);
}

double degenerate_exp_partial(double a, std::int64_t b, double lambda) noexcept {
    // Accumulated in extended precision so long partial sums stay within a
    // few ulps of the closed form.
    long double sum = 1.0L;
    long double term = 1.0L;
    for (std::int64_t k = 0; k < b; ++k) {
        const bool vanishes =
            k <= std::numeric_limits<int>::max() && lambda_factor(1.0, static_cast<int>(k), lambda) == 0.0;
        if (vanishes) {
            break;
        }
        const long double f = 1.0L - static_cast<long double>(k) * lambda;
        term *= a * f / static_cast<long double>(k + 1);
        sum += term;
        if (term == 0.0L) {
            break;
        }
        const double rho = series_ratio_bound(a, k + 1, lambda);
        if (rho < 1.0 && std::abs(term) * rho / (1.0 - rho) < 0x1p-66L * std::abs(sum)) {
            break;
        }
    }
    return static_cast<double>(sum);
}

StirlingTriangle::StirlingTriangle(double lambda, int max_n)
    : lambda_(lambda),
      max_n_(max_n),
      values_(static_cast<std::size_t>(max_n + 1) * (max_n + 2) / 2, 0.0) {}

double StirlingTriangle::at(int n, int k) const {
    if (n < 0 || n > max_n_ || k < 0) {
        throw DomainError("stirling triangle index out of range");
    }
    return k > n ? 0.0 : values_[index(n, k)];
}

std::span<const double> StirlingTriangle::row(int n) const {
    if (n < 0 || n > max_n_) {
        throw DomainError("stirling triangle row out of range");
    }
    return {values_.data() + index(n, 0), static_cast<std::size_t>(n) + 1};
}

std::optional<std::uint64_t> StirlingTriangle::exact(int n, int k) const {
    if (n < 0 || k < 0 || n > max_n_ || index(n, n) >= exact_.size()) {
        return std::nullopt;
    }
    return k > n ? 0 : exact_[index(n, k)];
}

StirlingTriangle stirling_degenerate(int max_n, double lambda) {
    if (max_n < 0) {
        throw DomainError("stirling triangle: max_n must be >= 0");
    }
    StirlingTriangle tri(lambda, max_n);
    auto& v = tri.values_;
    v[0] = 1.0;

    if (lambda == 0.0) {
        const int exact_rows = std::min(max_n, tol::kExactStirlingMaxN);
        auto& e = tri.exact_;
        e.assign(static_cast<std::size_t>(exact_rows + 1) * (exact_rows + 2) / 2, 0);
        e[0] = 1;
        for (int n = 0; n < exact_rows; ++n) {
            for (int k = 1; k <= n + 1; ++k) {
                const std::uint64_t same = k <= n ? e[tri.index(n, k)] : 0;
                e[tri.index(n + 1, k)] = static_cast<std::uint64_t>(k) * same + e[tri.index(n, k - 1)];
            }
        }
        for (std::size_t i = 0; i < e.size(); ++i) {
            v[i] = static_cast<double>(e[i]);
        }
        for (int n = exact_rows; n < max_n; ++n) {
            for (int k = 1; k <= n + 1; ++k) {
                const double same = k <= n ? v[tri.index(n, k)] : 0.0;
                v[tri.index(n + 1, k)] = k * same + v[tri.index(n, k - 1)];
            }
        }
        return tri;
    }

    for (int n = 0; n < max_n; ++n) {
        for (int k = 1; k <= n + 1; ++k) {
            const double same = k <= n ? v[tri.index(n, k)] : 0.0;
            v[tri.index(n + 1, k)] = lambda_factor(k, n, lambda) * same + v[tri.index(n, k - 1)];
        }
    }
    return tri;
}

StirlingTriangle stirling_classical(int max_n) { return stirling_degenerate(max_n, 0.0); }

std::vector<std::vector<double>> weighted_stirling_rows(int max_n, int max_k, double lambda,
                                                        double x) {
    if (max_n < 0 || max_k < 0) {
        throw DomainError("weighted stirling rows: negative size");
    }
    std::vector<std::vector<double>> w(static_cast<std::size_t>(max_n) + 1,
                                       std::vector<double>(static_cast<std::size_t>(max_k) + 1, 0.0));
    w[0][0] = 1.0;
    for (int n = 0; n < max_n; ++n) {
        const double scale = x / (n + 1);
        const int top = std::min(n + 1, max_k);
        for (int k = 1; k <= top; ++k) {
            const double same = k <= n ? w[n][k] : 0.0;
            w[n + 1][k] = scale * (lambda_factor(k, n, lambda) * same + w[n][k - 1]);
        }
    }
    return w;
}

double stirling_degenerate_altsum(int n, int k, double lambda) {
    if (n < 0 || k < 0) {
        throw DomainError("stirling altsum: negative index");
    }
    if (n < k) {
        return 0.0;
    }
    // The terms reach k^n while the result is O(1), so the sum is carried in
    // 50-digit floating point. Exact zeros of l - j*lambda are taken from
    // lambda_factor so unit-fraction lambdas behave as in the recurrence.
    using Wide = boost::multiprecision::cpp_bin_float_50;
    const Wide wl(lambda);
    Wide sum = 0;
    Wide binom = 1;
    for (int l = 0; l <= k; ++l) {
        if (l > 0) {
            binom = binom * (k - l + 1) / l;
        }
        Wide ff = 1;
        for (int j = 0; j < n && ff != 0; ++j) {
            ff = lambda_factor(l, j, lambda) == 0.0 ? Wide(0) : ff * (Wide(l) - j * wl);
        }
        sum += ((k - l) % 2 == 0) ? binom * ff : -binom * ff;
    }
    Wide fact = 1;
    for (int i = 2; i <= k; ++i) {
        fact *= i;
    }
    return static_cast<double>(sum / fact);
}

double bell_classical(int n, double x) {
    if (n < 0) {
        throw DomainError("bell polynomial: n must be >= 0");
    }
    const auto tri = stirling_classical(n);
    const auto row = tri.row(n);
    double acc = 0.0;
    for (int k = n; k >= 0; --k) {
        acc = acc * x + row[k];
    }
    return acc;
}

namespace {

double bell_closed_form(int n, double x, double lambda) {
    if (lambda == 0.0) {
        return bell_classical(n, x);
    }
    const auto tri = stirling_classical(n);
    const auto row = tri.row(n);
    const double u = x / (1.0 + lambda * x);
    double sum = 0.0;
    double weight = 1.0;  // (1)_{j,lambda} u^j
    for (int j = 0; j <= n; ++j) {
        if (j > 0) {
            weight *= lambda_factor(1.0, j - 1, lambda) * u;
        }
        sum += row[j] * weight;
        if (weight == 0.0) {
            break;
        }
    }
    return sum;
}

double bell_series(int n, double x, double lambda, const SeriesControl& ctl) {
    ctl.validate();
    double coef = 1.0;  // x^k (1)_{k,lambda} / k!
    double sum = n == 0 ? 1.0 : 0.0;
    for (int k = 0; k < ctl.max_terms; ++k) {
        coef *= x * lambda_factor(1.0, k, lambda) / (k + 1);
        if (coef == 0.0) {
            return sum / degenerate_exp(1.0, x, lambda);
        }
        const double kk = k + 1.0;
        const double term = std::pow(kk, n) * coef;
        sum += term;
        const double growth = std::pow((kk + 1.0) / kk, n);
        const double rho = growth * series_ratio_bound(x, k + 1, lambda);
        if (rho < 1.0 && term * rho / (1.0 - rho) < ctl.rel_tail_tol * sum) {
            return sum / degenerate_exp(1.0, x, lambda);
        }
    }
    throw ConvergenceError("degenerate Bell series: max_terms reached before tail bound was met");
}

}  // namespace

double bell_degenerate(int n, double x, double lambda, const SeriesControl& ctl, BellMethod method) {
    if (n < 0) {
        throw DomainError("degenerate Bell polynomial: n must be >= 0");
    }
    const DegeneracyParams p(x, lambda);
    if (method == BellMethod::series) {
        return bell_series(n, p.alpha(), p.lambda(), ctl);
    }
    return bell_closed_form(n, p.alpha(), p.lambda());
}

}  // namespace dztp
