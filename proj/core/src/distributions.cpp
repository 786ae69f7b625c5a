#include "dztp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dztp/errors.hpp"

namespace dztp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// alpha^n (1)_{n,lambda} / n!, direct for small n and via logs above.
double poisson_weight(double alpha, std::int64_t n, double lambda) {
    if (n <= tol::kDirectPmfMaxN) {
        const int ni = static_cast<int>(n);
        return std::pow(alpha, ni) * falling_factorial(1.0, ni, lambda) / std::tgamma(ni + 1.0);
    }
    const auto ff = log_falling_factorial_one(static_cast<int>(n), lambda);
    if (ff.sign == 0) {
        return 0.0;
    }
    const double nd = static_cast<double>(n);
    return ff.sign * std::exp(nd * std::log(alpha) + ff.log_abs - std::lgamma(nd + 1.0));
}

double log_poisson_weight(double alpha, std::int64_t n, double lambda) {
    const auto ff = log_falling_factorial_one(static_cast<int>(n), lambda);
    if (ff.sign <= 0) {
        return kNegInf;
    }
    const double nd = static_cast<double>(n);
    return nd * std::log(alpha) + ff.log_abs - std::lgamma(nd + 1.0);
}

bool beyond_support(const DegeneracyParams& p, std::int64_t n) {
    return p.support_limit() && n > *p.support_limit();
}

}  // namespace

double PmfTable::at(std::int64_t n) const noexcept {
    if (n < support_start || n > support_end()) {
        return 0.0;
    }
    return probs[static_cast<std::size_t>(n - support_start)];
}

double PmfTable::total() const noexcept {
    return std::accumulate(probs.begin(), probs.end(), 0.0);
}

double PmfTable::raw_moment(int order) const noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += std::pow(static_cast<double>(support_start + static_cast<std::int64_t>(i)), order) *
               probs[i];
    }
    return acc;
}

double DegeneratePoissonDist::pmf(std::int64_t i) const {
    if (i < 0) {
        throw DomainError("degenerate Poisson pmf: i must be >= 0");
    }
    if (beyond_support(params_, i)) {
        return 0.0;
    }
    const double e = degenerate_exp(1.0, params_.alpha(), params_.lambda());
    return poisson_weight(params_.alpha(), i, params_.lambda()) / e;
}

DztpDist::DztpDist(DegeneracyParams params)
    : params_(params), normalizer_(degenerate_expm1(params.alpha(), params.lambda())) {}

double DztpDist::pmf(std::int64_t n) const {
    if (n < 1) {
        throw DomainError("zero-truncated pmf: n must be >= 1");
    }
    if (beyond_support(params_, n)) {
        return 0.0;
    }
    return poisson_weight(alpha(), n, lambda()) / normalizer_;
}

double DztpDist::log_pmf(std::int64_t n) const {
    if (n < 1) {
        throw DomainError("zero-truncated pmf: n must be >= 1");
    }
    if (beyond_support(params_, n)) {
        return kNegInf;
    }
    return log_poisson_weight(alpha(), n, lambda()) - std::log(normalizer_);
}

PmfTable DztpDist::table(double tail_tol, int max_terms) const {
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
        throw DomainError("pmf table: tail_tol must lie in (0, 1)");
    }
    PmfTable out;
    double p = alpha() / normalizer_;
    if (const auto m = params_.support_limit()) {
        if (*m > max_terms) {
            throw ConvergenceError("pmf table: finite support exceeds max_terms");
        }
        out.probs.reserve(static_cast<std::size_t>(*m));
        for (int n = 1; n <= *m; ++n) {
            out.probs.push_back(p);
            p *= alpha() * lambda_factor(1.0, n, lambda()) / (n + 1);
        }
        return out;
    }
    for (int n = 1; n <= max_terms; ++n) {
        out.probs.push_back(p);
        const double rho = series_ratio_bound(alpha(), n, lambda());
        if (rho < 1.0) {
            const double tail = p * rho / (1.0 - rho);
            if (tail < tail_tol) {
                out.tail_mass = tail;
                return out;
            }
        }
        p *= alpha() * lambda_factor(1.0, n, lambda()) / (n + 1);
    }
    throw ConvergenceError("pmf table: max_terms reached before the tail bound was met");
}

double DztpDist::cdf(double x) const {
    if (!(x >= 1.0)) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    const double fl = std::floor(x);
    if (const auto m = params_.support_limit(); m && fl >= *m) {
        return 1.0;
    }
    const auto b = fl >= 9.0e18 ? std::numeric_limits<std::int64_t>::max()
                                : static_cast<std::int64_t>(fl);
    const double v = (degenerate_exp_partial(alpha(), b, lambda()) - 1.0) / normalizer_;
    return std::clamp(v, 0.0, 1.0);
}

double DztpDist::mean() const noexcept {
    const double a = alpha();
    return a / (1.0 + a * lambda()) * ((1.0 + normalizer_) / normalizer_);
}

double DztpDist::variance() const noexcept {
    const double a = alpha();
    const double s = 1.0 + a * lambda();
    const double second = a * (1.0 + a) / (s * s) * ((1.0 + normalizer_) / normalizer_);
    const double m = mean();
    const double v = second - m * m;
    if (std::abs(v) <= tol::kVarianceClamp * second) {
        return 0.0;
    }
    return v;
}

double DztpDist::moment(int n, const SeriesControl& ctl) const {
    if (n < 0) {
        throw DomainError("moment order must be >= 0");
    }
    if (n == 0) {
        return 1.0;
    }
    const double beta = bell_degenerate(n, alpha(), lambda(), ctl);
    return beta * ((1.0 + normalizer_) / normalizer_);
}

double DztpDist::mgf(double t) const {
    const double y = alpha() * std::exp(t);
    if (!(1.0 + lambda() * y > 0.0)) {
        throw DomainError("moment generating function does not exist at this t");
    }
    return degenerate_expm1(y, lambda()) / normalizer_;
}

double DztpDist::pgf(double s) const {
    const double y = alpha() * s;
    if (!(1.0 + lambda() * y > 0.0)) {
        throw DomainError("probability generating function undefined: 1 + lambda*alpha*s <= 0");
    }
    return degenerate_expm1(y, lambda()) / normalizer_;
}

std::string_view to_string(SampleMethod m) noexcept {
    switch (m) {
        case SampleMethod::inverse_cdf_sequential:
            return "inverse-cdf-sequential";
    }
    return "unknown";
}

SampleStream::SampleStream(std::uint64_t seed, DegeneracyParams params, SampleMethod method,
                           int max_terms)
    : seed_(seed),
      params_(params),
      method_(method),
      max_terms_(max_terms),
      engine_(seed),
      ratio_scale_(params.alpha()),
      last_prob_(params.alpha() / degenerate_expm1(params.alpha(), params.lambda())) {
    cumulative_.push_back(last_prob_);
}

double SampleStream::next_uniform() noexcept {
    // (k + 0.5) / 2^53 for k uniform on [0, 2^53).
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
}

std::int64_t SampleStream::next() {
    const double u = next_uniform();
    std::size_t i = 0;
    while (true) {
        if (i == cumulative_.size()) {
            if (exhausted_) {
                return static_cast<std::int64_t>(i);
            }
            const int n = static_cast<int>(i);  // extending with P(n + 1)
            if (n >= max_terms_) {
                throw ConvergenceError("sampler: search exceeded max_terms");
            }
            last_prob_ *= ratio_scale_ * lambda_factor(1.0, n, params_.lambda()) / (n + 1);
            if (last_prob_ <= 0.0) {
                // Finite support end, or the mass underflowed.
                exhausted_ = true;
                return static_cast<std::int64_t>(i);
            }
            cumulative_.push_back(cumulative_.back() + last_prob_);
        }
        if (cumulative_[i] > u) {
            return static_cast<std::int64_t>(i) + 1;
        }
        ++i;
    }
}

std::vector<std::int64_t> sample(const DztpDist& dist, SampleStream& stream, std::size_t count) {
    if (!(dist.params() == stream.params())) {
        throw DomainError("sample stream was created for different parameters");
    }
    std::vector<std::int64_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(stream.next());
    }
    return out;
}

}  // namespace dztp
