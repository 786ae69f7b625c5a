#include "dztp/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "dztp/errors.hpp"

namespace dztp {

namespace {

void require_valid_k(int k) {
    if (k < 1) {
        throw DomainError("sum of DZTP variables needs k >= 1 summands");
    }
}

// k! alpha^n S_{2,lambda}(n,k) / (n! norm^k), assembled either from the plain
// triangle (n <= 20) or in log space from the weighted rows.
class IidClosedForm {
public:
    IidClosedForm(const IidSumSpec& spec, std::int64_t max_n)
        : k_(spec.k),
          alpha_(spec.params.alpha()),
          log_prefactor_(std::lgamma(spec.k + 1.0) -
                         spec.k * std::log(degenerate_expm1(spec.params.alpha(), spec.params.lambda()))),
          direct_prefactor_(std::tgamma(spec.k + 1.0) /
                            std::pow(degenerate_expm1(spec.params.alpha(), spec.params.lambda()), spec.k)),
          small_(stirling_degenerate(static_cast<int>(std::min<std::int64_t>(max_n, tol::kDirectPmfMaxN)),
                                     spec.params.lambda())) {
        if (max_n > tol::kDirectPmfMaxN) {
            weighted_ = weighted_stirling_rows(static_cast<int>(max_n), spec.k, spec.params.lambda(),
                                               spec.params.alpha());
        }
    }

    double operator()(std::int64_t n) const {
        if (n < k_) {
            return 0.0;
        }
        if (n <= tol::kDirectPmfMaxN) {
            const int ni = static_cast<int>(n);
            const double s = small_.at(ni, k_);
            return std::max(0.0, direct_prefactor_ * std::pow(alpha_, ni) / std::tgamma(ni + 1.0) * s);
        }
        const double w = weighted_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k_)];
        if (!(w > 0.0)) {
            return 0.0;
        }
        return std::exp(log_prefactor_ + std::log(w));
    }

private:
    int k_;
    double alpha_;
    double log_prefactor_;
    double direct_prefactor_;
    StirlingTriangle small_;
    std::vector<std::vector<double>> weighted_;
};

}  // namespace

IidSumSpec::IidSumSpec(int k_, DegeneracyParams params_) : k(k_), params(params_) {
    require_valid_k(k);
}

HeteroSumSpec::HeteroSumSpec(double lambda_, std::vector<double> alphas_)
    : lambda(lambda_), alphas(std::move(alphas_)) {
    require_valid_k(static_cast<int>(alphas.size()));
    for (double a : alphas) {
        (void)DegeneracyParams(a, lambda);
    }
    lambda = DegeneracyParams(alphas.front(), lambda).lambda();
}

std::vector<DztpDist> HeteroSumSpec::summands() const {
    std::vector<DztpDist> out;
    out.reserve(alphas.size());
    for (double a : alphas) {
        out.emplace_back(DegeneracyParams(a, lambda));
    }
    return out;
}

double iid_sum_pmf(const IidSumSpec& spec, std::int64_t n) {
    if (n < spec.k) {
        return 0.0;
    }
    return IidClosedForm(spec, n)(n);
}

double iid_sum_pmf_altsum(const IidSumSpec& spec, std::int64_t n) {
    const int k = spec.k;
    if (n < k) {
        return 0.0;
    }
    const double alpha = spec.params.alpha();
    const double lambda = spec.params.lambda();
    const int ni = static_cast<int>(n);
    const double log_scale = ni * std::log(alpha) - std::lgamma(ni + 1.0);
    const double direct_scale = std::pow(alpha, ni) / std::tgamma(ni + 1.0);

    double sum = 0.0;
    double binom = 1.0;
    for (int l = 0; l <= k; ++l) {
        if (l > 0) {
            binom = binom * (k - l + 1) / l;
        }
        double w = 0.0;
        if (n <= tol::kDirectPmfMaxN) {
            w = falling_factorial(l, ni, lambda) * direct_scale;
        } else {
            const auto ff = log_falling_factorial(l, ni, lambda);
            w = ff.sign == 0 ? 0.0 : ff.sign * std::exp(ff.log_abs + log_scale);
        }
        sum += ((k - l) % 2 == 0 ? 1.0 : -1.0) * binom * w;
    }
    const double norm = degenerate_expm1(alpha, lambda);
    return std::max(0.0, sum / std::pow(norm, k));
}

PmfTable convolve(const PmfTable& a, const PmfTable& b) {
    PmfTable out;
    out.support_start = a.support_start + b.support_start;
    out.tail_mass = a.tail_mass + b.tail_mass;
    if (a.probs.empty() || b.probs.empty()) {
        return out;
    }
    out.probs.assign(a.probs.size() + b.probs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.probs.size(); ++i) {
        for (std::size_t j = 0; j < b.probs.size(); ++j) {
            out.probs[i + j] += a.probs[i] * b.probs[j];
        }
    }
    return out;
}

PmfTable convolve_all(const std::vector<PmfTable>& tables) {
    if (tables.empty()) {
        throw DomainError("convolution of an empty list of tables");
    }
    PmfTable acc = tables.front();
    for (std::size_t i = 1; i < tables.size(); ++i) {
        acc = convolve(acc, tables[i]);
    }
    return acc;
}

PmfTable iid_sum_convolution_table(const IidSumSpec& spec, double tail_tol) {
    const auto single = DztpDist(spec.params).table(tail_tol / spec.k);
    return convolve_all(std::vector<PmfTable>(static_cast<std::size_t>(spec.k), single));
}

PmfTable iid_sum_table(const IidSumSpec& spec, double tail_tol) {
    const auto single = DztpDist(spec.params).table(tail_tol / spec.k);
    const std::int64_t hi = spec.k * single.support_end();
    const IidClosedForm closed(spec, hi);

    PmfTable out;
    out.support_start = spec.k;
    out.tail_mass = spec.k * single.tail_mass;
    out.probs.reserve(static_cast<std::size_t>(hi - spec.k + 1));
    for (std::int64_t n = spec.k; n <= hi; ++n) {
        out.probs.push_back(closed(n));
    }
    return out;
}

PmfTable hetero_sum_table(const HeteroSumSpec& spec, double tail_tol) {
    std::vector<PmfTable> tables;
    for (const auto& d : spec.summands()) {
        tables.push_back(d.table(tail_tol / spec.k()));
    }
    return convolve_all(tables);
}

namespace {

double hetero_enumerate(const HeteroSumSpec& spec, int n) {
    const int k = spec.k();
    std::vector<double> norm;
    for (double a : spec.alphas) {
        norm.push_back(degenerate_expm1(a, spec.lambda));
    }
    const double n_fact = std::tgamma(n + 1.0);

    // parts[i] = n_i; the last part takes whatever is left.
    std::vector<int> parts(static_cast<std::size_t>(k), 1);
    double total = 0.0;
    std::function<void(int, int)> walk = [&](int idx, int remaining) {
        if (idx == k - 1) {
            parts[idx] = remaining;
            double multinomial = n_fact;
            double weight = 1.0;
            for (int i = 0; i < k; ++i) {
                multinomial /= std::tgamma(parts[i] + 1.0);
                weight *= std::pow(spec.alphas[i], parts[i]) *
                          falling_factorial(1.0, parts[i], spec.lambda);
            }
            total += multinomial * weight;
            return;
        }
        // Leave at least one for each later part.
        for (int v = 1; v <= remaining - (k - 1 - idx); ++v) {
            parts[idx] = v;
            walk(idx + 1, remaining - v);
        }
    };
    walk(0, n);

    double prefactor = 1.0 / n_fact;
    for (double z : norm) {
        prefactor /= z;
    }
    return prefactor * total;
}

}  // namespace

double hetero_sum_pmf(const HeteroSumSpec& spec, std::int64_t n, HeteroMethod method,
                      double tail_tol) {
    if (method == HeteroMethod::enumeration) {
        if (n > tol::kCompositionOracleMaxN || spec.k() > tol::kCompositionOracleMaxK) {
            throw CombinatorialLimitError("composition enumeration is capped at n <= 15, k <= 4");
        }
        if (n < spec.k()) {
            return 0.0;
        }
        return hetero_enumerate(spec, static_cast<int>(n));
    }
    if (n < spec.k()) {
        return 0.0;
    }
    return hetero_sum_table(spec, tail_tol).at(n);
}

}  // namespace dztp
