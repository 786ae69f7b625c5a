#pragma once

#include <cstdint>
#include <vector>

#include "dztp/distributions.hpp"

namespace dztp {

/// Sum of k independent DZTP variables sharing (alpha, lambda).
struct IidSumSpec {
    IidSumSpec(int k, DegeneracyParams params);

    int k;
    DegeneracyParams params;
};

/// Sum of independent DZTP variables with rates alphas[i] and a shared lambda.
struct HeteroSumSpec {
    /// Every (alphas[i], lambda) must be valid; at least one summand.
    HeteroSumSpec(double lambda, std::vector<double> alphas);

    double lambda;
    std::vector<double> alphas;

    int k() const noexcept { return static_cast<int>(alphas.size()); }
    std::vector<DztpDist> summands() const;
};

/// P[X_1 + ... + X_k = n] = k! / (e_lambda(alpha) - 1)^k * alpha^n / n! * S_{2,lambda}(n, k)
/// for n >= k, else 0.
double iid_sum_pmf(const IidSumSpec& spec, std::int64_t n);

/// The same probability through the alternating sum
/// alpha^n / (n! (e_lambda(alpha) - 1)^k) * sum_l C(k,l) (-1)^{k-l} (l)_{n,lambda}.
double iid_sum_pmf_altsum(const IidSumSpec& spec, std::int64_t n);

/// Linear convolution of two tables. Tail masses add.
PmfTable convolve(const PmfTable& a, const PmfTable& b);

/// Left fold of convolve over the tables, in order.
PmfTable convolve_all(const std::vector<PmfTable>& tables);

/// Closed-form table on {k, ..., k N} where N is the last index of the
/// single-variable table built at tail_tol / k. tail_mass is k times that
/// table's tail: the sum exceeds kN only if some summand exceeds N.
PmfTable iid_sum_table(const IidSumSpec& spec, double tail_tol = tol::kTableTail);

/// k-fold numeric convolution of the single-variable table; same support and
/// tail certificate as iid_sum_table.
PmfTable iid_sum_convolution_table(const IidSumSpec& spec, double tail_tol = tol::kTableTail);

/// Numeric convolution of the summands' tables, each built at tail_tol / k.
PmfTable hetero_sum_table(const HeteroSumSpec& spec, double tail_tol = tol::kTableTail);

enum class HeteroMethod {
    convolution,  ///< numeric convolution of the individual tables
    enumeration,  ///< multinomial sum over compositions n_1 + ... + n_k = n, n_i >= 1
};

/// P[sum = n] for unequal rates; 0 for n < k. Enumeration is capped at
/// n <= 15 and k <= 4 (CombinatorialLimitError past that).
double hetero_sum_pmf(const HeteroSumSpec& spec, std::int64_t n,
                      HeteroMethod method = HeteroMethod::convolution,
                      double tail_tol = tol::kTableTail);

}  // namespace dztp
