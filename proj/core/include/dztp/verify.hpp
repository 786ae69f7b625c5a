#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dztp/distributions.hpp"

namespace dztp::verify {

/// Certified truncated sum with a bound on what was left out.
struct OracleSum {
    double value = 0.0;
    double tail_bound = 0.0;
    std::int64_t terms = 0;
};

/// sum_k k^n P(k), summed term by term from the mass function until the
/// geometric bound on the remaining k^n P(k) drops below tail_tol times the sum.
OracleSum oracle_moment_by_summation(const DegeneracyParams& params, int n,
                                     double tail_tol = tol::kSeriesRelTail,
                                     int max_terms = tol::kSeriesMaxTerms);

/// Number of partitions of an n-set into k nonempty blocks, by enumerating
/// restricted growth strings. CombinatorialLimitError for n > 10.
std::uint64_t oracle_partitions_stirling(int n, int k);

/// Truncated Dobinski-type series for beta_{n,lambda}(x).
double oracle_dobinski_bell(int n, double x, double lambda, const SeriesControl& ctl = {});

/// Grid of (alpha, lambda) points. Each alpha is paired with every entry of
/// lambdas and with c / alpha for every c in lambdas_per_alpha; duplicate
/// pairs are dropped.
struct GridSpec {
    std::vector<double> alphas;
    std::vector<double> lambdas;
    std::vector<double> lambdas_per_alpha;
    int n_max = 30;
    int k_max = 5;
    std::uint64_t seed = 42;
    std::int64_t mc_samples = 1'000'000;

    /// alpha in {0.5, 1, 2, 5}; lambda in {-0.9/alpha, -0.5/alpha, -0.1, 0, 1/2, 1}.
    static GridSpec default_grid();

    /// Parses the JSON form; fields absent from the document keep the
    /// defaults of an empty grid. Throws std::invalid_argument on malformed
    /// input and DomainError when a pair is outside the valid domain.
    static GridSpec from_json(const std::string& text);

    /// Throws DomainError if any pair is invalid.
    std::vector<DegeneracyParams> points() const;
};

/// Named tolerances used by run_verification, defaulting to dztp::tol.
class Tolerances {
public:
    static Tolerances defaults();
    /// Defaults overridden by a JSON object of name -> number. Unknown names
    /// and non-numeric values throw std::invalid_argument.
    static Tolerances from_json(const std::string& text);

    double get(const std::string& name) const;
    const std::map<std::string, double>& values() const noexcept { return values_; }

private:
    std::map<std::string, double> values_;
};

enum class Measure { absolute, relative, exact, upper_bound };

struct CheckResult {
    std::string name;
    std::optional<double> alpha;
    std::optional<double> lambda;
    std::string detail;  // where the worst case occurred
    double expected = 0.0;
    double actual = 0.0;
    double discrepancy = 0.0;
    double tolerance = 0.0;
    Measure measure = Measure::absolute;
    std::int64_t samples = 0;
    bool pass = true;
};

struct MomentReport {
    DegeneracyParams params;
    int order = 0;
    double closed_form = 0.0;
    double table_sum = 0.0;
    double monte_carlo = 0.0;
    double monte_carlo_stderr = 0.0;
    double rel_discrepancy = 0.0;
};

/// |closed_form - table_sum| / max(|closed_form|, 1e-300).
double relative_discrepancy(double closed_form, double table_sum) noexcept;

struct VerificationReport {
    std::vector<CheckResult> checks;
    std::vector<MomentReport> moments;

    bool passed() const noexcept;
    std::string to_json() const;
    std::string to_table() const;
};

/// Seed for one grid point and stream: splitmix64(seed ^ splitmix64(4 * index + stream)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) noexcept;

/// Runs every identity, oracle comparison and Monte Carlo check over the grid.
///
/// Failures are recorded, not thrown. Output depends only on the grid and
/// tolerances; threads > 1 evaluates grid points concurrently without
/// changing the report.
VerificationReport run_verification(const GridSpec& grid,
                                    const Tolerances& tolerances = Tolerances::defaults(),
                                    int threads = 1);

/// Pearson statistic of observed counts against a table, with bins merged
/// until each expected count is at least 5 (tail mass goes to the last bin).
struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double critical = 0.0;
    bool pass = true;
};

ChiSquareResult chi_square_against_table(const std::map<std::int64_t, std::int64_t>& counts,
                                         const PmfTable& table, std::int64_t total,
                                         double significance = tol::kChiSquareSignificance);

}  // namespace dztp::verify
