#include "dztp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include "json.hpp"

#include "dztp/convolution.hpp"
#include "dztp/errors.hpp"
#include "dztp/format.hpp"

namespace dztp::verify {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Oracles

OracleSum oracle_moment_by_summation(const DegeneracyParams& params, int n, double tail_tol,
                                     int max_terms) {
    if (n < 0) {
        throw DomainError("moment order must be >= 0");
    }
    const DztpDist dist(params);
    OracleSum out;
    const auto limit = params.support_limit();
    for (std::int64_t k = 1; k <= max_terms; ++k) {
        const double p = dist.pmf(k);
        const double kd = static_cast<double>(k);
        const double term = std::pow(kd, n) * p;
        out.value += term;
        out.terms = k;
        if (limit && k >= *limit) {
            out.tail_bound = 0.0;
            return out;
        }
        // Ratio of k^n P(k) terms from k on is at most ((k+1)/k)^n times the
        // ratio bound of P(k+1)/P(k).
        const double rho = std::pow((kd + 1.0) / kd, n) * series_ratio_bound(params.alpha(), k, params.lambda());
        if (rho < 1.0) {
            const double tail = term * rho / (1.0 - rho);
            if (tail <= tail_tol * out.value) {
                out.tail_bound = tail;
                return out;
            }
        }
    }
    throw ConvergenceError("moment summation oracle: max_terms reached");
}

std::uint64_t oracle_partitions_stirling(int n, int k) {
    if (n > tol::kPartitionOracleMaxN) {
        throw CombinatorialLimitError("partition enumeration is capped at n <= 10");
    }
    if (n < 0 || k < 0) {
        return 0;
    }
    if (n == 0) {
        return k == 0 ? 1 : 0;
    }
    // Restricted growth strings a[0] = 0, a[i] <= 1 + max(a[0..i-1]); the
    // number of blocks is 1 + max.
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);
    std::uint64_t count = 0;
    while (true) {
        if (prefix_max[n - 1] + 1 == k) {
            ++count;
        }
        int i = n - 1;
        while (i > 0 && a[i] > prefix_max[i - 1]) {
            --i;
        }
        if (i == 0) {
            break;
        }
        ++a[i];
        prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
        for (int j = i + 1; j < n; ++j) {
            a[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
    return count;
}

double oracle_dobinski_bell(int n, double x, double lambda, const SeriesControl& ctl) {
    return bell_degenerate(n, x, lambda, ctl, BellMethod::series);
}

// ---------------------------------------------------------------------------
// Grid and tolerances

GridSpec GridSpec::default_grid() {
    GridSpec g;
    g.alphas = {0.5, 1.0, 2.0, 5.0};
    g.lambdas = {-0.1, 0.0, 0.5, 1.0};
    g.lambdas_per_alpha = {-0.9, -0.5};
    return g;
}

namespace {

std::vector<double> number_list(const json& j, const char* key) {
    std::vector<double> out;
    if (!j.contains(key)) {
        return out;
    }
    const auto& arr = j.at(key);
    if (!arr.is_array()) {
        throw std::invalid_argument(std::string("grid field '") + key + "' must be an array");
    }
    for (const auto& v : arr) {
        if (!v.is_number()) {
            throw std::invalid_argument(std::string("grid field '") + key + "' must hold numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

template <typename T>
T integer_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        throw std::invalid_argument(std::string("grid field '") + key + "' must be an integer");
    }
    return v.get<T>();
}

}  // namespace

GridSpec GridSpec::from_json(const std::string& text) {
    GridSpec g;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return g;
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("grid file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("grid file must hold a JSON object");
    }
    static const std::vector<std::string> known = {"alphas",     "lambdas", "lambdas_per_alpha",
                                                   "n_max",      "k_max",   "seed",
                                                   "mc_samples"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::invalid_argument("unknown grid field '" + key + "'");
        }
    }
    g.alphas = number_list(j, "alphas");
    g.lambdas = number_list(j, "lambdas");
    g.lambdas_per_alpha = number_list(j, "lambdas_per_alpha");
    g.n_max = integer_field<int>(j, "n_max", g.n_max);
    g.k_max = integer_field<int>(j, "k_max", g.k_max);
    g.seed = integer_field<std::uint64_t>(j, "seed", g.seed);
    g.mc_samples = integer_field<std::int64_t>(j, "mc_samples", g.mc_samples);
    if (g.n_max < 1 || g.k_max < 1 || g.mc_samples < 0) {
        throw std::invalid_argument("grid needs n_max >= 1, k_max >= 1, mc_samples >= 0");
    }
    (void)g.points();
    return g;
}

std::vector<DegeneracyParams> GridSpec::points() const {
    std::vector<DegeneracyParams> out;
    auto push = [&](double a, double l) {
        const DegeneracyParams p(a, l);
        if (std::find(out.begin(), out.end(), p) == out.end()) {
            out.push_back(p);
        }
    };
    for (double a : alphas) {
        for (double c : lambdas_per_alpha) {
            push(a, c / a);
        }
        for (double l : lambdas) {
            push(a, l);
        }
    }
    return out;
}

Tolerances Tolerances::defaults() {
    Tolerances t;
    t.values_ = {
        {"kernel.falling_factorial_recurrence", tol::kFallingFactorialRel},
        {"kernel.falling_factorial_one_identity", tol::kFallingFactorialRel},
        {"kernel.stirling_classical_vs_partitions", 0.0},
        {"kernel.stirling_recurrence_vs_altsum", tol::kStirlingAltSumRel},
        {"kernel.bell_closed_vs_dobinski", tol::kBellClosedVsSeriesRel},
        {"kernel.bell_limit", tol::kBellLimitRel},
        {"kernel.bell_classical_branch", tol::kBellClassicalBranch},
        {"kernel.degenerate_exp_reciprocal", tol::kDegenerateExpReciprocal},
        {"kernel.partial_exp_convergence", tol::kPartialExpConvergence},
        {"kernel.partial_exp_monotone", 0.0},
        {"dist.normalization", tol::kNormalization},
        {"dist.pmf_nonnegative", 0.0},
        {"dist.conditional_poisson", tol::kConditionalPoisson},
        {"dist.log_pmf", tol::kLogPmfRel},
        {"dist.cdf_vs_partial_sum", tol::kCdfVsPartialSum},
        {"dist.cdf_monotone", 0.0},
        {"dist.cdf_limit", tol::kNormalization},
        {"dist.cdf_finite_support_end", 0.0},
        {"dist.mean_closed_vs_table", tol::kMeanRel},
        {"dist.variance_closed_vs_table", tol::kVarianceRel},
        {"dist.variance_vs_moments", tol::kVarianceFromMomentsRel},
        {"dist.moment_closed_vs_summation", tol::kMomentRel},
        {"dist.moment_one_vs_mean", tol::kMomentOneVsMean},
        {"dist.mgf_at_zero", 0.0},
        {"dist.mgf_derivative", tol::kMgfDerivativeRel},
        {"dist.mgf_taylor", tol::kMgfTaylorRel},
        {"dist.pgf_at_one", 0.0},
        {"dist.pgf_vs_table", tol::kPgfVsTable},
        {"dist.classical_reduction", tol::kClassicalReductionRel},
        {"dist.sample_mean_band", tol::kSigmaBand},
        {"dist.sample_chi_square", tol::kChiSquareSignificance},
        {"dist.sample_reproducible", 0.0},
        {"sum.iid_closed_vs_altsum", tol::kIidAltSumRel},
        {"sum.iid_closed_vs_convolution", tol::kIidConvolutionAbs},
        {"sum.normalization", tol::kNormalization},
        {"sum.pgf_factorization", tol::kPgfFactorization},
        {"sum.mean_additivity", tol::kMeanAdditivityRel},
        {"sum.hetero_enum_vs_convolution", tol::kHeteroAbs},
        {"sum.hetero_equal_alpha", tol::kHeteroAbs},
        {"sum.hetero_permutation", tol::kHeteroAbs},
        {"sum.hetero_mean_additivity", tol::kMeanAdditivityRel},
        {"sum.mc_chi_square", tol::kChiSquareSignificance},
    };
    return t;
}

Tolerances Tolerances::from_json(const std::string& text) {
    Tolerances t = defaults();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("tolerance file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("tolerance file must hold a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!t.values_.contains(key)) {
            throw std::invalid_argument("unknown tolerance '" + key + "'");
        }
        if (!value.is_number()) {
            throw std::invalid_argument("tolerance '" + key + "' must be a number");
        }
        t.values_[key] = value.get<double>();
    }
    return t;
}

double Tolerances::get(const std::string& name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) {
        throw std::out_of_range("no tolerance named '" + name + "'");
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Reports

double relative_discrepancy(double closed_form, double table_sum) noexcept {
    return std::abs(closed_form - table_sum) / std::max(std::abs(closed_form), 1e-300);
}

bool VerificationReport::passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

std::string_view measure_name(Measure m) {
    switch (m) {
        case Measure::absolute:
            return "absolute";
        case Measure::relative:
            return "relative";
        case Measure::exact:
            return "exact";
        case Measure::upper_bound:
            return "upper_bound";
    }
    return "?";
}

json number(double v) { return round_significant(v); }

json optional_number(const std::optional<double>& v) {
    return v ? number(*v) : json(nullptr);
}

}  // namespace

std::string VerificationReport::to_json() const {
    json checks_json = json::array();
    std::size_t failed = 0;
    for (const auto& c : checks) {
        failed += c.pass ? 0 : 1;
        json point = nullptr;
        if (c.alpha) {
            point = {{"alpha", optional_number(c.alpha)}, {"lambda", optional_number(c.lambda)}};
        }
        checks_json.push_back({{"name", c.name},
                               {"grid_point", point},
                               {"detail", c.detail},
                               {"expected", number(c.expected)},
                               {"actual", number(c.actual)},
                               {"discrepancy", number(c.discrepancy)},
                               {"tolerance", number(c.tolerance)},
                               {"measure", measure_name(c.measure)},
                               {"samples", c.samples},
                               {"pass", c.pass}});
    }
    json moments_json = json::array();
    for (const auto& m : moments) {
        moments_json.push_back({{"alpha", number(m.params.alpha())},
                                {"lambda", number(m.params.lambda())},
                                {"order", m.order},
                                {"closed_form", number(m.closed_form)},
                                {"table_sum", number(m.table_sum)},
                                {"monte_carlo", number(m.monte_carlo)},
                                {"monte_carlo_stderr", number(m.monte_carlo_stderr)},
                                {"rel_discrepancy", number(m.rel_discrepancy)}});
    }
    json doc = {{"verdict", passed() ? "pass" : "fail"},
                {"summary",
                 {{"checks", checks.size()}, {"passed", checks.size() - failed}, {"failed", failed}}},
                {"checks", checks_json},
                {"moments", moments_json}};
    return doc.dump(2) + "\n";
}

std::string VerificationReport::to_table() const {
    std::ostringstream os;
    std::size_t failed = 0;
    for (const auto& c : checks) {
        failed += c.pass ? 0 : 1;
        os << (c.pass ? "PASS " : "FAIL ") << c.name;
        if (c.alpha) {
            os << " alpha=" << format_number(*c.alpha) << " lambda=" << format_number(*c.lambda);
        }
        os << " worst=" << format_number(c.discrepancy) << " tol=" << format_number(c.tolerance) << " ("
           << measure_name(c.measure) << ", " << c.samples << " samples)";
        if (!c.detail.empty()) {
            os << " at " << c.detail;
        }
        os << "\n";
    }
    if (!moments.empty()) {
        os << "\nalpha lambda order closed_form table_sum monte_carlo stderr rel_discrepancy\n";
        for (const auto& m : moments) {
            os << format_number(m.params.alpha()) << ' ' << format_number(m.params.lambda()) << ' '
               << m.order << ' ' << format_number(m.closed_form) << ' ' << format_number(m.table_sum)
               << ' ' << format_number(m.monte_carlo) << ' ' << format_number(m.monte_carlo_stderr)
               << ' ' << format_number(m.rel_discrepancy) << "\n";
        }
    }
    os << "\n" << checks.size() - failed << "/" << checks.size() << " checks passed; verdict "
       << (passed() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) noexcept {
    auto splitmix = [](std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    return splitmix(seed ^ splitmix(4 * index + stream));
}

ChiSquareResult chi_square_against_table(const std::map<std::int64_t, std::int64_t>& counts,
                                         const PmfTable& table, std::int64_t total,
                                         double significance) {
    ChiSquareResult out;
    const double n = static_cast<double>(total);
    const std::int64_t lo = table.support_start;
    const std::int64_t hi = table.support_end();

    // Observations outside a table with no tail mass are impossible values.
    for (const auto& [value, count] : counts) {
        if (count > 0 && (value < lo || (value > hi && table.tail_mass == 0.0))) {
            out.statistic = std::numeric_limits<double>::infinity();
            out.pass = false;
            return out;
        }
    }

    struct Bin {
        double expected = 0.0;
        double observed = 0.0;
    };
    std::vector<Bin> bins;
    Bin open;
    for (std::int64_t v = lo; v <= hi; ++v) {
        open.expected += n * table.at(v);
        const auto it = counts.find(v);
        open.observed += it == counts.end() ? 0.0 : static_cast<double>(it->second);
        if (open.expected >= tol::kChiSquareMinExpected) {
            bins.push_back(open);
            open = {};
        }
    }
    open.expected += n * table.tail_mass;
    for (auto it = counts.upper_bound(hi); it != counts.end(); ++it) {
        open.observed += static_cast<double>(it->second);
    }
    if (bins.empty()) {
        bins.push_back(open);
    } else {
        bins.back().expected += open.expected;
        bins.back().observed += open.observed;
    }

    out.dof = static_cast<int>(bins.size()) - 1;
    for (const auto& b : bins) {
        if (b.expected > 0.0) {
            const double d = b.observed - b.expected;
            out.statistic += d * d / b.expected;
        }
    }
    if (out.dof >= 1) {
        const boost::math::chi_squared_distribution<double> chi(out.dof);
        out.critical = boost::math::quantile(boost::math::complement(chi, significance));
    }
    // With a single bin the observed total equals the expected total; there is
    // nothing left to test.
    out.pass = out.dof == 0 || out.statistic <= out.critical;
    return out;
}

// ---------------------------------------------------------------------------
// The runner

namespace {

// Accumulates samples of one check and keeps the worst case.
class Check {
public:
    Check(std::string name, Measure measure, double tolerance,
          std::optional<DegeneracyParams> point = std::nullopt)
        : measure_(measure) {
        result_.name = std::move(name);
        result_.measure = measure;
        result_.tolerance = tolerance;
        if (point) {
            result_.alpha = point->alpha();
            result_.lambda = point->lambda();
        }
    }

    void add(double expected, double actual, const std::string& detail = {}) {
        double d = 0.0;
        if (std::isnan(expected) || std::isnan(actual)) {
            d = std::numeric_limits<double>::infinity();
        } else if (expected == actual) {
            d = 0.0;
        } else {
            switch (measure_) {
                case Measure::absolute:
                case Measure::exact:
                    d = std::abs(actual - expected);
                    break;
                case Measure::relative:
                    d = std::abs(actual - expected) / std::max(std::abs(actual), std::abs(expected));
                    break;
                case Measure::upper_bound:
                    d = std::max(0.0, actual - expected);
                    break;
            }
        }
        const bool ok = measure_ == Measure::exact ? d == 0.0 : d <= result_.tolerance;
        if (result_.samples == 0 || d > result_.discrepancy || (!ok && result_.pass)) {
            result_.discrepancy = d;
            result_.expected = expected;
            result_.actual = actual;
            result_.detail = detail;
        }
        result_.pass = result_.pass && ok;
        ++result_.samples;
    }

    // Direct outcome, for checks whose pass rule is not a distance.
    void set(double expected, double actual, bool ok, const std::string& detail) {
        result_.expected = expected;
        result_.actual = actual;
        result_.discrepancy = ok ? 0.0 : std::abs(actual - expected);
        result_.detail = detail;
        result_.pass = ok;
        result_.samples = 1;
    }

    CheckResult finish() && { return std::move(result_); }

private:
    Measure measure_;
    CheckResult result_;
};

std::string at_n(std::int64_t n) { return "n=" + std::to_string(n); }

struct PointOutcome {
    std::vector<CheckResult> checks;
    std::vector<MomentReport> moments;
};

class PointRunner {
public:
    PointRunner(const GridSpec& grid, const Tolerances& tolerances, std::size_t index,
                const DegeneracyParams& params, std::vector<double> hetero_alphas)
        : grid_(grid),
          tol_(tolerances),
          index_(index),
          params_(params),
          dist_(params),
          hetero_alphas_(std::move(hetero_alphas)) {}

    PointOutcome run() {
        kernel_checks();
        distribution_checks();
        generating_function_checks();
        sampling_checks();
        sum_checks();
        hetero_checks();
        return std::move(out_);
    }

private:
    Check make(const std::string& name, Measure m) { return Check(name, m, tol_.get(name), params_); }
    void keep(Check&& c) { out_.checks.push_back(std::move(c).finish()); }

    double alpha() const { return params_.alpha(); }
    double lambda() const { return params_.lambda(); }

    void kernel_checks() {
        {
            auto c = make("kernel.falling_factorial_one_identity", Measure::relative);
            for (int k = 0; k <= grid_.n_max; ++k) {
                const double next = falling_factorial(1.0, k + 1, lambda());
                c.add(falling_factorial(1.0, k + 2, lambda()),
                      next - lambda() * (k + 1) * next, at_n(k));
            }
            keep(std::move(c));
        }
        {
            auto c = make("kernel.stirling_recurrence_vs_altsum", Measure::relative);
            const auto tri = stirling_degenerate(20, lambda());
            for (int n = 0; n <= 20; ++n) {
                for (int k = 0; k <= n; ++k) {
                    c.add(tri.at(n, k), stirling_degenerate_altsum(n, k, lambda()),
                          at_n(n) + " k=" + std::to_string(k));
                }
            }
            keep(std::move(c));
        }
        {
            auto c = make("kernel.bell_closed_vs_dobinski", Measure::relative);
            for (int n = 0; n <= 10; ++n) {
                c.add(oracle_dobinski_bell(n, alpha(), lambda()), bell_degenerate(n, alpha(), lambda()),
                      at_n(n));
            }
            keep(std::move(c));
        }
        {
            auto c = make("kernel.degenerate_exp_reciprocal", Measure::absolute);
            for (double x : {0.5, 1.0, 2.5}) {
                c.add(1.0, degenerate_exp(x, alpha(), lambda()) * degenerate_exp(-x, alpha(), lambda()),
                      "x=" + format_number(x));
            }
            keep(std::move(c));
        }
        {
            // b from the series-control stopping rule on e_lambda(alpha).
            const SeriesControl ctl;
            std::int64_t b = 0;
            double sum = 1.0;
            double term = 1.0;
            for (std::int64_t k = 0; k < ctl.max_terms; ++k) {
                term *= alpha() * lambda_factor(1.0, static_cast<int>(k), lambda()) / (k + 1);
                sum += term;
                b = k + 1;
                const double rho = series_ratio_bound(alpha(), k + 1, lambda());
                if (term == 0.0 || (rho < 1.0 && std::abs(term) * rho / (1.0 - rho) < ctl.rel_tail_tol * sum)) {
                    break;
                }
            }
            const double full = degenerate_exp(1.0, alpha(), lambda());
            // Absolute below magnitude 1, relative above it: no double near
            // e_lambda(alpha) = 3.6e5 resolves 1e-10.
            const std::string conv_name = "kernel.partial_exp_convergence";
            Check conv(conv_name, Measure::absolute, tol_.get(conv_name) * std::max(1.0, std::abs(full)), params_);
            conv.add(full, degenerate_exp_partial(alpha(), b, lambda()), "b=" + std::to_string(b));
            keep(std::move(conv));

            auto mono = make("kernel.partial_exp_monotone", Measure::upper_bound);
            double prev = std::abs(full - degenerate_exp_partial(alpha(), 0, lambda()));
            for (std::int64_t j = 1; j <= b; ++j) {
                const double gap = std::abs(full - degenerate_exp_partial(alpha(), j, lambda()));
                // Allow the last-bit wobble of the two evaluations.
                mono.add(prev + 4.0 * std::numeric_limits<double>::epsilon() * full, gap,
                         "b=" + std::to_string(j));
                prev = gap;
            }
            keep(std::move(mono));
        }
    }

    void distribution_checks() {
        table_ = dist_.table();
        {
            auto c = make("dist.normalization", Measure::absolute);
            c.add(1.0, table_.total() + table_.tail_mass, "support 1.." + std::to_string(table_.support_end()));
            keep(std::move(c));
        }
        {
            auto c = make("dist.pmf_nonnegative", Measure::exact);
            const auto negatives = std::count_if(table_.probs.begin(), table_.probs.end(),
                                                 [](double p) { return !(p >= 0.0); });
            c.add(0.0, static_cast<double>(negatives), "negative entries");
            keep(std::move(c));
        }
        const DegeneratePoissonDist poisson(params_);
        {
            auto c = make("dist.conditional_poisson", Measure::relative);
            const double keep_mass = 1.0 - poisson.pmf(0);
            for (int n = 1; n <= grid_.n_max; ++n) {
                c.add(poisson.pmf(n), dist_.pmf(n) * keep_mass, at_n(n));
            }
            keep(std::move(c));
        }
        {
            auto c = make("dist.log_pmf", Measure::relative);
            for (int n = 1; n <= grid_.n_max; ++n) {
                const double p = dist_.pmf(n);
                if (p > 0.0) {
                    c.add(p, std::exp(dist_.log_pmf(n)), at_n(n));
                }
            }
            keep(std::move(c));
        }
        {
            auto c = make("dist.cdf_vs_partial_sum", Measure::absolute);
            auto mono = make("dist.cdf_monotone", Measure::upper_bound);
            std::vector<double> xs = {0.5, 1.0, 2.7, 10.0};
            for (int n = 1; n <= grid_.n_max; ++n) {
                xs.push_back(n);
            }
            std::sort(xs.begin(), xs.end());
            double prev = 0.0;
            for (double x : xs) {
                double partial = 0.0;
                for (std::int64_t k = 1; k <= static_cast<std::int64_t>(std::floor(x)); ++k) {
                    partial += dist_.pmf(k);
                }
                const double f = dist_.cdf(x);
                c.add(partial, f, "x=" + format_number(x));
                mono.add(f, prev, "x=" + format_number(x));
                prev = f;
            }
            keep(std::move(c));
            keep(std::move(mono));
        }
        {
            auto c = make("dist.cdf_limit", Measure::upper_bound);
            c.add(table_.tail_mass, 1.0 - dist_.cdf(static_cast<double>(table_.support_end())),
                  "x=" + std::to_string(table_.support_end()));
            keep(std::move(c));
        }
        if (const auto m = params_.support_limit()) {
            auto c = make("dist.cdf_finite_support_end", Measure::exact);
            c.add(1.0, dist_.cdf(*m), "x=" + std::to_string(*m));
            keep(std::move(c));
        }
        const double table_mean = table_.raw_moment(1);
        const double table_second = table_.raw_moment(2);
        {
            auto c = make("dist.mean_closed_vs_table", Measure::relative);
            c.add(table_mean, dist_.mean());
            keep(std::move(c));
        }
        {
            auto c = make("dist.variance_closed_vs_table", Measure::relative);
            c.add(std::max(0.0, table_second - table_mean * table_mean), dist_.variance());
            keep(std::move(c));
        }
        {
            auto c = make("dist.variance_vs_moments", Measure::relative);
            const double m1 = dist_.moment(1);
            c.add(std::max(0.0, dist_.moment(2) - m1 * m1), dist_.variance());
            keep(std::move(c));
        }
        {
            auto c = make("dist.moment_closed_vs_summation", Measure::relative);
            for (int n = 1; n <= std::min(10, grid_.n_max); ++n) {
                const auto oracle = oracle_moment_by_summation(params_, n);
                const double closed = dist_.moment(n);
                c.add(oracle.value, closed, at_n(n));
                out_.moments.push_back({params_, n, closed, oracle.value, 0.0, 0.0,
                                        relative_discrepancy(closed, oracle.value)});
            }
            keep(std::move(c));
        }
        {
            auto c = make("dist.moment_one_vs_mean", Measure::relative);
            c.add(dist_.mean(), dist_.moment(1));
            keep(std::move(c));
        }
        if (lambda() == 0.0) {
            auto c = make("dist.classical_reduction", Measure::relative);
            const double em1 = std::expm1(alpha());
            for (int n = 1; n <= grid_.n_max; ++n) {
                c.add(std::pow(alpha(), n) / std::tgamma(n + 1.0) / em1, dist_.pmf(n), "pmf " + at_n(n));
            }
            const double ea = std::exp(alpha());
            c.add(alpha() * ea / em1, dist_.mean(), "mean");
            c.add(alpha() * ea / (em1 * em1) * (ea - alpha() - 1.0), dist_.variance(), "variance");
            keep(std::move(c));
        }
    }

    void generating_function_checks() {
        {
            auto c = make("dist.mgf_at_zero", Measure::exact);
            c.add(1.0, dist_.mgf(0.0));
            keep(std::move(c));
        }
        {
            auto c = make("dist.mgf_derivative", Measure::relative);
            const double h = tol::kMgfDerivativeStep;
            c.add(dist_.mean(), (dist_.mgf(h) - dist_.mgf(-h)) / (2.0 * h), "h=" + format_number(h));
            keep(std::move(c));
        }
        {
            auto c = make("dist.mgf_taylor", Measure::relative);
            const double scale = std::max(1.0, dist_.mean());
            const double h1 = tol::kMgfDerivativeStep;
            c.add(dist_.moment(1), (dist_.mgf(h1) - dist_.mgf(-h1)) / (2.0 * h1), "order 1");
            const double h2 = tol::kMgfSecondStep / scale;
            c.add(dist_.moment(2), (dist_.mgf(h2) - 2.0 * dist_.mgf(0.0) + dist_.mgf(-h2)) / (h2 * h2),
                  "order 2");
            const double h3 = tol::kMgfThirdStep / scale;
            c.add(dist_.moment(3),
                  (dist_.mgf(2 * h3) - 2.0 * dist_.mgf(h3) + 2.0 * dist_.mgf(-h3) - dist_.mgf(-2 * h3)) /
                      (2.0 * h3 * h3 * h3),
                  "order 3");
            keep(std::move(c));
        }
        {
            auto c = make("dist.pgf_at_one", Measure::exact);
            c.add(1.0, dist_.pgf(1.0));
            keep(std::move(c));
        }
        {
            auto c = make("dist.pgf_vs_table", Measure::absolute);
            for (double t : {0.0, 0.25, 0.5, 0.9}) {
                double s = 0.0;
                for (std::int64_t n = table_.support_end(); n >= 1; --n) {
                    s = s * t + table_.at(n);
                }
                c.add(s * t, dist_.pgf(t), "t=" + format_number(t));
            }
            keep(std::move(c));
        }
    }

    void sampling_checks() {
        if (grid_.mc_samples <= 0) {
            return;
        }
        const std::uint64_t seed = derive_seed(grid_.seed, index_, 0);
        SampleStream stream(seed, params_);
        std::map<std::int64_t, std::int64_t> counts;
        std::vector<std::int64_t> head;
        const std::size_t head_len = 1000;
        for (std::int64_t i = 0; i < grid_.mc_samples; ++i) {
            const auto x = stream.next();
            ++counts[x];
            if (head.size() < head_len) {
                head.push_back(x);
            }
        }
        const double n = static_cast<double>(grid_.mc_samples);
        auto raw = [&](int order) {
            double acc = 0.0;
            for (const auto& [v, c] : counts) {
                acc += std::pow(static_cast<double>(v), order) * static_cast<double>(c);
            }
            return acc / n;
        };
        {
            const double band = tol_.get("dist.sample_mean_band") * std::sqrt(dist_.variance() / n);
            Check c("dist.sample_mean_band", Measure::absolute, band, params_);
            c.add(dist_.mean(), raw(1), "N=" + std::to_string(grid_.mc_samples));
            keep(std::move(c));
        }
        {
            const double sig = tol_.get("dist.sample_chi_square");
            const auto r = chi_square_against_table(counts, table_, grid_.mc_samples, sig);
            Check c("dist.sample_chi_square", Measure::upper_bound, 0.0, params_);
            c.set(r.critical, r.statistic, r.pass,
                  "dof=" + std::to_string(r.dof) + " significance=" + format_number(sig));
            keep(std::move(c));
        }
        {
            SampleStream again(seed, params_);
            auto c = make("dist.sample_reproducible", Measure::exact);
            std::int64_t mismatches = 0;
            for (auto x : head) {
                mismatches += again.next() == x ? 0 : 1;
            }
            c.add(0.0, static_cast<double>(mismatches), "first " + std::to_string(head.size()) + " draws");
            keep(std::move(c));
        }
        for (auto& m : out_.moments) {
            if (m.params == params_) {
                m.monte_carlo = raw(m.order);
                const double second = raw(2 * m.order);
                m.monte_carlo_stderr = std::sqrt(std::max(0.0, second - m.monte_carlo * m.monte_carlo) / n);
            }
        }
    }

    void sum_checks() {
        auto altsum = make("sum.iid_closed_vs_altsum", Measure::relative);
        auto conv = make("sum.iid_closed_vs_convolution", Measure::absolute);
        auto norm = make("sum.normalization", Measure::absolute);
        auto pgf = make("sum.pgf_factorization", Measure::absolute);
        auto mean = make("sum.mean_additivity", Measure::relative);
        auto mc = make("sum.mc_chi_square", Measure::upper_bound);
        bool mc_ran = false;
        for (int k = 1; k <= grid_.k_max; ++k) {
            const IidSumSpec spec(k, params_);
            const auto closed = iid_sum_table(spec);
            const auto numeric = iid_sum_convolution_table(spec);
            const std::string tag = "k=" + std::to_string(k);
            for (std::int64_t n = k; n <= grid_.n_max; ++n) {
                const double a = iid_sum_pmf(spec, n);
                altsum.add(a, iid_sum_pmf_altsum(spec, n), tag + " " + at_n(n));
                conv.add(a, numeric.at(n), tag + " " + at_n(n));
            }
            norm.add(1.0, closed.total() + closed.tail_mass, tag);
            for (double t : {0.25, 0.5, 0.9}) {
                double s = 0.0;
                for (std::int64_t n = closed.support_end(); n >= closed.support_start; --n) {
                    s = s * t + closed.at(n);
                }
                s *= std::pow(t, static_cast<double>(closed.support_start));
                pgf.add(std::pow(dist_.pgf(t), k), s, tag + " t=" + format_number(t));
            }
            mean.add(k * dist_.mean(), closed.raw_moment(1), tag);

            if ((k == 2 || k == 3) && grid_.mc_samples > 0) {
                SampleStream stream(derive_seed(grid_.seed, index_, static_cast<std::uint64_t>(k - 1)),
                                    params_);
                std::map<std::int64_t, std::int64_t> counts;
                for (std::int64_t i = 0; i < grid_.mc_samples; ++i) {
                    std::int64_t s = 0;
                    for (int j = 0; j < k; ++j) {
                        s += stream.next();
                    }
                    ++counts[s];
                }
                const double sig = tol_.get("sum.mc_chi_square");
                const auto r = chi_square_against_table(counts, closed, grid_.mc_samples, sig);
                if (!mc_ran || (!r.pass)) {
                    mc.set(r.critical, r.statistic, r.pass && (mc_ran ? out_mc_pass_ : true),
                           tag + " dof=" + std::to_string(r.dof) + " significance=" + format_number(sig));
                }
                out_mc_pass_ = out_mc_pass_ && r.pass;
                mc_ran = true;
            }
        }
        keep(std::move(altsum));
        keep(std::move(conv));
        keep(std::move(norm));
        keep(std::move(pgf));
        keep(std::move(mean));
        if (mc_ran) {
            auto r = std::move(mc).finish();
            r.pass = out_mc_pass_;
            r.samples = std::min(grid_.k_max, 3) - 1;
            out_.checks.push_back(std::move(r));
        }
    }

    void hetero_checks() {
        if (hetero_alphas_.size() < 2) {
            return;
        }
        auto enumerate = make("sum.hetero_enum_vs_convolution", Measure::absolute);
        auto equal = make("sum.hetero_equal_alpha", Measure::absolute);
        auto perm = make("sum.hetero_permutation", Measure::absolute);
        auto mean = make("sum.hetero_mean_additivity", Measure::relative);
        const int k_cap = std::min<int>(tol::kCompositionOracleMaxK, static_cast<int>(hetero_alphas_.size()));
        const int n_cap = std::min(tol::kCompositionOracleMaxN, grid_.n_max);
        for (int k = 2; k <= k_cap; ++k) {
            std::vector<double> alphas(hetero_alphas_.begin(), hetero_alphas_.begin() + k);
            const HeteroSumSpec spec(lambda(), alphas);
            const auto table = hetero_sum_table(spec);
            std::reverse(alphas.begin(), alphas.end());
            const auto reversed = hetero_sum_table(HeteroSumSpec(lambda(), alphas));
            const auto same = hetero_sum_table(HeteroSumSpec(lambda(), std::vector<double>(k, alpha())));
            const IidSumSpec iid(k, params_);
            const std::string tag = "k=" + std::to_string(k);
            double mean_sum = 0.0;
            for (const auto& d : spec.summands()) {
                mean_sum += d.mean();
            }
            mean.add(mean_sum, table.raw_moment(1), tag);
            for (std::int64_t n = k; n <= n_cap; ++n) {
                enumerate.add(hetero_sum_pmf(spec, n, HeteroMethod::enumeration), table.at(n),
                              tag + " " + at_n(n));
                perm.add(table.at(n), reversed.at(n), tag + " " + at_n(n));
                equal.add(iid_sum_pmf(iid, n), same.at(n), tag + " " + at_n(n));
            }
        }
        keep(std::move(enumerate));
        keep(std::move(equal));
        keep(std::move(perm));
        keep(std::move(mean));
    }

    const GridSpec& grid_;
    const Tolerances& tol_;
    std::size_t index_;
    DegeneracyParams params_;
    DztpDist dist_;
    std::vector<double> hetero_alphas_;
    PmfTable table_;
    bool out_mc_pass_ = true;
    PointOutcome out_;
};

std::vector<CheckResult> global_checks(const GridSpec& grid, const Tolerances& tolerances) {
    std::vector<CheckResult> out;
    {
        Check c("kernel.falling_factorial_recurrence", Measure::relative,
                tolerances.get("kernel.falling_factorial_recurrence"));
        std::mt19937_64 rng(derive_seed(grid.seed, std::numeric_limits<std::uint32_t>::max(), 3));
        std::uniform_real_distribution<double> xs(-5.0, 5.0);
        std::uniform_real_distribution<double> ls(-2.0, 2.0);
        std::uniform_int_distribution<int> ns(1, 30);
        for (int i = 0; i < 200; ++i) {
            const double x = xs(rng);
            const double l = ls(rng);
            const int n = ns(rng);
            c.add(falling_factorial(x, n - 1, l) * (x - (n - 1) * l), falling_factorial(x, n, l),
                  "x=" + format_number(x) + " n=" + std::to_string(n) + " lambda=" + format_number(l));
        }
        out.push_back(std::move(c).finish());
    }
    {
        Check c("kernel.stirling_classical_vs_partitions", Measure::exact,
                tolerances.get("kernel.stirling_classical_vs_partitions"));
        const auto tri = stirling_classical(tol::kPartitionOracleMaxN);
        for (int n = 0; n <= tol::kPartitionOracleMaxN; ++n) {
            for (int k = 0; k <= n; ++k) {
                c.add(static_cast<double>(oracle_partitions_stirling(n, k)), tri.at(n, k),
                      "n=" + std::to_string(n) + " k=" + std::to_string(k));
            }
        }
        out.push_back(std::move(c).finish());
    }
    {
        Check limit("kernel.bell_limit", Measure::relative, tolerances.get("kernel.bell_limit"));
        Check branch("kernel.bell_classical_branch", Measure::relative,
                     tolerances.get("kernel.bell_classical_branch"));
        for (double x : {0.5, 1.0, 2.0}) {
            for (int n = 0; n <= 8; ++n) {
                const std::string where = "n=" + std::to_string(n) + " x=" + format_number(x);
                const double classical = bell_classical(n, x);
                limit.add(classical, bell_degenerate(n, x, tol::kBellLimitLambda), where);
                branch.add(classical, bell_degenerate(n, x, 0.0), where);
            }
        }
        out.push_back(std::move(limit).finish());
        out.push_back(std::move(branch).finish());
    }
    return out;
}

}  // namespace

VerificationReport run_verification(const GridSpec& grid, const Tolerances& tolerances, int threads) {
    VerificationReport report;
    const auto points = grid.points();
    if (points.empty()) {
        return report;
    }
    report.checks = global_checks(grid, tolerances);

    auto hetero_for = [&](const DegeneracyParams& p) {
        std::vector<double> alphas = {p.alpha()};
        for (double a : grid.alphas) {
            if (alphas.size() >= static_cast<std::size_t>(tol::kCompositionOracleMaxK)) {
                break;
            }
            if (a != p.alpha() && DegeneracyParams::is_valid(a, p.lambda())) {
                alphas.push_back(a);
            }
        }
        return alphas;
    };
    auto run_point = [&](std::size_t i) {
        return PointRunner(grid, tolerances, i, points[i], hetero_for(points[i])).run();
    };

    std::vector<PointOutcome> outcomes(points.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            outcomes[i] = run_point(i);
        }
    } else {
        std::vector<std::future<void>> workers;
        const auto stride = static_cast<std::size_t>(threads);
        for (std::size_t t = 0; t < stride; ++t) {
            workers.push_back(std::async(std::launch::async, [&, t] {
                for (std::size_t i = t; i < points.size(); i += stride) {
                    outcomes[i] = run_point(i);
                }
            }));
        }
        for (auto& w : workers) {
            w.get();
        }
    }
    for (auto& o : outcomes) {
        std::move(o.checks.begin(), o.checks.end(), std::back_inserter(report.checks));
        std::move(o.moments.begin(), o.moments.end(), std::back_inserter(report.moments));
    }
    return report;
}

}  // namespace dztp::verify
