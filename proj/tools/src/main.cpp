// dztp: command-line front end for the degenerate zero-truncated Poisson library.
//
// Exit codes: 0 success, 1 usage or unreadable input file, 2 parameters
// outside the valid domain, 3 verification failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dztp/convolution.hpp"
#include "dztp/distributions.hpp"
#include "dztp/errors.hpp"
#include "dztp/format.hpp"
#include "dztp/kernel.hpp"
#include "dztp/verify.hpp"

namespace {

using json = nlohmann::json;
using dztp::format_number;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitVerifyFailed = 3;

constexpr const char* kTailTolEnv = "DEGEN_POISSON_TAIL_TOL";

// Thrown for bad input that is not a domain violation (missing files and the like).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Format { csv, json, pretty };

const std::map<std::string, Format> kFormats = {
    {"csv", Format::csv}, {"json", Format::json}, {"pretty", Format::pretty}};

json num(double v) { return dztp::round_significant(v); }

void add_format_flag(CLI::App* cmd, Format& format) {
    cmd->add_option("--format", format, "Output format: csv, json or pretty")
        ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case))
        ->default_str("pretty");
}

struct ParamFlags {
    double alpha = 0.0;
    double lambda = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--alpha", alpha, "Rate parameter, > 0")->required();
        cmd->add_option("--lambda", lambda, "Degeneracy parameter")->required();
    }
    dztp::DegeneracyParams params() const { return {alpha, lambda}; }
};

struct TailFlag {
    std::optional<double> value;

    void attach(CLI::App* cmd) {
        cmd->add_option("--tail-tol", value,
                        std::string("Certified tail tolerance (default 1e-15, or $") + kTailTolEnv + ")");
    }

    double resolve() const {
        if (value) {
            return *value;
        }
        if (const char* env = std::getenv(kTailTolEnv); env && *env) {
            char* end = nullptr;
            const double v = std::strtod(env, &end);
            if (end == env || *end != '\0') {
                throw UsageError(std::string(kTailTolEnv) + " is not a number: '" + env + "'");
            }
            return v;
        }
        return dztp::tol::kTableTail;
    }
};

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError(std::string("cannot read ") + what + " '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Column-aligned text table.
class PrettyTable {
public:
    explicit PrettyTable(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    void print(std::ostream& os) const {
        std::vector<std::size_t> width;
        for (const auto& r : rows_) {
            width.resize(std::max(width.size(), r.size()), 0);
            for (std::size_t i = 0; i < r.size(); ++i) {
                width[i] = std::max(width[i], r[i].size());
            }
        }
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                os << (i ? "  " : "") << std::string(width[i] - r[i].size(), ' ') << r[i];
            }
            os << '\n';
        }
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

// ---------------------------------------------------------------------------
// pmf

struct PmfCommand {
    ParamFlags p;
    TailFlag tail;
    std::optional<std::int64_t> n_max;
    Format format = Format::pretty;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("pmf", "Probability mass function table");
        p.attach(cmd);
        tail.attach(cmd);
        cmd->add_option("--n-max", n_max, "Last support point to print");
        add_format_flag(cmd, format);
    }

    int run() const {
        const dztp::DztpDist dist(p.params());
        dztp::PmfTable table = dist.table(tail.resolve());
        if (n_max) {
            if (*n_max < 1) {
                throw dztp::DomainError("--n-max must be >= 1");
            }
            // Truncation moves the dropped mass into the tail; extension
            // subtracts the added mass from the certified bound.
            while (table.support_end() > *n_max) {
                table.tail_mass += table.probs.back();
                table.probs.pop_back();
            }
            while (table.support_end() < *n_max) {
                const double q = dist.pmf(table.support_end() + 1);
                table.probs.push_back(q);
                table.tail_mass = std::max(0.0, table.tail_mass - q);
            }
        }

        std::vector<double> cdf;
        for (std::int64_t n = table.support_start; n <= table.support_end(); ++n) {
            cdf.push_back(dist.cdf(static_cast<double>(n)));
        }
        const double last_cdf = cdf.empty() ? 0.0 : cdf.back();

        switch (format) {
            case Format::csv: {
                std::cout << "n,pmf,cdf\n";
                for (std::size_t i = 0; i < table.probs.size(); ++i) {
                    std::cout << table.support_start + static_cast<std::int64_t>(i) << ','
                              << format_number(table.probs[i]) << ',' << format_number(cdf[i]) << '\n';
                }
                std::cout << "tail," << format_number(table.tail_mass) << ','
                          << format_number(last_cdf + table.tail_mass) << '\n';
                break;
            }
            case Format::json: {
                json probs = json::array();
                json cdfs = json::array();
                for (std::size_t i = 0; i < table.probs.size(); ++i) {
                    probs.push_back(num(table.probs[i]));
                    cdfs.push_back(num(cdf[i]));
                }
                const json doc = {{"alpha", num(dist.alpha())},
                                  {"lambda", num(dist.lambda())},
                                  {"support_start", table.support_start},
                                  {"support_end", table.support_end()},
                                  {"probs", probs},
                                  {"cdf", cdfs},
                                  {"tail_mass", num(table.tail_mass)}};
                std::cout << doc.dump(2) << '\n';
                break;
            }
            case Format::pretty: {
                PrettyTable t({"n", "pmf", "cdf"});
                for (std::size_t i = 0; i < table.probs.size(); ++i) {
                    t.add({std::to_string(table.support_start + static_cast<std::int64_t>(i)),
                           format_number(table.probs[i]), format_number(cdf[i])});
                }
                t.add({"tail", format_number(table.tail_mass), format_number(last_cdf + table.tail_mass)});
                t.print(std::cout);
                break;
            }
        }
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// moments

struct MomentsCommand {
    ParamFlags p;
    TailFlag tail;
    int max_order = 4;
    Format format = Format::pretty;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("moments", "Raw moments: closed form against table summation");
        p.attach(cmd);
        tail.attach(cmd);
        cmd->add_option("--max-order", max_order, "Highest moment order")->default_val(4);
        add_format_flag(cmd, format);
    }

    int run() const {
        if (max_order < 1) {
            throw dztp::DomainError("--max-order must be >= 1");
        }
        const auto params = p.params();
        const dztp::DztpDist dist(params);
        const double tol = tail.resolve();

        std::vector<dztp::verify::MomentReport> rows;
        for (int n = 1; n <= max_order; ++n) {
            const double closed = dist.moment(n);
            const double summed = dztp::verify::oracle_moment_by_summation(params, n, tol).value;
            rows.push_back({params, n, closed, summed, 0.0, 0.0,
                            dztp::verify::relative_discrepancy(closed, summed)});
        }

        switch (format) {
            case Format::csv:
                std::cout << "order,closed_form,table_sum,rel_discrepancy\n";
                for (const auto& r : rows) {
                    std::cout << r.order << ',' << format_number(r.closed_form) << ','
                              << format_number(r.table_sum) << ',' << format_number(r.rel_discrepancy)
                              << '\n';
                }
                break;
            case Format::json: {
                json arr = json::array();
                for (const auto& r : rows) {
                    arr.push_back({{"order", r.order},
                                   {"closed_form", num(r.closed_form)},
                                   {"table_sum", num(r.table_sum)},
                                   {"rel_discrepancy", num(r.rel_discrepancy)}});
                }
                const json doc = {
                    {"alpha", num(params.alpha())}, {"lambda", num(params.lambda())}, {"moments", arr}};
                std::cout << doc.dump(2) << '\n';
                break;
            }
            case Format::pretty: {
                PrettyTable t({"order", "closed_form", "table_sum", "rel_discrepancy"});
                for (const auto& r : rows) {
                    t.add({std::to_string(r.order), format_number(r.closed_form), format_number(r.table_sum),
                           format_number(r.rel_discrepancy)});
                }
                t.print(std::cout);
                break;
            }
        }
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// sample

struct SampleCommand {
    ParamFlags p;
    std::int64_t count = 10;
    std::uint64_t seed = 42;
    Format format = Format::pretty;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("sample", "Seeded random variates");
        p.attach(cmd);
        cmd->add_option("--count", count, "Number of variates")->default_val(10);
        cmd->add_option("--seed", seed, "Generator seed")->default_val(42);
        add_format_flag(cmd, format);
    }

    int run() const {
        const auto params = p.params();
        if (count < 1) {
            throw dztp::DomainError("--count must be >= 1");
        }
        dztp::SampleStream stream(seed, params);
        std::vector<std::int64_t> xs;
        xs.reserve(static_cast<std::size_t>(count));
        for (std::int64_t i = 0; i < count; ++i) {
            xs.push_back(stream.next());
        }

        switch (format) {
            case Format::csv: {
                std::string out = "variate\n";
                for (auto x : xs) {
                    out += std::to_string(x);
                    out += '\n';
                }
                std::cout << out;
                break;
            }
            case Format::json: {
                const json doc = {{"alpha", num(params.alpha())},
                                  {"lambda", num(params.lambda())},
                                  {"seed", seed},
                                  {"method", std::string(dztp::to_string(stream.method()))},
                                  {"variates", xs}};
                std::cout << doc.dump() << '\n';
                break;
            }
            case Format::pretty: {
                std::map<std::int64_t, std::int64_t> freq;
                double sum = 0.0;
                for (auto x : xs) {
                    ++freq[x];
                    sum += static_cast<double>(x);
                }
                const double n = static_cast<double>(count);
                const double mean = sum / n;
                double ss = 0.0;
                for (const auto& [v, c] : freq) {
                    ss += static_cast<double>(c) * (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
                }
                PrettyTable t({"value", "count", "fraction"});
                for (const auto& [v, c] : freq) {
                    t.add({std::to_string(v), std::to_string(c), format_number(static_cast<double>(c) / n)});
                }
                t.print(std::cout);
                std::cout << "\ncount    " << count << "\nmean     " << format_number(mean) << "\nvariance "
                          << format_number(count > 1 ? ss / (n - 1.0) : 0.0) << "\nseed     " << seed
                          << "\nmethod   " << dztp::to_string(stream.method()) << '\n';
                break;
            }
        }
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// sum

struct SumCommand {
    std::optional<double> alpha;
    std::vector<double> alphas;
    double lambda = 0.0;
    int k = 1;
    std::optional<std::int64_t> n_max;
    TailFlag tail;
    Format format = Format::pretty;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("sum", "Distribution of a sum of independent variables");
        auto* a = cmd->add_option("--alpha", alpha, "Shared rate (with --k)");
        auto* as = cmd->add_option("--alphas", alphas, "Comma-separated rates, one per summand")
                       ->delimiter(',');
        a->excludes(as);
        as->excludes(a);
        cmd->add_option("--lambda", lambda, "Degeneracy parameter")->required();
        cmd->add_option("--k", k, "Number of summands (with --alpha)")->default_val(1)->excludes(as);
        cmd->add_option("--n-max", n_max, "Last support point to print");
        tail.attach(cmd);
        add_format_flag(cmd, format);
        cmd->callback([this, cmd] {
            if (!alpha && alphas.empty()) {
                throw CLI::RequiredError("sum needs --alpha or --alphas");
            }
            (void)cmd;
        });
    }

    int run() const {
        const double tol = tail.resolve();
        std::vector<double> rates = alphas;
        if (alpha) {
            if (k < 1) {
                throw dztp::DomainError("--k must be >= 1");
            }
            rates.assign(static_cast<std::size_t>(k), *alpha);
        }
        const dztp::HeteroSumSpec spec(lambda, rates);
        const bool iid = std::all_of(rates.begin(), rates.end(), [&](double a) { return a == rates.front(); });

        dztp::PmfTable numeric;
        std::optional<dztp::PmfTable> closed_table;
        if (iid) {
            const dztp::IidSumSpec s(spec.k(), dztp::DegeneracyParams(rates.front(), spec.lambda));
            closed_table = dztp::iid_sum_table(s, tol);
            numeric = dztp::iid_sum_convolution_table(s, tol);
        } else {
            numeric = dztp::hetero_sum_table(spec, tol);
        }

        const std::int64_t lo = numeric.support_start;
        const std::int64_t hi = n_max ? *n_max : numeric.support_end();
        struct Row {
            std::int64_t n;
            std::optional<double> closed;
            double conv;
        };
        std::vector<Row> rows;
        double max_disc = 0.0;
        for (std::int64_t n = lo; n <= hi; ++n) {
            std::optional<double> c;
            if (closed_table) {
                c = n <= closed_table->support_end()
                        ? closed_table->at(n)
                        : dztp::iid_sum_pmf(dztp::IidSumSpec(spec.k(), {rates.front(), spec.lambda}), n);
            } else if (n <= dztp::tol::kCompositionOracleMaxN && spec.k() <= dztp::tol::kCompositionOracleMaxK) {
                c = dztp::hetero_sum_pmf(spec, n, dztp::HeteroMethod::enumeration);
            }
            const double v = n <= numeric.support_end() ? numeric.at(n) : 0.0;
            if (c) {
                max_disc = std::max(max_disc, std::abs(*c - v));
            }
            rows.push_back({n, c, v});
        }
        const double tail_mass = numeric.tail_mass;

        auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
        switch (format) {
            case Format::csv:
                std::cout << "n,closed_form,convolution\n";
                for (const auto& r : rows) {
                    std::cout << r.n << ',' << cell(r.closed) << ',' << format_number(r.conv) << '\n';
                }
                std::cout << "tail," << (closed_table ? format_number(closed_table->tail_mass) : "") << ','
                          << format_number(tail_mass) << '\n';
                std::cerr << "max_discrepancy " << format_number(max_disc) << '\n';
                break;
            case Format::json: {
                json closed = json::array();
                json conv = json::array();
                for (const auto& r : rows) {
                    closed.push_back(r.closed ? num(*r.closed) : json(nullptr));
                    conv.push_back(num(r.conv));
                }
                json rates_json = json::array();
                for (double a : rates) {
                    rates_json.push_back(num(a));
                }
                const json doc = {{"alphas", rates_json},
                                  {"lambda", num(spec.lambda)},
                                  {"k", spec.k()},
                                  {"support_start", lo},
                                  {"closed_form", closed},
                                  {"convolution", conv},
                                  {"tail_mass", num(tail_mass)},
                                  {"max_discrepancy", num(max_disc)}};
                std::cout << doc.dump(2) << '\n';
                break;
            }
            case Format::pretty: {
                PrettyTable t({"n", "closed_form", "convolution"});
                for (const auto& r : rows) {
                    t.add({std::to_string(r.n), r.closed ? format_number(*r.closed) : "-", format_number(r.conv)});
                }
                t.print(std::cout);
                std::cout << "\ntail_mass       " << format_number(tail_mass) << "\nmax_discrepancy "
                          << format_number(max_disc) << '\n';
                break;
            }
        }
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// triangle

struct TriangleCommand {
    double lambda = 0.0;
    int max_n = 5;
    Format format = Format::pretty;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("triangle", "Degenerate Stirling numbers of the second kind");
        cmd->add_option("--lambda", lambda, "Degeneracy parameter (any real)")->required();
        cmd->add_option("--max-n", max_n, "Last row")->default_val(5);
        add_format_flag(cmd, format);
    }

    int run() const {
        if (max_n < 0) {
            throw dztp::DomainError("--max-n must be >= 0");
        }
        const auto tri = dztp::stirling_degenerate(max_n, lambda);
        auto text = [&](int n, int k) {
            if (const auto e = tri.exact(n, k)) {
                return std::to_string(*e);
            }
            return format_number(tri.at(n, k));
        };
        auto value = [&](int n, int k) -> json {
            if (const auto e = tri.exact(n, k)) {
                return *e;
            }
            return num(tri.at(n, k));
        };

        switch (format) {
            case Format::csv:
                std::cout << "n,k,value\n";
                for (int n = 0; n <= max_n; ++n) {
                    for (int k = 0; k <= n; ++k) {
                        std::cout << n << ',' << k << ',' << text(n, k) << '\n';
                    }
                }
                break;
            case Format::json: {
                json rows = json::array();
                for (int n = 0; n <= max_n; ++n) {
                    json row = json::array();
                    for (int k = 0; k <= n; ++k) {
                        row.push_back(value(n, k));
                    }
                    rows.push_back(row);
                }
                const json doc = {{"lambda", num(lambda)}, {"max_n", max_n}, {"rows", rows}};
                std::cout << doc.dump(2) << '\n';
                break;
            }
            case Format::pretty:
                for (int n = 0; n <= max_n; ++n) {
                    std::cout << n << ':';
                    for (int k = 0; k <= n; ++k) {
                        std::cout << ' ' << text(n, k);
                    }
                    std::cout << '\n';
                }
                break;
        }
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// verify

struct VerifyCommand {
    std::string grid = "default";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> mc_samples;
    std::string tolerances;
    int threads = 1;
    Format format = Format::pretty;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("verify", "Run the verification suite over a parameter grid");
        cmd->add_option("--grid", grid, "'default' or a JSON grid file")->default_val("default");
        cmd->add_option("--seed", seed, "Override the grid seed");
        cmd->add_option("--mc-samples", mc_samples, "Override the Monte Carlo sample count");
        cmd->add_option("--tolerances", tolerances, "JSON file of tolerance overrides");
        cmd->add_option("--threads", threads, "Grid points evaluated concurrently")
            ->default_val(1)
            ->check(CLI::Range(1, 256));
        add_format_flag(cmd, format);
    }

    int run() const {
        dztp::verify::GridSpec spec;
        try {
            spec = grid == "default" ? dztp::verify::GridSpec::default_grid()
                                     : dztp::verify::GridSpec::from_json(read_file(grid, "grid file"));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        } catch (const dztp::DomainError& e) {
            throw UsageError(std::string("grid file: ") + e.what());
        }
        if (seed) {
            spec.seed = *seed;
        }
        if (mc_samples) {
            if (*mc_samples < 0) {
                throw UsageError("--mc-samples must be >= 0");
            }
            spec.mc_samples = *mc_samples;
        }
        dztp::verify::Tolerances tol = dztp::verify::Tolerances::defaults();
        if (!tolerances.empty()) {
            try {
                tol = dztp::verify::Tolerances::from_json(read_file(tolerances, "tolerance file"));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }

        const auto report = dztp::verify::run_verification(spec, tol, threads);
        switch (format) {
            case Format::json:
                std::cout << report.to_json();
                break;
            case Format::pretty:
                std::cout << report.to_table();
                break;
            case Format::csv:
                std::cout << "name,alpha,lambda,expected,actual,discrepancy,tolerance,pass\n";
                for (const auto& c : report.checks) {
                    std::cout << c.name << ',' << (c.alpha ? format_number(*c.alpha) : "") << ','
                              << (c.lambda ? format_number(*c.lambda) : "") << ',' << format_number(c.expected)
                              << ',' << format_number(c.actual) << ',' << format_number(c.discrepancy) << ','
                              << format_number(c.tolerance) << ',' << (c.pass ? "true" : "false") << '\n';
                }
                break;
        }
        return report.passed() ? kExitOk : kExitVerifyFailed;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Degenerate zero-truncated Poisson distribution toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dztp 0.1.0");

    PmfCommand pmf;
    MomentsCommand moments;
    SampleCommand sample;
    SumCommand sum;
    TriangleCommand triangle;
    VerifyCommand verify;
    pmf.attach(app);
    moments.attach(app);
    sample.attach(app);
    sum.attach(app);
    triangle.attach(app);
    verify.attach(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("pmf")) {
            return pmf.run();
        }
        if (app.got_subcommand("moments")) {
            return moments.run();
        }
        if (app.got_subcommand("sample")) {
            return sample.run();
        }
        if (app.got_subcommand("sum")) {
            return sum.run();
        }
        if (app.got_subcommand("triangle")) {
            return triangle.run();
        }
        return verify.run();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const dztp::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const dztp::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const dztp::CombinatorialLimitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}
