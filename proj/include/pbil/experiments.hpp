#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "pbil/algorithm.hpp"
#include "pbil/fitness.hpp"

namespace pbil::experiments {

/// Offspring population size as a function of n. Accepted forms:
/// "c*ln(n)", "c*n^k", a bare constant "c", or an explicit list aligned
/// with the sweep's n values. Results are rounded up and floored at 1.
class LambdaRule {
public:
    struct Log { double c; };
    struct Power { double c; double k; };
    struct List { std::vector<std::size_t> values; };

    LambdaRule() : rule_(Log{6.0}) {}
    explicit LambdaRule(Log r) : rule_(r) {}
    explicit LambdaRule(Power r) : rule_(r) {}
    explicit LambdaRule(List r) : rule_(std::move(r)) {}

    static LambdaRule parse(std::string_view text);
    static LambdaRule from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // `index` is the position of n in the sweep (used by list rules).
    std::size_t evaluate(std::size_t n, std::size_t index) const;

private:
    std::variant<Log, Power, List> rule_;
};

/// Generation budget: "default", "c*default", or a positive integer.
class BudgetRule {
public:
    BudgetRule() = default;
    static BudgetRule parse(std::string_view text);
    std::string to_string() const;
    std::uint64_t evaluate(std::size_t n, std::size_t lambda) const;

private:
    double factor_ = 1.0;      // multiplies the default budget
    std::uint64_t fixed_ = 0;  // overrides when non-zero
};

struct SweepSpec {
    Problem problem = Problem::LeadingOnes;
    bool umda = false; // route through run_umda (eta forced to 1)
    std::vector<std::size_t> n_values;
    LambdaRule lambda_rule;
    double gamma0 = 0.25;
    double eta = 1.0;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    BudgetRule budget_rule;

    void validate() const;
    static SweepSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct TrialRecord {
    Problem problem = Problem::LeadingOnes;
    std::size_t n = 0;
    std::size_t lambda = 0;
    std::size_t mu = 0;
    double eta = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t generations = 0;
    std::uint64_t evaluations = 0;
    bool success = false;
    bool censored = false;
    std::size_t trial = 0; // not serialised; orders records within a cell

    bool operator==(const TrialRecord& o) const
    {
        return problem == o.problem && n == o.n && lambda == o.lambda && mu == o.mu &&
               eta == o.eta && seed == o.seed && generations == o.generations &&
               evaluations == o.evaluations && success == o.success && censored == o.censored;
    }
};

struct SweepResult {
    std::vector<TrialRecord> records;
    std::vector<std::string> skipped; // one diagnostic per infeasible cell
};

// Seed of trial `trial` in the cell for dimension `n`.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial);

// mu = max(1, round(gamma0 * lambda)).
std::size_t derive_mu(double gamma0, std::size_t lambda);

// OpenMP over trials; `workers` == 0 uses the runtime default.
SweepResult run_sweep(const SweepSpec& spec, int workers = 0);

// Single-threaded reference for run_sweep; identical output.
SweepResult run_sweep_serial(const SweepSpec& spec);

struct CellSummary {
    Problem problem = Problem::LeadingOnes;
    std::size_t n = 0;
    std::size_t lambda = 0;
    std::size_t mu = 0;
    double eta = 1.0;
    std::size_t trials = 0;
    double median = 0.0;
    double mean = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double success_rate = 0.0;
    bool censored = false;
};

// Linear-interpolation quantile of sorted data (q in [0, 1]).
double quantile_sorted(const std::vector<double>& sorted, double q);

// One summary per (problem, n, lambda, mu, eta) cell, ordered by those keys.
std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records);

struct ScalingFit {
    double a = 0.0; // coefficient of n^2
    double b = 0.0; // coefficient of n lambda ln(lambda)
    double residual = 0.0; // ||fit - y|| / ||y||

    double predict(double n, double lambda) const;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-negative least squares of median evaluations on (n^2, n lambda ln lambda).
// Throws FitError with fewer than three distinct n or a rank-deficient design.
ScalingFit fit_scaling(const std::vector<CellSummary>& summaries);

struct FailureRateReport {
    double rate = 0.0;
    std::uint64_t inspected = 0; // (generation, position) pairs with position < current level
    std::uint64_t failures = 0;
    std::uint64_t generations = 0;
    double threshold = 0.0;  // gamma0 / (1 + eps)
    double implied_c = 0.0;  // lambda / (((1 + 1/eps) / gamma0)^2 ln n)
    double predicted_bound = 0.0; // 2 n^(-2c)
};

// Runs PBIL for at most `generations_window` generations and counts, in every
// generation, positions i below the level j of the mu-th fittest offspring
// whose marginal is under gamma0 / (1 + eps).
FailureRateReport marginal_failure_rate(const PbilConfig& config,
                                        Problem problem,
                                        double epsilon,
                                        std::uint64_t generations_window);

inline constexpr std::string_view kCsvHeader =
    "problem,n,lambda,mu,eta,seed,generations,evaluations,success,censored";

class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

void write_csv(const std::vector<TrialRecord>& records, std::ostream& out, bool header = true);
void export_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path);
std::vector<TrialRecord> parse_csv(std::istream& in);
std::vector<TrialRecord> read_csv(const std::filesystem::path& path);

std::string format_double(double v);

} // namespace pbil::experiments
