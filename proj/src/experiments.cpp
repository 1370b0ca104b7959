#include "pbil/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pbil::experiments {

namespace {

constexpr double kCeilGuard = 1e-9;

std::size_t ceil_positive(double v)
{
    const double c = std::ceil(v - kCeilGuard);
    return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

double to_number(const std::string& s, std::string_view what)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument("");
        }
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(what) + ": cannot parse number '" + s + "'");
    }
}

std::string strip_spaces(std::string_view text)
{
    std::string s;
    for (char ch : text) {
        if (ch != ' ' && ch != '\t') {
            s += ch;
        }
    }
    return s;
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

// ---------------------------------------------------------------- rules

LambdaRule LambdaRule::parse(std::string_view text)
{
    const std::string s = strip_spaces(text);
    static const std::regex log_re(R"(^([0-9.eE+-]+)\*ln\(n\)$)");
    static const std::regex pow_re(R"(^([0-9.eE+-]+)\*n\^([0-9.eE+-]+)$)");
    static const std::regex const_re(R"(^[0-9.eE+-]+$)");
    std::smatch m;
    if (s == "ln(n)") {
        return LambdaRule(Log{1.0});
    }
    if (std::regex_match(s, m, log_re)) {
        return LambdaRule(Log{to_number(m[1], "lambda_rule")});
    }
    if (std::regex_match(s, m, pow_re)) {
        return LambdaRule(Power{to_number(m[1], "lambda_rule"), to_number(m[2], "lambda_rule")});
    }
    if (std::regex_match(s, const_re)) {
        return LambdaRule(Power{to_number(s, "lambda_rule"), 0.0});
    }
    if (!s.empty() && s.front() == '[') {
        return from_json(nlohmann::json::parse(s));
    }
    throw std::invalid_argument("lambda_rule: expected 'c*ln(n)', 'c*n^k', a constant or a list, got '" +
                                std::string(text) + "'");
}

LambdaRule LambdaRule::from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        return parse(j.get<std::string>());
    }
    if (j.is_number()) {
        return LambdaRule(Power{j.get<double>(), 0.0});
    }
    if (j.is_array()) {
        List l;
        for (const auto& v : j) {
            if (!v.is_number_integer() || v.get<long long>() < 1) {
                throw std::invalid_argument("lambda_rule: list entries must be positive integers");
            }
            l.values.push_back(v.get<std::size_t>());
        }
        return LambdaRule(std::move(l));
    }
    throw std::invalid_argument("lambda_rule: unsupported JSON type");
}

nlohmann::json LambdaRule::to_json() const
{
    return std::visit(
        [](const auto& r) -> nlohmann::json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, Log>) {
                return format_double(r.c) + "*ln(n)";
            } else if constexpr (std::is_same_v<T, Power>) {
                return format_double(r.c) + "*n^" + format_double(r.k);
            } else {
                return r.values;
            }
        },
        rule_);
}

std::size_t LambdaRule::evaluate(std::size_t n, std::size_t index) const
{
    const auto nn = static_cast<double>(n);
    return std::visit(
        [&](const auto& r) -> std::size_t {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, Log>) {
                return ceil_positive(r.c * std::log(nn));
            } else if constexpr (std::is_same_v<T, Power>) {
                return ceil_positive(r.c * std::pow(nn, r.k));
            } else {
                if (index >= r.values.size()) {
                    throw std::invalid_argument("lambda_rule: list shorter than n_values");
                }
                return r.values[index];
            }
        },
        rule_);
}

BudgetRule BudgetRule::parse(std::string_view text)
{
    const std::string s = strip_spaces(text);
    static const std::regex scaled_re(R"(^([0-9.eE+-]+)\*default$)");
    std::smatch m;
    BudgetRule r;
    if (s == "default") {
        return r;
    }
    if (std::regex_match(s, m, scaled_re)) {
        r.factor_ = to_number(m[1], "budget_rule");
        if (!(r.factor_ > 0.0)) {
            throw std::invalid_argument("budget_rule: factor must be positive");
        }
        return r;
    }
    const double v = to_number(s, "budget_rule");
    if (!(v >= 1.0) || v != std::floor(v)) {
        throw std::invalid_argument("budget_rule: fixed budget must be a positive integer");
    }
    r.fixed_ = static_cast<std::uint64_t>(v);
    return r;
}

std::string BudgetRule::to_string() const
{
    if (fixed_ != 0) {
        return std::to_string(fixed_);
    }
    if (factor_ == 1.0) {
        return "default";
    }
    return format_double(factor_) + "*default";
}

std::uint64_t BudgetRule::evaluate(std::size_t n, std::size_t lambda) const
{
    if (fixed_ != 0) {
        return fixed_;
    }
    const double g = factor_ * static_cast<double>(default_max_generations(n, lambda));
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(g)));
}

// ---------------------------------------------------------------- spec

void SweepSpec::validate() const
{
    if (n_values.empty()) {
        throw std::invalid_argument("sweep: n_values must not be empty");
    }
    for (auto n : n_values) {
        if (n < 2) {
            throw std::invalid_argument("sweep: every n must be >= 2");
        }
    }
    if (trials < 1) {
        throw std::invalid_argument("sweep: trials >= 1 required");
    }
    // gamma0 >= 1 is accepted here; cells whose derived mu exceeds lambda
    // are skipped individually by the runner.
    if (!(gamma0 > 0.0)) {
        throw std::invalid_argument("sweep: gamma0 > 0 required");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("sweep: eta in (0, 1] required");
    }
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j)
{
    SweepSpec s;
    if (j.contains("problem")) {
        s.problem = parse_problem(j.at("problem").get<std::string>());
    }
    if (j.contains("algorithm")) {
        const auto a = j.at("algorithm").get<std::string>();
        if (a != "pbil" && a != "umda") {
            throw std::invalid_argument("sweep: algorithm must be pbil or umda");
        }
        s.umda = a == "umda";
    }
    if (j.contains("n_values")) {
        s.n_values = j.at("n_values").get<std::vector<std::size_t>>();
    }
    if (j.contains("lambda_rule")) {
        s.lambda_rule = LambdaRule::from_json(j.at("lambda_rule"));
    }
    if (j.contains("gamma0")) {
        s.gamma0 = j.at("gamma0").get<double>();
    }
    if (j.contains("eta")) {
        s.eta = j.at("eta").get<double>();
    }
    if (j.contains("trials")) {
        s.trials = j.at("trials").get<std::size_t>();
    }
    if (j.contains("base_seed")) {
        s.base_seed = j.at("base_seed").get<std::uint64_t>();
    }
    if (j.contains("budget_rule")) {
        const auto& b = j.at("budget_rule");
        s.budget_rule = BudgetRule::parse(b.is_string() ? b.get<std::string>() : b.dump());
    }
    return s;
}

nlohmann::json SweepSpec::to_json() const
{
    return {
        {"problem", std::string(problem_name(problem))},
        {"algorithm", umda ? "umda" : "pbil"},
        {"n_values", n_values},
        {"lambda_rule", lambda_rule.to_json()},
        {"gamma0", gamma0},
        {"eta", umda ? 1.0 : eta},
        {"trials", trials},
        {"base_seed", base_seed},
        {"budget_rule", budget_rule.to_string()},
    };
}

// ---------------------------------------------------------------- sweep

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial)
{
    return mix_seed(base_seed, n, trial);
}

std::size_t derive_mu(double gamma0, std::size_t lambda)
{
    const double m = std::round(gamma0 * static_cast<double>(lambda));
    return m < 1.0 ? 1 : static_cast<std::size_t>(m);
}

namespace {

struct Task {
    PbilConfig config;
    std::size_t trial = 0;
};

struct Plan {
    std::vector<Task> tasks;
    std::vector<std::string> skipped;
};

Plan plan_sweep(const SweepSpec& spec)
{
    spec.validate();
    Plan plan;
    for (std::size_t idx = 0; idx < spec.n_values.size(); ++idx) {
        const std::size_t n = spec.n_values[idx];
        const std::size_t lambda = spec.lambda_rule.evaluate(n, idx);
        const std::size_t mu = derive_mu(spec.gamma0, lambda);
        if (mu > lambda) {
            plan.skipped.push_back("n=" + std::to_string(n) + " lambda=" + std::to_string(lambda) +
                                   ": infeasible mu=" + std::to_string(mu) + " (need 1 <= mu <= lambda)");
            continue;
        }
        for (std::size_t t = 0; t < spec.trials; ++t) {
            Task task;
            task.config.n = n;
            task.config.lambda = lambda;
            task.config.mu = mu;
            task.config.eta = spec.umda ? 1.0 : spec.eta;
            task.config.seed = trial_seed(spec.base_seed, n, t);
            task.config.max_generations = spec.budget_rule.evaluate(n, lambda);
            task.trial = t;
            plan.tasks.push_back(std::move(task));
        }
    }
    return plan;
}

TrialRecord run_task(const Task& task, const SweepSpec& spec)
{
    const RunResult r = spec.umda ? run_umda(task.config, spec.problem)
                                  : run_pbil(task.config, spec.problem);
    TrialRecord rec;
    rec.problem = spec.problem;
    rec.n = task.config.n;
    rec.lambda = task.config.lambda;
    rec.mu = task.config.mu;
    rec.eta = task.config.eta;
    rec.seed = task.config.seed;
    rec.generations = r.generations;
    rec.evaluations = r.evaluations;
    rec.success = r.success;
    rec.censored = !r.success;
    rec.trial = task.trial;
    return rec;
}

void sort_records(std::vector<TrialRecord>& records)
{
    std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        return std::tie(a.n, a.trial) < std::tie(b.n, b.trial);
    });
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec, int workers)
{
    Plan plan = plan_sweep(spec);
    std::vector<TrialRecord> records(plan.tasks.size());
    const auto count = static_cast<long>(plan.tasks.size());
#ifdef _OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
#endif

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long k = 0; k < count; ++k) {
        records[static_cast<std::size_t>(k)] = run_task(plan.tasks[static_cast<std::size_t>(k)], spec);
    }

    sort_records(records);
    return {std::move(records), std::move(plan.skipped)};
}

SweepResult run_sweep_serial(const SweepSpec& spec)
{
    Plan plan = plan_sweep(spec);
    std::vector<TrialRecord> records;
    records.reserve(plan.tasks.size());
    for (const auto& task : plan.tasks) {
        records.push_back(run_task(task, spec));
    }
    sort_records(records);
    return {std::move(records), std::move(plan.skipped)};
}

// ---------------------------------------------------------------- summaries

double quantile_sorted(const std::vector<double>& sorted, double q)
{
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of empty data");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(sorted.size() - 1, lo + 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records)
{
    using Key = std::tuple<int, std::size_t, std::size_t, std::size_t, double>;
    std::map<Key, std::vector<const TrialRecord*>> cells;
    for (const auto& r : records) {
        cells[{static_cast<int>(r.problem), r.n, r.lambda, r.mu, r.eta}].push_back(&r);
    }

    std::vector<CellSummary> out;
    out.reserve(cells.size());
    for (const auto& [key, members] : cells) {
        CellSummary s;
        s.problem = members.front()->problem;
        s.n = members.front()->n;
        s.lambda = members.front()->lambda;
        s.mu = members.front()->mu;
        s.eta = members.front()->eta;
        s.trials = members.size();

        std::vector<double> evals;
        evals.reserve(members.size());
        std::size_t successes = 0;
        double sum = 0.0;
        for (const auto* r : members) {
            evals.push_back(static_cast<double>(r->evaluations));
            sum += static_cast<double>(r->evaluations);
            successes += r->success ? 1 : 0;
            s.censored = s.censored || r->censored;
        }
        std::sort(evals.begin(), evals.end());
        s.median = quantile_sorted(evals, 0.5);
        s.q25 = quantile_sorted(evals, 0.25);
        s.q75 = quantile_sorted(evals, 0.75);
        s.mean = sum / static_cast<double>(members.size());
        s.success_rate = static_cast<double>(successes) / static_cast<double>(members.size());
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------- fit

double ScalingFit::predict(double n, double lambda) const
{
    return a * n * n + b * n * lambda * std::log(lambda);
}

ScalingFit fit_scaling(const std::vector<CellSummary>& summaries)
{
    std::vector<double> distinct_n;
    for (const auto& s : summaries) {
        distinct_n.push_back(static_cast<double>(s.n));
    }
    std::sort(distinct_n.begin(), distinct_n.end());
    distinct_n.erase(std::unique(distinct_n.begin(), distinct_n.end()), distinct_n.end());
    if (distinct_n.size() < 3) {
        throw FitError("fit_scaling: need at least 3 distinct n values, got " +
                       std::to_string(distinct_n.size()));
    }

    double g00 = 0.0, g01 = 0.0, g11 = 0.0, r0 = 0.0, r1 = 0.0, yy = 0.0;
    std::vector<std::array<double, 3>> rows;
    for (const auto& s : summaries) {
        const auto n = static_cast<double>(s.n);
        const auto l = static_cast<double>(s.lambda);
        const double x0 = n * n;
        const double x1 = n * l * std::log(l);
        const double y = s.median;
        rows.push_back({x0, x1, y});
        g00 += x0 * x0;
        g01 += x0 * x1;
        g11 += x1 * x1;
        r0 += x0 * y;
        r1 += x1 * y;
        yy += y * y;
    }

    const double det = g00 * g11 - g01 * g01;
    if (!(g00 > 0.0) || !(g11 > 0.0) || det <= 1e-10 * g00 * g11) {
        throw FitError("fit_scaling: design matrix is rank deficient (n^2 and n*lambda*ln(lambda) "
                       "are collinear over the supplied cells; vary lambda/n or check lambda > 1)");
    }

    const auto sse = [&](double a, double b) {
        double e = 0.0;
        for (const auto& r : rows) {
            const double d = a * r[0] + b * r[1] - r[2];
            e += d * d;
        }
        return e;
    };

    // Two-variable NNLS: the optimum is either the unconstrained solution or
    // lies on one of the axes.
    std::vector<std::pair<double, double>> candidates;
    const double a_free = (r0 * g11 - r1 * g01) / det;
    const double b_free = (r1 * g00 - r0 * g01) / det;
    if (a_free >= 0.0 && b_free >= 0.0) {
        candidates.emplace_back(a_free, b_free);
    }
    candidates.emplace_back(std::max(0.0, r0 / g00), 0.0);
    candidates.emplace_back(0.0, std::max(0.0, r1 / g11));

    ScalingFit best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : candidates) {
        const double e = sse(a, b);
        if (e < best_sse) {
            best_sse = e;
            best.a = a;
            best.b = b;
        }
    }
    best.residual = yy > 0.0 ? std::sqrt(best_sse / yy) : 0.0;
    return best;
}

// ---------------------------------------------------------------- marginal failure rate

FailureRateReport marginal_failure_rate(const PbilConfig& config,
                                        Problem problem,
                                        double epsilon,
                                        std::uint64_t generations_window)
{
    config.validate();
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("marginal_failure_rate: epsilon > 0 required");
    }
    FailureRateReport rep;
    const double gamma0 = config.gamma0();
    rep.threshold = gamma0 / (1.0 + epsilon);
    const double scale = (1.0 + 1.0 / epsilon) / gamma0;
    rep.implied_c = static_cast<double>(config.lambda) /
                    (scale * scale * std::log(static_cast<double>(config.n)));
    rep.predicted_bound = 2.0 * std::pow(static_cast<double>(config.n), -2.0 * rep.implied_c);

    PbilConfig cfg = config;
    cfg.max_generations = std::min(config.budget(), std::max<std::uint64_t>(1, generations_window));

    RunOptions opts;
    opts.observer = [&](const GenerationView& view) {
        ++rep.generations;
        const auto probs = view.model->probs();
        for (std::size_t i = 0; i < view.mu_th_level; ++i) {
            ++rep.inspected;
            if (probs[i] < rep.threshold) {
                ++rep.failures;
            }
        }
    };
    run_pbil(cfg, problem, opts);
    rep.rate = rep.inspected == 0 ? 0.0
                                  : static_cast<double>(rep.failures) / static_cast<double>(rep.inspected);
    return rep;
}

// ---------------------------------------------------------------- csv

void write_csv(const std::vector<TrialRecord>& records, std::ostream& out, bool header)
{
    if (header) {
        out << kCsvHeader << '\n';
    }
    for (const auto& r : records) {
        out << problem_name(r.problem) << ',' << r.n << ',' << r.lambda << ',' << r.mu << ','
            << format_double(r.eta) << ',' << r.seed << ',' << r.generations << ','
            << r.evaluations << ',' << (r.success ? 1 : 0) << ',' << (r.censored ? 1 : 0) << '\n';
    }
}

void export_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    write_csv(records, out);
    out.flush();
    if (!out) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

namespace {

template <typename T>
T parse_field(const std::string& s, std::size_t line, std::string_view name)
{
    T v{};
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw CsvError(line, "bad value '" + s + "' in column " + std::string(name));
    }
    return v;
}

bool parse_flag(const std::string& s, std::size_t line, std::string_view name)
{
    if (s == "1" || s == "true") {
        return true;
    }
    if (s == "0" || s == "false") {
        return false;
    }
    throw CsvError(line, "bad boolean '" + s + "' in column " + std::string(name));
}

} // namespace

std::vector<TrialRecord> parse_csv(std::istream& in)
{
    std::vector<TrialRecord> records;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) {
        throw CsvError(1, "missing header");
    }
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kCsvHeader) {
        throw CsvError(1, "unexpected header '" + line + "'");
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() != 10) {
            throw CsvError(lineno, "expected 10 columns, got " + std::to_string(f.size()));
        }
        TrialRecord r;
        try {
            r.problem = parse_problem(f[0]);
        } catch (const std::invalid_argument& e) {
            throw CsvError(lineno, e.what());
        }
        r.n = parse_field<std::size_t>(f[1], lineno, "n");
        r.lambda = parse_field<std::size_t>(f[2], lineno, "lambda");
        r.mu = parse_field<std::size_t>(f[3], lineno, "mu");
        r.eta = parse_field<double>(f[4], lineno, "eta");
        r.seed = parse_field<std::uint64_t>(f[5], lineno, "seed");
        r.generations = parse_field<std::uint64_t>(f[6], lineno, "generations");
        r.evaluations = parse_field<std::uint64_t>(f[7], lineno, "evaluations");
        r.success = parse_flag(f[8], lineno, "success");
        r.censored = parse_flag(f[9], lineno, "censored");
        records.push_back(r);
    }
    return records;
}

std::vector<TrialRecord> read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    return parse_csv(in);
}

} // namespace pbil::experiments
