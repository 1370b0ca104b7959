#include "pbil/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "pbil/algorithm.hpp"
#include "pbil/experiments.hpp"
#include "pbil/plot.hpp"
#include "pbil/properties.hpp"
#include "pbil/theory.hpp"

namespace pbil::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json load_config(const std::string& path)
{
    if (path.empty()) {
        return json::object();
    }
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open config '" + path + "'");
    }
    try {
        json j = json::parse(in);
        if (!j.is_object()) {
            throw UsageError("config '" + path + "' must be a JSON object");
        }
        return j;
    } catch (const json::parse_error& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
}

// Holds flag storage; `apply` copies flags that were actually given into
// the effective configuration, so flags override file values.
class Overrides {
public:
    explicit Overrides(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* add(const std::string& flag, const std::string& key, const std::string& help)
    {
        auto slot = std::make_shared<T>();
        CLI::Option* opt = app_->add_option(flag, *slot, help);
        appliers_.push_back([opt, slot, key](json& cfg) {
            if (opt->count() > 0) {
                cfg[key] = *slot;
            }
        });
        return opt;
    }

    void add_flag(const std::string& flag, const std::string& key, const std::string& help)
    {
        auto slot = std::make_shared<bool>(false);
        CLI::Option* opt = app_->add_flag(flag, *slot, help);
        appliers_.push_back([opt, slot, key](json& cfg) {
            if (opt->count() > 0) {
                cfg[key] = *slot;
            }
        });
    }

    void apply(json& cfg) const
    {
        for (const auto& f : appliers_) {
            f(cfg);
        }
    }

private:
    CLI::App* app_;
    std::vector<std::function<void(json&)>> appliers_;
};

template <typename T>
T require_key(const json& cfg, const std::string& key)
{
    if (!cfg.contains(key) || cfg.at(key).is_null()) {
        throw UsageError("missing required parameter --" + key);
    }
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("parameter --" + key + " has the wrong type");
    }
}

template <typename T>
std::optional<T> optional_key(const json& cfg, const std::string& key)
{
    if (!cfg.contains(key) || cfg.at(key).is_null()) {
        return std::nullopt;
    }
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("parameter --" + key + " has the wrong type");
    }
}

std::size_t positive_size(const json& cfg, const std::string& key)
{
    const auto v = require_key<long long>(cfg, key);
    if (v < 1) {
        throw UsageError("invalid parameter: " + key + " >= 1 required");
    }
    return static_cast<std::size_t>(v);
}

json run_result_json(const RunResult& r)
{
    json j{{"success", r.success}, {"generations", r.generations}, {"evaluations", r.evaluations}};
    if (!r.best_level_trace.empty()) {
        j["best_level_trace"] = r.best_level_trace;
    }
    if (!r.marginal_snapshots.empty()) {
        json snaps = json::array();
        for (const auto& s : r.marginal_snapshots) {
            snaps.push_back({{"generation", s.generation}, {"probs", s.probs}});
        }
        j["marginal_snapshots"] = std::move(snaps);
    }
    return j;
}

// ------------------------------------------------------------------ run

int cmd_run(const json& cfg, std::ostream& out)
{
    const Problem problem = parse_problem(require_key<std::string>(cfg, "problem"));
    const std::string algorithm = optional_key<std::string>(cfg, "algorithm").value_or("pbil");
    if (algorithm != "pbil" && algorithm != "umda") {
        throw UsageError("invalid parameter: algorithm must be pbil or umda");
    }

    PbilConfig config;
    config.n = positive_size(cfg, "n");
    config.lambda = positive_size(cfg, "lambda");
    if (auto mu = optional_key<long long>(cfg, "mu")) {
        if (*mu < 1) {
            throw UsageError("invalid config: 1 <= mu required");
        }
        config.mu = static_cast<std::size_t>(*mu);
    } else if (auto g = optional_key<double>(cfg, "gamma0")) {
        if (!(*g > 0.0 && *g < 1.0)) {
            throw UsageError("invalid config: gamma0 in (0, 1) required");
        }
        config.mu = experiments::derive_mu(*g, config.lambda);
    } else {
        throw UsageError("missing required parameter --mu or --gamma0");
    }
    config.eta = algorithm == "umda" ? optional_key<double>(cfg, "eta").value_or(1.0)
                                     : require_key<double>(cfg, "eta");
    config.seed = require_key<std::uint64_t>(cfg, "seed");
    config.max_generations = optional_key<std::uint64_t>(cfg, "max_generations").value_or(0);
    config.validate();

    RunOptions opts;
    opts.record_trace = optional_key<bool>(cfg, "trace").value_or(false);
    opts.snapshot_interval = optional_key<std::uint64_t>(cfg, "snapshot_interval").value_or(0);

    const RunResult r = algorithm == "umda" ? run_umda(config, problem, opts)
                                            : run_pbil(config, problem, opts);
    json effective = cfg;
    effective["mu"] = config.mu;
    effective["eta"] = algorithm == "umda" ? 1.0 : config.eta;
    effective["max_generations"] = config.budget();
    out << json{{"config", effective}, {"result", run_result_json(r)}}.dump(2) << '\n';
    return r.success ? kExitOk : kExitBudget;
}

// ------------------------------------------------------------------ sweep

int cmd_sweep(const json& cfg, std::ostream& out)
{
    experiments::SweepSpec spec;
    try {
        spec = experiments::SweepSpec::from_json(cfg);
        spec.validate();
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid sweep config: ") + e.what());
    }
    const int workers = optional_key<int>(cfg, "workers").value_or(0);
    const auto result = experiments::run_sweep(spec, workers);
    const auto summaries = experiments::summarize(result.records);

    json cells = json::array();
    bool censored = false;
    for (const auto& s : summaries) {
        censored = censored || s.censored;
        cells.push_back({{"problem", std::string(problem_name(s.problem))},
                         {"n", s.n},
                         {"lambda", s.lambda},
                         {"mu", s.mu},
                         {"eta", s.eta},
                         {"trials", s.trials},
                         {"median", s.median},
                         {"mean", s.mean},
                         {"q25", s.q25},
                         {"q75", s.q75},
                         {"success_rate", s.success_rate},
                         {"censored", s.censored}});
    }
    json report{{"config", spec.to_json()}, {"cells", cells}, {"skipped", result.skipped}};
    if (auto ws = optional_key<int>(cfg, "workers")) {
        report["config"]["workers"] = *ws;
    }

    const auto path = optional_key<std::string>(cfg, "out");
    if (path) {
        const bool append = optional_key<bool>(cfg, "append").value_or(false);
        if (append && std::ifstream(*path).good()) {
            std::ofstream f(*path, std::ios::app | std::ios::binary);
            if (!f) {
                throw std::runtime_error("cannot open '" + *path + "' for appending");
            }
            experiments::write_csv(result.records, f, false);
        } else {
            experiments::export_csv(result.records, *path);
        }
        std::ofstream side(*path + ".json");
        side << report.dump(2) << '\n';
        out << report.dump(2) << '\n';
    } else {
        experiments::write_csv(result.records, out);
    }
    return censored ? kExitBudget : kExitOk;
}

// ------------------------------------------------------------------ bound

void check_range(bool ok, const std::string& what)
{
    if (!ok) {
        throw UsageError("invalid parameter: " + what);
    }
}

int cmd_bound(const json& cfg, std::ostream& out)
{
    const auto gamma0 = require_key<double>(cfg, "gamma0");
    const auto epsilon = require_key<double>(cfg, "epsilon");
    const auto delta = require_key<double>(cfg, "delta");
    check_range(gamma0 > 0.0 && gamma0 < 1.0, "gamma0 in (0, 1) required");
    check_range(epsilon > 0.0, "epsilon > 0 required");
    check_range(delta > 0.0 && delta <= 1.0, "delta in (0, 1] required");

    // Either a single (n, lambda) or the n_values/lambda_rule grid of a sweep config.
    std::vector<std::pair<std::size_t, std::size_t>> points;
    if (cfg.contains("n")) {
        const std::size_t n = positive_size(cfg, "n");
        std::size_t lambda = 0;
        if (cfg.contains("lambda")) {
            lambda = positive_size(cfg, "lambda");
        } else if (cfg.contains("lambda_rule")) {
            lambda = experiments::LambdaRule::from_json(cfg.at("lambda_rule")).evaluate(n, 0);
        } else {
            throw UsageError("missing required parameter --lambda");
        }
        points.emplace_back(n, lambda);
    } else if (cfg.contains("n_values")) {
        const auto ns = cfg.at("n_values").get<std::vector<std::size_t>>();
        const auto rule = cfg.contains("lambda_rule")
                              ? experiments::LambdaRule::from_json(cfg.at("lambda_rule"))
                              : experiments::LambdaRule();
        for (std::size_t i = 0; i < ns.size(); ++i) {
            points.emplace_back(ns[i], rule.evaluate(ns[i], i));
        }
    } else {
        throw UsageError("missing required parameter --n");
    }

    const bool as_json = optional_key<bool>(cfg, "json").value_or(false);
    json rows = json::array();
    std::ostringstream text;
    text << std::setprecision(10);
    for (const auto& [n, lambda] : points) {
        check_range(n >= 2, "n >= 2 required");
        const auto params = theory::los_params(n, gamma0, epsilon, delta);
        const double bound = theory::los_bound(n, static_cast<double>(lambda), params);
        const double floor = theory::g3_min_population(params);
        const bool meets = static_cast<double>(lambda) >= floor;
        json row{{"n", n},
                 {"lambda", lambda},
                 {"z_star", params.min_upgrade_prob()},
                 {"los_bound", bound},
                 {"g3_min_population", floor},
                 {"meets_g3", meets}};
        if (!meets) {
            row["warning"] = "lambda below the minimum population size";
        }
        rows.push_back(row);
        text << "n = " << n << "\nlambda = " << lambda << "\nz_star = " << params.min_upgrade_prob()
             << "\nlos_bound = " << bound << "\ng3_min_population = " << floor
             << "\nmeets_g3 = " << (meets ? "true" : "false") << '\n';
        if (!meets) {
            text << "warning = lambda below the minimum population size\n";
        }
    }
    if (as_json) {
        json doc{{"config", cfg}, {"bounds", rows}};
        doc["config"].erase("json");
        out << doc.dump(2) << '\n';
    } else {
        out << "gamma0 = " << gamma0 << "\nepsilon = " << epsilon << "\ndelta = " << delta << '\n'
            << text.str();
    }
    return kExitOk;
}

// ------------------------------------------------------------------ check

int cmd_check(const json& cfg, std::ostream& out)
{
    const auto gamma0 = require_key<double>(cfg, "gamma0");
    const auto eta = require_key<double>(cfg, "eta");
    const auto delta = require_key<double>(cfg, "delta");
    const auto epsilon = require_key<double>(cfg, "epsilon");
    check_range(gamma0 > 0.0 && gamma0 < 1.0, "gamma0 in (0, 1) required");
    check_range(eta > 0.0 && eta <= 1.0, "eta in (0, 1] required");
    check_range(delta > 0.0, "delta > 0 required");
    check_range(epsilon > 0.0, "epsilon > 0 required");

    const auto r = theory::check_selective_pressure(gamma0, eta, delta, epsilon);
    const double gmax = theory::max_feasible_gamma0(eta, delta, epsilon);
    if (optional_key<bool>(cfg, "json").value_or(false)) {
        json c = cfg;
        c.erase("json");
        out << json{{"config", c},
                    {"p0", r.p0},
                    {"xi", r.xi},
                    {"ceil_xi", r.ceil_xi},
                    {"rhs", r.rhs},
                    {"satisfied", r.satisfied},
                    {"max_feasible_gamma0", gmax}}
                   .dump(2)
            << '\n';
    } else {
        out << std::setprecision(10) << "gamma0 = " << gamma0 << "\neta = " << eta << "\ndelta = " << delta
            << "\nepsilon = " << epsilon << "\np0 = " << r.p0 << "\nxi = " << r.xi
            << "\nceil_xi = " << r.ceil_xi << "\nrhs = " << r.rhs
            << "\nsatisfied = " << (r.satisfied ? "true" : "false")
            << "\nmax_feasible_gamma0 = " << gmax << '\n';
    }
    return kExitOk;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const json& cfg, std::ostream& out)
{
    properties::VerifyOptions opts;
    opts.iterations = optional_key<std::size_t>(cfg, "iterations").value_or(10000);
    opts.seed = optional_key<std::uint64_t>(cfg, "seed").value_or(1);
    opts.workers = optional_key<int>(cfg, "workers").value_or(0);
    if (optional_key<bool>(cfg, "inject_faulty_pmf").value_or(false)) {
        // Test hook: a PMF whose top entry is off by 1e-3.
        opts.pmf = [](std::span<const double> p) {
            auto v = theory::poisson_binomial_pmf(p);
            v.back() += 1e-3;
            return v;
        };
    }
    const auto results = properties::run_all(opts);
    bool all = true;
    for (const auto& r : results) {
        if (r.passed) {
            out << "PASS " << r.name << " (" << r.checks << " checks)\n";
        } else {
            out << "FAIL " << r.name << ": counterexample " << r.counterexample << '\n';
            all = false;
        }
    }
    return all ? kExitOk : kExitInvalid;
}

// ------------------------------------------------------------------ plot

int cmd_plot(const json& cfg, std::ostream& out, std::ostream& err)
{
    // A sweep config names its CSV under "out"; plot reads the same file.
    const auto input = cfg.contains("input") || !cfg.contains("out") ? require_key<std::string>(cfg, "input")
                                                                      : require_key<std::string>(cfg, "out");
    const auto output = optional_key<std::string>(cfg, "output")
                            .value_or(std::filesystem::path(input).replace_extension(".svg").string());
    std::vector<experiments::TrialRecord> records;
    try {
        records = experiments::read_csv(input);
    } catch (const experiments::CsvError& e) {
        err << "error: " << input << ": " << e.what() << '\n';
        return kExitInvalid;
    }
    const auto data = plot::build_plot_data(records);
    std::string svg = plot::render_svg(data);
    const auto first_line = svg.find('\n');
    svg.insert(first_line + 1, "<!-- config: " + cfg.dump() + " -->\n");
    std::ofstream f(output, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot open '" + output + "' for writing");
    }
    f << svg;
    json summary{{"config", cfg}, {"output", output}, {"series", json::array()}};
    for (const auto& s : data.series) {
        json js{{"label", s.label}, {"points", s.data.size()}};
        if (s.fit) {
            js["fit"] = {{"a", s.fit->a}, {"b", s.fit->b}, {"residual", s.fit->residual}};
        } else {
            js["fit_note"] = s.fit_note;
        }
        summary["series"].push_back(js);
    }
    out << summary.dump(2) << '\n';
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"PBIL with margins on LeadingOnes and BinVal: runs, sweeps, bounds and checks"};
    app.require_subcommand(1);
    std::string config_path;

    auto* run = app.add_subcommand("run", "single PBIL/UMDA run, JSON result on stdout");
    auto* sweep = app.add_subcommand("sweep", "seeded trial sweep, CSV output");
    auto* bound = app.add_subcommand("bound", "runtime bound and minimum population size");
    auto* check = app.add_subcommand("check", "selective-pressure constraint");
    auto* verify = app.add_subcommand("verify", "randomized property suites");
    auto* plotc = app.add_subcommand("plot", "SVG of median evaluations versus n");

    Overrides o_run(run), o_sweep(sweep), o_bound(bound), o_check(check), o_verify(verify), o_plot(plotc);
    for (auto* sc : {run, sweep, bound, check, verify, plotc}) {
        sc->add_option("--config", config_path, "JSON config file; flags override its values");
    }

    o_run.add<std::string>("--problem", "problem", "leadingones | binval");
    o_run.add<std::string>("--algorithm", "algorithm", "pbil | umda");
    o_run.add<long long>("--n", "n", "problem size");
    o_run.add<long long>("--lambda", "lambda", "offspring population size");
    o_run.add<long long>("--mu", "mu", "parent population size");
    o_run.add<double>("--gamma0", "gamma0", "selective pressure mu/lambda (used when --mu is absent)");
    o_run.add<double>("--eta", "eta", "smoothing parameter in (0, 1]");
    o_run.add<std::uint64_t>("--seed", "seed", "random seed");
    o_run.add<std::uint64_t>("--max-generations", "max_generations", "generation budget");
    o_run.add<std::uint64_t>("--snapshot-interval", "snapshot_interval", "record the model every k generations");
    o_run.add_flag("--trace", "trace", "record the best level of every generation");

    o_sweep.add<std::string>("--problem", "problem", "leadingones | binval");
    o_sweep.add<std::string>("--algorithm", "algorithm", "pbil | umda");
    o_sweep.add<std::vector<std::size_t>>("--n-values", "n_values", "problem sizes")->delimiter(',');
    o_sweep.add<std::string>("--lambda-rule", "lambda_rule", "c*ln(n) | c*n^k | [l1,l2,...]");
    o_sweep.add<double>("--gamma0", "gamma0", "selective pressure");
    o_sweep.add<double>("--eta", "eta", "smoothing parameter");
    o_sweep.add<std::size_t>("--trials", "trials", "trials per n");
    o_sweep.add<std::uint64_t>("--seed", "base_seed", "base seed");
    o_sweep.add<std::string>("--budget-rule", "budget_rule", "default | c*default | <generations>");
    o_sweep.add<int>("--workers", "workers", "maximum concurrent trials (0 = all cores)");
    o_sweep.add<std::string>("--out", "out", "CSV output path (stdout when absent)");
    o_sweep.add_flag("--append", "append", "append rows to an existing CSV");

    o_bound.add<long long>("--n", "n", "problem size");
    o_bound.add<long long>("--lambda", "lambda", "offspring population size");
    o_bound.add<double>("--gamma0", "gamma0", "selective pressure");
    o_bound.add<double>("--epsilon", "epsilon", "marginal slack epsilon > 0");
    o_bound.add<double>("--delta", "delta", "growth parameter in (0, 1]");
    o_bound.add_flag("--json", "json", "JSON output");

    o_check.add<double>("--gamma0", "gamma0", "selective pressure");
    o_check.add<double>("--eta", "eta", "smoothing parameter");
    o_check.add<double>("--delta", "delta", "delta > 0");
    o_check.add<double>("--epsilon", "epsilon", "epsilon > 0");
    o_check.add_flag("--json", "json", "JSON output");

    o_verify.add<std::size_t>("--iterations", "iterations", "random cases per suite");
    o_verify.add<std::uint64_t>("--seed", "seed", "random seed");
    o_verify.add<int>("--workers", "workers", "threads for the Monte-Carlo suite");
    o_verify.add_flag("--inject-faulty-pmf", "inject_faulty_pmf", "test hook: corrupt the PMF");

    o_plot.add<std::string>("--input", "input", "results CSV from sweep");
    o_plot.add<std::string>("--output", "output", "SVG output path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    try {
        json cfg = load_config(config_path);
        if (run->parsed()) {
            o_run.apply(cfg);
            return cmd_run(cfg, out);
        }
        if (sweep->parsed()) {
            o_sweep.apply(cfg);
            return cmd_sweep(cfg, out);
        }
        if (bound->parsed()) {
            o_bound.apply(cfg);
            return cmd_bound(cfg, out);
        }
        if (check->parsed()) {
            o_check.apply(cfg);
            return cmd_check(cfg, out);
        }
        if (verify->parsed()) {
            o_verify.apply(cfg);
            return cmd_verify(cfg, out);
        }
        o_plot.apply(cfg);
        return cmd_plot(cfg, out, err);
    } catch (const plot::PlotError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
}

} // namespace pbil::cli
