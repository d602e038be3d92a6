// crown: simulate | backtest | estimate
#include "crown/backtest.hpp"
#include "crown/csv_panel.hpp"
#include "crown/error.hpp"
#include "crown/log.hpp"
#include "crown/report.hpp"
#include "crown/simulation.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace crown;
namespace fs = std::filesystem;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<long> p;
    std::optional<long> t;
    std::vector<double> te;
    std::optional<std::string> regime;
    std::optional<double> omega;
    std::vector<long> restricted;
    std::string out;
    std::optional<int> threads;
    std::string returns;
    std::string factors;
    std::string benchmark;
};

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

Regime regime_flag(const std::string& name) {
    const auto r = parse_regime(name);
    if (!r) config_error("unknown regime '" + name + "'");
    return *r;
}

IndexSet restricted_flag(const std::vector<long>& raw) {
    IndexSet out;
    for (long v : raw) {
        if (v < 0) config_error("--restricted entries must be non-negative");
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) fail(ErrorCode::InvalidInput, path.string() + ": cannot write");
    f << text;
    log::info("wrote {}", path.string());
}

fs::path output_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::InvalidInput, out + ": " + ec.message());
    return dir;
}

int simulate(const Options& o) {
    MonteCarloConfig c;
    if (!o.config.empty()) c = monte_carlo_config_from_json(read_json_file(o.config));
    if (o.seed) c.seed = *o.seed;
    if (o.reps) c.reps = *o.reps;
    if (o.p) c.dgp.p = *o.p;
    if (o.t) c.dgp.T = *o.t;
    if (!o.te.empty()) c.te_levels = o.te;
    if (o.regime) c.regime = regime_flag(*o.regime);
    if (o.omega) c.omega = *o.omega;
    if (!o.restricted.empty()) c.restricted = restricted_flag(o.restricted);
    if (o.threads) c.threads = *o.threads;
    if (c.reps < 1) config_error("--reps must be positive");
    if (c.dgp.p < 2 || c.dgp.T < 3) config_error("need --p >= 2 and --t >= 3");
    for (double te : c.te_levels)
        if (!(te > 0.0)) config_error("--te levels must be positive");

    log::info("simulate: p={} T={} reps={} seed={}", c.dgp.p, c.dgp.T, c.reps, c.seed);
    const MonteCarloReport report = run_monte_carlo(c);
    const std::string csv = to_csv(report);
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        const fs::path dir = output_dir(o.out);
        write_file(dir / "simulation.csv", csv);
        write_file(dir / "simulation.json", to_json(report).dump(2) + "\n");
    }
    for (const auto& cell : report.cells)
        if (cell.aborted) return kExitRuntime;
    return 0;
}

BacktestConfig backtest_config(const Options& o) {
    BacktestConfig c;
    if (!o.config.empty()) c = backtest_config_from_json(read_json_file(o.config));
    if (o.regime) c.regime.regime = regime_flag(*o.regime);
    if (o.omega) c.regime.omega = *o.omega;
    if (!o.restricted.empty()) c.regime.restricted = restricted_flag(o.restricted);
    if (o.threads) c.threads = *o.threads;
    return c;
}

struct Panels {
    DatedPanel returns;
    DatedPanel factors;
    std::optional<DatedPanel> benchmark;
};

Panels load_panels(const Options& o) {
    if (o.returns.empty() || o.factors.empty()) config_error("--returns and --factors are required");
    Panels p{load_panel(o.returns, PanelKind::Returns), load_panel(o.factors, PanelKind::Factors), {}};
    check_aligned(p.returns, p.factors);
    if (!o.benchmark.empty()) {
        p.benchmark = load_panel(o.benchmark, PanelKind::Benchmark);
        check_benchmark(p.returns, *p.benchmark);
    }
    return p;
}

int backtest(const Options& o) {
    BacktestConfig c = backtest_config(o);
    if (o.te.size() > 1) config_error("backtest takes a single --te value");
    if (!o.te.empty()) c.te_target_annualized = o.te.front();
    const Panels panels = load_panels(o);
    const ReturnPanel returns = to_return_panel(panels.returns);
    const MatrixXd benchmark =
        panels.benchmark ? panels.benchmark->values
                         : MatrixXd::Constant(returns.num_assets(), returns.num_periods(),
                                              1.0 / static_cast<double>(returns.num_assets()));
    const BacktestReport report = run_backtest(returns, to_factor_panel(panels.factors), benchmark, c);
    const std::string summary = summary_csv(report);
    if (o.out.empty()) {
        std::cout << summary;
    } else {
        const fs::path dir = output_dir(o.out);
        write_file(dir / "summary.csv", summary);
        write_file(dir / "series.csv", series_csv(report));
        write_file(dir / "backtest.json", to_json(report).dump(2) + "\n");
    }
    return 0;
}

int estimate(const Options& o) {
    const BacktestConfig c = backtest_config(o);
    if (o.te.size() > 1) config_error("estimate takes a single --te value");
    const Panels panels = load_panels(o);
    const ReturnPanel returns = to_return_panel(panels.returns);
    ConstraintSpec<double> spec = c.regime;
    if (panels.benchmark) spec.benchmark = panels.benchmark->values.col(panels.benchmark->num_periods() - 1);
    if (!o.te.empty()) spec.target_te = o.te.front();
    else if (!spec.kappa) spec.target_te = c.te_target_per_period();
    NodewiseConfig nodewise = c.nodewise;
    if (o.threads) nodewise.threads = *o.threads;

    const EstimateResult res = estimate_weights(returns.values, panels.factors.values, spec, nodewise);
    const std::string csv = weights_csv(returns.assets, res.weights.weights);
    if (o.out.empty()) {
        // p lines, no header, so the output can be summed directly.
        std::cout << csv.substr(csv.find('\n') + 1);
    } else {
        const fs::path dir = output_dir(o.out);
        write_file(dir / "weights.csv", csv);
    }
    log::info("estimate: kappa={} regime={}", res.kappa, to_string(res.weights.regime_used));
    return 0;
}

void add_common(CLI::App& app, Options& o) {
    app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--regime", o.regime, "te, te-eq, te-ineq, weight, unconstrained or short-sale");
    app.add_option("--omega", o.omega, "bound on the restricted active weight");
    app.add_option("--restricted", o.restricted, "restricted asset positions i,j,k (zero-based)")
        ->delimiter(',');
    app.add_option("--out", o.out, "output directory (default: stdout)");
    app.add_option("--threads", o.threads, "worker thread cap")->check(CLI::PositiveNumber);
}

void add_panels(CLI::App& app, Options& o) {
    app.add_option("--returns", o.returns, "return panel CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--factors", o.factors, "factor panel CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--benchmark", o.benchmark, "benchmark weight CSV (default: equal weight)")
        ->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
    crown::log::configure_from_env();

    CLI::App app{"Tracking-error constrained portfolios with a factor-adjusted nodewise precision"};
    app.require_subcommand(1);
    Options o;

    auto* sim = app.add_subcommand("simulate", "Monte Carlo tables");
    add_common(*sim, o);
    sim->add_option("--seed", o.seed, "master seed");
    sim->add_option("--reps", o.reps, "replications")->check(CLI::PositiveNumber);
    sim->add_option("--p", o.p, "number of assets");
    sim->add_option("--t", o.t, "sample length");
    sim->add_option("--te", o.te, "tracking-error levels a,b,c")->delimiter(',');

    auto* bt = app.add_subcommand("backtest", "rolling-window evaluation");
    add_common(*bt, o);
    add_panels(*bt, o);
    bt->add_option("--te", o.te, "annualized tracking-error target");

    auto* est = app.add_subcommand("estimate", "one-shot weights from panels");
    add_common(*est, o);
    add_panels(*est, o);
    est->add_option("--te", o.te, "per-period tracking-error target");

    app.footer("Environment: CROWN_LOG={error,info,debug} sets stderr verbosity.\n"
               "Exit codes: 0 ok, 1 runtime failure, 2 usage error, 3 config error.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "UsageError: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
        return kExitUsage;
    }

    try {
        if (*sim) return simulate(o);
        if (*bt) return backtest(o);
        return estimate(o);
    } catch (const crown::Error& e) {
        std::cerr << e.what() << '\n';
        return e.code() == crown::ErrorCode::ConfigError ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "RuntimeFailure: " << e.what() << '\n';
        return kExitRuntime;
    }
}
