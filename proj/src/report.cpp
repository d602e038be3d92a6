#include "crown/report.hpp"

#include "crown/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace crown {

std::string_view to_string(MeanSource m) noexcept {
    return m == MeanSource::Population ? "population" : "sample";
}

std::string_view to_string(LoadingsDraw d) noexcept {
    return d == LoadingsDraw::Fixed ? "fixed" : "per-replication";
}

namespace {

using nlohmann::json;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(const VectorXd& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

std::string fixed(double x, int digits = 6) {
    if (!std::isfinite(x)) return "NA";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << x;
    return ss.str();
}

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

template <typename T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(std::string("key '") + key + "': " + e.what());
    }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* section) {
    if (!j.is_object()) config_error(std::string(section) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) config_error(std::string("unknown key '") + key + "' in " + section);
    }
}

IndexSet index_set(const json& j, const char* key) {
    IndexSet out;
    for (long v : get<std::vector<long>>(j, key)) {
        if (v < 0) config_error(std::string("'") + key + "' entries must be non-negative");
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

Regime regime_of(const std::string& name) {
    const auto r = parse_regime(name);
    if (!r) config_error("unknown regime '" + name + "'");
    return *r;
}

}  // namespace

json to_json(const MonteCarloReport& report) {
    json j;
    j["p"] = report.p;
    j["T"] = report.T;
    j["regime"] = std::string(to_string(report.regime));
    j["mean_source"] = std::string(to_string(report.mean_source));
    j["loadings"] = std::string(to_string(report.loadings));
    j["seed"] = report.seed;
    j["reps"] = report.reps;
    j["replication_seeds"] = report.replication_seeds;
    j["failures"] = report.failure_messages;
    json cells = json::array();
    for (const auto& c : report.cells) {
        json cell;
        cell["method"] = std::string(to_string(c.method));
        cell["te_level"] = c.te_level;
        cell["replications"] = c.replications;
        cell["failures"] = c.failures;
        cell["aborted"] = c.aborted;
        if (!c.aborted) {
            cell["TE"] = c.method == Method::Index ? json(nullptr) : number(c.mean.te);
            cell["Weight-ER"] = number(c.mean.weight_er);
            cell["Risk-ER"] = number(c.mean.risk_er);
            cell["SR-ER"] = number(c.mean.sr_er);
            cell["SR"] = number(c.mean.sr);
            cell["Return"] = number(c.mean.avg_return);
            cell["Risk"] = number(c.mean.risk);
        }
        cells.push_back(std::move(cell));
    }
    j["cells"] = std::move(cells);
    return j;
}

std::string to_csv(const MonteCarloReport& report) {
    std::ostringstream out;
    out << "te_level,method,TE,Weight-ER,Risk-ER,SR-ER,SR,Return,Risk,replications,failures\n";
    for (const auto& c : report.cells) {
        out << fixed(c.te_level, 4) << ',' << to_string(c.method) << ',';
        if (c.aborted) {
            out << "NA,NA,NA,NA,NA,NA,NA";
        } else {
            out << (c.method == Method::Index ? std::string("-") : fixed(c.mean.te)) << ','
                << fixed(c.mean.weight_er) << ',' << fixed(c.mean.risk_er) << ','
                << fixed(c.mean.sr_er) << ',' << fixed(c.mean.sr) << ','
                << fixed(c.mean.avg_return) << ',' << fixed(c.mean.risk);
        }
        out << ',' << c.replications << ',' << c.failures << '\n';
    }
    return out.str();
}

json to_json(const BacktestReport& report) {
    json j;
    j["out_of_sample"] = report.out_of_sample();
    j["assets"] = report.assets;
    j["dates"] = report.dates;
    auto stats = [](const PortfolioStats<double>& s) {
        return json{{"avg_return", number(s.avg_return)},
                    {"risk", number(s.risk)},
                    {"variance", number(s.variance)},
                    {"sharpe", number(s.sharpe)},
                    {"te", number(s.te)}};
    };
    j["gross"] = stats(report.gross);
    j["net"] = stats(report.net);
    j["te"] = number(report.te);
    j["turnover"] = number(report.turnover);
    j["max_weight"] = number(report.max_weight);
    j["min_weight"] = number(report.min_weight);
    j["total_short"] = number(report.total_short);
    json tests = json::array();
    for (const auto& t : report.sharpe_tests) {
        tests.push_back({{"against", t.name},
                         {"statistic", number(t.test.statistic)},
                         {"p_value", number(t.test.p_value)},
                         {"difference", number(t.test.difference)}});
    }
    j["sharpe_tests"] = std::move(tests);
    j["series"] = {{"gross", vector_json(report.series.gross_returns)},
                   {"net", vector_json(report.series.net_returns)},
                   {"benchmark", vector_json(report.benchmark_returns)},
                   {"trades", vector_json(report.trades)},
                   {"kappa", vector_json(report.kappas)}};
    json weights = json::array();
    for (Index k = 0; k < report.series.weights_after.cols(); ++k) {
        weights.push_back({{"date", report.dates[static_cast<std::size_t>(k)]},
                           {"desired", vector_json(report.series.weights_after.col(k))},
                           {"drifted", vector_json(report.series.weights_before.col(k))}});
    }
    j["weights"] = std::move(weights);
    json failures = json::array();
    for (const auto& f : report.failures) {
        failures.push_back({{"window", f.window}, {"date", f.date}, {"message", f.message}});
    }
    j["failures"] = std::move(failures);
    return j;
}

std::string summary_csv(const BacktestReport& report) {
    std::ostringstream out;
    out << "AVR,TE,Risk,SR,TO,p-val,Max Weight,Min Weight,Total Short\n";
    const double p_val = report.sharpe_tests.empty() ? NAN : report.sharpe_tests.front().test.p_value;
    out << fixed(report.net.avg_return) << ',' << fixed(report.te) << ',' << fixed(report.net.risk)
        << ',' << fixed(report.net.sharpe) << ',' << fixed(report.turnover) << ',' << fixed(p_val)
        << ',' << fixed(report.max_weight) << ',' << fixed(report.min_weight) << ','
        << fixed(report.total_short) << '\n';
    return out.str();
}

std::string series_csv(const BacktestReport& report) {
    std::ostringstream out;
    out << "date,gross,net,benchmark,trade\n";
    out << std::setprecision(17);
    for (Index k = 0; k < report.out_of_sample(); ++k) {
        out << report.dates[static_cast<std::size_t>(k)] << ',' << report.series.gross_returns(k)
            << ',' << report.series.net_returns(k) << ',' << report.benchmark_returns(k) << ','
            << report.trades(k) << '\n';
    }
    return out.str();
}

std::string weights_csv(const std::vector<std::string>& assets, const VectorXd& weights) {
    require(static_cast<Index>(assets.size()) == weights.size(), ErrorCode::DimensionMismatch,
            "asset names and weights disagree");
    std::ostringstream out;
    out << "asset,weight\n" << std::setprecision(17);
    for (Index i = 0; i < weights.size(); ++i) out << assets[static_cast<std::size_t>(i)] << ',' << weights(i) << '\n';
    return out.str();
}

NodewiseConfig nodewise_config_from_json(const json& j, NodewiseConfig c) {
    check_keys(j, {"rule", "lambda", "cv_loss", "folds", "grid_size", "grid_ratio", "cv_patience",
                   "tolerance", "kkt_tolerance", "max_sweeps", "threads"},
               "nodewise");
    if (j.contains("rule")) {
        const auto rule = get<std::string>(j, "rule");
        if (rule == "cv") c.rule = LambdaRule::CrossValidation;
        else if (rule == "fixed") c.rule = LambdaRule::FixedLambda;
        else config_error("nodewise.rule must be 'cv' or 'fixed'");
    }
    if (j.contains("lambda")) {
        c.fixed_lambda = get<double>(j, "lambda");
        if (!j.contains("rule")) c.rule = LambdaRule::FixedLambda;
    }
    if (j.contains("cv_loss")) {
        const auto loss = get<std::string>(j, "cv_loss");
        if (loss == "penalized") c.cv_loss = CvLoss::Penalized;
        else if (loss == "mse") c.cv_loss = CvLoss::Mse;
        else config_error("nodewise.cv_loss must be 'penalized' or 'mse'");
    }
    if (j.contains("folds")) c.folds = get<int>(j, "folds");
    if (j.contains("grid_size")) c.grid_size = get<int>(j, "grid_size");
    if (j.contains("grid_ratio")) c.grid_ratio = get<double>(j, "grid_ratio");
    if (j.contains("cv_patience")) c.cv_patience = get<int>(j, "cv_patience");
    if (j.contains("tolerance")) c.lasso.tolerance = get<double>(j, "tolerance");
    if (j.contains("kkt_tolerance")) c.lasso.kkt_tolerance = get<double>(j, "kkt_tolerance");
    if (j.contains("max_sweeps")) c.lasso.max_sweeps = get<int>(j, "max_sweeps");
    if (j.contains("threads")) c.threads = get<int>(j, "threads");
    if (c.folds < 2) config_error("nodewise.folds must be at least 2");
    if (c.grid_size < 1) config_error("nodewise.grid_size must be positive");
    if (!(c.grid_ratio > 0.0 && c.grid_ratio <= 1.0)) config_error("nodewise.grid_ratio must be in (0, 1]");
    if (c.fixed_lambda < 0.0) config_error("nodewise.lambda must be non-negative");
    if (!(c.lasso.kkt_tolerance >= 0.0)) config_error("nodewise.kkt_tolerance must be non-negative");
    return c;
}

MonteCarloConfig monte_carlo_config_from_json(const json& j, MonteCarloConfig c) {
    check_keys(j, {"p", "T", "te_levels", "regime", "restricted", "omega", "w_x", "floor",
                   "ncon_kappa", "mean_source", "loadings", "factor_mean", "error_design", "rho",
                   "tau", "reps", "seed", "methods", "nodewise", "threads", "max_failure_fraction"},
               "simulation config");
    if (j.contains("p")) c.dgp.p = get<long>(j, "p");
    if (j.contains("T")) c.dgp.T = get<long>(j, "T");
    if (j.contains("te_levels")) c.te_levels = get<std::vector<double>>(j, "te_levels");
    if (j.contains("regime")) c.regime = regime_of(get<std::string>(j, "regime"));
    if (j.contains("restricted")) c.restricted = index_set(j, "restricted");
    if (j.contains("omega")) c.omega = get<double>(j, "omega");
    if (j.contains("w_x")) c.w_x = get<double>(j, "w_x");
    if (j.contains("floor")) c.floor = get<double>(j, "floor");
    if (j.contains("ncon_kappa")) c.ncon_kappa = get<double>(j, "ncon_kappa");
    if (j.contains("mean_source")) {
        const auto m = get<std::string>(j, "mean_source");
        if (m == "population") c.mean_source = MeanSource::Population;
        else if (m == "sample") c.mean_source = MeanSource::Sample;
        else config_error("mean_source must be 'population' or 'sample'");
    }
    if (j.contains("loadings")) {
        const auto m = get<std::string>(j, "loadings");
        if (m == "per-replication") c.loadings = LoadingsDraw::PerReplication;
        else if (m == "fixed") c.loadings = LoadingsDraw::Fixed;
        else config_error("loadings must be 'per-replication' or 'fixed'");
    }
    if (j.contains("factor_mean")) {
        const auto m = get<std::string>(j, "factor_mean");
        if (m == "calibrated") c.dgp.factor_mean = FactorMean::Calibrated;
        else if (m == "var-intercept") c.dgp.factor_mean = FactorMean::VarIntercept;
        else config_error("factor_mean must be 'calibrated' or 'var-intercept'");
    }
    if (j.contains("error_design")) {
        const auto m = get<std::string>(j, "error_design");
        if (m == "toeplitz") c.dgp.error_design = ErrorDesign::Toeplitz;
        else if (m == "dense") c.dgp.error_design = ErrorDesign::Dense;
        else config_error("error_design must be 'toeplitz' or 'dense'");
    }
    if (j.contains("rho")) c.dgp.rho = get<double>(j, "rho");
    if (j.contains("tau")) c.dgp.tau = get<double>(j, "tau");
    if (j.contains("reps")) c.reps = get<int>(j, "reps");
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& name : get<std::vector<std::string>>(j, "methods")) {
            if (name == "CROWN") c.methods.push_back(Method::Crown);
            else if (name == "Oracle") c.methods.push_back(Method::Oracle);
            else if (name == "Index") c.methods.push_back(Method::Index);
            else if (name == "NCON") c.methods.push_back(Method::Ncon);
            else config_error("unknown method '" + name + "'");
        }
    }
    if (j.contains("nodewise")) c.nodewise = nodewise_config_from_json(j.at("nodewise"), c.nodewise);
    if (j.contains("threads")) c.threads = get<int>(j, "threads");
    if (j.contains("max_failure_fraction")) c.max_failure_fraction = get<double>(j, "max_failure_fraction");

    if (c.dgp.p < 2 || c.dgp.T < 3) config_error("need p >= 2 and T >= 3");
    if (c.reps < 1) config_error("reps must be at least 1");
    if (c.te_levels.empty()) config_error("te_levels must not be empty");
    for (double te : c.te_levels)
        if (!(te > 0.0)) config_error("te_levels must be positive");
    if (c.methods.empty()) config_error("methods must not be empty");
    return c;
}

BacktestConfig backtest_config_from_json(const json& j, BacktestConfig c) {
    check_keys(j, {"window", "regime", "restricted", "omega", "w_x", "floor", "kappa", "kappa_w",
                   "cost", "te_target_annualized", "periods_per_year", "nodewise", "threads"},
               "backtest config");
    if (j.contains("window")) c.window = get<long>(j, "window");
    if (j.contains("regime")) c.regime.regime = regime_of(get<std::string>(j, "regime"));
    if (j.contains("restricted")) c.regime.restricted = index_set(j, "restricted");
    if (j.contains("omega")) c.regime.omega = get<double>(j, "omega");
    if (j.contains("w_x")) c.regime.w_x = get<double>(j, "w_x");
    if (j.contains("floor")) c.regime.floor = get<double>(j, "floor");
    if (j.contains("kappa")) c.regime.kappa = get<double>(j, "kappa");
    if (j.contains("kappa_w")) c.regime.kappa_w = get<double>(j, "kappa_w");
    if (j.contains("cost")) c.cost = get<double>(j, "cost");
    if (j.contains("te_target_annualized")) c.te_target_annualized = get<double>(j, "te_target_annualized");
    if (j.contains("periods_per_year")) c.periods_per_year = get<double>(j, "periods_per_year");
    if (j.contains("nodewise")) c.nodewise = nodewise_config_from_json(j.at("nodewise"), c.nodewise);
    if (j.contains("threads")) c.threads = get<int>(j, "threads");
    if (c.window < 3) config_error("window must be at least 3");
    if (c.cost < 0.0) config_error("cost must be non-negative");
    if (!(c.periods_per_year > 0.0)) config_error("periods_per_year must be positive");
    if (!(c.te_target_annualized > 0.0)) config_error("te_target_annualized must be positive");
    return c;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error(path + ": cannot open config file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        config_error(path + ": " + e.what());
    }
}

}  // namespace crown
