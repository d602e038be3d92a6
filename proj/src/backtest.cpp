#include "crown/backtest.hpp"

#include "crown/error.hpp"
#include "crown/log.hpp"
#include "crown/parallel.hpp"
#include "crown/simulation.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace crown {

double BacktestConfig::te_target_per_period() const {
    return te_target_annualized / std::sqrt(periods_per_year);
}

EstimateResult estimate_weights(const MatrixXd& returns, const MatrixXd& factors,
                                const ConstraintSpec<double>& input, const NodewiseConfig& nodewise) {
    const CrownEstimate est = estimate_crown(returns, factors, nodewise);
    ConstraintSpec<double> spec = input;
    if (spec.benchmark.size() == 0) {
        spec.benchmark = VectorXd::Constant(returns.rows(), 1.0 / static_cast<double>(returns.rows()));
    }
    EstimateResult out;
    out.weights = optimal_weights<double>(est.precision, est.mean, spec, &est.sigma_y);
    out.kappa = out.weights.kappa_used;
    out.mean = est.mean;
    return out;
}

namespace {

struct WindowResult {
    std::optional<VectorXd> weights;
    double kappa = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

}  // namespace

BacktestReport run_backtest(const ReturnPanel& returns, const FactorPanel& factors,
                            const MatrixXd& benchmark, const BacktestConfig& config,
                            const std::vector<std::pair<std::string, VectorXd>>& comparisons) {
    returns.validate();
    const Index p = returns.num_assets();
    const Index T = returns.num_periods();
    const Index K = factors.num_factors();
    const Index w = config.window;
    require(factors.num_periods() == T, ErrorCode::DateMisalignment,
            "factor and return panels have different lengths");
    require(benchmark.rows() == p && benchmark.cols() == T, ErrorCode::DimensionMismatch,
            "benchmark must be p x T");
    require(w >= K + 2, ErrorCode::InvalidInput, "window must be at least K + 2");
    require(w < T, ErrorCode::InvalidInput, "window must be shorter than the sample");
    require(config.cost >= 0.0, ErrorCode::InvalidInput, "cost must be non-negative");
    require(config.periods_per_year > 0.0, ErrorCode::InvalidInput,
            "periods per year must be positive");
    for (Index t = 0; t < T; ++t) {
        require(std::abs(benchmark.col(t).sum() - 1.0) <= 1e-8, ErrorCode::InvalidInput,
                "benchmark weights must sum to 1 on " + returns.dates[static_cast<std::size_t>(t)]);
    }

    const Index n = T - w;
    NodewiseConfig nodewise = config.nodewise;
    if (config.threads > 1) nodewise.threads = 1;

    std::vector<WindowResult> windows(static_cast<std::size_t>(n));
    parallel_for(windows.size(), config.threads, [&](std::size_t k) {
        const Index end = w - 1 + static_cast<Index>(k);  // last in-window column
        ConstraintSpec<double> spec = config.regime;
        spec.benchmark = benchmark.col(end);
        if (!spec.kappa) spec.target_te = config.te_target_per_period();
        try {
            const CrownEstimate est =
                estimate_crown(returns.values.middleCols(end - w + 1, w),
                               factors.values.middleCols(end - w + 1, w), nodewise);
            const auto pw = optimal_weights<double>(est.precision, est.mean, spec, &est.sigma_y);
            require(pw.weights.allFinite(), ErrorCode::InvalidInput, "weights are not finite");
            windows[k].weights = pw.weights;
            windows[k].kappa = pw.kappa_used;
        } catch (const Error& e) {
            windows[k].error = e.what();
        }
    });

    BacktestReport report;
    report.assets = returns.assets;
    report.series.weights_after.resize(p, n);
    report.series.weights_before.resize(p, n);
    report.series.gross_returns.resize(n);
    report.benchmark_returns.resize(n);
    report.trades = VectorXd::Zero(n);
    report.kappas.resize(n);

    VectorXd drifted;
    for (Index k = 0; k < n; ++k) {
        const Index end = w - 1 + k;
        const auto& res = windows[static_cast<std::size_t>(k)];
        VectorXd desired;
        if (res.weights) {
            desired = *res.weights;
        } else {
            desired = k == 0 ? VectorXd(benchmark.col(end)) : drifted;
            report.failures.push_back({k, returns.dates[static_cast<std::size_t>(end)], res.error});
            log::warn("window ending {} failed, holding prior weights: {}",
                      returns.dates[static_cast<std::size_t>(end)], res.error);
        }
        if (k > 0) report.trades(k - 1) = (desired - drifted).cwiseAbs().sum();
        report.kappas(k) = res.kappa;

        const VectorXd realized = returns.values.col(end + 1);
        report.dates.push_back(returns.dates[static_cast<std::size_t>(end + 1)]);
        report.series.weights_after.col(k) = desired;
        report.series.gross_returns(k) = desired.dot(realized);
        report.benchmark_returns(k) = benchmark.col(end).dot(realized);
        drifted = drift_weights<double>(desired, realized);
        report.series.weights_before.col(k) = drifted;
    }

    report.series.net_returns = net_of_cost<double>(report.series.gross_returns, report.trades, config.cost);
    report.gross = series_stats<double>(report.series.gross_returns);
    report.net = series_stats<double>(report.series.net_returns);
    report.te = series_stats<double>(report.series.gross_returns - report.benchmark_returns).risk;
    report.gross.te = report.te;
    report.net.te = report.te;
    if (n > 1) {
        report.turnover = report.trades.head(n - 1).mean();
    }
    const MatrixXd& wa = report.series.weights_after;
    report.max_weight = wa.colwise().maxCoeff().mean();
    report.min_weight = wa.colwise().minCoeff().mean();
    report.total_short = wa.cwiseMin(0.0).colwise().sum().mean();

    if (n >= kMinSharpeTestLength) {
        report.sharpe_tests.push_back(
            {"benchmark", sr_test(report.series.net_returns, report.benchmark_returns)});
        for (const auto& [name, series] : comparisons) {
            require(series.size() == n, ErrorCode::AlignmentError,
                    "comparison series '" + name + "' has the wrong length");
            report.sharpe_tests.push_back({name, sr_test(report.series.net_returns, series)});
        }
    } else {
        log::info("backtest: {} out-of-sample periods, Sharpe test skipped", n);
    }
    return report;
}

}  // namespace crown
