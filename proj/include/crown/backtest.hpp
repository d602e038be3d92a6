#pragma once

#include "crown/metrics.hpp"
#include "crown/nodewise.hpp"
#include "crown/portfolio.hpp"
#include "crown/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace crown {

enum class Rebalance { EveryPeriod };

struct BacktestConfig {
    Index window = 180;
    /// Regime, restriction set and bounds. The benchmark field is ignored
    /// (it is taken from the benchmark panel at each window end); kappa is
    /// estimated from the TE target unless set.
    ConstraintSpec<double> regime{};
    double cost = 0.005;
    double te_target_annualized = 0.05;
    double periods_per_year = 12.0;
    Rebalance rebalance = Rebalance::EveryPeriod;
    NodewiseConfig nodewise{};
    int threads = 1;

    double te_target_per_period() const;
};

struct WindowFailure {
    Index window = 0;         // out-of-sample position
    std::string date;         // last in-window date
    std::string message;
};

struct SharpeComparison {
    std::string name;
    SharpeTest test;
};

struct BacktestReport {
    std::vector<std::string> dates;  // date of each realized return
    std::vector<std::string> assets;
    BacktestSeries<double> series;   // weights_after: desired, weights_before: drifted
    VectorXd benchmark_returns;
    VectorXd trades;                 // ||w_{t+1} - w+_t||_1, zero in the last period
    VectorXd kappas;                 // NaN where the window failed
    PortfolioStats<double> gross;
    PortfolioStats<double> net;
    double te = 0;                   // s.d. of gross active returns
    double turnover = 0;
    double max_weight = 0;           // averages over rebalances
    double min_weight = 0;
    double total_short = 0;
    std::vector<SharpeComparison> sharpe_tests;
    std::vector<WindowFailure> failures;

    Index out_of_sample() const { return series.gross_returns.size(); }
};

/// Rolling-window evaluation. `returns` is p x T, `factors` K x T and
/// `benchmark` p x T weights, all on the same dates. Window t uses columns
/// [t - T_I + 1, t] and is scored on column t + 1.
///
/// `comparisons` are extra out-of-sample series (length T - T_I) tested
/// against the net portfolio returns alongside the benchmark.
BacktestReport run_backtest(const ReturnPanel& returns, const FactorPanel& factors,
                            const MatrixXd& benchmark, const BacktestConfig& config,
                            const std::vector<std::pair<std::string, VectorXd>>& comparisons = {});

/// One-shot weights from a single estimation window (the `estimate` command).
struct EstimateResult {
    PortfolioWeights<double> weights;
    double kappa = 0;
    VectorXd mean;
};

EstimateResult estimate_weights(const MatrixXd& returns, const MatrixXd& factors,
                                const ConstraintSpec<double>& spec, const NodewiseConfig& nodewise);

}  // namespace crown
