#pragma once

#include "crown/backtest.hpp"
#include "crown/simulation.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace crown {

nlohmann::json to_json(const MonteCarloReport& report);
nlohmann::json to_json(const BacktestReport& report);

/// te_level,method,TE,Weight-ER,Risk-ER,SR-ER,SR,Return,Risk,replications,failures
std::string to_csv(const MonteCarloReport& report);

/// AVR,TE,Risk,SR,TO,p-val,Max Weight,Min Weight,Total Short (net returns).
std::string summary_csv(const BacktestReport& report);

/// Per-period series: date, gross, net, benchmark, trade.
std::string series_csv(const BacktestReport& report);

/// asset,weight lines.
std::string weights_csv(const std::vector<std::string>& assets, const VectorXd& weights);

/// JSON config files. Unknown keys and wrong types raise ConfigError.
MonteCarloConfig monte_carlo_config_from_json(const nlohmann::json& j,
                                              MonteCarloConfig base = {});
BacktestConfig backtest_config_from_json(const nlohmann::json& j, BacktestConfig base = {});
NodewiseConfig nodewise_config_from_json(const nlohmann::json& j, NodewiseConfig base = {});

nlohmann::json read_json_file(const std::string& path);

std::string_view to_string(MeanSource m) noexcept;
std::string_view to_string(LoadingsDraw d) noexcept;

}  // namespace crown
