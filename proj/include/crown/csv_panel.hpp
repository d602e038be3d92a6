#pragma once

#include "crown/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace crown {

enum class PanelKind { Returns, Factors, Benchmark };

/// Series-by-date table read from CSV: `values` is (series x dates).
struct DatedPanel {
    PanelKind kind = PanelKind::Returns;
    std::vector<std::string> names;
    std::vector<std::string> dates;
    MatrixXd values;

    Index num_series() const { return values.rows(); }
    Index num_periods() const { return values.cols(); }
};

/// Reads `date,<name>,<name>,...` CSV. Dates must be ISO-8601 (YYYY-MM-DD)
/// and strictly increasing. Throws ParseError naming the row and column.
DatedPanel read_panel(std::istream& in, PanelKind kind, const std::string& source = "<stream>");
DatedPanel load_panel(const std::string& path, PanelKind kind);

/// Throws DateMisalignment listing the first differing dates.
void check_aligned(const DatedPanel& a, const DatedPanel& b);

/// Benchmark weights must cover the return panel's assets in the same order
/// and sum to one on every date.
void check_benchmark(const DatedPanel& returns, const DatedPanel& benchmark);

ReturnPanel to_return_panel(const DatedPanel& panel);
FactorPanel to_factor_panel(const DatedPanel& panel);

/// Writes a panel back in the same layout (used for fixtures and round trips).
void write_panel(std::ostream& out, const DatedPanel& panel);

}  // namespace crown
