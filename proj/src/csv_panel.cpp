#include "crown/csv_panel.hpp"

#include "crown/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace crown {
namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string where(const std::string& source, std::size_t row, std::size_t col,
                  const std::string& name) {
    return source + ": row " + std::to_string(row) + ", column " + std::to_string(col) + " ('" +
           name + "')";
}

}  // namespace

DatedPanel read_panel(std::istream& in, PanelKind kind, const std::string& source) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++row;
        if (!trim(line).empty()) header = split(line);
    }
    if (header.empty()) fail(ErrorCode::ParseError, source + ": file is empty");
    std::string first = header[0];
    std::transform(first.begin(), first.end(), first.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (first != "date") {
        fail(ErrorCode::ParseError, where(source, row, 1, header[0]) + ": first column must be 'date'");
    }
    if (header.size() < 2) fail(ErrorCode::ParseError, source + ": no data columns");
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c].empty()) {
            fail(ErrorCode::ParseError, where(source, row, c + 1, "") + ": empty column name");
        }
    }

    DatedPanel panel;
    panel.kind = kind;
    panel.names.assign(header.begin() + 1, header.end());
    const std::size_t n = panel.names.size();
    std::vector<double> values;

    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            fail(ErrorCode::ParseError, source + ": row " + std::to_string(row) + " has " +
                                            std::to_string(cells.size()) + " fields, expected " +
                                            std::to_string(header.size()));
        }
        if (!iso_date(cells[0])) {
            fail(ErrorCode::ParseError,
                 where(source, row, 1, "date") + ": '" + cells[0] + "' is not an ISO-8601 date");
        }
        if (!panel.dates.empty() && !(panel.dates.back() < cells[0])) {
            fail(ErrorCode::ParseError, where(source, row, 1, "date") + ": date '" + cells[0] +
                                            "' is not after '" + panel.dates.back() + "'");
        }
        panel.dates.push_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const std::string& text = cells[c];
            double v = 0.0;
            const char* begin = text.data();
            const char* end = begin + text.size();
            if (!text.empty() && *begin == '+') ++begin;
            const auto [ptr, ec] = std::from_chars(begin, end, v);
            if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
                fail(ErrorCode::ParseError, where(source, row, c + 1, header[c]) +
                                                ": cannot parse '" + text + "' as a number");
            }
            values.push_back(v);
        }
    }
    if (panel.dates.empty()) fail(ErrorCode::ParseError, source + ": no data rows");

    const Index t = static_cast<Index>(panel.dates.size());
    panel.values.resize(static_cast<Index>(n), t);
    for (Index d = 0; d < t; ++d)
        for (Index s = 0; s < static_cast<Index>(n); ++s)
            panel.values(s, d) = values[static_cast<std::size_t>(d) * n + static_cast<std::size_t>(s)];
    return panel;
}

DatedPanel load_panel(const std::string& path, PanelKind kind) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ParseError, path + ": cannot open file");
    return read_panel(in, kind, path);
}

void check_aligned(const DatedPanel& a, const DatedPanel& b) {
    const std::size_t n = std::max(a.dates.size(), b.dates.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::string da = i < a.dates.size() ? a.dates[i] : "<missing>";
        const std::string db = i < b.dates.size() ? b.dates[i] : "<missing>";
        if (da != db) {
            fail(ErrorCode::DateMisalignment, "row " + std::to_string(i + 1) + ": date " + da +
                                                  " does not match date " + db);
        }
    }
}

void check_benchmark(const DatedPanel& returns, const DatedPanel& benchmark) {
    check_aligned(returns, benchmark);
    require(benchmark.names == returns.names, ErrorCode::DimensionMismatch,
            "benchmark columns must match the return columns");
    for (Index t = 0; t < benchmark.num_periods(); ++t) {
        const double total = benchmark.values.col(t).sum();
        if (std::abs(total - 1.0) > 1e-8) {
            fail(ErrorCode::InvalidInput, "benchmark weights on " +
                                              benchmark.dates[static_cast<std::size_t>(t)] +
                                              " sum to " + std::to_string(total));
        }
    }
}

ReturnPanel to_return_panel(const DatedPanel& panel) {
    ReturnPanel r;
    r.assets = panel.names;
    r.dates = panel.dates;
    r.values = panel.values;
    r.validate();
    return r;
}

FactorPanel to_factor_panel(const DatedPanel& panel) {
    FactorPanel f;
    f.names = panel.names;
    f.values = panel.values;
    return f;
}

void write_panel(std::ostream& out, const DatedPanel& panel) {
    out << "date";
    for (const auto& n : panel.names) out << ',' << n;
    out << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Index t = 0; t < panel.num_periods(); ++t) {
        out << panel.dates[static_cast<std::size_t>(t)];
        for (Index s = 0; s < panel.num_series(); ++s) out << ',' << panel.values(s, t);
        out << '\n';
    }
}

}  // namespace crown
