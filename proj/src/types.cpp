#include "crown/types.hpp"

#include "crown/error.hpp"

#include <algorithm>
#include <cmath>

namespace crown {

void ReturnPanel::validate() const {
    require(values.rows() >= 2, ErrorCode::InvalidInput, "return panel needs at least 2 assets");
    require(values.cols() >= 2, ErrorCode::InvalidInput, "return panel needs at least 2 periods");
    require(static_cast<Index>(assets.size()) == values.rows(), ErrorCode::DimensionMismatch,
            "asset labels do not match return rows");
    require(static_cast<Index>(dates.size()) == values.cols(), ErrorCode::DimensionMismatch,
            "date labels do not match return columns");
    require(values.allFinite(), ErrorCode::InvalidInput, "return panel has non-finite entries");
}

IndexSet normalize_index_set(IndexSet set, Index p) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    for (Index i : set) {
        require(i >= 0 && i < p, ErrorCode::InvalidInput,
                "asset index " + std::to_string(i) + " outside [0, " + std::to_string(p) + ")");
    }
    return set;
}

IndexSet complement(const IndexSet& set, Index p) {
    const IndexSet sorted = normalize_index_set(set, p);
    IndexSet out;
    out.reserve(static_cast<std::size_t>(p) - sorted.size());
    auto it = sorted.begin();
    for (Index i = 0; i < p; ++i) {
        if (it != sorted.end() && *it == i) {
            ++it;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

}  // namespace crown
