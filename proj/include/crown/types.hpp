#pragma once

#include <Eigen/Dense>

#include <string>
#include <type_traits>
#include <vector>

namespace crown {

using Index = Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
// Non-deduced vector argument, so Eigen expressions convert at the call site.
template <typename Scalar>
using VecArg = std::type_identity_t<Vec<Scalar>>;

using MatrixXd = Mat<double>;
using VectorXd = Vec<double>;

/// Zero-based asset positions; kept sorted and unique by the helpers below.
using IndexSet = std::vector<Index>;

/// p x T panel of per-period excess returns (rows are assets, columns dates).
struct ReturnPanel {
    std::vector<std::string> assets;
    std::vector<std::string> dates;
    MatrixXd values;

    Index num_assets() const { return values.rows(); }
    Index num_periods() const { return values.cols(); }

    /// Throws InvalidInput / DimensionMismatch when the panel is unusable.
    void validate() const;
};

/// K x T panel of observed factor realizations.
struct FactorPanel {
    std::vector<std::string> names;
    MatrixXd values;

    Index num_factors() const { return values.rows(); }
    Index num_periods() const { return values.cols(); }
};

/// Builds the indicator vector 1_R of length p.
template <typename Scalar = double>
Vec<Scalar> indicator(const IndexSet& set, Index p) {
    Vec<Scalar> v = Vec<Scalar>::Zero(p);
    for (Index i : set) v(i) = Scalar(1);
    return v;
}

IndexSet normalize_index_set(IndexSet set, Index p);
IndexSet complement(const IndexSet& set, Index p);

}  // namespace crown
