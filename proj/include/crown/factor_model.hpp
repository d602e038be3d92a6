#pragma once

#include "crown/types.hpp"

namespace crown {

/// Per-window output of the observed-factor regression.
struct FactorModelFit {
    MatrixXd loadings;    // p x K
    MatrixXd residuals;   // p x T
    VectorXd mean;        // p
    MatrixXd factor_cov;  // K x K, de-meaned
};

/// Condition number of XX' above which the factor regression is refused.
inline constexpr double kMaxFactorGramCondition = 1e12;

/// Least-squares loadings of every asset on the factors (no intercept),
/// residuals, sample means and the de-meaned factor covariance
/// T^-1 XX' - T^-2 X1 1'X'.
FactorModelFit fit_factor_model(const ReturnPanel& returns, const FactorPanel& factors);

/// Same as above on raw matrices (p x T returns, K x T factors).
FactorModelFit fit_factor_model(const MatrixXd& returns, const MatrixXd& factors);

/// T^-1 U U', the OLS-residual sample covariance.
MatrixXd residual_covariance(const FactorModelFit& fit);

/// B Sigma_f B' + T^-1 U U', the plug-in return covariance used for kappa.
MatrixXd implied_return_covariance(const FactorModelFit& fit);

}  // namespace crown
