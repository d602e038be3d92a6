#pragma once

#include "crown/lasso.hpp"
#include "crown/types.hpp"

#include <vector>

namespace crown {

enum class LambdaRule { CrossValidation, FixedLambda };

/// Held-out criterion scored by cross-validation.
///   Penalized: mean squared prediction error + 2 lambda ||gamma||_1
///   Mse:       mean squared prediction error alone
enum class CvLoss { Penalized, Mse };

struct NodewiseConfig {
    LambdaRule rule = LambdaRule::CrossValidation;
    double fixed_lambda = 0.0;
    CvLoss cv_loss = CvLoss::Penalized;
    int folds = 10;
    int grid_size = 50;
    double grid_ratio = 1e-3;  // lambda_min / lambda_max
    /// Stop the CV path after this many grid points without a new minimum
    /// (0 walks the whole grid).
    int cv_patience = 10;
    LassoOptions lasso{};
    int threads = 1;
};

/// tau_j^2 values below this are clamped (with a warning); values below
/// -kTauNegativeLimit mean the regression overfit and are rejected.
inline constexpr double kTauFloor = 1e-10;
inline constexpr double kTauNegativeLimit = 1e-8;

struct NodewiseFit {
    std::vector<VectorXd> gammas;  // p vectors of length p-1
    VectorXd taus_sq;
    VectorXd lambdas;
    LambdaRule selection_rule = LambdaRule::CrossValidation;
    int floored = 0;  // number of tau_j^2 values clamped to kTauFloor

    Index size() const { return taus_sq.size(); }
};

struct ErrorPrecision {
    MatrixXd omega;
    MatrixXd omega_sym;
};

/// Geometric grid of `size` values from lambda_max down to lambda_max * ratio.
VectorXd lambda_grid(double lambda_max, int size, double ratio);

/// Residual-based nodewise lasso: for every asset j regress u_j on the other
/// residual series, choosing lambda_j per the configured rule.
/// `residuals` is p x T.
NodewiseFit nodewise_fit(const MatrixXd& residuals, const NodewiseConfig& config = {});

/// Row j of Omega is (1, -gamma_j') with the 1 placed at column j, divided by tau_j^2.
ErrorPrecision assemble_omega(const NodewiseFit& fit);

/// Expands gamma_j (length p-1) to length p with a zero at position j.
VectorXd expand_gamma(const VectorXd& gamma, Index j);

}  // namespace crown
