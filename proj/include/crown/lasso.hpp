#pragma once

#include "crown/types.hpp"

namespace crown {

struct LassoOptions {
    double tolerance = 1e-8;  // max coefficient change over a sweep
    /// Also stop once every optimality condition holds to this level; on
    /// rank-deficient grams the coefficients can creep long after that.
    double kkt_tolerance = 1e-10;
    int max_sweeps = 10000;
};

/// Minimizes (1/T)||response - design * gamma||^2 + 2 lambda ||gamma||_1 by
/// cyclic coordinate descent with covariance updates.
VectorXd lasso_solve(const MatrixXd& design, const VectorXd& response, double lambda,
                     const LassoOptions& options = {});

/// Smallest lambda for which the solution is identically zero:
/// max_k |(1/T) x_k' y|.
double lasso_lambda_max(const MatrixXd& design, const VectorXd& response);

/// Gram-form solver shared by lasso_solve and the nodewise regressions.
///
/// Minimizes 1/2 g'Gg - c'g + lambda ||g||_1 over all coordinates except
/// `skip` (pass -1 to use every coordinate); coef(skip) is held at zero.
/// `coef` is the warm start on entry and the solution on exit. Returns the
/// number of sweeps used; throws NonConvergence past options.max_sweeps.
int lasso_gram(const MatrixXd& gram, const VectorXd& cross, Index skip, double lambda,
               VectorXd& coef, const LassoOptions& options = {});

/// Largest violation of the lasso optimality conditions in gram form:
/// |c_k - (G g)_k - lambda sign(g_k)| on the active set and
/// max(0, |c_k - (G g)_k| - lambda) elsewhere.
double lasso_kkt_violation(const MatrixXd& gram, const VectorXd& cross, Index skip, double lambda,
                           const VectorXd& coef);

}  // namespace crown
