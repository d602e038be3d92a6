#include "crown/lasso.hpp"

#include "crown/error.hpp"

#include <cmath>
#include <vector>

namespace crown {
namespace {

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

// One pass over `coords`; returns the largest absolute coefficient move.
double sweep(const MatrixXd& gram, double lambda, const std::vector<Index>& coords, VectorXd& coef,
             VectorXd& grad) {
    double max_move = 0.0;
    for (Index k : coords) {
        const double diag = gram(k, k);
        if (!(diag > 0.0)) continue;
        const double old = coef(k);
        const double updated = soft_threshold(grad(k) + diag * old, lambda) / diag;
        const double move = updated - old;
        if (move != 0.0) {
            coef(k) = updated;
            grad.noalias() -= move * gram.col(k);
            max_move = std::max(max_move, std::abs(move));
        }
    }
    return max_move;
}

double kkt_from_grad(const VectorXd& grad, const VectorXd& coef, const std::vector<Index>& coords,
                     double lambda) {
    double worst = 0.0;
    for (Index k : coords) {
        const double v = coef(k) != 0.0 ? std::abs(grad(k) - lambda * (coef(k) > 0.0 ? 1.0 : -1.0))
                                        : std::max(0.0, std::abs(grad(k)) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace

int lasso_gram(const MatrixXd& gram, const VectorXd& cross, Index skip, double lambda,
               VectorXd& coef, const LassoOptions& options) {
    const Index n = gram.rows();
    require(gram.cols() == n && cross.size() == n, ErrorCode::DimensionMismatch,
            "lasso gram/cross sizes disagree");
    require(lambda >= 0.0, ErrorCode::InvalidInput, "lambda must be non-negative");
    if (coef.size() != n) coef = VectorXd::Zero(n);
    if (skip >= 0) coef(skip) = 0.0;

    VectorXd grad = cross - gram * coef;

    std::vector<Index> all;
    all.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k)
        if (k != skip) all.push_back(k);

    std::vector<Index> active;
    int sweeps = 0;
    while (true) {
        const double full_move = sweep(gram, lambda, all, coef, grad);
        ++sweeps;
        if (full_move < options.tolerance) return sweeps;
        if (kkt_from_grad(grad, coef, all, lambda) < options.kkt_tolerance) return sweeps;

        active.clear();
        for (Index k : all)
            if (coef(k) != 0.0) active.push_back(k);
        while (true) {
            if (sweeps >= options.max_sweeps) {
                fail(ErrorCode::NonConvergence, "coordinate descent did not converge in " +
                                                    std::to_string(options.max_sweeps) + " sweeps");
            }
            const double move = sweep(gram, lambda, active, coef, grad);
            ++sweeps;
            if (move < options.tolerance || kkt_from_grad(grad, coef, active, lambda) < options.kkt_tolerance)
                break;
        }
        if (sweeps >= options.max_sweeps) {
            fail(ErrorCode::NonConvergence, "coordinate descent did not converge in " +
                                                std::to_string(options.max_sweeps) + " sweeps");
        }
    }
}

double lasso_kkt_violation(const MatrixXd& gram, const VectorXd& cross, Index skip, double lambda,
                           const VectorXd& coef) {
    const VectorXd grad = cross - gram * coef;
    double worst = 0.0;
    for (Index k = 0; k < gram.rows(); ++k) {
        if (k == skip) continue;
        double violation;
        if (coef(k) != 0.0) {
            violation = std::abs(grad(k) - lambda * (coef(k) > 0.0 ? 1.0 : -1.0));
        } else {
            violation = std::max(0.0, std::abs(grad(k)) - lambda);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

VectorXd lasso_solve(const MatrixXd& design, const VectorXd& response, double lambda,
                     const LassoOptions& options) {
    require(design.rows() == response.size(), ErrorCode::DimensionMismatch,
            "design and response must share T");
    const double t = static_cast<double>(design.rows());
    const MatrixXd gram = design.transpose() * design / t;
    const VectorXd cross = design.transpose() * response / t;
    VectorXd coef = VectorXd::Zero(design.cols());
    lasso_gram(gram, cross, -1, lambda, coef, options);
    return coef;
}

double lasso_lambda_max(const MatrixXd& design, const VectorXd& response) {
    require(design.rows() == response.size(), ErrorCode::DimensionMismatch,
            "design and response must share T");
    const double t = static_cast<double>(design.rows());
    return (design.transpose() * response / t).cwiseAbs().maxCoeff();
}

}  // namespace crown
