#include "crown/nodewise.hpp"

#include "crown/error.hpp"
#include "crown/log.hpp"
#include "crown/parallel.hpp"

#include <cmath>
#include <limits>

namespace crown {
namespace {

struct Fold {
    Index begin;
    Index end;
};

std::vector<Fold> contiguous_folds(Index t, int folds) {
    const Index k = std::min<Index>(folds, t);
    std::vector<Fold> out;
    out.reserve(static_cast<std::size_t>(k));
    for (Index f = 0; f < k; ++f) out.push_back({f * t / k, (f + 1) * t / k});
    return out;
}

struct FoldData {
    MatrixXd train_gram;  // p x p, training rows only
    MatrixXd test;        // p x T_test residual block
};

// Held-out mean squared error of predicting u_j from the other series.
double holdout_error(const MatrixXd& test, Index j, const VectorXd& coef) {
    VectorXd resid = test.row(j).transpose();
    for (Index k = 0; k < coef.size(); ++k) {
        if (coef(k) != 0.0) resid.noalias() -= coef(k) * test.row(k).transpose();
    }
    return resid.squaredNorm() / static_cast<double>(test.cols());
}

Index select_by_cv(const std::vector<FoldData>& folds, Index j, const VectorXd& grid,
                   const LassoOptions& options, CvLoss criterion, int patience) {
    const Index p = folds.front().train_gram.rows();
    std::vector<VectorXd> coefs(folds.size(), VectorXd::Zero(p));
    std::vector<VectorXd> crosses;
    crosses.reserve(folds.size());
    for (const auto& fold : folds) crosses.push_back(fold.train_gram.col(j));

    // Grid runs from the largest lambda down; ties keep the larger lambda.
    Index best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (Index g = 0; g < grid.size(); ++g) {
        double loss = 0.0;
        try {
            for (std::size_t f = 0; f < folds.size(); ++f) {
                lasso_gram(folds[f].train_gram, crosses[f], j, grid(g), coefs[f], options);
                loss += holdout_error(folds[f].test, j, coefs[f]);
                if (criterion == CvLoss::Penalized) {
                    loss += 2.0 * grid(g) * coefs[f].lpNorm<1>();
                }
            }
        } catch (const Error& e) {
            // Smaller lambdas on an underdetermined fold stop converging; the
            // path ends at the last grid point every fold could solve.
            if (g == 0 || e.code() != ErrorCode::NonConvergence) throw;
            log::debug("nodewise: CV path for node {} stopped at grid point {}", j, g);
            break;
        }
        if (loss < best_loss) {
            best_loss = loss;
            best = g;
        } else if (patience > 0 && g - best >= patience) {
            break;
        }
    }
    return best;
}

}  // namespace

VectorXd lambda_grid(double lambda_max, int size, double ratio) {
    require(size >= 1, ErrorCode::InvalidInput, "lambda grid needs at least one point");
    require(ratio > 0.0 && ratio <= 1.0, ErrorCode::InvalidInput, "grid ratio must be in (0, 1]");
    VectorXd grid(size);
    if (size == 1) {
        grid(0) = lambda_max;
        return grid;
    }
    const double step = std::log(ratio) / static_cast<double>(size - 1);
    for (int g = 0; g < size; ++g) grid(g) = lambda_max * std::exp(step * g);
    return grid;
}

VectorXd expand_gamma(const VectorXd& gamma, Index j) {
    const Index p = gamma.size() + 1;
    VectorXd full(p);
    full.head(j) = gamma.head(j);
    full(j) = 0.0;
    full.tail(p - j - 1) = gamma.tail(p - j - 1);
    return full;
}

NodewiseFit nodewise_fit(const MatrixXd& residuals, const NodewiseConfig& config) {
    const Index p = residuals.rows();
    const Index t = residuals.cols();
    require(p >= 2, ErrorCode::InvalidInput, "nodewise regression needs p >= 2");
    require(t >= 3, ErrorCode::InvalidInput, "nodewise regression needs T >= 3");
    require(residuals.allFinite(), ErrorCode::InvalidInput, "residuals contain non-finite values");
    if (config.rule == LambdaRule::FixedLambda) {
        require(config.fixed_lambda >= 0.0, ErrorCode::InvalidInput,
                "fixed lambda must be non-negative");
    }

    const MatrixXd gram = residuals * residuals.transpose() / static_cast<double>(t);
    const double scale = std::sqrt(std::max(gram.diagonal().maxCoeff(), 0.0));
    for (Index j = 0; j < p; ++j) {
        if (!(std::sqrt(std::max(gram(j, j), 0.0)) > 1e-12 * std::max(1.0, scale))) {
            fail(ErrorCode::DegenerateResidual,
                 "residual series " + std::to_string(j) + " is numerically zero");
        }
    }

    std::vector<FoldData> folds;
    if (config.rule == LambdaRule::CrossValidation) {
        for (const Fold& f : contiguous_folds(t, config.folds)) {
            const Index n_test = f.end - f.begin;
            const Index n_train = t - n_test;
            if (n_train == 0) continue;
            FoldData fold;
            const MatrixXd head = residuals.leftCols(f.begin);
            const MatrixXd tail = residuals.rightCols(t - f.end);
            fold.train_gram = (head * head.transpose() + tail * tail.transpose()) /
                              static_cast<double>(n_train);
            fold.test = residuals.middleCols(f.begin, n_test);
            folds.push_back(std::move(fold));
        }
    }

    NodewiseFit fit;
    fit.selection_rule = config.rule;
    fit.gammas.assign(static_cast<std::size_t>(p), VectorXd());
    fit.taus_sq = VectorXd::Zero(p);
    fit.lambdas = VectorXd::Zero(p);
    std::vector<int> floored(static_cast<std::size_t>(p), 0);

    parallel_for(static_cast<std::size_t>(p), config.threads, [&](std::size_t node) {
        const Index j = static_cast<Index>(node);
        const VectorXd cross = gram.col(j);
        VectorXd coef = VectorXd::Zero(p);
        double lambda = config.fixed_lambda;

        if (config.rule == LambdaRule::CrossValidation) {
            double lmax = 0.0;
            for (Index k = 0; k < p; ++k)
                if (k != j) lmax = std::max(lmax, std::abs(cross(k)));
            if (lmax > 0.0) {
                const VectorXd grid = lambda_grid(lmax, config.grid_size, config.grid_ratio);
                const Index best = select_by_cv(folds, j, grid, config.lasso, config.cv_loss, config.cv_patience);
                // Warm-started path on the full sample down to the chosen lambda,
                // ending early (as the CV path does) if a smaller lambda stalls.
                Index reached = 0;
                for (Index g = 0; g <= best; ++g) {
                    const VectorXd previous = coef;
                    try {
                        lasso_gram(gram, cross, j, grid(g), coef, config.lasso);
                    } catch (const Error& e) {
                        if (g == 0 || e.code() != ErrorCode::NonConvergence) throw;
                        log::debug("nodewise: full-sample path for node {} stopped at grid point {} of {}", j, g,
                                   best);
                        coef = previous;
                        break;
                    }
                    reached = g;
                }
                lambda = grid(reached);
            } else {
                lambda = 0.0;
            }
        } else {
            lasso_gram(gram, cross, j, lambda, coef, config.lasso);
        }

        // tau_j^2 = u_j'(u_j - U_{-j}' gamma_j) / T
        double tau = gram(j, j) - cross.dot(coef);
        if (tau < -kTauNegativeLimit) {
            fail(ErrorCode::DegenerateResidual, "tau^2 for asset " + std::to_string(j) +
                                                    " is negative (" + std::to_string(tau) + ")");
        }
        if (tau < kTauFloor) {
            tau = kTauFloor;
            floored[node] = 1;
        }

        VectorXd gamma(p - 1);
        gamma.head(j) = coef.head(j);
        gamma.tail(p - j - 1) = coef.tail(p - j - 1);
        fit.gammas[node] = std::move(gamma);
        fit.taus_sq(j) = tau;
        fit.lambdas(j) = lambda;
    });

    for (int f : floored) fit.floored += f;
    if (fit.floored > 0) {
        log::warn("nodewise: clamped {} tau^2 value(s) to {}", fit.floored, kTauFloor);
    }
    return fit;
}

ErrorPrecision assemble_omega(const NodewiseFit& fit) {
    const Index p = fit.size();
    require(static_cast<Index>(fit.gammas.size()) == p && fit.lambdas.size() == p,
            ErrorCode::DimensionMismatch, "nodewise fit has inconsistent sizes");
    ErrorPrecision out;
    out.omega.resize(p, p);
    for (Index j = 0; j < p; ++j) {
        require(fit.gammas[j].size() == p - 1, ErrorCode::DimensionMismatch,
                "gamma vector has wrong length");
        require(fit.taus_sq(j) > 0.0, ErrorCode::InvalidInput, "tau^2 must be positive");
        out.omega.row(j) = -expand_gamma(fit.gammas[j], j).transpose() / fit.taus_sq(j);
        out.omega(j, j) = 1.0 / fit.taus_sq(j);
    }
    out.omega_sym = 0.5 * (out.omega + out.omega.transpose());
    return out;
}

}  // namespace crown
