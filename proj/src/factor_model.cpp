#include "crown/factor_model.hpp"

#include "crown/error.hpp"

#include <Eigen/Eigenvalues>

namespace crown {

FactorModelFit fit_factor_model(const ReturnPanel& returns, const FactorPanel& factors) {
    returns.validate();
    return fit_factor_model(returns.values, factors.values);
}

FactorModelFit fit_factor_model(const MatrixXd& y, const MatrixXd& x) {
    require(y.cols() == x.cols(), ErrorCode::DimensionMismatch,
            "returns have " + std::to_string(y.cols()) + " periods, factors have " +
                std::to_string(x.cols()));
    const Index T = y.cols();
    const Index K = x.rows();
    require(K >= 1, ErrorCode::InvalidInput, "at least one factor is required");
    require(T >= 2, ErrorCode::InvalidInput, "at least two periods are required");

    const MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxFactorGramCondition) {
        fail(ErrorCode::SingularFactorGram, "XX' is numerically singular (eigenvalues " +
                                                std::to_string(lo) + ", " + std::to_string(hi) + ")");
    }

    FactorModelFit fit;
    // B' = (XX')^-1 X y'
    const Eigen::LDLT<MatrixXd> solver(gram);
    fit.loadings = solver.solve(x * y.transpose()).transpose();
    fit.residuals = y - fit.loadings * x;
    fit.mean = y.rowwise().mean();

    const VectorXd xsum = x.rowwise().sum();
    const double t = static_cast<double>(T);
    fit.factor_cov = gram / t - (xsum * xsum.transpose()) / (t * t);
    fit.factor_cov = 0.5 * (fit.factor_cov + fit.factor_cov.transpose()).eval();
    return fit;
}

MatrixXd residual_covariance(const FactorModelFit& fit) {
    const double t = static_cast<double>(fit.residuals.cols());
    MatrixXd s = fit.residuals * fit.residuals.transpose() / t;
    return s;
}

MatrixXd implied_return_covariance(const FactorModelFit& fit) {
    MatrixXd s = fit.loadings * fit.factor_cov * fit.loadings.transpose();
    s += residual_covariance(fit);
    return s;
}

}  // namespace crown
