#pragma once

#include "crown/error.hpp"
#include "crown/types.hpp"

#include <Eigen/Cholesky>

#include <limits>

namespace crown {

enum class PrecisionSource { CrownEstimate, DirectInverse };

/// Precision matrix of returns. Estimates are generally not symmetric, which
/// is why the portfolio formulas apply theta' rather than theta.
template <typename Scalar = double>
struct ReturnPrecision {
    Mat<Scalar> theta;
    PrecisionSource source = PrecisionSource::CrownEstimate;
};

/// B Sigma_f B' + Sigma_u. Both the simulation and the oracle path build the
/// population covariance through this one function.
template <typename Scalar>
Mat<Scalar> population_covariance(const Mat<Scalar>& loadings, const Mat<Scalar>& factor_cov,
                                  const Mat<Scalar>& error_cov) {
    require(loadings.cols() == factor_cov.rows() && factor_cov.rows() == factor_cov.cols(),
            ErrorCode::DimensionMismatch, "loadings and factor covariance disagree");
    require(error_cov.rows() == loadings.rows() && error_cov.cols() == loadings.rows(),
            ErrorCode::DimensionMismatch, "error covariance has wrong size");
    Mat<Scalar> sigma = loadings * factor_cov * loadings.transpose();
    sigma += error_cov;
    return sigma;
}

/// Woodbury assembly of the return precision from the error precision:
///
///   theta = omega - omega B [Sigma_f^-1 + B' omega_sym B]^-1 B' omega
///
/// omega_sym appears only inside the bracket so the K x K inverse is taken of
/// a symmetric matrix; the outer factors use the raw (asymmetric) omega.
template <typename Scalar>
ReturnPrecision<Scalar> assemble_theta(const Mat<Scalar>& omega, const Mat<Scalar>& omega_sym,
                                       const Mat<Scalar>& loadings, const Mat<Scalar>& factor_cov) {
    const Index p = omega.rows();
    const Index k = loadings.cols();
    require(omega.cols() == p && omega_sym.rows() == p && omega_sym.cols() == p,
            ErrorCode::DimensionMismatch, "omega must be p x p");
    require(loadings.rows() == p, ErrorCode::DimensionMismatch, "loadings must be p x K");
    require(factor_cov.rows() == k && factor_cov.cols() == k, ErrorCode::DimensionMismatch,
            "factor covariance must be K x K");

    const Eigen::LLT<Mat<Scalar>> factor_chol(factor_cov);
    if (factor_chol.info() != Eigen::Success) {
        fail(ErrorCode::SingularFactorCov, "factor covariance is not invertible");
    }
    Mat<Scalar> bracket = factor_chol.solve(Mat<Scalar>::Identity(k, k));
    bracket += loadings.transpose() * omega_sym * loadings;
    bracket = (Scalar(0.5) * (bracket + bracket.transpose())).eval();
    // omega_sym can be indefinite when p > T, so only invertibility is required
    const Eigen::LDLT<Mat<Scalar>> bracket_chol(bracket);
    if (bracket_chol.info() != Eigen::Success || !(bracket_chol.rcond() > Scalar(64) * std::numeric_limits<Scalar>::epsilon())) {
        fail(ErrorCode::SingularBracket, "Woodbury bracket is singular");
    }

    const Mat<Scalar> left = omega * loadings;                 // p x K
    const Mat<Scalar> right = loadings.transpose() * omega;    // K x p
    ReturnPrecision<Scalar> out;
    out.theta = omega - left * bracket_chol.solve(right);
    out.source = PrecisionSource::CrownEstimate;
    require(out.theta.allFinite(), ErrorCode::SingularBracket, "assembled theta is not finite");
    return out;
}

/// Sigma_y^-1 through a Cholesky factorization; the result is symmetrized.
template <typename Scalar>
ReturnPrecision<Scalar> invert_population(const Mat<Scalar>& sigma_y) {
    const Index p = sigma_y.rows();
    require(sigma_y.cols() == p, ErrorCode::DimensionMismatch, "sigma_y must be square");
    const Eigen::LLT<Mat<Scalar>> chol(sigma_y);
    if (chol.info() != Eigen::Success) {
        fail(ErrorCode::NotPositiveDefinite, "population covariance is not positive definite");
    }
    ReturnPrecision<Scalar> out;
    out.theta = chol.solve(Mat<Scalar>::Identity(p, p));
    out.theta = (Scalar(0.5) * (out.theta + out.theta.transpose())).eval();
    out.source = PrecisionSource::DirectInverse;
    return out;
}

/// ||theta - theta'||_max; a diagnostic for estimated precisions.
template <typename Scalar>
Scalar asymmetry(const ReturnPrecision<Scalar>& precision) {
    return (precision.theta - precision.theta.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace crown
