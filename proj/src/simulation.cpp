#include "crown/simulation.hpp"

#include "crown/error.hpp"
#include "crown/factor_model.hpp"
#include "crown/precision.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace crown {

DGPSpec default_dgp() {
    DGPSpec s;
    s.mu_b << 1.0166, 0.5799, 0.2937;
    s.sigma_b << 0.0089, 0.0013, 0.0046,
                 0.0013, 0.2188, -0.0134,
                 0.0046, -0.0134, 0.1491;
    s.c_f << 0.0445, 0.0060, 0.0021;
    s.sigma_f << 1.5016, 0.1338, 0.1682,
                 0.1338, 0.3667, -0.0310,
                 0.1682, -0.0310, 0.6017;
    s.pi_f << -0.1204, 0.1555, -0.0324,
              -0.0074, -0.0378, 0.00318,
              -0.0027, 0.0031, 0.01669;
    return s;
}

Eigen::Matrix3d innovation_covariance(const DGPSpec& spec) {
    Eigen::Matrix3d e = spec.sigma_f - spec.pi_f * spec.sigma_f * spec.pi_f.transpose();
    return 0.5 * (e + e.transpose());
}

Eigen::Vector3d stationary_factor_mean(const DGPSpec& spec) {
    if (spec.factor_mean == FactorMean::Calibrated) return spec.c_f;
    return (Eigen::Matrix3d::Identity() - spec.pi_f).partialPivLu().solve(spec.c_f);
}

double spectral_radius(const Eigen::Matrix3d& pi) {
    Eigen::EigenSolver<Eigen::Matrix3d> eig(pi, false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

MatrixXd error_covariance(ErrorDesign design, Index p, double rho, double tau) {
    require(p >= 1, ErrorCode::InvalidInput, "p must be positive");
    MatrixXd s(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            const double lag = static_cast<double>(i > j ? i - j : j - i);
            s(i, j) = design == ErrorDesign::Toeplitz ? std::pow(rho, lag)
                                                      : 1.0 / std::pow(1.0 + lag, tau);
        }
    }
    return s;
}

namespace {

MatrixXd standard_normals(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> z(0.0, 1.0);
    MatrixXd out(rows, cols);
    // column by column so that draw order is time order
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r) out(r, c) = z(rng);
    }
    return out;
}

MatrixXd cholesky_factor(const MatrixXd& cov, const char* what) {
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        fail(ErrorCode::NotPositiveDefinite, std::string(what) + " is not positive definite");
    }
    return llt.matrixL();
}

}  // namespace

SimulatedPanel simulate_panel(const DGPSpec& spec) {
    require(spec.p >= 2 && spec.T >= 2, ErrorCode::InvalidInput, "need p >= 2 and T >= 2");
    if (spectral_radius(spec.pi_f) >= 1.0) {
        fail(ErrorCode::NonStationary, "factor VAR coefficient has spectral radius >= 1");
    }
    const Index p = spec.p;
    const Index T = spec.T;
    const MatrixXd l_b = cholesky_factor(spec.sigma_b, "loading covariance");
    const MatrixXd l_f = cholesky_factor(spec.sigma_f, "factor covariance");
    const MatrixXd l_e = cholesky_factor(innovation_covariance(spec), "innovation covariance");
    const MatrixXd sigma_u = error_covariance(spec.error_design, p, spec.rho, spec.tau);
    const MatrixXd l_u = cholesky_factor(sigma_u, "error covariance");
    const Eigen::Vector3d f_mean = stationary_factor_mean(spec);

    std::mt19937_64 rng(spec.seed);
    std::mt19937_64 loadings_rng(spec.loadings_seed.value_or(0));
    std::mt19937_64& b_rng = spec.loadings_seed ? loadings_rng : rng;

    MatrixXd loadings = (l_b * standard_normals(b_rng, 3, p)).transpose();
    loadings.rowwise() += spec.mu_b.transpose();

    VectorXd f_prev = f_mean + l_f * standard_normals(rng, 3, 1);
    const MatrixXd shocks = l_e * standard_normals(rng, 3, T);
    MatrixXd factors(3, T);
    // both conventions are c' + Pi f_{t-1} + e_t for a suitable intercept c'
    const Eigen::Vector3d intercept = spec.factor_mean == FactorMean::Calibrated
                                          ? Eigen::Vector3d(f_mean - spec.pi_f * f_mean)
                                          : spec.c_f;
    for (Index t = 0; t < T; ++t) {
        factors.col(t) = intercept + spec.pi_f * f_prev + shocks.col(t);
        f_prev = factors.col(t);
    }
    const MatrixXd errors = l_u * standard_normals(rng, p, T);

    SimulatedPanel out;
    out.returns.values = loadings * factors + errors;
    out.returns.assets.reserve(p);
    for (Index i = 0; i < p; ++i) out.returns.assets.push_back("a" + std::to_string(i + 1));
    out.returns.dates.reserve(T);
    for (Index t = 0; t < T; ++t) out.returns.dates.push_back(std::to_string(t + 1));
    out.factors.names = {"f1", "f2", "f3"};
    out.factors.values = factors;

    out.moments.loadings = loadings;
    out.moments.sigma_u = sigma_u;
    out.moments.mu = loadings * f_mean;
    out.moments.sigma_y = population_covariance<double>(loadings, spec.sigma_f, sigma_u);
    return out;
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t replication) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (replication + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

PortfolioWeights<double> oracle_weights(const PopulationMoments& moments,
                                        const ConstraintSpec<double>& spec) {
    const auto precision = invert_population<double>(moments.sigma_y);
    return optimal_weights<double>(precision, moments.mu, spec, &moments.sigma_y);
}

CrownEstimate estimate_crown(const MatrixXd& returns, const MatrixXd& factors,
                             const NodewiseConfig& nodewise) {
    const FactorModelFit fit = fit_factor_model(returns, factors);
    const NodewiseFit nw = nodewise_fit(fit.residuals, nodewise);
    const ErrorPrecision omega = assemble_omega(nw);
    CrownEstimate out;
    out.precision = assemble_theta<double>(omega.omega, omega.omega_sym, fit.loadings, fit.factor_cov);
    out.mean = fit.mean;
    out.sigma_y = implied_return_covariance(fit);
    return out;
}

}  // namespace crown
