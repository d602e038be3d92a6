#pragma once

#include "crown/nodewise.hpp"
#include "crown/portfolio.hpp"
#include "crown/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crown {

enum class ErrorDesign { Toeplitz, Dense };

/// How c_f enters the factor VAR.
///   Calibrated:   f_t - c = Pi (f_{t-1} - c) + e_t, so E[f] = c
///   VarIntercept: f_t = c + Pi f_{t-1} + e_t,        so E[f] = (I - Pi)^-1 c
enum class FactorMean { Calibrated, VarIntercept };

/// Whether loadings are redrawn for every replication or drawn once.
enum class LoadingsDraw { PerReplication, Fixed };

/// Three-factor VAR(1) data-generating process with random loadings.
struct DGPSpec {
    Eigen::Vector3d mu_b;
    Eigen::Matrix3d sigma_b;
    Eigen::Vector3d c_f;
    Eigen::Matrix3d pi_f;
    Eigen::Matrix3d sigma_f;
    FactorMean factor_mean = FactorMean::Calibrated;
    ErrorDesign error_design = ErrorDesign::Toeplitz;
    double rho = 0.25;   // Toeplitz decay
    double tau = 0.001;  // dense-design decay exponent
    Index p = 80;
    Index T = 100;
    std::uint64_t seed = 0;
    /// When set, loadings come from their own generator with this seed and
    /// the main seed drives only factors and errors.
    std::optional<std::uint64_t> loadings_seed;
};

/// Calibrated loading and factor parameters.
DGPSpec default_dgp();

/// Sigma_e = Sigma_f - Pi Sigma_f Pi', the VAR innovation covariance.
Eigen::Matrix3d innovation_covariance(const DGPSpec& spec);

/// E[f] under the spec's factor-mean convention.
Eigen::Vector3d stationary_factor_mean(const DGPSpec& spec);

/// Largest modulus among the eigenvalues of Pi.
double spectral_radius(const Eigen::Matrix3d& pi);

/// rho^|i-j| (Toeplitz) or 1/(1+|i-j|)^tau (dense).
MatrixXd error_covariance(ErrorDesign design, Index p, double rho, double tau);

struct PopulationMoments {
    VectorXd mu;
    MatrixXd sigma_y;
    MatrixXd loadings;  // p x 3
    MatrixXd sigma_u;
};

struct SimulatedPanel {
    ReturnPanel returns;
    FactorPanel factors;
    PopulationMoments moments;
};

/// Draws loadings, the stationary initial factor, T factor innovations and
/// T error vectors, in that order, from one generator seeded with spec.seed
/// (loadings from their own generator when loadings_seed is set).
SimulatedPanel simulate_panel(const DGPSpec& spec);

/// Child seed for replication r (splitmix64 of master and r).
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t replication);

/// Regime weights at the population moments. kappa is resolved from
/// target_te with the population covariance when it is not given.
PortfolioWeights<double> oracle_weights(const PopulationMoments& moments,
                                        const ConstraintSpec<double>& spec);

enum class Method { Crown, Oracle, Index, Ncon };

/// Expected-return input of the estimated portfolios. Population isolates
/// precision-estimation error, which is what the reference tables measure;
/// Sample plugs in the row means of the simulated panel.
enum class MeanSource { Population, Sample };

std::string_view to_string(Method m) noexcept;

struct MonteCarloConfig {
    DGPSpec dgp = default_dgp();
    std::vector<double> te_levels{0.1, 0.2, 0.3};
    Regime regime = Regime::TrackingError;
    IndexSet restricted;       // empty: first min(10, p-1) assets
    double omega = 0.0;
    double w_x = 0.2;
    double floor = 0.0;
    double ncon_kappa = 1.0;   // risk tolerance of the unconstrained portfolio
    MeanSource mean_source = MeanSource::Population;
    LoadingsDraw loadings = LoadingsDraw::PerReplication;
    int reps = 200;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::Crown, Method::Oracle, Method::Index, Method::Ncon};
    NodewiseConfig nodewise{};
    int threads = 1;
    double max_failure_fraction = 0.05;
};

/// Averages over successful replications.
struct CellAverages {
    double te = 0;
    double weight_er = 0;
    double risk_er = 0;
    double sr_er = 0;
    double sr = 0;
    double avg_return = 0;
    double risk = 0;
};

struct MonteCarloCell {
    Method method = Method::Crown;
    double te_level = 0;
    CellAverages mean;
    int replications = 0;
    int failures = 0;
    bool aborted = false;
};

struct MonteCarloReport {
    Index p = 0;
    Index T = 0;
    Regime regime = Regime::TrackingError;
    MeanSource mean_source = MeanSource::Population;
    LoadingsDraw loadings = LoadingsDraw::PerReplication;
    std::uint64_t seed = 0;
    int reps = 0;
    std::vector<std::uint64_t> replication_seeds;
    std::vector<std::string> failure_messages;
    std::vector<MonteCarloCell> cells;  // TE level major, method minor

    const MonteCarloCell* find(Method method, double te_level) const;
};

/// Per-replication scores, exposed for tests and for composing runs.
struct ReplicationResult {
    bool ok = false;
    std::string message;
    // [te_level][method]
    std::vector<std::vector<CellAverages>> scores;
};

ReplicationResult run_replication(const MonteCarloConfig& config, int replication);

MonteCarloReport run_monte_carlo(const MonteCarloConfig& config);

/// Full CROWN precision estimate from a return/factor panel.
struct CrownEstimate {
    ReturnPrecision<double> precision;
    VectorXd mean;
    MatrixXd sigma_y;  // plug-in return covariance
};

CrownEstimate estimate_crown(const MatrixXd& returns, const MatrixXd& factors,
                             const NodewiseConfig& nodewise);

}  // namespace crown
