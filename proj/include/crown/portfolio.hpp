#pragma once

#include "crown/error.hpp"
#include "crown/precision.hpp"
#include "crown/types.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace crown {

enum class Regime {
    TrackingError,
    TEPlusEqualityWeight,
    TEPlusInequalityWeight,
    WeightOnly,
    Unconstrained,
    ShortSaleGroup,
};

constexpr std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::TrackingError: return "te";
        case Regime::TEPlusEqualityWeight: return "te-eq";
        case Regime::TEPlusInequalityWeight: return "te-ineq";
        case Regime::WeightOnly: return "weight";
        case Regime::Unconstrained: return "unconstrained";
        case Regime::ShortSaleGroup: return "short-sale";
    }
    return "unknown";
}

inline std::optional<Regime> parse_regime(std::string_view name) {
    for (Regime r : {Regime::TrackingError, Regime::TEPlusEqualityWeight,
                     Regime::TEPlusInequalityWeight, Regime::WeightOnly, Regime::Unconstrained,
                     Regime::ShortSaleGroup}) {
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

/// Denominators at or below this magnitude are treated as zero.
inline constexpr double kDenominatorTolerance = 1e-12;
/// Quadratic forms at or below this value cannot define kappa.
inline constexpr double kDirectionTolerance = 1e-14;

template <typename Scalar = double>
struct ConstraintSpec {
    Regime regime = Regime::TrackingError;
    IndexSet restricted;       // R (floor set for ShortSaleGroup)
    Scalar omega = 0;          // bound on 1_R' w_d
    Scalar w_x = 0;            // weight-only bound on 1_R' w
    Scalar floor = 0;          // ShortSaleGroup: 1_R' w >= floor
    Vec<Scalar> benchmark;     // m
    std::optional<Vec<Scalar>> restricted_benchmark;  // m_R, defaults to m
    std::optional<Scalar> kappa;    // TE risk tolerance
    std::optional<Scalar> kappa_w;  // variance risk tolerance, defaults to kappa
    std::optional<Scalar> target_te;

    const Vec<Scalar>& benchmark_r() const {
        return restricted_benchmark ? *restricted_benchmark : benchmark;
    }
};

template <typename Scalar = double>
struct RestrictedBlocks {
    Vec<Scalar> k_hat;
    Vec<Scalar> a_hat;
    Vec<Scalar> l_hat;
    Scalar w_k = 0;
    Scalar w_a = 0;
    Scalar w_u = 0;
};

template <typename Scalar = double>
struct PortfolioWeights {
    Vec<Scalar> weights;
    /// Deviation from the benchmark (w_d or w_cp) for benchmarked regimes;
    /// equal to `weights` otherwise.
    Vec<Scalar> active;
    Regime regime_used = Regime::TrackingError;
    std::optional<bool> binding;
    bool boundary_tie = false;
    std::optional<RestrictedBlocks<Scalar>> blocks;
    Scalar kappa_used = 0;
};

namespace detail {

template <typename Scalar>
Scalar checked_ratio_denominator(Scalar d, const char* what) {
    if (!(std::abs(d) > Scalar(kDenominatorTolerance))) {
        fail(ErrorCode::DegenerateDenominator, std::string(what) + " is numerically zero");
    }
    return d;
}

/// Maximum-Sharpe and minimum-variance directions, both fully invested,
/// built from theta' as the estimated-weight formulas require.
template <typename Scalar>
struct Directions {
    Vec<Scalar> msr;
    Vec<Scalar> gmv;
    Scalar ones_theta_mu = 0;
    Scalar ones_theta_ones = 0;
};

template <typename Scalar>
Directions<Scalar> directions(const ReturnPrecision<Scalar>& precision, const VecArg<Scalar>& mu) {
    const Index p = precision.theta.rows();
    require(precision.theta.cols() == p && mu.size() == p, ErrorCode::DimensionMismatch,
            "theta and mu sizes disagree");
    const Vec<Scalar> theta_mu = precision.theta.transpose() * mu;
    const Vec<Scalar> theta_one = precision.theta.transpose() * Vec<Scalar>::Ones(p);
    Directions<Scalar> d;
    d.ones_theta_mu = checked_ratio_denominator(theta_mu.sum(), "1'theta'mu");
    d.ones_theta_ones = checked_ratio_denominator(theta_one.sum(), "1'theta'1");
    d.msr = theta_mu / d.ones_theta_mu;
    d.gmv = theta_one / d.ones_theta_ones;
    return d;
}

template <typename Scalar>
void check_benchmark(const Vec<Scalar>& m, Index p, const char* what) {
    require(m.size() == p, ErrorCode::DimensionMismatch, std::string(what) + " has wrong length");
    require(std::abs(m.sum() - Scalar(1)) <= Scalar(1e-8), ErrorCode::InvalidInput,
            std::string(what) + " weights must sum to 1");
}

template <typename Scalar>
Scalar kappa_of(const ConstraintSpec<Scalar>& spec) {
    if (!spec.kappa) {
        fail(ErrorCode::InvalidInput,
             "kappa is not set; supply it or resolve it from a target TE first");
    }
    require(*spec.kappa >= Scalar(0), ErrorCode::InvalidInput, "kappa must be non-negative");
    return *spec.kappa;
}

template <typename Scalar>
Scalar kappa_w_of(const ConstraintSpec<Scalar>& spec) {
    if (spec.kappa_w) {
        require(*spec.kappa_w >= Scalar(0), ErrorCode::InvalidInput, "kappa_w must be non-negative");
        return *spec.kappa_w;
    }
    return kappa_of(spec);
}

}  // namespace detail

/// Active bet that maximizes mu'w_d - (Xi/2) w_d' Sigma w_d with 1'w_d = 0:
/// w_d = kappa [theta'mu / 1'theta'mu - theta'1 / 1'theta'1], weights = w_d + m.
template <typename Scalar>
PortfolioWeights<Scalar> te_weights(const ReturnPrecision<Scalar>& precision, const VecArg<Scalar>& mu,
                                    const ConstraintSpec<Scalar>& spec) {
    const Index p = precision.theta.rows();
    detail::check_benchmark(spec.benchmark, p, "benchmark");
    const Scalar kappa = detail::kappa_of(spec);
    const auto d = detail::directions(precision, mu);

    PortfolioWeights<Scalar> out;
    out.active = kappa * (d.msr - d.gmv);
    out.weights = out.active + spec.benchmark;
    out.regime_used = Regime::TrackingError;
    out.kappa_used = kappa;
    return out;
}

/// k, a, l, w_k, w_a and w_u for restriction set R.
///
/// w_k is taken as 1_R'k (denominator 1'theta'1_R, the same as k itself) so
/// that 1_R'l = 1 and 1'l = 0 hold exactly for asymmetric estimates too; the
/// two agree whenever theta is symmetric.
template <typename Scalar>
RestrictedBlocks<Scalar> restricted_blocks(const ReturnPrecision<Scalar>& precision,
                                           const VecArg<Scalar>& mu, const IndexSet& restricted) {
    const Index p = precision.theta.rows();
    const IndexSet r = normalize_index_set(restricted, p);
    require(!r.empty() && static_cast<Index>(r.size()) < p, ErrorCode::InvalidInput,
            "restriction set must satisfy 1 <= |R| < p");
    const Vec<Scalar> ones_r = indicator<Scalar>(r, p);
    const auto d = detail::directions(precision, mu);
    const Vec<Scalar> theta_r = precision.theta.transpose() * ones_r;
    const Scalar ones_theta_r = detail::checked_ratio_denominator(theta_r.sum(), "1'theta'1_R");
    const Scalar r_theta_ones =
        detail::checked_ratio_denominator(ones_r.dot(d.gmv) * d.ones_theta_ones, "1_R'theta'1");
    (void)r_theta_ones;

    RestrictedBlocks<Scalar> b;
    b.k_hat = theta_r / ones_theta_r;
    b.a_hat = d.gmv;
    b.w_k = ones_r.dot(b.k_hat);
    b.w_a = ones_r.dot(b.a_hat);
    const Scalar spread = b.w_k - b.w_a;
    if (!(std::abs(spread) > Scalar(kDenominatorTolerance))) {
        fail(ErrorCode::DegenerateSpread, "w_k and w_a coincide");
    }
    b.l_hat = (b.k_hat - b.a_hat) / spread;
    b.w_u = ones_r.dot(d.msr - d.gmv);
    return b;
}

/// TE plus equality restriction 1_R'w_d = omega:
/// w_cp = (omega - kappa w_u) l + w_d, weights = w_cp + m_R.
template <typename Scalar>
PortfolioWeights<Scalar> joint_te_equality_weights(const ReturnPrecision<Scalar>& precision,
                                                   const VecArg<Scalar>& mu,
                                                   const ConstraintSpec<Scalar>& spec) {
    const Index p = precision.theta.rows();
    detail::check_benchmark(spec.benchmark_r(), p, "restricted benchmark");
    const Scalar kappa = detail::kappa_of(spec);
    const auto blocks = restricted_blocks(precision, mu, spec.restricted);
    const auto d = detail::directions(precision, mu);

    PortfolioWeights<Scalar> out;
    const Vec<Scalar> w_d = kappa * (d.msr - d.gmv);
    out.active = (spec.omega - kappa * blocks.w_u) * blocks.l_hat + w_d;
    out.weights = out.active + spec.benchmark_r();
    out.regime_used = Regime::TEPlusEqualityWeight;
    out.kappa_used = kappa;
    out.blocks = blocks;
    return out;
}

/// TE plus inequality restriction 1_R'w_d <= omega. The restriction binds
/// when kappa w_u > omega; the exact tie is treated as binding and flagged.
template <typename Scalar>
PortfolioWeights<Scalar> te_inequality_weights(const ReturnPrecision<Scalar>& precision,
                                               const VecArg<Scalar>& mu,
                                               const ConstraintSpec<Scalar>& spec) {
    require(spec.omega >= Scalar(0), ErrorCode::InvalidInput,
            "inequality bound omega must be non-negative");
    const Scalar kappa = detail::kappa_of(spec);
    const auto blocks = restricted_blocks(precision, mu, spec.restricted);
    const Scalar lhs = kappa * blocks.w_u;

    PortfolioWeights<Scalar> out;
    if (lhs < spec.omega) {
        out = te_weights(precision, mu, spec);
        out.binding = false;
    } else {
        out = joint_te_equality_weights(precision, mu, spec);
        out.binding = true;
        out.boundary_tie = (lhs == spec.omega);
    }
    out.blocks = blocks;
    out.regime_used = Regime::TEPlusInequalityWeight;
    return out;
}

/// Weight-only portfolio (no benchmark): maximizes mu'w - (Delta/2) w'Sigma w
/// subject to 1'w = 1 and 1_R'w = w_x, with kappa_w = 1'theta mu / Delta:
///
///   w_c = kappa_w (msr - a) + (w_x - kappa_w w_u) l + a - l (1_R'theta'1 / 1'theta'1)
template <typename Scalar>
PortfolioWeights<Scalar> weight_only_weights(const ReturnPrecision<Scalar>& precision,
                                             const VecArg<Scalar>& mu,
                                             const ConstraintSpec<Scalar>& spec) {
    const Scalar kappa_w = detail::kappa_w_of(spec);
    const auto blocks = restricted_blocks(precision, mu, spec.restricted);
    const auto d = detail::directions(precision, mu);
    const Index p = precision.theta.rows();
    const Vec<Scalar> ones_r = indicator<Scalar>(normalize_index_set(spec.restricted, p), p);
    const Scalar b2 = d.ones_theta_ones;
    const Scalar b3 = detail::checked_ratio_denominator(
        Scalar((precision.theta.transpose() * Vec<Scalar>::Ones(p)).dot(ones_r)), "1_R'theta'1");

    PortfolioWeights<Scalar> out;
    out.weights = kappa_w * (d.msr - blocks.a_hat) + (spec.w_x - kappa_w * blocks.w_u) * blocks.l_hat +
                  (blocks.a_hat - blocks.l_hat * (b3 / b2));
    out.active = out.weights;
    out.regime_used = Regime::WeightOnly;
    out.kappa_used = kappa_w;
    out.blocks = blocks;
    return out;
}

/// Fully invested mean-variance portfolio: w_n = kappa_w (msr - a) + a.
template <typename Scalar>
PortfolioWeights<Scalar> unconstrained_weights(const ReturnPrecision<Scalar>& precision,
                                               const VecArg<Scalar>& mu, Scalar kappa_w) {
    require(kappa_w >= Scalar(0), ErrorCode::InvalidInput, "kappa_w must be non-negative");
    const auto d = detail::directions(precision, mu);
    PortfolioWeights<Scalar> out;
    out.weights = kappa_w * (d.msr - d.gmv) + d.gmv;
    out.active = out.weights;
    out.regime_used = Regime::Unconstrained;
    out.kappa_used = kappa_w;
    return out;
}

/// A floor 1_R'w >= floor is a cap on the complement; the cap set and its
/// bound feed the inequality regime.
struct ShortSaleTransform {
    IndexSet capped;
    double omega = 1.0;
};

inline ShortSaleTransform short_sale_transform(const IndexSet& floored, Index p, double floor = 0.0) {
    const IndexSet r = normalize_index_set(floored, p);
    require(!r.empty(), ErrorCode::InvalidInput, "floor set must not be empty");
    if (static_cast<Index>(r.size()) >= p) {
        fail(ErrorCode::EmptyComplement, "floor set covers every asset");
    }
    return {complement(r, p), 1.0 - floor};
}

/// Risk tolerance consistent with a tracking-error budget:
/// kappa = TE / sqrt((msr - gmv)' Sigma (msr - gmv)).
template <typename Scalar>
Scalar estimate_kappa(const ReturnPrecision<Scalar>& precision, const VecArg<Scalar>& mu,
                      const Mat<Scalar>& sigma_y, Scalar target_te) {
    require(target_te > Scalar(0), ErrorCode::InvalidInput, "target TE must be positive");
    const Index p = precision.theta.rows();
    require(sigma_y.rows() == p && sigma_y.cols() == p, ErrorCode::DimensionMismatch,
            "sigma_y must be p x p");
    const auto d = detail::directions(precision, mu);
    const Vec<Scalar> diff = d.msr - d.gmv;
    const Scalar q = diff.dot(sigma_y * diff);
    if (!(q > Scalar(kDirectionTolerance))) {
        fail(ErrorCode::DegenerateDirection, "MSR and GMV directions coincide");
    }
    return target_te / std::sqrt(q);
}

/// Fills kappa from target_te when it is not supplied explicitly.
template <typename Scalar>
ConstraintSpec<Scalar> resolve_kappa(ConstraintSpec<Scalar> spec,
                                     const ReturnPrecision<Scalar>& precision,
                                     const VecArg<Scalar>& mu, const Mat<Scalar>* sigma_y) {
    if (spec.kappa) return spec;
    if (!spec.target_te || sigma_y == nullptr) {
        fail(ErrorCode::InvalidInput, "either kappa or a target TE with a covariance is required");
    }
    spec.kappa = estimate_kappa(precision, mu, *sigma_y, *spec.target_te);
    return spec;
}

/// Dispatches on spec.regime. `sigma_y` is consulted only to resolve kappa.
template <typename Scalar>
PortfolioWeights<Scalar> optimal_weights(const ReturnPrecision<Scalar>& precision,
                                         const VecArg<Scalar>& mu, const ConstraintSpec<Scalar>& input,
                                         const Mat<Scalar>* sigma_y = nullptr) {
    const bool needs_kappa = !(input.regime == Regime::WeightOnly && input.kappa_w) &&
                             !(input.regime == Regime::Unconstrained && input.kappa_w);
    const ConstraintSpec<Scalar> spec =
        needs_kappa ? resolve_kappa(input, precision, mu, sigma_y) : input;
    switch (spec.regime) {
        case Regime::TrackingError: return te_weights(precision, mu, spec);
        case Regime::TEPlusEqualityWeight: return joint_te_equality_weights(precision, mu, spec);
        case Regime::TEPlusInequalityWeight: return te_inequality_weights(precision, mu, spec);
        case Regime::WeightOnly: return weight_only_weights(precision, mu, spec);
        case Regime::Unconstrained:
            return unconstrained_weights(precision, mu, detail::kappa_w_of(spec));
        case Regime::ShortSaleGroup: {
            const auto t = short_sale_transform(spec.restricted, precision.theta.rows(),
                                                static_cast<double>(spec.floor));
            ConstraintSpec<Scalar> capped = spec;
            capped.restricted = t.capped;
            capped.omega = Scalar(t.omega);
            auto out = te_inequality_weights(precision, mu, capped);
            out.regime_used = Regime::ShortSaleGroup;
            return out;
        }
    }
    fail(ErrorCode::InvalidInput, "unknown regime");
}

}  // namespace crown
