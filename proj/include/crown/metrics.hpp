#pragma once

#include "crown/error.hpp"
#include "crown/types.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace crown {

inline constexpr double kNegativeFormTolerance = 1e-10;
inline constexpr double kZeroVariance = 1e-14;
inline constexpr Index kMinSharpeTestLength = 24;

template <typename Scalar = double>
struct PortfolioStats {
    Scalar te = 0;
    Scalar risk = 0;
    Scalar variance = 0;
    Scalar avg_return = 0;
    Scalar sharpe = 0;
};

template <typename Scalar = double>
struct EstimationErrors {
    Scalar weight_er = 0;
    Scalar risk_er = 0;
    Scalar sr_er = 0;
};

namespace detail {

template <typename Scalar>
Scalar quadratic_form(const Vec<Scalar>& x, const Mat<Scalar>& sigma) {
    require(sigma.rows() == x.size() && sigma.cols() == x.size(), ErrorCode::DimensionMismatch,
            "covariance and vector sizes disagree");
    const Scalar q = x.dot(sigma * x);
    if (q < -Scalar(kNegativeFormTolerance)) {
        fail(ErrorCode::NegativeQuadraticForm, "quadratic form is negative; covariance is not PSD");
    }
    return q < Scalar(0) ? Scalar(0) : q;
}

}  // namespace detail

/// sqrt((w - m)' Sigma (w - m)).
template <typename Scalar>
Scalar tracking_error(const Vec<Scalar>& w, const Vec<Scalar>& m, const Mat<Scalar>& sigma) {
    require(w.size() == m.size(), ErrorCode::DimensionMismatch, "w and m sizes disagree");
    return std::sqrt(detail::quadratic_form<Scalar>(w - m, sigma));
}

/// Population statistics of a fixed weight vector. `te` is left at zero;
/// use the overload with a benchmark to fill it.
template <typename Scalar>
PortfolioStats<Scalar> portfolio_stats(const Vec<Scalar>& w, const Vec<Scalar>& mu,
                                       const Mat<Scalar>& sigma) {
    require(mu.size() == w.size(), ErrorCode::DimensionMismatch, "w and mu sizes disagree");
    PortfolioStats<Scalar> s;
    s.variance = detail::quadratic_form<Scalar>(w, sigma);
    if (!(s.variance > Scalar(kZeroVariance))) fail(ErrorCode::ZeroRisk, "portfolio variance is zero");
    s.risk = std::sqrt(s.variance);
    s.avg_return = w.dot(mu);
    s.sharpe = s.avg_return / s.risk;
    return s;
}

template <typename Scalar>
PortfolioStats<Scalar> portfolio_stats(const Vec<Scalar>& w, const Vec<Scalar>& mu,
                                       const Mat<Scalar>& sigma, const Vec<Scalar>& benchmark) {
    auto s = portfolio_stats(w, mu, sigma);
    s.te = tracking_error(w, benchmark, sigma);
    return s;
}

/// ||w_hat - w*||_1, |w_hat'Sigma w_hat / w*'Sigma w* - 1| and |(SR_hat / SR*)^2 - 1|.
template <typename Scalar>
EstimationErrors<Scalar> estimation_errors(const Vec<Scalar>& w_hat, const Vec<Scalar>& w_star,
                                           const Vec<Scalar>& mu, const Mat<Scalar>& sigma) {
    require(w_hat.size() == w_star.size() && mu.size() == w_star.size(),
            ErrorCode::DimensionMismatch, "weight and mean sizes disagree");
    const Scalar var_star = detail::quadratic_form<Scalar>(w_star, sigma);
    if (!(var_star > Scalar(kZeroVariance))) {
        fail(ErrorCode::ZeroOracleRisk, "oracle portfolio variance is zero");
    }
    const Scalar sr_star = w_star.dot(mu) / std::sqrt(var_star);
    if (!(std::abs(sr_star) > Scalar(kZeroVariance))) {
        fail(ErrorCode::ZeroOracleSR, "oracle Sharpe ratio is zero");
    }
    const Scalar var_hat = detail::quadratic_form<Scalar>(w_hat, sigma);

    EstimationErrors<Scalar> e;
    e.weight_er = (w_hat - w_star).cwiseAbs().sum();
    e.risk_er = std::abs(var_hat / var_star - Scalar(1));
    if (var_hat > Scalar(0)) {
        const Scalar ratio = (w_hat.dot(mu) / std::sqrt(var_hat)) / sr_star;
        e.sr_er = std::abs(ratio * ratio - Scalar(1));
    } else {
        e.sr_er = Scalar(1);
    }
    return e;
}

template <typename Scalar = double>
struct BacktestSeries {
    Vec<Scalar> gross_returns;
    Vec<Scalar> net_returns;
    Mat<Scalar> weights_before;  // drifted, p x n
    Mat<Scalar> weights_after;   // rebalanced, p x n
};

/// Mean with 1/n and variance with 1/(n - 1) of an out-of-sample series.
template <typename Scalar>
PortfolioStats<Scalar> series_stats(const Vec<Scalar>& series) {
    const Index n = series.size();
    require(n >= 2, ErrorCode::AlignmentError, "at least two out-of-sample periods are required");
    PortfolioStats<Scalar> s;
    s.avg_return = series.mean();
    s.variance = (series.array() - s.avg_return).square().sum() / Scalar(n - 1);
    s.risk = std::sqrt(s.variance);
    s.sharpe = s.risk > Scalar(0) ? s.avg_return / s.risk : Scalar(0);
    return s;
}

/// Gross series w_t' y_{t+1}; column t of `weights` must already be aligned
/// with column t of `realized` (the return earned after rebalancing).
template <typename Scalar>
Vec<Scalar> realized_returns(const Mat<Scalar>& weights, const Mat<Scalar>& realized) {
    require(weights.rows() == realized.rows() && weights.cols() == realized.cols(),
            ErrorCode::AlignmentError, "weight and return sequences are misaligned");
    return (weights.array() * realized.array()).colwise().sum().transpose();
}

/// Out-of-sample series and its summary. With a benchmark sequence, `te` is
/// the standard deviation of the active return series.
template <typename Scalar>
std::pair<BacktestSeries<Scalar>, PortfolioStats<Scalar>> oos_evaluate(
    const Mat<Scalar>& weights, const Mat<Scalar>& realized,
    const Mat<Scalar>* benchmark_weights = nullptr) {
    BacktestSeries<Scalar> series;
    series.gross_returns = realized_returns(weights, realized);
    series.net_returns = series.gross_returns;
    series.weights_after = weights;
    auto stats = series_stats(series.gross_returns);
    if (benchmark_weights != nullptr) {
        const Vec<Scalar> bench = realized_returns(*benchmark_weights, realized);
        stats.te = series_stats<Scalar>(series.gross_returns - bench).risk;
    }
    return {std::move(series), stats};
}

/// Evolves post-rebalance weights through one period of asset returns.
template <typename Scalar>
Vec<Scalar> drift_weights(const Vec<Scalar>& w, const Vec<Scalar>& returns) {
    require(w.size() == returns.size(), ErrorCode::AlignmentError, "weights and returns disagree");
    const Vec<Scalar> grown = w.array() * (Scalar(1) + returns.array());
    const Scalar total = grown.sum();
    if (!(std::abs(total) > Scalar(1e-12))) {
        fail(ErrorCode::DegenerateDenominator, "drifted portfolio value is zero");
    }
    return grown / total;
}

/// Per-rebalance l1 trade sizes ||desired_t - drifted_t||_1.
template <typename Scalar>
Vec<Scalar> trade_sizes(const Mat<Scalar>& desired, const Mat<Scalar>& drifted) {
    require(desired.rows() == drifted.rows() && desired.cols() == drifted.cols(),
            ErrorCode::AlignmentError, "desired and drifted weights are misaligned");
    return (desired - drifted).cwiseAbs().colwise().sum().transpose();
}

/// Average l1 trade size across rebalances.
template <typename Scalar>
Scalar turnover(const Mat<Scalar>& desired, const Mat<Scalar>& drifted) {
    const Vec<Scalar> trades = trade_sizes(desired, drifted);
    require(trades.size() >= 1, ErrorCode::AlignmentError, "no rebalances to average");
    return trades.mean();
}

/// y_net = (1 - c * trade)(1 + y) - 1; periods with c == 0 or no trading are
/// copied through unchanged.
template <typename Scalar>
Vec<Scalar> net_of_cost(const Vec<Scalar>& gross, const Vec<Scalar>& trades, Scalar cost) {
    require(gross.size() == trades.size(), ErrorCode::AlignmentError,
            "return and trade series are misaligned");
    require(cost >= Scalar(0), ErrorCode::InvalidInput, "transaction cost must be non-negative");
    Vec<Scalar> net = gross;
    if (cost == Scalar(0)) return net;
    for (Index t = 0; t < gross.size(); ++t) {
        if (trades(t) == Scalar(0)) continue;
        net(t) = (Scalar(1) - cost * trades(t)) * (Scalar(1) + gross(t)) - Scalar(1);
    }
    return net;
}

struct SharpeTest {
    double statistic = 0;
    double p_value = 0.5;
    double difference = 0;
    double std_error = 0;
};

/// One-sided test of SR(a) > SR(b). Delta method on the moment vector
/// (mean_a, mean_b, E[a^2], E[b^2]) with a Bartlett-kernel HAC covariance,
/// lag floor(T^(1/3)).
inline SharpeTest sr_test(const VectorXd& a, const VectorXd& b) {
    require(a.size() == b.size(), ErrorCode::AlignmentError, "series lengths differ");
    const Index n = a.size();
    if (n < kMinSharpeTestLength) {
        fail(ErrorCode::SeriesTooShort, "Sharpe test needs at least 24 observations");
    }
    const double mu_a = a.mean();
    const double mu_b = b.mean();
    const double g_a = a.squaredNorm() / double(n);
    const double g_b = b.squaredNorm() / double(n);
    const double v_a = g_a - mu_a * mu_a;
    const double v_b = g_b - mu_b * mu_b;
    require(v_a > kZeroVariance && v_b > kZeroVariance, ErrorCode::ZeroRisk,
            "Sharpe test series has zero variance");

    SharpeTest out;
    out.difference = mu_a / std::sqrt(v_a) - mu_b / std::sqrt(v_b);
    if (out.difference == 0.0) return out;

    Eigen::Matrix<double, Eigen::Dynamic, 4> z(n, 4);
    z.col(0) = a.array() - mu_a;
    z.col(1) = b.array() - mu_b;
    z.col(2) = a.array().square() - g_a;
    z.col(3) = b.array().square() - g_b;

    const Index lag = static_cast<Index>(std::floor(std::cbrt(double(n)) + 1e-9));
    Eigen::Matrix4d psi = z.transpose() * z / double(n);
    for (Index j = 1; j <= lag; ++j) {
        const double weight = 1.0 - double(j) / double(lag + 1);
        const Eigen::Matrix4d gamma =
            z.bottomRows(n - j).transpose() * z.topRows(n - j) / double(n);
        psi += weight * (gamma + gamma.transpose());
    }

    Eigen::Vector4d grad;
    grad << g_a / std::pow(v_a, 1.5), -g_b / std::pow(v_b, 1.5), -mu_a / (2.0 * std::pow(v_a, 1.5)),
        mu_b / (2.0 * std::pow(v_b, 1.5));
    const double var = grad.dot(psi * grad) / double(n);
    out.std_error = var > 0.0 ? std::sqrt(var) : 0.0;
    if (out.std_error > 0.0) {
        out.statistic = out.difference / out.std_error;
    } else {
        out.statistic = out.difference > 0.0 ? INFINITY : -INFINITY;
    }
    out.p_value = 0.5 * std::erfc(out.statistic / std::sqrt(2.0));
    return out;
}

}  // namespace crown
