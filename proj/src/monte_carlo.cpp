#include "crown/error.hpp"
#include "crown/log.hpp"
#include "crown/metrics.hpp"
#include "crown/parallel.hpp"
#include "crown/precision.hpp"
#include "crown/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace crown {

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::Crown: return "CROWN";
        case Method::Oracle: return "Oracle";
        case Method::Index: return "Index";
        case Method::Ncon: return "NCON";
    }
    return "unknown";
}

const MonteCarloCell* MonteCarloReport::find(Method method, double te_level) const {
    for (const auto& c : cells) {
        if (c.method == method && std::abs(c.te_level - te_level) < 1e-12) return &c;
    }
    return nullptr;
}

namespace {

/// Neumaier compensated running sum.
struct CompensatedSum {
    double sum = 0;
    double carry = 0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + carry; }
};

CellAverages score(const VectorXd& w, const VectorXd& oracle, const VectorXd& benchmark,
                   const PopulationMoments& pop) {
    CellAverages s;
    const auto stats = portfolio_stats<double>(w, pop.mu, pop.sigma_y, benchmark);
    const auto err = estimation_errors<double>(w, oracle, pop.mu, pop.sigma_y);
    s.te = stats.te;
    s.weight_er = err.weight_er;
    s.risk_er = err.risk_er;
    s.sr_er = err.sr_er;
    s.sr = stats.sharpe;
    s.avg_return = stats.avg_return;
    s.risk = stats.risk;
    return s;
}

IndexSet default_restricted(Index p) {
    IndexSet r;
    const Index n = std::min<Index>(10, p - 1);
    for (Index i = 0; i < n; ++i) r.push_back(i);
    return r;
}

}  // namespace

ReplicationResult run_replication(const MonteCarloConfig& config, int replication) {
    ReplicationResult out;
    try {
        DGPSpec dgp = config.dgp;
        dgp.seed = replication_seed(config.seed, static_cast<std::uint64_t>(replication));
        if (config.loadings == LoadingsDraw::Fixed) dgp.loadings_seed = config.seed;
        const SimulatedPanel sim = simulate_panel(dgp);
        const PopulationMoments& pop = sim.moments;
        const Index p = dgp.p;
        const CrownEstimate est =
            estimate_crown(sim.returns.values, sim.factors.values, config.nodewise);
        const auto population = invert_population<double>(pop.sigma_y);
        const VectorXd& mu_hat =
            config.mean_source == MeanSource::Population ? pop.mu : est.mean;

        ConstraintSpec<double> base;
        base.regime = config.regime;
        base.restricted = config.restricted.empty() ? default_restricted(p) : config.restricted;
        base.omega = config.omega;
        base.w_x = config.w_x;
        base.floor = config.floor;
        base.benchmark = VectorXd::Constant(p, 1.0 / static_cast<double>(p));

        out.scores.resize(config.te_levels.size());
        for (std::size_t l = 0; l < config.te_levels.size(); ++l) {
            ConstraintSpec<double> spec = base;
            spec.target_te = config.te_levels[l];
            spec.kappa = estimate_kappa<double>(population, pop.mu, pop.sigma_y, config.te_levels[l]);
            const VectorXd oracle = optimal_weights<double>(population, pop.mu, spec).weights;

            auto& row = out.scores[l];
            row.resize(config.methods.size());
            for (std::size_t k = 0; k < config.methods.size(); ++k) {
                VectorXd w;
                switch (config.methods[k]) {
                    case Method::Crown:
                        w = optimal_weights<double>(est.precision, mu_hat, spec).weights;
                        break;
                    case Method::Oracle: w = oracle; break;
                    case Method::Index: w = base.benchmark; break;
                    case Method::Ncon:
                        w = unconstrained_weights<double>(est.precision, mu_hat, config.ncon_kappa)
                                .weights;
                        break;
                }
                row[k] = score(w, oracle, base.benchmark, pop);
            }
        }
        out.ok = true;
    } catch (const Error& e) {
        out.ok = false;
        out.message = e.what();
        out.scores.clear();
    }
    return out;
}

MonteCarloReport run_monte_carlo(const MonteCarloConfig& config) {
    require(config.reps >= 1, ErrorCode::InvalidInput, "reps must be at least 1");
    require(!config.te_levels.empty(), ErrorCode::InvalidInput, "no TE levels given");
    require(!config.methods.empty(), ErrorCode::InvalidInput, "no methods given");

    MonteCarloConfig local = config;
    // parallelism goes over replications; each nodewise run stays serial
    if (config.threads > 1) local.nodewise.threads = 1;

    std::vector<ReplicationResult> results(static_cast<std::size_t>(config.reps));
    parallel_for(results.size(), config.threads, [&](std::size_t r) {
        results[r] = run_replication(local, static_cast<int>(r));
        log::debug("replication {} {}", r, results[r].ok ? "done" : "failed");
    });

    MonteCarloReport report;
    report.p = config.dgp.p;
    report.T = config.dgp.T;
    report.regime = config.regime;
    report.mean_source = config.mean_source;
    report.loadings = config.loadings;
    report.seed = config.seed;
    report.reps = config.reps;
    int failures = 0;
    for (int r = 0; r < config.reps; ++r) {
        report.replication_seeds.push_back(replication_seed(config.seed, static_cast<std::uint64_t>(r)));
        if (!results[static_cast<std::size_t>(r)].ok) {
            ++failures;
            report.failure_messages.push_back("replication " + std::to_string(r) + ": " +
                                              results[static_cast<std::size_t>(r)].message);
            log::warn("replication {} excluded: {}", r, results[static_cast<std::size_t>(r)].message);
        }
    }
    const bool aborted =
        failures > 0 && static_cast<double>(failures) >
                            config.max_failure_fraction * static_cast<double>(config.reps);
    if (aborted) {
        log::error("{} of {} replications failed; cells aborted", failures, config.reps);
    }

    const int ok = config.reps - failures;
    for (std::size_t l = 0; l < config.te_levels.size(); ++l) {
        for (std::size_t k = 0; k < config.methods.size(); ++k) {
            MonteCarloCell cell;
            cell.method = config.methods[k];
            cell.te_level = config.te_levels[l];
            cell.replications = ok;
            cell.failures = failures;
            cell.aborted = aborted || ok == 0;
            if (!cell.aborted) {
                CompensatedSum te, wer, rer, ser, sr, ret, risk;
                for (const auto& res : results) {
                    if (!res.ok) continue;
                    const CellAverages& s = res.scores[l][k];
                    te.add(s.te);
                    wer.add(s.weight_er);
                    rer.add(s.risk_er);
                    ser.add(s.sr_er);
                    sr.add(s.sr);
                    ret.add(s.avg_return);
                    risk.add(s.risk);
                }
                const double n = static_cast<double>(ok);
                cell.mean = {te.value() / n,  wer.value() / n, rer.value() / n, ser.value() / n,
                             sr.value() / n,  ret.value() / n, risk.value() / n};
            }
            report.cells.push_back(cell);
        }
    }
    return report;
}

}  // namespace crown
