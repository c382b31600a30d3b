#include "hdport/montecarlo/sweep.hpp"

#include "hdport/asymptotics/limits.hpp"
#include "hdport/core/moments.hpp"
#include "hdport/errors.hpp"
#include "hdport/util/parallel.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace hdp::montecarlo {

namespace {

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<RepResult>& reps, double RepResult::*field) {
    const double n = static_cast<double>(reps.size());
    double sum = 0.0;
    for (const auto& r : reps) sum += r.*field;
    const double mean = sum / n;
    if (reps.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (const auto& r : reps) {
        const double d = r.*field - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

FactorSpec cell_spec(const SweepConfig& cfg, Index n, double phi) {
    auto rng = make_rng(derive_seed(cfg.seed, StreamTag::Loadings, static_cast<std::uint64_t>(n), phi, 0));
    return make_factor_spec(n, cfg.theta_of_N(n), phi, rng);
}

} // namespace

double ThetaOfN::operator()(Index n) const {
    return kind == Kind::Constant ? value : asymptotics::theta_schedule(static_cast<double>(n));
}

void SweepConfig::validate() const {
    if (T < 2) throw ValidationError("T must be at least 2");
    if (reps < 1) throw ValidationError("reps must be at least 1");
    if (N_list.empty()) throw ValidationError("N_list is empty");
    if (phi_list.empty()) throw ValidationError("phi_list is empty");
    for (Index n : N_list) {
        if (n < 2) throw ValidationError("every N must be at least 2");
    }
    for (double p : phi_list) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("every phi must be finite and non-negative");
    }
    if (theta_of_N.kind == ThetaOfN::Kind::Constant && !(theta_of_N.value > 0.0)) {
        throw ValidationError("constant theta must be positive");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be positive");
    if (threads < 1) throw ValidationError("threads must be at least 1");
}

RepResult run_replication(const SweepConfig& cfg, Index n, double phi, int rep) {
    auto rng = make_rng(derive_seed(cfg.seed, StreamTag::Replication, static_cast<std::uint64_t>(n), phi,
                                    static_cast<std::uint64_t>(rep)));
    const FactorSpec spec = cfg.redraw_loadings ? make_factor_spec(n, cfg.theta_of_N(n), phi, rng)
                                                : cell_spec(cfg, n, phi);
    const MatrixXd x = generate_return_matrix(spec, cfg.T, rng, cfg.innovation);
    const auto m = core::estimate_moments(x, {.keep_covariance = false});

    std::optional<double> phi_used;
    switch (cfg.phi_source) {
    case PhiSource::True:
        phi_used = spec.phi();
        break;
    case PhiSource::Estimated:
        if (n > cfg.T) {
            try {
                phi_used = core::estimate_phi_hat(m);
            } catch (const NumericError&) {
                phi_used.reset();
            }
        }
        break;
    case PhiSource::None:
        break;
    }

    const auto res = core::pseudoinverse_weights(m, cfg.sigma, phi_used, core::ThetaPolicy::Unnormalized);
    RepResult out;
    out.sr = factor_sharpe(spec, res.weights.w);
    out.loss = factor_loss(spec, res.weights.w, cfg.sigma);
    out.theta_hat = res.theta_hat;
    out.fallback = res.fallback;
    return out;
}

std::vector<RepResult> run_cell_reps(const SweepConfig& cfg, Index n, double phi) {
    cfg.validate();
    std::vector<RepResult> reps(static_cast<std::size_t>(cfg.reps));
    util::parallel_for(reps.size(), cfg.threads,
                       [&](std::size_t i) { reps[i] = run_replication(cfg, n, phi, static_cast<int>(i)); });
    return reps;
}

SweepRow summarize_cell(const SweepConfig& cfg, Index n, double phi, const std::vector<RepResult>& reps) {
    if (reps.empty()) throw ValidationError("no replications to summarize");
    SweepRow row;
    row.N = n;
    row.phi = phi;
    row.rho = static_cast<double>(n) / static_cast<double>(cfg.T);
    const auto sr = mean_se(reps, &RepResult::sr);
    const auto loss = mean_se(reps, &RepResult::loss);
    row.avg_sr = sr.mean;
    row.se_sr = sr.se;
    row.avg_loss = loss.mean;
    row.se_loss = loss.se;
    for (const auto& r : reps) row.fallback_count += r.fallback ? 1 : 0;

    const asymptotics::LimitInputs in{cfg.theta_of_N(n), phi, row.rho, cfg.sigma};
    if (std::abs(row.rho - 1.0) < 1e-6) {
        row.asy_sr = row.asy_loss = std::numeric_limits<double>::quiet_NaN();
    } else {
        row.asy_sr = asymptotics::sr_limit_factor(in);
        row.asy_loss = asymptotics::loss_limit_factor(in);
    }
    return row;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const std::size_t cells = cfg.N_list.size() * cfg.phi_list.size();
    const std::size_t per_cell = static_cast<std::size_t>(cfg.reps);
    std::vector<RepResult> all(cells * per_cell);

    // Flatten (cell, rep) so small grids still spread across workers.
    util::parallel_for(all.size(), cfg.threads, [&](std::size_t k) {
        const std::size_t cell = k / per_cell;
        const Index n = cfg.N_list[cell / cfg.phi_list.size()];
        const double phi = cfg.phi_list[cell % cfg.phi_list.size()];
        all[k] = run_replication(cfg, n, phi, static_cast<int>(k % per_cell));
    });

    std::vector<SweepRow> rows;
    rows.reserve(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const Index n = cfg.N_list[cell / cfg.phi_list.size()];
        const double phi = cfg.phi_list[cell % cfg.phi_list.size()];
        std::vector<RepResult> reps(all.begin() + static_cast<std::ptrdiff_t>(cell * per_cell),
                                    all.begin() + static_cast<std::ptrdiff_t>((cell + 1) * per_cell));
        rows.push_back(summarize_cell(cfg, n, phi, reps));
    }
    return rows;
}

io::Table sweep_table(const std::vector<SweepRow>& rows) {
    io::Table t({"N", "phi", "rho", "avg_sr", "se_sr", "avg_loss", "se_loss", "asy_sr", "asy_loss", "fallback_count"});
    for (const auto& r : rows) {
        t.add_row({static_cast<long long>(r.N), r.phi, r.rho, r.avg_sr, r.se_sr, r.avg_loss, r.se_loss, r.asy_sr,
                   r.asy_loss, static_cast<long long>(r.fallback_count)});
    }
    return t;
}

} // namespace hdp::montecarlo
