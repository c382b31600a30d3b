#pragma once

#include "hdport/io/table.hpp"
#include "hdport/montecarlo/factor_model.hpp"

#include <cstdint>
#include <vector>

namespace hdp::montecarlo {

/// Squared clairvoyant Sharpe ratio as a function of N: a constant or the
/// saturating schedule 1 + 15 (1 - exp(-0.05 N)).
struct ThetaOfN {
    enum class Kind { Constant, Schedule };
    Kind kind = Kind::Schedule;
    double value = 1.0;  ///< used when kind == Constant

    static ThetaOfN constant(double theta) { return {Kind::Constant, theta}; }
    static ThetaOfN schedule() { return {Kind::Schedule, 1.0}; }
    double operator()(Index n) const;
};

/// Which phi feeds the theta bias correction for N > T.
enum class PhiSource {
    True,       ///< the generating phi, known to the harness
    Estimated,  ///< core::estimate_phi_hat on each sample
    None        ///< factorless correction (phi = 0)
};

struct SweepConfig {
    Index T = 100;
    std::vector<Index> N_list;
    std::vector<double> phi_list;
    ThetaOfN theta_of_N = ThetaOfN::schedule();
    int reps = 100;
    std::uint64_t seed = 20240101;
    double sigma = 1.0;
    Innovation innovation = Innovation::Gaussian;
    PhiSource phi_source = PhiSource::True;
    bool redraw_loadings = false;  ///< new b per replication instead of per cell
    int threads = 1;

    void validate() const;
};

struct RepResult {
    double sr = 0.0;
    double loss = 0.0;
    double theta_hat = 0.0;
    bool fallback = false;
};

struct SweepRow {
    Index N = 0;
    double phi = 0.0;
    double rho = 0.0;
    double avg_sr = 0.0;
    double se_sr = 0.0;
    double avg_loss = 0.0;
    double se_loss = 0.0;
    double asy_sr = 0.0;    ///< NaN inside |rho - 1| < 1e-6
    double asy_loss = 0.0;  ///< NaN inside |rho - 1| < 1e-6
    int fallback_count = 0;
};

/// One replication of cell (N, phi). Deterministic in (cfg.seed, N, phi, rep).
RepResult run_replication(const SweepConfig& cfg, Index n, double phi, int rep);

/// All replications of one cell, reduced in rep order.
std::vector<RepResult> run_cell_reps(const SweepConfig& cfg, Index n, double phi);

SweepRow summarize_cell(const SweepConfig& cfg, Index n, double phi, const std::vector<RepResult>& reps);

/// Rows ordered by N_list, then phi_list.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

/// Columns N, phi, rho, avg_sr, se_sr, avg_loss, se_loss, asy_sr, asy_loss, fallback_count.
io::Table sweep_table(const std::vector<SweepRow>& rows);

} // namespace hdp::montecarlo
