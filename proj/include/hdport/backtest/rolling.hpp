#pragma once

#include "hdport/backtest/sorted_portfolios.hpp"
#include "hdport/io/table.hpp"

#include <cstdint>
#include <vector>

namespace hdp::backtest {

enum class InSampleMode {
    PerWindow,   ///< average over windows of w'mu_hat / sqrt(w' Sigma_hat w) on training moments
    FullSample   ///< one fit on every period of the selection
};

struct BacktestConfig {
    Index window = 120;
    std::vector<Index> N_list;
    double sigma = 0.03;
    double gamma = 3.0;
    int reps = 1;
    std::uint64_t seed = 20240101;
    double periods_per_year = 12.0;
    InSampleMode insample = InSampleMode::PerWindow;
    int threads = 1;

    void validate() const;
};

/// Out-of-sample returns of the three strategies on one asset selection.
struct StrategySeries {
    VectorXd pinv;
    VectorXd minvar;
    VectorXd ew;
    double insample_sr = 0.0;
    int degenerate_windows = 0;  ///< pseudoinverse undefined; zero weights held
    int fallback_windows = 0;    ///< theta_hat <= 0 or N/T inside the excluded band
    int minvar_degenerate = 0;
    std::vector<VectorXd> pinv_weights;  ///< filled only when requested
};

/**
 * Runs the rolling protocol on a complete T x N return matrix: for each
 * h = window .. T-1, fit on rows h-window .. h-1 and earn row h.
 * phi_hat enters the theta correction whenever N > window.
 */
StrategySeries run_selection(const MatrixXd& returns, const BacktestConfig& cfg, InSampleMode insample,
                             bool keep_weights = false);

struct SeriesStats {
    double avg = 0.0;
    double std = 0.0;  ///< divisor n
    double sr = 0.0;   ///< avg / std, NaN when std == 0
    double cer = 0.0;  ///< avg - gamma/2 std^2
};

SeriesStats series_stats(const VectorXd& r, double gamma);

/// Intercept of the OLS regression of r on m (the mean of r if m is constant).
double capm_alpha(const VectorXd& r, const VectorXd& m);

struct MetricsRow {
    Index N = 0;
    double sr = 0.0;
    double cer = 0.0;
    double avg = 0.0;
    double std = 0.0;
    double capm_alpha = 0.0;
    double minvar_sr = 0.0;
    double minvar_cer = 0.0;
    double ew_sr = 0.0;
    double ew_cer = 0.0;
    double insample_sr = 0.0;
    // Dispersion over replications (sample SD; 0 for a single replication).
    double sr_sd = 0.0;
    double minvar_sr_sd = 0.0;
    double ew_sr_sd = 0.0;
    // Diagnostics summed over replications.
    long long degenerate_windows = 0;
    long long fallback_windows = 0;
    bool market_proxy = false;  ///< CAPM alpha used the equal-weighted asset average
    bool annualized = false;
};

/**
 * Replicated backtest. For each N and replication the N assets are drawn
 * once from the columns complete over the whole sample, with a seed
 * derived from (cfg.seed, N, replication), and held fixed across dates.
 * Rows are means over replications, ordered as cfg.N_list.
 */
std::vector<MetricsRow> rolling_backtest(const AssetPanel& assets, const BacktestConfig& cfg);

/// Seeded selection of n columns out of `universe`, returned sorted.
std::vector<Index> draw_selection(const std::vector<Index>& universe, Index n, std::uint64_t seed, Index rep);

/// SR columns times sqrt(ppy); avg, cer and alpha times ppy; std times sqrt(ppy).
MetricsRow annualize(const MetricsRow& row, double periods_per_year);

io::Table metrics_table(const std::vector<MetricsRow>& rows);

} // namespace hdp::backtest
