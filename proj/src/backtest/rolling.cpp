#include "hdport/backtest/rolling.hpp"

#include "hdport/core/moments.hpp"
#include "hdport/core/weights.hpp"
#include "hdport/errors.hpp"
#include "hdport/montecarlo/seeding.hpp"
#include "hdport/util/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace hdp::backtest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0));
}

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::optional<double> phi_for(const core::MomentEstimate& m, Index window) {
    if (m.dim() <= window) return std::nullopt;
    try {
        return core::estimate_phi_hat(m);
    } catch (const NumericError&) {
        return std::nullopt;
    }
}

// Training-moment Sharpe ratio of w; NaN for zero in-sample risk.
double insample_sharpe(const core::MomentEstimate& m, const VectorXd& w) {
    const double var = w.dot(core::apply_covariance(m, w));
    if (!(var > 0.0)) return kNaN;
    return w.dot(m.mean) / std::sqrt(var);
}

struct RepOutcome {
    SeriesStats pinv;
    SeriesStats minvar;
    SeriesStats ew;
    double alpha = 0.0;
    double insample_sr = 0.0;
    int degenerate = 0;
    int fallback = 0;
};

} // namespace

void BacktestConfig::validate() const {
    if (window < 2) throw ValidationError("window must be at least 2");
    if (N_list.empty()) throw ValidationError("N_list is empty");
    for (Index n : N_list) {
        if (n < 1) throw ValidationError("every N must be positive");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be positive");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be non-negative");
    if (reps < 1) throw ValidationError("reps must be at least 1");
    if (!(periods_per_year >= 1.0)) throw ValidationError("periods_per_year must be at least 1");
    if (threads < 1) throw ValidationError("threads must be at least 1");
}

StrategySeries run_selection(const MatrixXd& returns, const BacktestConfig& cfg, InSampleMode insample,
                             bool keep_weights) {
    const Index T = returns.rows();
    const Index N = returns.cols();
    const Index W = cfg.window;
    if (T <= W) throw InsufficientDataError("need more periods than the window length");
    if (N < 1) throw ValidationError("selection is empty");

    const Index H = T - W;
    StrategySeries s;
    s.pinv = VectorXd::Zero(H);
    s.minvar = VectorXd::Zero(H);
    s.ew = VectorXd::Zero(H);
    const VectorXd ew = core::equal_weights(N).w;
    double insample_sum = 0.0;
    int insample_count = 0;

    for (Index k = 0; k < H; ++k) {
        const Index h = W + k;
        const auto m = core::estimate_moments(MatrixXd(returns.middleRows(h - W, W)), {.keep_covariance = false});
        const auto next = returns.row(h);

        VectorXd w = VectorXd::Zero(N);
        try {
            const auto res = core::pseudoinverse_weights(m, cfg.sigma, phi_for(m, W), core::ThetaPolicy::Unnormalized);
            w = res.weights.w;
            if (res.fallback) ++s.fallback_windows;
            if (insample == InSampleMode::PerWindow) {
                const double isr = insample_sharpe(m, w);
                if (std::isfinite(isr)) {
                    insample_sum += isr;
                    ++insample_count;
                }
            }
        } catch (const DegenerateCovarianceError&) {
            ++s.degenerate_windows;
        } catch (const ZeroSignalError&) {
            ++s.degenerate_windows;
        }
        s.pinv(k) = next.dot(w);

        try {
            s.minvar(k) = next.dot(core::minvar_weights(m).w);
        } catch (const DegenerateCovarianceError&) {
            ++s.minvar_degenerate;
        }
        s.ew(k) = next.dot(ew);
        if (keep_weights) s.pinv_weights.push_back(std::move(w));
    }

    if (insample == InSampleMode::PerWindow) {
        s.insample_sr = insample_count > 0 ? insample_sum / insample_count : kNaN;
    } else {
        const auto m = core::estimate_moments(returns, {.keep_covariance = false});
        try {
            const auto res = core::pseudoinverse_weights(m, cfg.sigma, phi_for(m, T), core::ThetaPolicy::Unnormalized);
            s.insample_sr = insample_sharpe(m, res.weights.w);
        } catch (const NumericError&) {
            s.insample_sr = kNaN;
        }
    }
    return s;
}

SeriesStats series_stats(const VectorXd& r, double gamma) {
    if (r.size() == 0) throw ValidationError("empty return series");
    SeriesStats st;
    st.avg = r.mean();
    st.std = std::sqrt((r.array() - st.avg).square().mean());
    st.sr = st.std > 0.0 ? st.avg / st.std : kNaN;
    st.cer = st.avg - 0.5 * gamma * st.std * st.std;
    return st;
}

double capm_alpha(const VectorXd& r, const VectorXd& m) {
    if (r.size() != m.size() || r.size() == 0) throw ValidationError("return and market series lengths differ");
    const double rm = r.mean();
    const double mm = m.mean();
    const double var = (m.array() - mm).square().sum();
    if (!(var > 0.0)) return rm;
    const double beta = ((r.array() - rm) * (m.array() - mm)).sum() / var;
    return rm - beta * mm;
}

std::vector<Index> draw_selection(const std::vector<Index>& universe, Index n, std::uint64_t seed, Index rep) {
    if (n < 1 || n > static_cast<Index>(universe.size())) {
        throw ValidationError("cannot select " + std::to_string(n) + " assets from a universe of " +
                              std::to_string(universe.size()));
    }
    auto rng = montecarlo::make_rng(montecarlo::derive_seed(seed, montecarlo::StreamTag::Selection,
                                                            static_cast<std::uint64_t>(n), 0.0,
                                                            static_cast<std::uint64_t>(rep)));
    std::vector<Index> pool = universe;
    // Partial Fisher-Yates.
    for (Index i = 0; i < n; ++i) {
        std::uniform_int_distribution<Index> pick(i, static_cast<Index>(pool.size()) - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(n));
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<MetricsRow> rolling_backtest(const AssetPanel& assets, const BacktestConfig& cfg) {
    cfg.validate();
    const Index T = assets.num_periods();
    if (T <= cfg.window) throw InsufficientDataError("need more periods than the window length");
    if (assets.market && assets.market->size() != T) throw ValidationError("market series length differs from panel");

    const auto universe = assets.complete_columns(0, T);
    for (Index n : cfg.N_list) {
        if (n > static_cast<Index>(universe.size())) {
            throw ValidationError("N = " + std::to_string(n) + " exceeds the " + std::to_string(universe.size()) +
                                  " assets observed in every period");
        }
    }

    const Index H = T - cfg.window;
    VectorXd market(H);
    const bool proxy = !assets.market.has_value();
    if (proxy) {
        for (Index k = 0; k < H; ++k) {
            double sum = 0.0;
            for (Index j : universe) sum += assets.values(cfg.window + k, j);
            market(k) = sum / static_cast<double>(universe.size());
        }
    } else {
        market = assets.market->tail(H);
    }

    const std::size_t reps = static_cast<std::size_t>(cfg.reps);
    std::vector<RepOutcome> outcomes(cfg.N_list.size() * reps);
    util::parallel_for(outcomes.size(), cfg.threads, [&](std::size_t idx) {
        const Index n = cfg.N_list[idx / reps];
        const Index rep = static_cast<Index>(idx % reps);
        const auto cols = draw_selection(universe, n, cfg.seed, rep);
        MatrixXd x(T, n);
        for (Index j = 0; j < n; ++j) x.col(j) = assets.values.col(cols[static_cast<std::size_t>(j)]);
        const auto s = run_selection(x, cfg, cfg.insample);
        RepOutcome& o = outcomes[idx];
        o.pinv = series_stats(s.pinv, cfg.gamma);
        o.minvar = series_stats(s.minvar, cfg.gamma);
        o.ew = series_stats(s.ew, cfg.gamma);
        o.alpha = capm_alpha(s.pinv, market);
        o.insample_sr = s.insample_sr;
        o.degenerate = s.degenerate_windows;
        o.fallback = s.fallback_windows;
    });

    std::vector<MetricsRow> rows;
    for (std::size_t i = 0; i < cfg.N_list.size(); ++i) {
        std::vector<double> sr, cer, avg, sd, alpha, mv_sr, mv_cer, ew_sr, ew_cer, is_sr;
        MetricsRow row;
        row.N = cfg.N_list[i];
        row.market_proxy = proxy;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto& o = outcomes[i * reps + r];
            sr.push_back(o.pinv.sr);
            cer.push_back(o.pinv.cer);
            avg.push_back(o.pinv.avg);
            sd.push_back(o.pinv.std);
            alpha.push_back(o.alpha);
            mv_sr.push_back(o.minvar.sr);
            mv_cer.push_back(o.minvar.cer);
            ew_sr.push_back(o.ew.sr);
            ew_cer.push_back(o.ew.cer);
            is_sr.push_back(o.insample_sr);
            row.degenerate_windows += o.degenerate;
            row.fallback_windows += o.fallback;
        }
        row.sr = mean_of(sr);
        row.cer = mean_of(cer);
        row.avg = mean_of(avg);
        row.std = mean_of(sd);
        row.capm_alpha = mean_of(alpha);
        row.minvar_sr = mean_of(mv_sr);
        row.minvar_cer = mean_of(mv_cer);
        row.ew_sr = mean_of(ew_sr);
        row.ew_cer = mean_of(ew_cer);
        row.insample_sr = mean_of(is_sr);
        row.sr_sd = sample_sd(sr);
        row.minvar_sr_sd = sample_sd(mv_sr);
        row.ew_sr_sd = sample_sd(ew_sr);
        rows.push_back(row);
    }
    return rows;
}

MetricsRow annualize(const MetricsRow& row, double periods_per_year) {
    if (!(periods_per_year >= 1.0)) throw ValidationError("periods_per_year must be at least 1");
    const double p = periods_per_year;
    const double rp = std::sqrt(p);
    MetricsRow a = row;
    a.sr *= rp;
    a.minvar_sr *= rp;
    a.ew_sr *= rp;
    a.insample_sr *= rp;
    a.sr_sd *= rp;
    a.minvar_sr_sd *= rp;
    a.ew_sr_sd *= rp;
    a.avg *= p;
    a.cer *= p;
    a.minvar_cer *= p;
    a.ew_cer *= p;
    a.capm_alpha *= p;
    a.std *= rp;
    a.annualized = true;
    return a;
}

io::Table metrics_table(const std::vector<MetricsRow>& rows) {
    io::Table t({"N", "sr", "cer", "avg", "std", "capm_alpha", "minvar_sr", "minvar_cer", "ew_sr", "ew_cer",
                 "insample_sr", "sr_sd", "minvar_sr_sd", "ew_sr_sd", "degenerate_windows", "fallback_windows",
                 "market_proxy", "annualized"});
    for (const auto& r : rows) {
        t.add_row({static_cast<long long>(r.N), r.sr, r.cer, r.avg, r.std, r.capm_alpha, r.minvar_sr, r.minvar_cer,
                   r.ew_sr, r.ew_cer, r.insample_sr, r.sr_sd, r.minvar_sr_sd, r.ew_sr_sd, r.degenerate_windows,
                   r.fallback_windows, static_cast<long long>(r.market_proxy), static_cast<long long>(r.annualized)});
    }
    return t;
}

} // namespace hdp::backtest
