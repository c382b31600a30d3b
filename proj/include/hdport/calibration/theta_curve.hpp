#pragma once

#include "hdport/core/panel.hpp"

#include <map>
#include <optional>
#include <vector>

namespace hdp::calibration {

using core::Index;

/// sqrt(theta(N)) = s1 e^{-lambda (N-1)} + s_bar (1 - e^{-lambda (N-1)}).
struct ThetaCurveModel {
    double sqrt_theta1 = 0.5;
    double sqrt_theta_bar = 1.5;
    double lambda_speed = 0.03;

    /// Positive parameters with sqrt_theta_bar >= sqrt_theta1.
    void validate() const;
};

/// sqrt(theta(N)) for N >= 1.
double theta_curve(const ThetaCurveModel& model, double n);

struct Observation {
    Index N = 0;
    double sr = 0.0;
    std::optional<double> se;  ///< used only by the SE-weighted objective
};

enum class SrUnit { PerPeriod, Annualized };

struct FitOptions {
    Index T = 120;  ///< estimation window
    double phi = 0.0;
    std::map<Index, double> phi_per_N;  ///< overrides phi where present
    double sigma = 1.0;
    SrUnit unit = SrUnit::PerPeriod;
    double periods_per_year = 12.0;
    bool se_weighted = false;
    int max_iterations = 2000;
    double tolerance = 1e-10;
    int grid_points = 12;  ///< per parameter

    void validate() const;
};

struct FitPoint {
    Index N;
    double observed;
    double fitted;
};

/**
 * Parameters and SRs are reported in the caller's unit (`FitOptions::unit`);
 * for annualized input, sqrt_theta1 and sqrt_theta_bar are annualized too
 * while lambda_speed is per asset either way.
 */
struct CalibrationFit {
    ThetaCurveModel model;
    double sse = 0.0;  ///< unweighted sum of squared residuals over `points`
    double objective = 0.0;  ///< value the optimizer minimized
    std::vector<FitPoint> points;  ///< ascending N
    std::vector<Index> dropped;    ///< N with N/T inside the excluded band around 1
    bool converged = false;
    int iterations = 0;
};

/// Model-implied out-of-sample SR at N (caller's unit).
double implied_sr(const ThetaCurveModel& model, Index n, const FitOptions& opts);

/// Objective (SSE, or SE-weighted SSE) at a model, over usable observations.
double calibration_objective(const ThetaCurveModel& model, const std::vector<Observation>& obs, const FitOptions& opts);

/// Coarse log grid scanned before refinement.
std::vector<ThetaCurveModel> coarse_grid(const std::vector<Observation>& obs, const FitOptions& opts);

/**
 * Least-squares fit through the single-factor SR limit. Needs at least four
 * usable points (after dropping N/T within 1e-6 of 1). Deterministic and
 * independent of input order.
 */
CalibrationFit fit_theta_curve(std::vector<Observation> observed, const FitOptions& opts);

} // namespace hdp::calibration
