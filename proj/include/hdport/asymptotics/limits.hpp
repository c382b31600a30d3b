#pragma once

namespace hdp::asymptotics {

/**
 * Parameters indexing the high-dimensional limits: squared clairvoyant
 * Sharpe ratio theta (per period), factor signal-to-noise ratio phi, limiting
 * aspect ratio rho = lim N/T, and risk budget sigma.
 */
struct LimitInputs {
    double theta_tilde = 1.0;
    double phi_tilde = 0.0;
    double rho = 0.5;
    double sigma = 1.0;

    /// Throws ValidationError (or UnsupportedAspectRatioError for
    /// |rho - 1| < 1e-6).
    void validate() const;
};

/// Out-of-sample Sharpe limit, uncorrelated assets.
double sr_limit_factorless(const LimitInputs& in);

/// Out-of-sample prediction-loss limit, uncorrelated assets.
double loss_limit_factorless(const LimitInputs& in);

/// Sharpe limit under the single-factor model. Below rho = 1 it coincides
/// with the factorless value.
double sr_limit_factor(const LimitInputs& in);

/// Prediction-loss limit under the single-factor model.
double loss_limit_factor(const LimitInputs& in);

struct MeanSd {
    double mean;
    double sd;
};

/// Limits of the mean and standard deviation of the out-of-sample return.
MeanSd mean_sd_limit(const LimitInputs& in);

/// theta(N) = 1 + 15 (1 - exp(-0.05 N)).
double theta_schedule(double n);

} // namespace hdp::asymptotics
