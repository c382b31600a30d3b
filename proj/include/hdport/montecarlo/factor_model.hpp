#pragma once

#include "hdport/core/panel.hpp"
#include "hdport/core/weights.hpp"
#include "hdport/montecarlo/seeding.hpp"

namespace hdp::montecarlo {

using core::Index;
using core::MatrixXd;
using core::VectorXd;

/**
 * Single-factor return generator r_t = b mu_f + b sigma_f z_t + sigma_eps y_t.
 *
 * Population moments are mu = b mu_f and Sigma = sigma_f^2 b b' + sigma_eps^2 I;
 * the helpers below use that structure (Sherman-Morrison for the inverse)
 * and never form Sigma unless asked.
 */
struct FactorSpec {
    VectorXd b;
    double mu_f = 0.0;
    double sigma_f = 0.0;
    double sigma_eps = 1.0;

    Index dim() const noexcept { return b.size(); }
    VectorXd mean() const { return b * mu_f; }
    MatrixXd covariance() const;
    /// mu_f^2 |b|^2 / (sigma_eps^2 + sigma_f^2 |b|^2).
    double theta() const;
    /// sigma_f^2 |b|^2 / sigma_eps^2.
    double phi() const;
    VectorXd apply_covariance(const VectorXd& v) const;
    VectorXd solve(const VectorXd& v) const;
    core::PopulationModel population() const;
};

enum class Innovation {
    Gaussian,
    StudentT  ///< t with 8 degrees of freedom scaled to unit variance
};

/// Normalized Gaussian loading direction, sigma_eps = 1, sigma_f = sqrt(phi),
/// mu_f = sqrt(theta (1 + phi)). Throws ValidationError for theta <= 0 or phi < 0.
FactorSpec make_factor_spec(Index n, double theta_target, double phi, Rng& rng);

/// Same construction from a given direction (rescaled to unit norm).
FactorSpec make_factor_spec(const VectorXd& direction, double theta_target, double phi);

/// T x N draw; row t consumes z_t then y_t from the generator.
MatrixXd generate_return_matrix(const FactorSpec& spec, Index T, Rng& rng, Innovation kind = Innovation::Gaussian);

core::ReturnPanel generate_returns(const FactorSpec& spec, Index T, Rng& rng, Innovation kind = Innovation::Gaussian);

/// w'mu / sqrt(w' Sigma w) using the factor structure.
double factor_sharpe(const FactorSpec& spec, const VectorXd& w);

/// (w - w*)' Sigma (w - w*) + (mu'(w - w*))^2 with w* = sigma Sigma^{-1} mu / sqrt(theta).
double factor_loss(const FactorSpec& spec, const VectorXd& w, double sigma);

} // namespace hdp::montecarlo
