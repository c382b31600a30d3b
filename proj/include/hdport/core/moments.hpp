#pragma once

#include "hdport/core/panel.hpp"

#include <optional>

namespace hdp::core {

/**
 * Sample moments of a return window together with the spectral data the
 * pseudoinverse needs.
 *
 *  - mean:      column averages (N)
 *  - cov:       sample covariance with divisor T-1 (N x N); left empty when
 *               estimated with `keep_covariance = false`
 *  - eigvals:   all N eigenvalues of cov, descending, clamped at 0
 *  - eigvecs:   orthonormal eigenvectors for the leading eigvecs.cols()
 *               eigenvalues. When N >= T the remaining eigenvalues are exactly
 *               zero and their (arbitrary) null-space basis is not stored.
 *  - rank_used: K = min(T-1, N)
 *  - n_obs:     T
 */
struct MomentEstimate {
    VectorXd mean;
    MatrixXd cov;
    VectorXd eigvals;
    MatrixXd eigvecs;
    Index rank_used = 0;
    Index n_obs = 0;

    Index dim() const noexcept { return mean.size(); }
    bool has_covariance() const noexcept { return cov.size() > 0; }
};

struct MomentOptions {
    bool keep_covariance = true;
};

/// Throws InsufficientDataError for T < 2 and ValidationError for
/// non-finite input.
MomentEstimate estimate_moments(const ReturnPanel& panel, MomentOptions opts = {});
MomentEstimate estimate_moments(const MatrixXd& returns, MomentOptions opts = {});

/// Numerical rank cut: eigenvalues at or below this are treated as zero.
double rank_threshold(const MomentEstimate& m);

/// Number of eigenpairs entering the pseudoinverse (<= rank_used).
Index effective_rank(const MomentEstimate& m);

/// Sigma_hat^+ as a dense matrix. Throws DegenerateCovarianceError when no
/// eigenvalue clears the rank threshold.
MatrixXd pseudo_inverse(const MomentEstimate& m);

/// Sigma_hat^+ v without forming the matrix.
VectorXd apply_pseudo_inverse(const MomentEstimate& m, const VectorXd& v);

/// Sigma_hat v computed from the spectral factors.
VectorXd apply_covariance(const MomentEstimate& m, const VectorXd& v);

/// theta_s = mu_hat' Sigma_hat^+ mu_hat.
double sample_theta(const MomentEstimate& m);

/**
 * Bias-corrected squared Sharpe estimate.
 *
 *   rho_T < 1:  (1 - rho_T) theta_s - rho_T
 *   rho_T > 1:  (phi + rho_T)^2 / ((phi + 1)^2 rho_T) * ((rho_T - 1) theta_s - 1)
 *
 * with phi = 0 when `phi_hat` is empty. Throws UnsupportedAspectRatioError
 * when |rho_T - 1| < 1e-6.
 */
double estimate_theta_hat(const MomentEstimate& m, double rho_T, std::optional<double> phi_hat = std::nullopt);

/// Same estimator from a precomputed theta_s.
double theta_hat_from_sample(double theta_s, double rho_T, std::optional<double> phi_hat = std::nullopt);

/**
 * Signal-to-noise estimate tau_1(Sigma_hat) / sigma_eps^2 where sigma_eps^2
 * is the pooled variance (divisor T*N - 1) of the T x N residual matrix left
 * after projecting the centered returns off the leading eigenvector.
 */
double estimate_phi_hat(const MomentEstimate& m);

} // namespace hdp::core
