#pragma once

#include "hdport/core/moments.hpp"

#include <optional>
#include <vector>

namespace hdp::core {

/// Portfolio weights plus the risk budget they were built for.
struct Weights {
    VectorXd w;
    double risk_budget = 1.0;

    Weights(VectorXd weights, double sigma);
};

/// Population mean and (positive definite) covariance.
class PopulationModel {
public:
    PopulationModel(VectorXd mu, MatrixXd sigma);

    const VectorXd& mu() const noexcept { return mu_; }
    const MatrixXd& sigma() const noexcept { return sigma_; }
    Index dim() const noexcept { return mu_.size(); }

    /// Sigma^{-1} v via the cached Cholesky factor.
    VectorXd solve(const VectorXd& v) const;

    /// theta = mu' Sigma^{-1} mu.
    double theta() const;

private:
    VectorXd mu_;
    MatrixXd sigma_;
    Eigen::LLT<MatrixXd> llt_;
};

/// What pseudoinverse_weights does when the theta estimate is not positive.
enum class ThetaPolicy {
    Strict,       ///< throw NonPositiveThetaError
    Unnormalized  ///< fall back to sigma * Sigma^+ mu / sqrt(theta_s)
};

struct PseudoinverseResult {
    Weights weights;
    double theta_s = 0.0;
    double theta_hat = 0.0;
    bool fallback = false;  ///< unnormalized direction was used
};

/**
 * Pseudoinverse mean-variance estimator
 *   w = sigma / sqrt(theta_hat) * Sigma_hat^+ mu_hat
 * with theta_hat from estimate_theta_hat at rho_T = N/T.
 *
 * With ThetaPolicy::Unnormalized, a non-positive theta_hat or an aspect
 * ratio inside the exclusion window around 1 yields the direction scaled to
 * in-sample risk sigma (Sigma_hat^+ Sigma_hat Sigma_hat^+ = Sigma_hat^+, so
 * the in-sample variance of Sigma_hat^+ mu_hat is theta_s).
 */
PseudoinverseResult pseudoinverse_weights(const MomentEstimate& m, double sigma,
                                          std::optional<double> phi_hat = std::nullopt,
                                          ThetaPolicy policy = ThetaPolicy::Strict);

PseudoinverseResult pseudoinverse_weights(const ReturnPanel& panel, double sigma,
                                          std::optional<double> phi_hat = std::nullopt,
                                          ThetaPolicy policy = ThetaPolicy::Strict);

/**
 * Ridge-regularized estimator
 *   w = sigma * R mu_hat / sqrt(mu_hat' R mu_hat),  R = (Sigma_hat + lambda I)^{-1}.
 * Works from the spectral factors, so the null space of Sigma_hat (N > T)
 * contributes 1/lambda. Throws ValidationError for lambda <= 0.
 */
Weights ridge_weights(const MomentEstimate& m, double lambda, double sigma);

/// w* = sigma / sqrt(theta) * Sigma^{-1} mu. Throws ZeroSignalError for mu = 0.
Weights optimal_weights(const PopulationModel& pop, double sigma);

/// Sigma_hat^+ e / (e' Sigma_hat^+ e), summing to one.
Weights minvar_weights(const MomentEstimate& m);

/// e / N. The covariance argument is accepted for interface symmetry and
/// does not affect the result.
Weights equal_weights(Index n, const MatrixXd* sigma_mat = nullptr);

/// w'mu / sqrt(w' Sigma w). Throws NumericError for a zero-risk portfolio.
double oos_sharpe(const Weights& w, const PopulationModel& pop);

/// (w - w*)' (Sigma + mu mu') (w - w*) with w* = optimal_weights(pop, sigma).
double oos_loss(const Weights& w, const PopulationModel& pop, double sigma);

struct EigenPortfolio {
    double eigenvalue;   ///< tau_i
    double sharpe;       ///< v_i' mu / sqrt(tau_i)
    double loading;      ///< sharpe / sqrt(tau_i), the coefficient on v_i in Sigma^{-1} mu
    VectorXd direction;  ///< v_i
};

/// Principal-component decomposition of the optimal portfolio, eigenvalues
/// descending. Sum of squared sharpe equals theta.
std::vector<EigenPortfolio> eigen_portfolio_decomposition(const PopulationModel& pop);

} // namespace hdp::core
