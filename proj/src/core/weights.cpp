#include "hdport/core/weights.hpp"

#include "hdport/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace hdp::core {

Weights::Weights(VectorXd weights, double sigma) : w(std::move(weights)), risk_budget(sigma) {
    if (!w.allFinite()) throw NumericError("portfolio weights are not finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("risk budget must be positive");
}

PopulationModel::PopulationModel(VectorXd mu, MatrixXd sigma)
    : mu_(std::move(mu)), sigma_(std::move(sigma)) {
    if (sigma_.rows() != sigma_.cols() || sigma_.rows() != mu_.size()) {
        throw ValidationError("population mean and covariance dimensions disagree");
    }
    if (!mu_.allFinite() || !sigma_.allFinite()) {
        throw ValidationError("population moments must be finite");
    }
    if (!sigma_.isApprox(sigma_.transpose(), 1e-12)) {
        throw ValidationError("population covariance must be symmetric");
    }
    llt_.compute(sigma_);
    if (llt_.info() != Eigen::Success) {
        throw ValidationError("population covariance must be positive definite");
    }
}

VectorXd PopulationModel::solve(const VectorXd& v) const { return llt_.solve(v); }

double PopulationModel::theta() const { return mu_.dot(solve(mu_)); }

namespace {

PseudoinverseResult unnormalized(const VectorXd& direction, double theta_s, double theta_hat, double sigma) {
    if (!(theta_s > 0.0)) {
        throw ZeroSignalError("sample mean has no component in the estimated covariance range");
    }
    return {Weights(direction * (sigma / std::sqrt(theta_s)), sigma), theta_s, theta_hat, true};
}

} // namespace

PseudoinverseResult pseudoinverse_weights(const MomentEstimate& m, double sigma, std::optional<double> phi_hat,
                                          ThetaPolicy policy) {
    const VectorXd direction = apply_pseudo_inverse(m, m.mean);
    const double theta_s = m.mean.dot(direction);
    const double rho_T = static_cast<double>(m.dim()) / static_cast<double>(m.n_obs);

    double theta_hat = 0.0;
    try {
        theta_hat = theta_hat_from_sample(theta_s, rho_T, phi_hat);
    } catch (const UnsupportedAspectRatioError&) {
        if (policy == ThetaPolicy::Strict) throw;
        return unnormalized(direction, theta_s, std::nan(""), sigma);
    }
    if (!(theta_hat > 0.0)) {
        if (policy == ThetaPolicy::Strict) {
            throw NonPositiveThetaError("estimated squared Sharpe ratio is not positive", theta_hat);
        }
        return unnormalized(direction, theta_s, theta_hat, sigma);
    }
    return {Weights(direction * (sigma / std::sqrt(theta_hat)), sigma), theta_s, theta_hat, false};
}

PseudoinverseResult pseudoinverse_weights(const ReturnPanel& panel, double sigma, std::optional<double> phi_hat,
                                          ThetaPolicy policy) {
    return pseudoinverse_weights(estimate_moments(panel, {.keep_covariance = false}), sigma, phi_hat, policy);
}

Weights optimal_weights(const PopulationModel& pop, double sigma) {
    const VectorXd direction = pop.solve(pop.mu());
    const double theta = pop.mu().dot(direction);
    if (!(theta > 0.0)) throw ZeroSignalError("population mean is zero; optimal portfolio undefined");
    return Weights(direction * (sigma / std::sqrt(theta)), sigma);
}

Weights ridge_weights(const MomentEstimate& m, double lambda, double sigma) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("ridge penalty lambda must be positive and finite");
    const Index r = m.eigvecs.cols();
    const auto V = m.eigvecs.leftCols(r);
    const VectorXd proj = V.transpose() * m.mean;
    const VectorXd scaled = proj.array() / (m.eigvals.head(r).array() + lambda);
    // Component of mu_hat outside the stored eigenvectors sees eigenvalue 0.
    const VectorXd rest = m.mean - V * proj;
    const VectorXd x = V * scaled + rest / lambda;
    const double q = m.mean.dot(x);
    if (!(q > 0.0)) throw ZeroSignalError("sample mean is zero; ridge weights undefined");
    return Weights(x * (sigma / std::sqrt(q)), sigma);
}

Weights minvar_weights(const MomentEstimate& m) {
    const VectorXd ones = VectorXd::Ones(m.dim());
    const VectorXd x = apply_pseudo_inverse(m, ones);
    const double norm = ones.dot(x);
    const double scale = std::max(x.cwiseAbs().sum(), 1.0);
    if (!(std::abs(norm) > 1e-14 * scale)) {
        throw DegenerateCovarianceError("minimum-variance normalizer e' Sigma^+ e is zero");
    }
    // Risk budget is not meaningful for a sum-to-one portfolio; carry 1.
    return Weights(x / norm, 1.0);
}

Weights equal_weights(Index n, const MatrixXd* /*sigma_mat*/) {
    if (n < 1) throw ValidationError("equal weights need at least one asset");
    return Weights(VectorXd::Constant(n, 1.0 / static_cast<double>(n)), 1.0);
}

double oos_sharpe(const Weights& w, const PopulationModel& pop) {
    if (w.w.size() != pop.dim()) throw ValidationError("weight and population dimensions disagree");
    const double var = w.w.dot(pop.sigma() * w.w);
    if (!(var > 0.0)) throw NumericError("portfolio has zero risk; Sharpe ratio undefined");
    return w.w.dot(pop.mu()) / std::sqrt(var);
}

double oos_loss(const Weights& w, const PopulationModel& pop, double sigma) {
    if (w.w.size() != pop.dim()) throw ValidationError("weight and population dimensions disagree");
    const VectorXd diff = w.w - optimal_weights(pop, sigma).w;
    const double m = diff.dot(pop.mu());
    return diff.dot(pop.sigma() * diff) + m * m;
}

std::vector<EigenPortfolio> eigen_portfolio_decomposition(const PopulationModel& pop) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(pop.sigma());
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of population covariance failed");
    const Index n = pop.dim();
    std::vector<EigenPortfolio> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index i = n - 1; i >= 0; --i) {
        const double tau = es.eigenvalues()(i);
        const VectorXd v = es.eigenvectors().col(i);
        const double sr = v.dot(pop.mu()) / std::sqrt(tau);
        out.push_back({tau, sr, sr / std::sqrt(tau), v});
    }
    return out;
}

} // namespace hdp::core
