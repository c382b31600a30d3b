#include "hdport/core/moments.hpp"

#include "hdport/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace hdp::core {

namespace {

constexpr double kNegativeEigenTolerance = 1e-10;
constexpr double kAspectRatioExclusion = 1e-6;

// Sorts a symmetric eigen-decomposition descending and clamps tiny
// negative eigenvalues. Throws if an eigenvalue is materially negative.
void finalize_spectrum(VectorXd& vals, const char* context) {
    const double top = vals.size() > 0 ? vals(0) : 0.0;
    for (Index i = 0; i < vals.size(); ++i) {
        if (vals(i) < 0.0) {
            if (vals(i) < -kNegativeEigenTolerance * std::max(top, 0.0)) {
                throw NumericError(std::string("negative eigenvalue in ") + context);
            }
            vals(i) = 0.0;
        }
    }
}

} // namespace

MomentEstimate estimate_moments(const ReturnPanel& panel, MomentOptions opts) {
    return estimate_moments(panel.values(), opts);
}

MomentEstimate estimate_moments(const MatrixXd& returns, MomentOptions opts) {
    const Index T = returns.rows();
    const Index N = returns.cols();
    if (T < 2) {
        throw InsufficientDataError("at least two periods are required to estimate moments, got " +
                                    std::to_string(T));
    }
    if (N < 1) {
        throw ValidationError("return matrix has no assets");
    }
    if (!returns.allFinite()) {
        throw ValidationError("return matrix contains non-finite values");
    }

    MomentEstimate m;
    m.n_obs = T;
    m.rank_used = std::min(T - 1, N);
    m.mean = returns.colwise().mean().transpose();
    const MatrixXd centered = returns.rowwise() - m.mean.transpose();
    const double scale = 1.0 / static_cast<double>(T - 1);

    if (N <= T) {
        MatrixXd cov = MatrixXd::Zero(N, N);
        cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), scale);
        cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
        if (es.info() != Eigen::Success) {
            throw NumericError("eigendecomposition of the sample covariance failed");
        }
        m.eigvals = es.eigenvalues().reverse();
        m.eigvecs = es.eigenvectors().rowwise().reverse();
        finalize_spectrum(m.eigvals, "sample covariance");
        if (opts.keep_covariance) m.cov = std::move(cov);
        return m;
    }

    // N > T: the nonzero spectrum is shared with the T x T Gram matrix.
    MatrixXd gram = MatrixXd::Zero(T, T);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(centered, scale);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
    if (es.info() != Eigen::Success) {
        throw NumericError("eigendecomposition of the Gram matrix failed");
    }
    VectorXd gvals = es.eigenvalues().reverse();
    const MatrixXd gvecs = es.eigenvectors().rowwise().reverse();
    finalize_spectrum(gvals, "Gram matrix");

    m.eigvals = VectorXd::Zero(N);
    m.eigvals.head(T) = gvals;
    const double threshold = gvals(0) * static_cast<double>(N) * std::numeric_limits<double>::epsilon();
    Index r = 0;
    while (r < T && gvals(r) > threshold) ++r;
    m.eigvecs.resize(N, r);
    if (r > 0) {
        m.eigvecs.noalias() = centered.transpose() * gvecs.leftCols(r);
        for (Index i = 0; i < r; ++i) {
            m.eigvecs.col(i) /= std::sqrt(static_cast<double>(T - 1) * gvals(i));
        }
    }
    if (opts.keep_covariance) {
        m.cov = MatrixXd::Zero(N, N);
        m.cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), scale);
        m.cov.triangularView<Eigen::StrictlyUpper>() = m.cov.transpose();
    }
    return m;
}

double rank_threshold(const MomentEstimate& m) {
    const double top = m.eigvals.size() > 0 ? m.eigvals(0) : 0.0;
    return top * static_cast<double>(m.dim()) * std::numeric_limits<double>::epsilon();
}

Index effective_rank(const MomentEstimate& m) {
    const double thr = rank_threshold(m);
    const Index limit = std::min(m.rank_used, m.eigvecs.cols());
    Index k = 0;
    while (k < limit && m.eigvals(k) > thr) ++k;
    return k;
}

MatrixXd pseudo_inverse(const MomentEstimate& m) {
    const Index k = effective_rank(m);
    if (k == 0) {
        throw DegenerateCovarianceError("sample covariance has no eigenvalue above the numerical rank threshold");
    }
    const auto V = m.eigvecs.leftCols(k);
    const VectorXd inv = m.eigvals.head(k).cwiseInverse();
    return V * inv.asDiagonal() * V.transpose();
}

VectorXd apply_pseudo_inverse(const MomentEstimate& m, const VectorXd& v) {
    const Index k = effective_rank(m);
    if (k == 0) {
        throw DegenerateCovarianceError("sample covariance has no eigenvalue above the numerical rank threshold");
    }
    const auto V = m.eigvecs.leftCols(k);
    const VectorXd coeff = (V.transpose() * v).cwiseQuotient(m.eigvals.head(k));
    return V * coeff;
}

VectorXd apply_covariance(const MomentEstimate& m, const VectorXd& v) {
    if (m.has_covariance()) return m.cov * v;
    const Index r = m.eigvecs.cols();
    const auto V = m.eigvecs.leftCols(r);
    const VectorXd coeff = (V.transpose() * v).cwiseProduct(m.eigvals.head(r));
    return V * coeff;
}

double sample_theta(const MomentEstimate& m) {
    return m.mean.dot(apply_pseudo_inverse(m, m.mean));
}

double theta_hat_from_sample(double theta_s, double rho_T, std::optional<double> phi_hat) {
    if (!(rho_T > 0.0) || !std::isfinite(rho_T)) {
        throw ValidationError("aspect ratio N/T must be positive and finite");
    }
    if (std::abs(rho_T - 1.0) < kAspectRatioExclusion) {
        throw UnsupportedAspectRatioError("theta estimator is undefined for N/T within 1e-6 of 1");
    }
    if (rho_T < 1.0) {
        return (1.0 - rho_T) * theta_s - rho_T;
    }
    const double phi = phi_hat.value_or(0.0);
    if (phi < 0.0 || !std::isfinite(phi)) {
        throw ValidationError("signal-to-noise estimate must be finite and non-negative");
    }
    const double a = phi + rho_T;
    const double b = phi + 1.0;
    return (a * a) / (b * b * rho_T) * ((rho_T - 1.0) * theta_s - 1.0);
}

double estimate_theta_hat(const MomentEstimate& m, double rho_T, std::optional<double> phi_hat) {
    return theta_hat_from_sample(sample_theta(m), rho_T, phi_hat);
}

double estimate_phi_hat(const MomentEstimate& m) {
    const Index N = m.dim();
    const Index T = m.n_obs;
    if (N < 2 || T < 3) {
        throw InsufficientDataError("signal-to-noise estimate needs N >= 2 and T >= 3");
    }
    const double top = m.eigvals(0);
    const double residual_trace = m.eigvals.sum() - top;
    if (!(residual_trace > static_cast<double>(N) * rank_threshold(m))) {
        throw DegenerateCovarianceError("residual variance after removing the leading component is zero");
    }
    // Columns of the centered data have zero mean, so the pooled residual
    // entries do too; their sum of squares is (T-1) * (trace - tau_1).
    const double ss = static_cast<double>(T - 1) * residual_trace;
    const double sigma_eps2 = ss / static_cast<double>(T * N - 1);
    return top / sigma_eps2;
}

} // namespace hdp::core
