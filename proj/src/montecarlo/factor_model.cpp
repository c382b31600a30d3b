#include "hdport/montecarlo/factor_model.hpp"

#include "hdport/errors.hpp"

#include <cmath>

namespace hdp::montecarlo {

MatrixXd FactorSpec::covariance() const {
    MatrixXd s = (sigma_f * sigma_f) * b * b.transpose();
    s.diagonal().array() += sigma_eps * sigma_eps;
    return s;
}

double FactorSpec::theta() const {
    const double bb = b.squaredNorm();
    return mu_f * mu_f * bb / (sigma_eps * sigma_eps + sigma_f * sigma_f * bb);
}

double FactorSpec::phi() const {
    return sigma_f * sigma_f * b.squaredNorm() / (sigma_eps * sigma_eps);
}

VectorXd FactorSpec::apply_covariance(const VectorXd& v) const {
    return b * (sigma_f * sigma_f * b.dot(v)) + v * (sigma_eps * sigma_eps);
}

VectorXd FactorSpec::solve(const VectorXd& v) const {
    const double e2 = sigma_eps * sigma_eps;
    const double f2 = sigma_f * sigma_f;
    const double k = f2 * b.dot(v) / (e2 + f2 * b.squaredNorm());
    return (v - b * k) / e2;
}

core::PopulationModel FactorSpec::population() const {
    return core::PopulationModel(mean(), covariance());
}

FactorSpec make_factor_spec(const VectorXd& direction, double theta_target, double phi) {
    if (!(theta_target > 0.0) || !std::isfinite(theta_target)) throw ValidationError("target theta must be positive");
    if (!(phi >= 0.0) || !std::isfinite(phi)) throw ValidationError("phi must be finite and non-negative");
    const double norm = direction.norm();
    if (!(norm > 0.0)) throw ValidationError("loading direction must be nonzero");
    FactorSpec spec;
    spec.b = direction / norm;
    spec.sigma_eps = 1.0;
    spec.sigma_f = std::sqrt(phi);
    spec.mu_f = std::sqrt(theta_target * (1.0 + phi));
    return spec;
}

FactorSpec make_factor_spec(Index n, double theta_target, double phi, Rng& rng) {
    if (n < 1) throw ValidationError("asset count must be positive");
    std::normal_distribution<double> nd;
    VectorXd dir(n);
    for (Index i = 0; i < n; ++i) dir(i) = nd(rng);
    return make_factor_spec(dir, theta_target, phi);
}

MatrixXd generate_return_matrix(const FactorSpec& spec, Index T, Rng& rng, Innovation kind) {
    if (T < 2) throw InsufficientDataError("need at least two periods");
    const Index n = spec.dim();
    std::normal_distribution<double> nd;
    constexpr double df = 8.0;
    std::student_t_distribution<double> td(df);
    const double t_scale = std::sqrt((df - 2.0) / df);
    auto draw = [&]() {
        return kind == Innovation::Gaussian ? nd(rng) : td(rng) * t_scale;
    };

    MatrixXd r(T, n);
    const VectorXd base = spec.mean();
    for (Index t = 0; t < T; ++t) {
        const double z = draw();
        for (Index i = 0; i < n; ++i) {
            r(t, i) = base(i) + spec.b(i) * spec.sigma_f * z + spec.sigma_eps * draw();
        }
    }
    return r;
}

core::ReturnPanel generate_returns(const FactorSpec& spec, Index T, Rng& rng, Innovation kind) {
    return core::ReturnPanel::from_matrix(generate_return_matrix(spec, T, rng, kind));
}

double factor_sharpe(const FactorSpec& spec, const VectorXd& w) {
    if (w.size() != spec.dim()) throw ValidationError("weight and model dimensions disagree");
    const double var = w.dot(spec.apply_covariance(w));
    if (!(var > 0.0)) throw NumericError("portfolio has zero risk; Sharpe ratio undefined");
    return w.dot(spec.mean()) / std::sqrt(var);
}

double factor_loss(const FactorSpec& spec, const VectorXd& w, double sigma) {
    if (w.size() != spec.dim()) throw ValidationError("weight and model dimensions disagree");
    const VectorXd mu = spec.mean();
    const double th = spec.theta();
    if (!(th > 0.0)) throw ZeroSignalError("population mean is zero; optimal weights undefined");
    const VectorXd diff = w - spec.solve(mu) * (sigma / std::sqrt(th));
    const double m = diff.dot(mu);
    return diff.dot(spec.apply_covariance(diff)) + m * m;
}

} // namespace hdp::montecarlo
