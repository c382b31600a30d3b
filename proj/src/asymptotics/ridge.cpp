#include "hdport/asymptotics/ridge.hpp"

#include "hdport/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace hdp::asymptotics {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kDamping = 0.5;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

void check_solver_args(double rho, double lambda) {
    if (!finite_positive(rho)) throw ValidationError("rho must be positive and finite");
    if (!finite_positive(lambda)) throw ValidationError("ridge penalty lambda must be positive and finite");
}

// e(m) = 1 - rho + rho lambda m, the scale on Sigma in the deterministic
// equivalent (Sigma_hat + lambda I)^{-1} ~ (lambda I + e Sigma)^{-1}.
double scale_e(double rho, double lambda, double m) { return 1.0 - rho + rho * lambda * m; }

double rhs(const SpectralMeasure& H, double rho, double lambda, double m) {
    const double e = scale_e(rho, lambda, m);
    return H.integrate([&](double t) { return 1.0 / (e * t + lambda); });
}

double relative_residual(const SpectralMeasure& H, double rho, double lambda, double m) {
    return std::abs(m - rhs(H, rho, lambda, m)) / std::max(1.0, std::abs(m));
}

} // namespace

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ValidationError("spectral measure needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!finite_positive(a.location)) throw ValidationError("spectral atoms must sit on (0, inf)");
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw ValidationError("spectral weights must be non-negative");
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("spectral weights sum to " + std::to_string(total) + ", expected 1");
    }
    std::stable_sort(atoms_.begin(), atoms_.end(),
                     [](const Atom& a, const Atom& b) { return a.location < b.location; });
}

SpectralMeasure SpectralMeasure::point_mass(double location) {
    return SpectralMeasure({{location, 1.0}});
}

SpectralMeasure SpectralMeasure::population(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) throw ValidationError("covariance must be square and non-empty");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    const auto n = sigma.rows();
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(n));
    // Accumulate with a correction so the weights sum to 1 exactly enough.
    double used = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = i + 1 == n ? 1.0 - used : 1.0 / static_cast<double>(n);
        used += w;
        atoms.push_back({es.eigenvalues()(i), w});
    }
    return SpectralMeasure(std::move(atoms));
}

SpectralMeasure SpectralMeasure::mean_reweighted(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu) {
    if (sigma.rows() == 0 || sigma.rows() != sigma.cols() || mu.size() != sigma.rows()) {
        throw ValidationError("covariance and mean dimensions disagree");
    }
    const double norm2 = mu.squaredNorm();
    if (!(norm2 > 0.0)) throw ValidationError("mean vector must be nonzero");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const Eigen::VectorXd proj = es.eigenvectors().transpose() * mu;
    std::vector<Atom> atoms;
    double total = 0.0;
    for (Eigen::Index i = 0; i < proj.size(); ++i) {
        atoms.push_back({es.eigenvalues()(i), proj(i) * proj(i) / norm2});
        total += atoms.back().weight;
    }
    for (auto& a : atoms) a.weight /= total;
    return SpectralMeasure(std::move(atoms));
}

double SpectralMeasure::mean() const {
    return integrate([](double t) { return t; });
}

StieltjesSolution mp_stieltjes(const SpectralMeasure& H, double rho, double lambda) {
    check_solver_args(rho, lambda);

    // Companion transform u = rho m + (1 - rho)/lambda, the Stieltjes transform
    // of the T x T Gram spectrum, satisfies u = 1/(lambda + rho int tau/(1 + tau u) dH).
    // The map is a contraction on u > 0, unlike the direct form for rho > 1.
    const double m0 = 1.0 / (lambda + H.mean());
    double u = std::max(rho * m0 + (1.0 - rho) / lambda, 1.0 / (lambda + rho * H.mean()));
    int it = 0;
    for (; it < kMaxIterations; ++it) {
        const double g = H.integrate([&](double t) { return t / (1.0 + t * u); });
        const double next = (1.0 - kDamping) * u + kDamping / (lambda + rho * g);
        const double step = std::abs(next - u);
        u = next;
        if (step <= 1e-15 * std::max(1.0, u)) break;
    }
    if (it == kMaxIterations) throw SolverError("Stieltjes fixed point did not converge in 10^4 iterations");

    double m = (u - (1.0 - rho) / lambda) / rho;
    if (!(m > 0.0) || scale_e(rho, lambda, m) <= 0.0) m = m0;

    // Newton polish on F(m) = m - int dH/(e(m) tau + lambda), guarding e > 0.
    for (int k = 0; k < 100 && it < kMaxIterations; ++k, ++it) {
        const double e = scale_e(rho, lambda, m);
        double f = m;
        double df = 1.0;
        for (const auto& a : H.atoms()) {
            const double d = e * a.location + lambda;
            f -= a.weight / d;
            df += a.weight * rho * lambda * a.location / (d * d);
        }
        if (std::abs(f) / std::max(1.0, std::abs(m)) < 1e-15) break;
        double step = f / df;
        while (scale_e(rho, lambda, m - step) <= 0.0 || m - step <= 0.0) step *= 0.5;
        if (step == 0.0) break;
        m -= step;
    }

    const double res = relative_residual(H, rho, lambda, m);
    if (!(res < 1e-12)) {
        throw SolverError("Stieltjes solution residual " + std::to_string(res) + " exceeds 1e-12");
    }
    return {m, res, it};
}

double mp_stieltjes_derivative(const SpectralMeasure& H, double rho, double lambda, double m) {
    check_solver_args(rho, lambda);
    const double e = scale_e(rho, lambda, m);
    double num = 0.0;
    double den = 1.0;
    for (const auto& a : H.atoms()) {
        const double d = e * a.location + lambda;
        num += a.weight * (a.location * rho * m + 1.0) / (d * d);
        den += a.weight * rho * lambda * a.location / (d * d);
    }
    const double mp = num / den;
    if (std::isfinite(mp)) return mp;

    // Central difference in z with step lambda * 1e-6.
    const double h = lambda * 1e-6;
    const double up = mp_stieltjes(H, rho, lambda - h).m;   // z = -lambda + h
    const double down = mp_stieltjes(H, rho, lambda + h).m; // z = -lambda - h
    return (up - down) / (2.0 * h);
}

void RidgeInputs::validate() const {
    if (!finite_positive(lambda)) throw ValidationError("ridge penalty lambda must be positive and finite");
    if (!finite_positive(rho)) throw ValidationError("rho must be positive and finite");
    if (!finite_positive(xi2)) throw ValidationError("xi2 must be positive and finite");
    if (!finite_positive(theta_tilde)) throw ValidationError("theta must be positive and finite");
    if (!finite_positive(sigma)) throw ValidationError("sigma must be positive and finite");
}

RidgeLimits ridge_limits(const RidgeInputs& in) {
    in.validate();
    const double rho = in.rho;
    const double lam = in.lambda;
    const auto sol = mp_stieltjes(in.H, rho, lam);
    const double m = sol.m;
    const double mp = mp_stieltjes_derivative(in.H, rho, lam, m);
    const double e = scale_e(rho, lam, m);

    double m1_num = 0.0;
    double m1_den = 1.0;
    for (const auto& a : in.H.atoms()) {
        const double d = e * a.location + lam;
        m1_num += a.weight * a.location * a.location * e / (d * d);
        m1_den += a.weight * rho * lam * a.location / (d * d);
    }
    const double m1 = m1_num / m1_den;

    const double one_minus = 1.0 - lam * m;
    const double e3 = e * e * e;
    const double theta1 = one_minus / e;
    const double theta2 = one_minus / e3 - lam * (m - lam * mp) / (e3 * e);
    const double phi1 = in.xi2 * in.G.integrate([&](double t) { return 1.0 / (lam + e * t); });
    const double phi2 = in.xi2 * (1.0 + rho * m1)
                      * in.G.integrate([&](double t) { const double d = lam + e * t; return t / (d * d); });

    const double sr = phi1 / std::sqrt(phi2 + rho * theta2);
    const double th = in.theta_tilde;
    const double norm = phi1 + rho * theta1;
    const double loss = in.sigma * in.sigma
                      * ((phi1 * phi1 + phi2 + rho * theta2) / norm
                         - 2.0 * phi1 * (1.0 + th) / (std::sqrt(norm) * std::sqrt(th))
                         + 1.0 + th);
    return {m, mp, m1, theta1, theta2, phi1, phi2, sr, loss, sol.residual, sol.iterations};
}

} // namespace hdp::asymptotics
