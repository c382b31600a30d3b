#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace hdp::asymptotics {

/// Discrete probability measure on (0, inf), atoms sorted ascending.
class SpectralMeasure {
public:
    struct Atom {
        double location;
        double weight;
    };

    /// Validates locations > 0, weights >= 0 summing to 1 (within 1e-12),
    /// then sorts by location.
    explicit SpectralMeasure(std::vector<Atom> atoms);

    static SpectralMeasure point_mass(double location);

    /// Population spectral law H of a covariance matrix (weight 1/N per
    /// eigenvalue).
    static SpectralMeasure population(const Eigen::MatrixXd& sigma);

    /// Mean-reweighted law G: weight <mu, v_i>^2 / |mu|^2 on tau_i.
    static SpectralMeasure mean_reweighted(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    template <typename F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (const auto& a : atoms_) s += a.weight * f(a.location);
        return s;
    }

    double mean() const;

private:
    std::vector<Atom> atoms_;
};

struct StieltjesSolution {
    double m;          ///< m(-lambda)
    double residual;   ///< |m - rhs(m)| / max(1, |m|)
    int iterations;
};

/**
 * Solves the Marchenko-Pastur equation
 *   m(z) = integral dH(tau) / (tau [1 - rho - rho z m(z)] - z)
 * at z = -lambda. The companion transform is iterated with damping 0.5
 * from the start 1/(lambda + mean of H), which keeps every iterate in the
 * admissible region for both rho < 1 and rho > 1; Newton steps on the
 * equation above then polish m to a relative residual below 1e-12.
 * Throws SolverError after 10^4 iterations without convergence.
 */
StieltjesSolution mp_stieltjes(const SpectralMeasure& H, double rho, double lambda);

/// dm/dz at z = -lambda by implicit differentiation of the equation above.
double mp_stieltjes_derivative(const SpectralMeasure& H, double rho, double lambda, double m);

struct RidgeInputs {
    SpectralMeasure H = SpectralMeasure::point_mass(1.0);
    SpectralMeasure G = SpectralMeasure::point_mass(1.0);
    double lambda = 1.0;
    double rho = 0.5;
    double xi2 = 1.0;          ///< limit of |mu|^2
    double theta_tilde = 1.0;  ///< limit of mu' Sigma^{-1} mu
    double sigma = 1.0;

    void validate() const;
};

struct RidgeLimits {
    double m;        ///< m(-lambda)
    double m_prime;  ///< m'(-lambda)
    double m1;       ///< m_1(-lambda)
    double theta1;
    double theta2;
    double phi1;
    double phi2;
    double sr;    ///< Phi1 / sqrt(Phi2 + rho Theta2)
    double loss;  ///< prediction-loss limit
    double residual;
    int iterations;
};

RidgeLimits ridge_limits(const RidgeInputs& in);

} // namespace hdp::asymptotics
