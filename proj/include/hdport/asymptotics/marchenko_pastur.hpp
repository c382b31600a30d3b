#pragma once

#include <optional>

namespace hdp::asymptotics {

struct Support {
    double lower;
    double upper;
};

/// Edges ((1 - sqrt(rho))^2, (1 + sqrt(rho))^2) of the Marchenko-Pastur bulk
/// for unit population variance. For rho > 1 these bound the nonzero
/// eigenvalues.
Support mp_support(double rho);

/// Continuous part of the Marchenko-Pastur law,
/// sqrt((b - x)(x - a)) / (2 pi rho x) on [a, b], zero elsewhere. Its total
/// mass is min(1, 1/rho); the atom at zero is reported by mp_zero_mass.
double mp_density(double x, double rho);

/// Mass 1 - 1/rho of the atom at zero when rho > 1, else 0.
double mp_zero_mass(double rho);

/// Distribution function of the full law (atom included), by quadrature
/// of the density under the substitution x = c + r sin(t).
double mp_cdf(double x, double rho);

struct Spike {
    double sigma_f2;  ///< factor variance
    double b_norm2;   ///< squared loading norm
    double sigma_eps2;  ///< idiosyncratic variance
};

/**
 * Limit of the smallest nonzero sample eigenvalue, sigma_eps^2 (sqrt(rho) - 1)^2.
 * A single spike leaves the lower bulk edge unchanged; only its
 * idiosyncratic scale enters.
 */
double smallest_nonzero_eig_limit(double rho, std::optional<Spike> spike = std::nullopt);

} // namespace hdp::asymptotics
