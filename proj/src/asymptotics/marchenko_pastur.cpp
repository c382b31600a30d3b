#include "hdport/asymptotics/marchenko_pastur.hpp"

#include "hdport/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hdp::asymptotics {

namespace {

void check_rho(double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be positive and finite");
}

} // namespace

Support mp_support(double rho) {
    check_rho(rho);
    const double s = std::sqrt(rho);
    return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

double mp_density(double x, double rho) {
    const auto [a, b] = mp_support(rho);
    if (x <= a || x >= b || x <= 0.0) return 0.0;
    return std::sqrt((b - x) * (x - a)) / (2.0 * std::numbers::pi * rho * x);
}

double mp_zero_mass(double rho) {
    check_rho(rho);
    return rho > 1.0 ? 1.0 - 1.0 / rho : 0.0;
}

double mp_cdf(double x, double rho) {
    const auto [a, b] = mp_support(rho);
    const double atom = mp_zero_mass(rho);
    if (x < 0.0) return 0.0;
    if (x <= a) return atom;
    if (x >= b) return atom + (rho > 1.0 ? 1.0 / rho : 1.0);

    // x = c + r sin(t): the square-root endpoints become cos^2(t), smooth on
    // [-pi/2, t_x]. Composite Simpson rule.
    const double c = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    const double t0 = -0.5 * std::numbers::pi;
    const double t1 = std::asin(std::clamp((x - c) / r, -1.0, 1.0));
    const auto integrand = [&](double t) {
        const double ct = std::cos(t);
        const double xx = c + r * std::sin(t);
        if (xx <= 0.0) return r * r * (1.0 - std::sin(t)) / (2.0 * std::numbers::pi * rho * r);
        return r * r * ct * ct / (2.0 * std::numbers::pi * rho * xx);
    };
    constexpr int n = 4096;
    const double h = (t1 - t0) / n;
    double sum = integrand(t0) + integrand(t1);
    for (int i = 1; i < n; ++i) sum += integrand(t0 + i * h) * (i % 2 ? 4.0 : 2.0);
    return atom + sum * h / 3.0;
}

double smallest_nonzero_eig_limit(double rho, std::optional<Spike> spike) {
    check_rho(rho);
    if (std::abs(rho - 1.0) < 1e-6) {
        throw UnsupportedAspectRatioError("smallest eigenvalue limit is zero at rho = 1");
    }
    const double s2 = spike ? spike->sigma_eps2 : 1.0;
    if (spike && !(spike->sigma_eps2 > 0.0)) throw ValidationError("idiosyncratic variance must be positive");
    const double d = std::sqrt(rho) - 1.0;
    return s2 * d * d;
}

} // namespace hdp::asymptotics
