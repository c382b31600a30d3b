#include "hdport/asymptotics/limits.hpp"

#include "hdport/errors.hpp"

#include <cmath>

namespace hdp::asymptotics {

void LimitInputs::validate() const {
    if (!(theta_tilde > 1e-8 && theta_tilde < 1e8)) {
        throw ValidationError("theta must lie in (1e-8, 1e8)");
    }
    if (!(phi_tilde >= 0.0) || !std::isfinite(phi_tilde)) {
        throw ValidationError("phi must be finite and non-negative");
    }
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw ValidationError("rho must be positive and finite");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ValidationError("sigma must be positive and finite");
    }
    if (std::abs(rho - 1.0) < 1e-6) {
        throw UnsupportedAspectRatioError("closed-form limits are undefined for rho within 1e-6 of 1");
    }
}

double sr_limit_factorless(const LimitInputs& in) {
    in.validate();
    const double th = in.theta_tilde;
    const double r = in.rho;
    if (r < 1.0) return std::sqrt((1.0 - r) / (th + r)) * th;
    return std::sqrt((r - 1.0) / (th + r)) * th / r;
}

double loss_limit_factorless(const LimitInputs& in) {
    in.validate();
    const double th = in.theta_tilde;
    const double r = in.rho;
    const double s2 = in.sigma * in.sigma;
    if (r < 1.0) {
        const double d = 1.0 - r;
        return s2 * ((th + r) / (d * d * d * th) + th / (d * d) - 2.0 * (th + 1.0) / d + th + 1.0);
    }
    const double d = r - 1.0;
    return s2 * ((th + r) / (d * d * d * th) + th / (r * r * d * d) - 2.0 * (th + 1.0) / (r * d) + th + 1.0);
}

double sr_limit_factor(const LimitInputs& in) {
    in.validate();
    const double th = in.theta_tilde;
    const double r = in.rho;
    if (r < 1.0) return std::sqrt((1.0 - r) / (th + r)) * th;
    const double phi = in.phi_tilde;
    const double c = (r + phi) / (phi + 1.0);
    const double c2 = c * c;
    const double q = phi * (r - 1.0) / (phi + 1.0);
    const double denom = c2 * c2 + th * r * c2 + th * q * q;
    return th * std::sqrt(r * (r - 1.0)) / std::sqrt(denom);
}

double loss_limit_factor(const LimitInputs& in) {
    in.validate();
    if (in.rho < 1.0) return loss_limit_factorless(in);
    const double th = in.theta_tilde;
    const double r = in.rho;
    const double phi = in.phi_tilde;
    const double s2 = in.sigma * in.sigma;
    const double p1 = phi + 1.0;
    const double pr = phi + r;
    const double d = r - 1.0;
    const double p1_2 = p1 * p1;
    const double pr_2 = pr * pr;
    const double pr_4 = pr_2 * pr_2;
    const double value = p1_2 * p1_2 * r * r * th / (pr_4 * d * d)
                       + p1_2 * phi * phi * r / (pr_4 * d)
                       + p1_2 * r * r / (pr_2 * d * d * d)
                       + r / (th * d * d * d)
                       - 2.0 * p1_2 * r * (th + 1.0) / (pr_2 * d)
                       + 1.0 + th;
    return s2 * value;
}

MeanSd mean_sd_limit(const LimitInputs& in) {
    in.validate();
    const double th = in.theta_tilde;
    const double r = in.rho;
    const double scale = in.sigma / std::sqrt(th);
    if (r < 1.0) {
        const double d = 1.0 - r;
        return {scale * th / d, scale * std::sqrt((th + r) / (d * d * d))};
    }
    const double phi = in.phi_tilde;
    const double p1_2 = (phi + 1.0) * (phi + 1.0);
    const double pr_2 = (phi + r) * (phi + r);
    const double d = r - 1.0;
    const double mean = scale * th * r * p1_2 / (d * pr_2);
    const double var = r * th * phi * phi * p1_2 / (d * pr_2 * pr_2)
                     + r * r * th * p1_2 / (d * d * d * pr_2)
                     + r / (d * d * d);
    return {mean, scale * std::sqrt(var)};
}

double theta_schedule(double n) {
    if (!(n >= 0.0)) throw ValidationError("asset count must be non-negative");
    return 1.0 + 15.0 * (1.0 - std::exp(-0.05 * n));
}

} // namespace hdp::asymptotics
