#include "hdport/calibration/theta_curve.hpp"

#include "hdport/asymptotics/limits.hpp"
#include "hdport/errors.hpp"

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>

namespace hdp::calibration {

namespace {

bool near_one(Index n, Index T) {
    return std::abs(static_cast<double>(n) / static_cast<double>(T) - 1.0) < 1e-6;
}

double unit_scale(const FitOptions& opts) {
    return opts.unit == SrUnit::Annualized ? std::sqrt(opts.periods_per_year) : 1.0;
}

double phi_at(const FitOptions& opts, Index n) {
    auto it = opts.phi_per_N.find(n);
    return it == opts.phi_per_N.end() ? opts.phi : it->second;
}

// Unconstrained coordinates: (log s1, log(s_bar - s1), log lambda).
ThetaCurveModel from_coords(const double* x) {
    const double s1 = std::exp(x[0]);
    return {s1, s1 + std::exp(x[1]), std::exp(x[2])};
}

struct ObjectiveData {
    const std::vector<Observation>* obs;
    const FitOptions* opts;
};

double gsl_objective(const gsl_vector* v, void* params) {
    const auto* d = static_cast<const ObjectiveData*>(params);
    const double x[3] = {gsl_vector_get(v, 0), gsl_vector_get(v, 1), gsl_vector_get(v, 2)};
    const double f = calibration_objective(from_coords(x), *d->obs, *d->opts);
    return std::isfinite(f) ? f : std::numeric_limits<double>::max();
}

std::vector<double> log_space(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
        out[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    return out;
}

struct NelderMeadResult {
    std::array<double, 3> x;
    double f;
    int iterations;
    bool converged;
};

NelderMeadResult nelder_mead(ObjectiveData& data, const std::array<double, 3>& start, double step, int budget,
                             double tol) {
    gsl_multimin_function fn{&gsl_objective, 3, &data};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(3), &gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(3), &gsl_vector_free);
    for (std::size_t i = 0; i < 3; ++i) gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set_all(ss.get(), step);
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3), &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());

    int it = 0;
    bool converged = false;
    while (it < budget) {
        ++it;
        if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), tol) == GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    const gsl_vector* best = gsl_multimin_fminimizer_x(s.get());
    return {{gsl_vector_get(best, 0), gsl_vector_get(best, 1), gsl_vector_get(best, 2)},
            gsl_multimin_fminimizer_minimum(s.get()), it, converged};
}

} // namespace

void ThetaCurveModel::validate() const {
    for (double v : {sqrt_theta1, sqrt_theta_bar, lambda_speed}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("theta-curve parameters must be positive and finite");
    }
    if (sqrt_theta_bar < sqrt_theta1) throw ValidationError("sqrt_theta_bar must be at least sqrt_theta1");
}

double theta_curve(const ThetaCurveModel& model, double n) {
    model.validate();
    if (!(n >= 1.0)) throw ValidationError("N must be at least 1");
    const double decay = std::exp(-model.lambda_speed * (n - 1.0));
    return model.sqrt_theta1 * decay + model.sqrt_theta_bar * (1.0 - decay);
}

void FitOptions::validate() const {
    if (T < 2) throw ValidationError("window T must be at least 2");
    if (!(phi >= 0.0) || !std::isfinite(phi)) throw ValidationError("phi must be finite and non-negative");
    for (const auto& [n, p] : phi_per_N) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("phi for N = " + std::to_string(n) + " is invalid");
    }
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    if (!(periods_per_year >= 1.0)) throw ValidationError("periods_per_year must be at least 1");
    if (max_iterations < 1) throw ValidationError("iteration budget must be positive");
    if (!(tolerance > 0.0)) throw ValidationError("tolerance must be positive");
    if (grid_points < 2) throw ValidationError("grid needs at least two points per parameter");
}

double implied_sr(const ThetaCurveModel& model, Index n, const FitOptions& opts) {
    const double scale = unit_scale(opts);
    const double s = theta_curve(model, static_cast<double>(n)) / scale;
    const asymptotics::LimitInputs in{s * s, phi_at(opts, n), static_cast<double>(n) / static_cast<double>(opts.T),
                                      opts.sigma};
    return asymptotics::sr_limit_factor(in) * scale;
}

double calibration_objective(const ThetaCurveModel& model, const std::vector<Observation>& obs, const FitOptions& opts) {
    double total = 0.0;
    for (const auto& o : obs) {
        if (near_one(o.N, opts.T)) continue;
        const double r = o.sr - implied_sr(model, o.N, opts);
        if (opts.se_weighted) {
            if (!o.se || !(*o.se > 0.0)) throw ValidationError("SE-weighted fit needs a positive SE for every point");
            total += r * r / (*o.se * *o.se);
        } else {
            total += r * r;
        }
    }
    return total;
}

std::vector<ThetaCurveModel> coarse_grid(const std::vector<Observation>& obs, const FitOptions& opts) {
    double ref = 0.0;
    for (const auto& o : obs) ref = std::max(ref, std::abs(o.sr));
    if (!(ref > 0.0)) ref = unit_scale(opts) * 0.1;
    const int g = opts.grid_points;
    const auto s1s = log_space(0.01 * ref, 10.0 * ref, g);
    const auto gaps = log_space(1e-3 * ref, 20.0 * ref, g);
    const auto lams = log_space(1e-4, 1.0, g);
    std::vector<ThetaCurveModel> grid;
    grid.reserve(static_cast<std::size_t>(g * g * g));
    for (double s1 : s1s) {
        for (double gap : gaps) {
            for (double lam : lams) grid.push_back({s1, s1 + gap, lam});
        }
    }
    return grid;
}

CalibrationFit fit_theta_curve(std::vector<Observation> observed, const FitOptions& opts) {
    opts.validate();
    CalibrationFit fit;
    std::vector<Observation> usable;
    for (const auto& o : observed) {
        if (o.N < 1) throw ValidationError("observation N must be at least 1");
        if (!std::isfinite(o.sr)) throw ValidationError("observed SR must be finite");
        if (near_one(o.N, opts.T)) {
            fit.dropped.push_back(o.N);
        } else {
            usable.push_back(o);
        }
    }
    if (usable.size() < 4) throw ValidationError("calibration needs at least four points with N != T");
    const auto by_key = [](const Observation& a, const Observation& b) {
        if (a.N != b.N) return a.N < b.N;
        if (a.sr != b.sr) return a.sr < b.sr;
        return a.se.value_or(0.0) < b.se.value_or(0.0);
    };
    std::sort(usable.begin(), usable.end(), by_key);
    std::sort(fit.dropped.begin(), fit.dropped.end());

    ThetaCurveModel best{};
    double best_f = std::numeric_limits<double>::infinity();
    for (const auto& m : coarse_grid(usable, opts)) {
        const double f = calibration_objective(m, usable, opts);
        if (f < best_f) {
            best_f = f;
            best = m;
        }
    }

    ObjectiveData data{&usable, &opts};
    std::array<double, 3> x{std::log(best.sqrt_theta1), std::log(best.sqrt_theta_bar - best.sqrt_theta1),
                            std::log(best.lambda_speed)};
    int used = 0;
    bool converged = false;
    // A second pass restarted from the best vertex guards against a
    // prematurely collapsed simplex.
    for (double step : {0.5, 0.05}) {
        if (used >= opts.max_iterations) break;
        const auto r = nelder_mead(data, x, step, opts.max_iterations - used, opts.tolerance);
        used += r.iterations;
        if (r.f < best_f) {
            best_f = r.f;
            x = r.x;
            best = from_coords(x.data());
        }
        converged = r.converged;
    }

    fit.model = best;
    fit.objective = calibration_objective(fit.model, usable, opts);
    fit.converged = converged;
    fit.iterations = used;
    for (const auto& o : usable) {
        const double f = implied_sr(fit.model, o.N, opts);
        fit.points.push_back({o.N, o.sr, f});
        fit.sse += (o.sr - f) * (o.sr - f);
    }
    return fit;
}

} // namespace hdp::calibration
