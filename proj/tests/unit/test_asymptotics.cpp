#include "hdport/asymptotics/limits.hpp"
#include "hdport/asymptotics/marchenko_pastur.hpp"
#include "hdport/core/moments.hpp"
#include "hdport/core/weights.hpp"
#include "hdport/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace hdp;
using namespace hdp::asymptotics;
using core::Index;
using core::MatrixXd;
using core::VectorXd;

namespace {

LimitInputs in(double theta, double rho, double phi = 0.0, double sigma = 1.0) {
    LimitInputs x;
    x.theta_tilde = theta;
    x.rho = rho;
    x.phi_tilde = phi;
    x.sigma = sigma;
    return x;
}

std::vector<double> rho_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 9; ++i) g.push_back(0.1 * i);
    for (double r = 1.5; r <= 10.0 + 1e-12; r += 0.5) g.push_back(r);
    return g;
}

// Written out separately from the library: factorless loss limit.
double loss_oracle(double th, double r, double s) {
    if (r < 1.0) {
        const double a = 1.0 - r;
        return s * s * ((th + r) / (std::pow(a, 3) * th) + th / (a * a) - 2.0 * (th + 1.0) / a + th + 1.0);
    }
    const double a = r - 1.0;
    return s * s * ((th + r) / (std::pow(a, 3) * th) + th / (r * r * a * a) - 2.0 * (th + 1.0) / (r * a) + th + 1.0);
}

MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    MatrixXd x(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) x(i, j) = nd(rng);
    return x;
}

struct SimResult {
    double sr;
    double loss;
};

// One-factor returns with |b| = 1, sigma_eps = 1, sigma_f^2 = phi and
// mu_f chosen for squared Sharpe theta. Sharpe and loss from population moments.
SimResult simulate_pinv(Index T, Index N, double theta, double phi, std::mt19937_64& rng, bool use_phi = true) {
    VectorXd b = gaussian(N, 1, rng);
    b /= b.norm();
    const double mu_f = std::sqrt(theta * (1.0 + phi));
    const VectorXd mu = mu_f * b;
    MatrixXd r = gaussian(T, N, rng);
    if (phi > 0.0) r += std::sqrt(phi) * gaussian(T, 1, rng) * b.transpose();
    r.rowwise() += mu.transpose();
    const auto m = core::estimate_moments(r, {false});
    const auto res = core::pseudoinverse_weights(m, 1.0, use_phi ? std::optional<double>(phi) : std::nullopt,
                                                 core::ThetaPolicy::Unnormalized);
    const VectorXd& w = res.weights.w;
    const auto sig = [&](const VectorXd& v) { return v + phi * b * b.dot(v); };
    const double sr = w.dot(mu) / std::sqrt(w.dot(sig(w)));
    // w* = Sigma^{-1} mu / sqrt(theta); Sigma^{-1} b = b / (1 + phi).
    const VectorXd ws = mu / (1.0 + phi) / std::sqrt(theta);
    const VectorXd d = w - ws;
    const double loss = d.dot(sig(d)) + std::pow(mu.dot(d), 2);
    return {sr, loss};
}

} // namespace

// ---------------------------------------------------------------------------
// Validation

TEST(LimitInputs, Validation) {
    EXPECT_THROW(sr_limit_factorless(in(4.0, 1.0)), UnsupportedAspectRatioError);
    EXPECT_THROW(loss_limit_factor(in(4.0, 1.0 + 5e-7)), UnsupportedAspectRatioError);
    EXPECT_NO_THROW(sr_limit_factorless(in(4.0, 1.0 + 2e-6)));
    EXPECT_THROW(sr_limit_factorless(in(0.0, 0.5)), ValidationError);
    EXPECT_THROW(sr_limit_factorless(in(1e9, 0.5)), ValidationError);
    EXPECT_THROW(sr_limit_factorless(in(4.0, -0.5)), ValidationError);
    EXPECT_THROW(sr_limit_factor(in(4.0, 2.0, -1.0)), ValidationError);
    EXPECT_THROW(loss_limit_factorless(in(4.0, 2.0, 0.0, 0.0)), ValidationError);
}

// ---------------------------------------------------------------------------
// Sharpe limits

TEST(SrLimit, Examples) {
    EXPECT_NEAR(sr_limit_factorless(in(4.0, 1e-12)), 2.0, 1e-9);
    EXPECT_NEAR(sr_limit_factorless(in(4.0, 0.5)), 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(sr_limit_factorless(in(4.0, 2.0)), 2.0 * std::sqrt(1.0 / 6.0), 1e-14);
    EXPECT_NEAR(sr_limit_factor(in(16.0, 0.5, 10.0)), 16.0 * std::sqrt(0.5 / 16.5), 1e-13);
    EXPECT_NEAR(sr_limit_factor(in(16.0, 0.5, 10.0)), 2.78524, 1e-5);
}

TEST(SrLimit, FactorReducesToFactorlessAtZeroPhi) {
    for (double th : {1.0, 4.0, 16.0})
        for (double r : rho_grid()) {
            const double a = sr_limit_factor(in(th, r));
            const double b = sr_limit_factorless(in(th, r));
            EXPECT_NEAR(a, b, 1e-12 * b) << th << " " << r;
        }
}

TEST(SrLimit, FactorlessMonteCarloBelowOne) {
    std::mt19937_64 rng(101);
    double s = 0.0;
    const int reps = 3;
    for (int k = 0; k < reps; ++k) s += simulate_pinv(2000, 1000, 4.0, 0.0, rng).sr;
    EXPECT_NEAR(s / reps, 4.0 / 3.0, 0.03);
}

TEST(SrLimit, FactorlessMonteCarloAboveOne) {
    std::mt19937_64 rng(102);
    double s = 0.0;
    const int reps = 3;
    for (int k = 0; k < reps; ++k) s += simulate_pinv(1000, 2000, 4.0, 0.0, rng).sr;
    EXPECT_NEAR(s / reps, sr_limit_factorless(in(4.0, 2.0)), 0.05);
}

TEST(SrLimit, FactorMonteCarlo) {
    // theta = 16, phi = log(100), rho = 2. Per-rep SR concentrates tightly at
    // this size, so 10 replications suffice for a 0.1 tolerance.
    std::mt19937_64 rng(103);
    const double phi = std::log(100.0);
    double s = 0.0;
    const int reps = 10;
    for (int k = 0; k < reps; ++k) s += simulate_pinv(1000, 2000, 16.0, phi, rng).sr;
    EXPECT_NEAR(s / reps, sr_limit_factor(in(16.0, 2.0, phi)), 0.1);
}

// ---------------------------------------------------------------------------
// Loss limits

TEST(LossLimit, Anchors) {
    for (double th : {0.5, 4.0, 16.0}) {
        EXPECT_LT(std::abs(loss_limit_factorless(in(th, 1e-6))), 1e-4);
        EXPECT_NEAR(loss_limit_factorless(in(th, 1e6)), 1.0 + th, 1e-3);
        EXPECT_NEAR(loss_limit_factor(in(th, 1e6, 3.0)), 1.0 + th, 1e-3);
    }
    EXPECT_NEAR(loss_limit_factorless(in(4.0, 1e6)), 5.0, 1e-4);
    EXPECT_NEAR(loss_limit_factor(in(16.0, 1e6, 50.0)), 17.0, 1e-3);
    EXPECT_NEAR(loss_limit_factorless(in(4.0, 0.5)), 10.0, 1e-12);
}

TEST(LossLimit, MatchesIndependentTranscription) {
    for (double th : {1.0, 4.0, 16.0})
        for (double r : rho_grid())
            for (double s : {0.03, 1.0, 2.0}) {
                const double o = loss_oracle(th, r, s);
                EXPECT_NEAR(loss_limit_factorless(in(th, r, 0.0, s)), o, 1e-12 * std::abs(o));
            }
}

TEST(LossLimit, ProportionalToSigmaSquared) {
    for (double r : {0.3, 3.0}) {
        const double base = loss_limit_factor(in(4.0, r, 2.0, 1.0));
        EXPECT_NEAR(loss_limit_factor(in(4.0, r, 2.0, 0.03)), 0.0009 * base, 1e-14 * base);
    }
}

TEST(LossLimit, FactorReducesToFactorlessAtZeroPhi) {
    for (double th : {1.0, 4.0, 16.0})
        for (double r : rho_grid()) {
            const double a = loss_limit_factor(in(th, r));
            const double b = loss_limit_factorless(in(th, r));
            EXPECT_NEAR(a, b, 1e-12 * std::abs(b)) << th << " " << r;
        }
}

TEST(LossLimit, StrongFactorLowersLoss) {
    EXPECT_LT(loss_limit_factor(in(16.0, 5.0, 100.0)), loss_limit_factor(in(16.0, 5.0, 0.0)));
}

TEST(LossLimit, FactorlessMonteCarloBelowOne) {
    std::mt19937_64 rng(104);
    double s = 0.0;
    const int reps = 3;
    for (int k = 0; k < reps; ++k) s += simulate_pinv(2000, 1000, 4.0, 0.0, rng).loss;
    const double limit = loss_limit_factorless(in(4.0, 0.5));
    EXPECT_NEAR(s / reps, limit, 0.05 * limit);
}

TEST(LossLimit, FactorMonteCarloSpotCheck) {
    // Per-rep loss is right-skewed with SD near 0.18 here; the tolerance is
    // 10% or three standard errors, whichever is wider.
    std::mt19937_64 rng(105);
    double s = 0.0, s2 = 0.0;
    const int reps = 100;
    for (int k = 0; k < reps; ++k) {
        const double l = simulate_pinv(400, 2000, 16.0, 100.0, rng).loss;
        s += l;
        s2 += l * l;
    }
    const double mean = s / reps;
    const double se = std::sqrt((s2 / reps - mean * mean) / (reps - 1));
    const double limit = loss_limit_factor(in(16.0, 5.0, 100.0));
    EXPECT_NEAR(mean, limit, std::max(0.1 * limit, 3.0 * se));
}

// ---------------------------------------------------------------------------
// Mean and SD of the out-of-sample return

TEST(MeanSd, Examples) {
    const auto z = mean_sd_limit(in(16.0, 1e-12, 0.0, 1.5));
    EXPECT_NEAR(z.mean, 1.5 * 4.0, 1e-9);
    EXPECT_NEAR(z.sd, 1.5, 1e-9);
    const auto h = mean_sd_limit(in(16.0, 0.5));
    EXPECT_NEAR(h.mean, 8.0, 1e-13);
    EXPECT_NEAR(h.sd, 0.25 * std::sqrt(16.5 / 0.125), 1e-13);
    EXPECT_NEAR(h.sd, 2.8723, 1e-4);
    EXPECT_NEAR(h.mean / h.sd, sr_limit_factorless(in(16.0, 0.5)), 1e-12);
}

TEST(MeanSd, RatioIsSharpeLimit) {
    for (double th : {1.0, 4.0, 16.0})
        for (double phi : {0.0, 1.0, std::log(100.0), 100.0})
            for (double r : rho_grid()) {
                const auto x = mean_sd_limit(in(th, r, phi, 0.7));
                const double sr = sr_limit_factor(in(th, r, phi, 0.7));
                EXPECT_NEAR(x.mean / x.sd, sr, 1e-10 * sr) << th << " " << phi << " " << r;
            }
}

TEST(MeanSd, MonteCarlo) {
    // Conditional mean w'mu and SD sqrt(w'Sigma w) over replications.
    std::mt19937_64 rng(106);
    const Index T = 1000, N = 500;
    VectorXd b = gaussian(N, 1, rng);
    b /= b.norm();
    const VectorXd mu = 2.0 * b;
    double ms = 0.0, ss = 0.0;
    const int reps = 3;
    for (int k = 0; k < reps; ++k) {
        MatrixXd r = gaussian(T, N, rng);
        r.rowwise() += mu.transpose();
        const auto w = core::pseudoinverse_weights(core::estimate_moments(r, {false}), 1.0).weights.w;
        ms += w.dot(mu);
        ss += w.norm();
    }
    const auto lim = mean_sd_limit(in(4.0, 0.5));
    EXPECT_NEAR(ms / reps, lim.mean, 0.05 * lim.mean);
    EXPECT_NEAR(ss / reps, lim.sd, 0.05 * lim.sd);
}

// ---------------------------------------------------------------------------
// Schedule and double-ascent shape

TEST(ThetaSchedule, Values) {
    EXPECT_EQ(theta_schedule(0.0), 1.0);
    EXPECT_NEAR(theta_schedule(20.0), 1.0 + 15.0 * (1.0 - std::exp(-1.0)), 1e-14);
    EXPECT_NEAR(theta_schedule(20.0), 10.48181, 1e-5);
    EXPECT_NEAR(theta_schedule(1e4), 16.0, 1e-12);
    EXPECT_THROW(theta_schedule(-1.0), ValidationError);
}

TEST(DoubleAscent, ShapeOfScheduledSharpeCurve) {
    const double T = 100.0, phi = std::log(100.0);
    std::vector<double> rho, sr;
    for (double r = 0.05; r <= 10.0 + 1e-9; r += 0.01) {
        if (std::abs(r - 1.0) < 1e-6) continue;
        rho.push_back(r);
        sr.push_back(sr_limit_factor(in(theta_schedule(r * T), r, phi)));
    }
    const auto at = [&](double r) { return sr_limit_factor(in(theta_schedule(r * T), r, phi)); };

    bool local_max_below_one = false;
    for (std::size_t i = 1; i + 1 < rho.size() && rho[i + 1] < 1.0; ++i)
        if (sr[i] > sr[i - 1] && sr[i] > sr[i + 1]) local_max_below_one = true;
    EXPECT_TRUE(local_max_below_one);

    // The minimum over the grid lies next to rho = 1.
    const auto it = std::min_element(sr.begin(), sr.end());
    EXPECT_NEAR(rho[std::size_t(it - sr.begin())], 1.0, 0.05);
    EXPECT_GT(at(5.0), at(1.2));
}

// ---------------------------------------------------------------------------
// Marchenko-Pastur

TEST(MarchenkoPastur, Support) {
    auto s = mp_support(0.25);
    EXPECT_NEAR(s.lower, 0.25, 1e-15);
    EXPECT_NEAR(s.upper, 2.25, 1e-15);
    s = mp_support(1.0);
    EXPECT_EQ(s.lower, 0.0);
    EXPECT_EQ(s.upper, 4.0);
    s = mp_support(4.0);
    EXPECT_NEAR(s.lower, 1.0, 1e-15);
    EXPECT_NEAR(s.upper, 9.0, 1e-15);
    EXPECT_EQ(mp_zero_mass(0.5), 0.0);
    EXPECT_NEAR(mp_zero_mass(4.0), 0.75, 1e-15);
}

TEST(MarchenkoPastur, SmallestNonzeroLimit) {
    EXPECT_NEAR(smallest_nonzero_eig_limit(4.0), 1.0, 1e-15);
    EXPECT_NEAR(smallest_nonzero_eig_limit(0.25), 0.25, 1e-15);
    EXPECT_NEAR(smallest_nonzero_eig_limit(4.0, Spike{10.0, 1.0, 2.0}), 2.0, 1e-15);
    EXPECT_THROW(smallest_nonzero_eig_limit(1.0), UnsupportedAspectRatioError);
}

TEST(MarchenkoPastur, DensityOutsideSupportAndNormalization) {
    EXPECT_EQ(mp_density(0.05, 0.5), 0.0);
    EXPECT_GT(mp_density(0.1, 0.5), 0.0);
    EXPECT_EQ(mp_density(10.0, 0.5), 0.0);
    EXPECT_EQ(mp_density(-1.0, 4.0), 0.0);
    // Midpoint rule in the x = c + r sin(t) variable, independent of mp_cdf.
    for (double rho : {0.1, 0.5, 0.9, 1.5, 4.0}) {
        const auto [a, b] = mp_support(rho);
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        const int n = 20000;
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = -M_PI / 2 + (i + 0.5) * M_PI / n;
            s += mp_density(c + h * std::sin(t), rho) * h * std::cos(t) * M_PI / n;
        }
        EXPECT_NEAR(s, rho <= 1.0 ? 1.0 : 1.0 / rho, 1e-6) << rho;
        EXPECT_NEAR(mp_cdf(b + 1.0, rho), 1.0, 1e-12);
        EXPECT_NEAR(mp_cdf(b, rho), 1.0, 1e-12);
    }
}

TEST(MarchenkoPastur, CdfAgreesWithDensity) {
    const double rho = 0.5;
    const auto [a, b] = mp_support(rho);
    double prev = 0.0;
    for (double x = a; x <= b; x += 0.05) {
        const double f = mp_cdf(x, rho);
        EXPECT_GE(f, prev - 1e-12);
        prev = f;
    }
    const double x = 1.2, h = 1e-4;
    EXPECT_NEAR((mp_cdf(x + h, rho) - mp_cdf(x - h, rho)) / (2 * h), mp_density(x, rho), 1e-5);
    // rho = 4: the atom at zero carries 3/4 of the mass below the bulk.
    EXPECT_NEAR(mp_cdf(0.5, 4.0), 0.75, 1e-15);
    EXPECT_EQ(mp_cdf(-0.1, 4.0), 0.0);
}

TEST(MarchenkoPastur, SimulatedSpectrumKolmogorovDistance) {
    std::mt19937_64 rng(107);
    const Index T = 1000, N = 500;
    const auto m = core::estimate_moments(gaussian(T, N, rng), {false});
    std::vector<double> ev(m.eigvals.data(), m.eigvals.data() + N);
    std::sort(ev.begin(), ev.end());
    double ks = 0.0;
    for (Index i = 0; i < N; ++i) {
        const double f = mp_cdf(ev[i], 0.5);
        ks = std::max({ks, std::abs(f - double(i) / N), std::abs(f - double(i + 1) / N)});
    }
    EXPECT_LT(ks, 0.03);
}

TEST(MarchenkoPastur, SimulatedEdges) {
    std::mt19937_64 rng(108);
    {
        const auto m = core::estimate_moments(gaussian(500, 125, rng), {false});
        const double lo = std::pow(1.0 - std::sqrt(0.25), 2);
        EXPECT_NEAR(m.eigvals(124), lo, 0.05 * lo);
    }
    {
        const auto m = core::estimate_moments(gaussian(250, 1000, rng), {false});
        EXPECT_NEAR(m.eigvals(m.rank_used - 1), smallest_nonzero_eig_limit(4.0), 0.05);
        EXPECT_NEAR(mp_support(4.0).lower, 1.0, 1e-15);
    }
}

TEST(MarchenkoPastur, SpikeLeavesLowerEdge) {
    std::mt19937_64 rng(109);
    const Index T = 250, N = 1000;
    VectorXd b = gaussian(N, 1, rng);
    b /= b.norm();
    double s = 0.0;
    const int reps = 50;
    for (int k = 0; k < reps; ++k) {
        MatrixXd r = gaussian(T, N, rng);
        r += std::sqrt(10.0) * gaussian(T, 1, rng) * b.transpose();
        const auto m = core::estimate_moments(r, {false});
        s += m.eigvals(m.rank_used - 1);
    }
    const double lim = smallest_nonzero_eig_limit(4.0, Spike{10.0, 1.0, 1.0});
    EXPECT_NEAR(s / reps, lim, 0.05 * lim);
}
