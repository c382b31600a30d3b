#include "commands.hpp"

#include "hdport/asymptotics/limits.hpp"
#include "hdport/asymptotics/marchenko_pastur.hpp"
#include "hdport/asymptotics/ridge.hpp"
#include "hdport/backtest/rolling.hpp"
#include "hdport/backtest/sorted_portfolios.hpp"
#include "hdport/calibration/theta_curve.hpp"
#include "hdport/errors.hpp"
#include "hdport/montecarlo/sweep.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace hdp::cli {

namespace {

using core::Index;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string opt(const Params& p, const std::string& key) {
    auto it = p.find(key);
    return it == p.end() ? std::string() : it->second;
}

// ---------------------------------------------------------------- limits

struct TheoremColumns {
    bool sr = false, loss = false, mean = false, sd = false;
};

TheoremColumns parse_theorem(const std::string& s) {
    TheoremColumns c;
    if (s == "all") return {true, true, true, true};
    if (s == "sr") c.sr = true;
    else if (s == "loss") c.loss = true;
    else if (s == "mean") c.mean = true;
    else if (s == "sd") c.sd = true;
    else throw ValidationError("--theorem must be one of sr, loss, mean, sd, all");
    return c;
}

void add_theorem_columns(std::vector<std::string>& cols, const TheoremColumns& c) {
    if (c.sr) cols.push_back("sr");
    if (c.loss) cols.push_back("loss");
    if (c.mean) cols.push_back("mean");
    if (c.sd) cols.push_back("sd");
}

void add_theorem_values(std::vector<io::Cell>& row, const TheoremColumns& c, const asymptotics::LimitInputs& in,
                        bool nan_near_one) {
    if (nan_near_one && std::abs(in.rho - 1.0) < 1e-6) {
        for (bool on : {c.sr, c.loss, c.mean, c.sd}) {
            if (on) row.emplace_back(kNaN);
        }
        return;
    }
    if (c.sr) row.emplace_back(asymptotics::sr_limit_factor(in));
    if (c.loss) row.emplace_back(asymptotics::loss_limit_factor(in));
    if (c.mean || c.sd) {
        const auto ms = asymptotics::mean_sd_limit(in);
        if (c.mean) row.emplace_back(ms.mean);
        if (c.sd) row.emplace_back(ms.sd);
    }
}

CommandResult run_limits(const Params& p) {
    const auto cols = parse_theorem(require(p, "theorem"));
    const double sigma = get_double(p, "sigma");
    const std::string scenario = opt(p, "scenario");
    const double T = get_double(p, "T");
    if (!(T >= 2.0)) throw ValidationError("--T must be at least 2");

    if (scenario == "double-ascent") {
        const Index n_max = opt(p, "n_max").empty() ? static_cast<Index>(10 * T) : get_int(p, "n_max");
        const Index n_step = get_int(p, "n_step");
        if (n_max < 1 || n_step < 1) throw ValidationError("--n-max and --n-step must be positive");
        const auto phis = parse_phi_list(require(p, "phi"), T, "phi");
        std::vector<std::string> names{"N", "rho", "theta", "phi"};
        add_theorem_columns(names, cols);
        io::Table t(names);
        for (double phi : phis) {
            for (Index n = 1; n <= n_max; n += n_step) {
                const double rho = static_cast<double>(n) / T;
                const double theta = asymptotics::theta_schedule(static_cast<double>(n));
                std::vector<io::Cell> row{static_cast<long long>(n), rho, theta, phi};
                add_theorem_values(row, cols, {theta, phi, rho, sigma}, true);
                t.add_row(std::move(row));
            }
        }
        return {std::move(t), {}};
    }
    if (!scenario.empty() && scenario != "grid") throw ValidationError("--scenario must be grid or double-ascent");

    const auto thetas = parse_real_list(require(p, "theta"), "theta");
    const auto phis = parse_phi_list(require(p, "phi"), T, "phi");
    const auto rhos = parse_real_list(require(p, "rho"), "rho");
    std::vector<std::string> names{"theta", "phi", "rho", "sigma"};
    add_theorem_columns(names, cols);
    io::Table t(names);
    for (double th : thetas) {
        for (double phi : phis) {
            for (double rho : rhos) {
                std::vector<io::Cell> row{th, phi, rho, sigma};
                add_theorem_values(row, cols, {th, phi, rho, sigma}, false);
                t.add_row(std::move(row));
            }
        }
    }
    return {std::move(t), {}};
}

// -------------------------------------------------------------- simulate

CommandResult run_simulate(const Params& p) {
    montecarlo::SweepConfig cfg;
    cfg.T = get_int(p, "T");
    cfg.N_list = parse_index_list(require(p, "n_list"), "n_list");
    cfg.phi_list = parse_phi_list(require(p, "phi_list"), static_cast<double>(cfg.T), "phi_list");
    const auto& theta = require(p, "theta");
    cfg.theta_of_N = theta == "schedule" ? montecarlo::ThetaOfN::schedule()
                                         : montecarlo::ThetaOfN::constant(get_double(p, "theta"));
    cfg.reps = static_cast<int>(get_int(p, "reps"));
    cfg.seed = static_cast<std::uint64_t>(get_int(p, "seed"));
    cfg.sigma = get_double(p, "sigma");
    const auto& inn = require(p, "innovation");
    if (inn == "gaussian") cfg.innovation = montecarlo::Innovation::Gaussian;
    else if (inn == "student-t") cfg.innovation = montecarlo::Innovation::StudentT;
    else throw ValidationError("--innovation must be gaussian or student-t");
    const auto& src = require(p, "phi_source");
    if (src == "true") cfg.phi_source = montecarlo::PhiSource::True;
    else if (src == "estimated") cfg.phi_source = montecarlo::PhiSource::Estimated;
    else if (src == "none") cfg.phi_source = montecarlo::PhiSource::None;
    else throw ValidationError("--phi-source must be true, estimated or none");
    cfg.redraw_loadings = get_bool(p, "redraw_loadings");
    cfg.threads = static_cast<int>(get_int(p, "threads"));
    return {montecarlo::sweep_table(montecarlo::run_sweep(cfg)), {}};
}

// -------------------------------------------------------------- backtest

CommandResult run_backtest(const Params& p) {
    backtest::AssetPanel assets;
    const std::string panel = opt(p, "panel");
    const std::string market = opt(p, "market");
    if (!panel.empty()) {
        assets = backtest::read_asset_panel_file(panel);
        if (!market.empty()) {
            std::ifstream in(market);
            if (!in) throw IoError("cannot open market file '" + market + "'");
            assets.market = backtest::read_market_series(in, assets.periods);
        }
    } else {
        const auto cp = backtest::read_characteristic_panel_files(require(p, "returns"), require(p, "characteristics"),
                                                                  require(p, "ranking"), market);
        const Index top_m = opt(p, "top_m").empty() ? cp.num_stocks() : get_int(p, "top_m");
        assets = backtest::build_sorted_portfolios(cp, top_m, get_int(p, "groups"));
        const std::string save = opt(p, "portfolios_out");
        if (!save.empty()) {
            std::ofstream out(save);
            if (!out) throw IoError("cannot write '" + save + "'");
            backtest::write_asset_panel(out, assets);
        }
    }

    backtest::BacktestConfig cfg;
    cfg.window = get_int(p, "window");
    cfg.N_list = parse_index_list(require(p, "n_list"), "n_list");
    cfg.sigma = get_double(p, "sigma");
    cfg.gamma = get_double(p, "gamma");
    cfg.reps = static_cast<int>(get_int(p, "reps"));
    cfg.seed = static_cast<std::uint64_t>(get_int(p, "seed"));
    cfg.periods_per_year = get_double(p, "periods_per_year");
    const auto& mode = require(p, "insample");
    if (mode == "per-window") cfg.insample = backtest::InSampleMode::PerWindow;
    else if (mode == "full-sample") cfg.insample = backtest::InSampleMode::FullSample;
    else throw ValidationError("--insample must be per-window or full-sample");
    cfg.threads = static_cast<int>(get_int(p, "threads"));

    auto rows = backtest::rolling_backtest(assets, cfg);
    if (get_bool(p, "annualize")) {
        for (auto& r : rows) r = backtest::annualize(r, cfg.periods_per_year);
    }
    CommandResult res{backtest::metrics_table(rows), {}};
    if (!rows.empty() && rows.front().market_proxy) {
        res.warnings.push_back("no market series given; CAPM alpha uses the equal-weighted asset average");
    }
    return res;
}

// ------------------------------------------------------------- calibrate

std::vector<calibration::Observation> read_observations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open observation file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("observation file is empty");
    const char delim = io::detect_delimiter(line);
    const auto header = io::split_line(line, delim);
    if (header.size() != 2 && header.size() != 3) {
        throw SchemaError("observation header must be N,SR or N,SR,SE");
    }
    std::vector<calibration::Observation> obs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::trim(line).empty()) continue;
        const auto cells = io::split_line(line, delim);
        if (cells.size() != header.size()) {
            throw SchemaError("observation line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " columns, header has " + std::to_string(header.size()));
        }
        const double n = io::parse_number(cells[0], header[0]);
        if (n != std::floor(n)) throw SchemaError("non-integer N on line " + std::to_string(line_no));
        calibration::Observation o;
        o.N = static_cast<Index>(n);
        o.sr = io::parse_number(cells[1], header[1]);
        if (cells.size() == 3) o.se = io::parse_number(cells[2], header[2]);
        obs.push_back(o);
    }
    return obs;
}

std::map<Index, double> read_phi_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open phi file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("phi file is empty");
    const char delim = io::detect_delimiter(line);
    const auto header = io::split_line(line, delim);
    if (header.size() != 2) throw SchemaError("phi file header must be N,phi");
    std::map<Index, double> out;
    while (std::getline(in, line)) {
        if (io::trim(line).empty()) continue;
        const auto cells = io::split_line(line, delim);
        if (cells.size() != 2) throw SchemaError("phi file rows need two columns");
        out[static_cast<Index>(io::parse_number(cells[0], header[0]))] = io::parse_number(cells[1], header[1]);
    }
    return out;
}

CommandResult run_calibrate(const Params& p) {
    calibration::FitOptions opts;
    opts.T = get_int(p, "T");
    opts.phi = get_double(p, "phi");
    if (!opt(p, "phi_file").empty()) opts.phi_per_N = read_phi_table(opt(p, "phi_file"));
    opts.sigma = get_double(p, "sigma");
    const auto& unit = require(p, "unit");
    if (unit == "per-period") opts.unit = calibration::SrUnit::PerPeriod;
    else if (unit == "annualized") opts.unit = calibration::SrUnit::Annualized;
    else throw ValidationError("--unit must be per-period or annualized");
    opts.periods_per_year = get_double(p, "periods_per_year");
    opts.se_weighted = get_bool(p, "se_weighted");
    opts.max_iterations = static_cast<int>(get_int(p, "max_iterations"));
    opts.tolerance = get_double(p, "tolerance");

    const auto fit = calibration::fit_theta_curve(read_observations(require(p, "input")), opts);
    io::Table t({"N", "observed_sr", "fitted_sr", "sqrt_theta", "sqrt_theta1", "sqrt_theta_bar", "lambda_speed", "sse",
                 "converged"});
    for (const auto& pt : fit.points) {
        t.add_row({static_cast<long long>(pt.N), pt.observed, pt.fitted,
                   calibration::theta_curve(fit.model, static_cast<double>(pt.N)), fit.model.sqrt_theta1,
                   fit.model.sqrt_theta_bar, fit.model.lambda_speed, fit.sse, static_cast<long long>(fit.converged)});
    }
    CommandResult res{std::move(t), {}};
    for (Index n : fit.dropped) {
        res.warnings.push_back("dropped N = " + std::to_string(n) + " (N/T = 1 has no closed-form limit)");
    }
    if (!fit.converged) res.warnings.push_back("optimizer stopped at the iteration budget before meeting the tolerance");
    return res;
}

// -------------------------------------------------------------------- mp

CommandResult run_mp(const Params& p) {
    const auto rhos = parse_real_list(require(p, "rho"), "rho");
    if (get_bool(p, "support")) {
        io::Table t({"rho", "lower", "upper", "zero_mass", "smallest_nonzero_limit"});
        for (double rho : rhos) {
            const auto s = asymptotics::mp_support(rho);
            const double small = std::abs(rho - 1.0) < 1e-6 ? kNaN : asymptotics::smallest_nonzero_eig_limit(rho);
            t.add_row({rho, s.lower, s.upper, asymptotics::mp_zero_mass(rho), small});
        }
        return {std::move(t), {}};
    }
    const Index points = get_int(p, "points");
    if (points < 2) throw ValidationError("--points must be at least 2");
    io::Table t({"rho", "x", "density", "cdf"});
    for (double rho : rhos) {
        const auto s = asymptotics::mp_support(rho);
        for (Index i = 0; i < points; ++i) {
            const double x = s.lower + (s.upper - s.lower) * static_cast<double>(i) / static_cast<double>(points - 1);
            t.add_row({rho, x, asymptotics::mp_density(x, rho), asymptotics::mp_cdf(x, rho)});
        }
    }
    return {std::move(t), {}};
}

// ----------------------------------------------------------------- ridge

asymptotics::SpectralMeasure parse_atoms(const std::string& s, const std::string& key) {
    std::vector<asymptotics::SpectralMeasure::Atom> atoms;
    for (const auto& item : io::split_line(s, ',')) {
        if (item.empty()) continue;
        const auto parts = io::split_line(item, ':');
        if (parts.size() != 2) throw ValidationError("'" + key + "' expects location:weight pairs, got '" + item + "'");
        atoms.push_back({parse_real_list(parts[0], key).at(0), parse_real_list(parts[1], key).at(0)});
    }
    return asymptotics::SpectralMeasure(std::move(atoms));
}

CommandResult run_ridge(const Params& p) {
    const auto lambdas = parse_real_list(require(p, "lambda"), "lambda");
    const auto rhos = parse_real_list(require(p, "rho"), "rho");
    asymptotics::RidgeInputs in;
    in.H = parse_atoms(require(p, "h_atoms"), "h_atoms");
    in.G = parse_atoms(require(p, "g_atoms"), "g_atoms");
    in.theta_tilde = get_double(p, "theta");
    in.xi2 = opt(p, "xi2").empty() ? in.theta_tilde : get_double(p, "xi2");
    in.sigma = get_double(p, "sigma");
    io::Table t({"lambda", "rho", "m", "m_prime", "m1", "theta1", "theta2", "phi1", "phi2", "sr", "loss", "residual"});
    for (double rho : rhos) {
        for (double lam : lambdas) {
            in.rho = rho;
            in.lambda = lam;
            const auto r = asymptotics::ridge_limits(in);
            t.add_row({lam, rho, r.m, r.m_prime, r.m1, r.theta1, r.theta2, r.phi1, r.phi2, r.sr, r.loss, r.residual});
        }
    }
    return {std::move(t), {}};
}

} // namespace

const std::vector<Command>& commands() {
    static const std::vector<Command> cmds{
        {"limits",
         "Evaluate closed-form Sharpe, loss, mean and SD limits over a parameter grid",
         {{"theorem", "all", "sr, loss, mean, sd or all"},
          {"theta", "1", "squared clairvoyant Sharpe ratio(s): list, a:b:n or log:a:b:n"},
          {"phi", "0", "signal-to-noise ratio(s); T, 1/T, sqrtT, 1/sqrtT, logT allowed"},
          {"rho", "0.5", "aspect ratio(s) N/T"},
          {"sigma", "1", "risk budget"},
          {"scenario", "grid", "grid or double-ascent (theta from the saturating schedule)"},
          {"T", "100", "window length for the double-ascent scenario and phi tokens"},
          {"n_max", "", "largest N in the double-ascent scenario (default 10 T)"},
          {"n_step", "1", "N increment in the double-ascent scenario"}},
         run_limits},
        {"simulate",
         "Monte Carlo sweep of the pseudoinverse portfolio under the single-factor model",
         {{"T", "100", "samples per window"},
          {"n_list", "20,50,80,150,300,600", "asset counts (integers or a:b:step)"},
          {"phi_list", "0,1,logT,T", "signal-to-noise ratios"},
          {"theta", "schedule", "'schedule' or a constant squared Sharpe ratio"},
          {"reps", "100", "replications per cell"},
          {"seed", "20240101", "master seed"},
          {"sigma", "1", "risk budget"},
          {"innovation", "gaussian", "gaussian or student-t"},
          {"phi_source", "true", "phi used in the theta correction: true, estimated or none"},
          {"redraw_loadings", "false", "draw new loadings for every replication", true},
          {"threads", "1", "worker threads (results do not depend on it)"}},
         run_simulate},
        {"backtest",
         "Rolling-window out-of-sample backtest with random asset selections",
         {{"panel", "", "wide asset panel (period,<asset...>; empty or nan = missing)"},
          {"returns", "", "long stock returns file (period,stock,return)"},
          {"characteristics", "", "long characteristics file (period,stock,characteristic,value)"},
          {"ranking", "", "long ranking-weight file (period,stock,weight)"},
          {"market", "", "market excess returns (period,value)"},
          {"top_m", "", "stocks kept per period by ranking weight (default all)"},
          {"groups", "10", "portfolios per characteristic"},
          {"portfolios_out", "", "write the constructed asset panel here"},
          {"window", "120", "estimation window"},
          {"n_list", "", "asset counts to test"},
          {"sigma", "0.03", "risk budget"},
          {"gamma", "3", "CER risk aversion"},
          {"reps", "1", "random selections per N"},
          {"seed", "20240101", "master seed"},
          {"periods_per_year", "12", "annualization factor"},
          {"insample", "per-window", "per-window or full-sample in-sample SR"},
          {"annualize", "false", "report annualized metrics", true},
          {"threads", "1", "worker threads (results do not depend on it)"}},
         run_backtest},
        {"calibrate",
         "Fit the clairvoyant Sharpe curve to an observed SR-versus-N curve",
         {{"input", "", "observations file with columns N,SR[,SE]"},
          {"T", "", "estimation window of the observed curve"},
          {"phi", "0", "signal-to-noise ratio"},
          {"phi_file", "", "per-N signal-to-noise table (N,phi)"},
          {"sigma", "1", "risk budget"},
          {"unit", "per-period", "per-period or annualized SR input"},
          {"periods_per_year", "12", "annualization factor for --unit annualized"},
          {"se_weighted", "false", "weight residuals by 1/SE^2", true},
          {"max_iterations", "2000", "Nelder-Mead iteration budget"},
          {"tolerance", "1e-10", "simplex size tolerance"}},
         run_calibrate},
        {"mp",
         "Marchenko-Pastur density, distribution function and support",
         {{"rho", "0.5", "aspect ratio(s)"},
          {"points", "200", "grid points across the bulk"},
          {"support", "false", "emit support edges and the smallest nonzero eigenvalue limit", true}},
         run_mp},
        {"ridge",
         "Ridge-regularized Sharpe and loss limits",
         {{"lambda", "1", "ridge penalties"},
          {"rho", "0.5", "aspect ratios"},
          {"theta", "1", "squared clairvoyant Sharpe ratio"},
          {"xi2", "", "limit of |mu|^2 (default theta)"},
          {"sigma", "1", "risk budget"},
          {"h_atoms", "1:1", "population spectrum as location:weight pairs"},
          {"g_atoms", "1:1", "mean-weighted spectrum as location:weight pairs"}},
         run_ridge},
    };
    return cmds;
}

const Command& find_command(const std::string& name) {
    for (const auto& c : commands()) {
        if (c.name == name) return c;
    }
    throw ValidationError("unknown command '" + name + "'");
}

} // namespace hdp::cli
