#include "lseprec/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lseprec {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

SweepMode parse_mode(const std::string& v) {
    if (v == "rs") return SweepMode::Rs;
    if (v == "rsb") return SweepMode::Rsb;
    if (v == "finite") return SweepMode::Finite;
    if (v == "random_tas" || v == "random-tas") return SweepMode::RandomTas;
    if (v == "decoupled" || v == "decoupled_eval") return SweepMode::DecoupledEval;
    throw std::invalid_argument("unknown mode: " + v);
}

SweepVariable parse_variable(const std::string& v) {
    if (v == "none" || v.empty()) return SweepVariable::None;
    if (v == "alpha_inv") return SweepVariable::AlphaInv;
    if (v == "lambda") return SweepVariable::Lambda;
    if (v == "lambda0") return SweepVariable::Lambda0;
    if (v == "lambda1") return SweepVariable::Lambda1;
    if (v == "rho") return SweepVariable::Rho;
    throw std::invalid_argument("unknown sweep variable: " + v);
}

const char* mode_name(SweepMode m) {
    switch (m) {
        case SweepMode::Rs: return "rs";
        case SweepMode::Rsb: return "rsb";
        case SweepMode::Finite: return "finite";
        case SweepMode::RandomTas: return "random_tas";
        case SweepMode::DecoupledEval: return "decoupled";
    }
    return "?";
}

const char* variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::None: return "none";
        case SweepVariable::AlphaInv: return "alpha_inv";
        case SweepVariable::Lambda: return "lambda";
        case SweepVariable::Lambda0: return "lambda0";
        case SweepVariable::Lambda1: return "lambda1";
        case SweepVariable::Rho: return "rho";
    }
    return "?";
}

const char* support_name(SupportKind k) {
    switch (k) {
        case SupportKind::ComplexPlane: return "complex";
        case SupportKind::Disc: return "disc";
        case SupportKind::PskZero: return "psk";
    }
    return "?";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void apply_variable(SweepConfig& cfg, SweepVariable var, double value) {
    switch (var) {
        case SweepVariable::None: break;
        case SweepVariable::AlphaInv: cfg.alpha_inv = value; break;
        case SweepVariable::Lambda: cfg.lambda = value; break;
        case SweepVariable::Lambda0: cfg.lambda0 = value; break;
        case SweepVariable::Lambda1: cfg.lambda1 = value; break;
        case SweepVariable::Rho: cfg.rho = value; break;
    }
}

}  // namespace

SpectralModel SpectralSpec::build(double alpha) const {
    switch (kind) {
        case Kind::MarchenkoPastur: return SpectralModel::marchenko_pastur(alpha);
        case Kind::PointMass: return SpectralModel::point_mass(alpha, atom);
        case Kind::File: return SpectralModel::empirical_from_file(alpha, path);
    }
    throw std::logic_error("SpectralSpec: bad kind");
}

Penalty SweepConfig::make_penalty() const {
    Penalty p;
    p.ridge = lambda;
    p.zero_norm = lambda0;
    p.l1 = lambda1;
    p.validate();
    return p;
}

Support SweepConfig::make_support() const {
    switch (support) {
        case SupportKind::ComplexPlane: return Support::complex_plane();
        case SupportKind::Disc: return Support::disc(peak);
        case SupportKind::PskZero: return Support::psk_zero(peak, psk_order);
    }
    throw std::logic_error("SweepConfig: bad support");
}

SweepConfig parse_config(std::istream& in) {
    SweepConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;  // section labels
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "mode") cfg.mode = parse_mode(val);
        else if (key == "spectral") {
            if (val == "mp") cfg.spectral.kind = SpectralSpec::Kind::MarchenkoPastur;
            else if (val == "point") cfg.spectral.kind = SpectralSpec::Kind::PointMass;
            else if (val.rfind("file:", 0) == 0) {
                cfg.spectral.kind = SpectralSpec::Kind::File;
                cfg.spectral.path = val.substr(5);
            } else throw std::invalid_argument("bad spectral spec: " + val);
        }
        else if (key == "atom") cfg.spectral.atom = std::stod(val);
        else if (key == "alpha_inv") cfg.alpha_inv = std::stod(val);
        else if (key == "rho") cfg.rho = std::stod(val);
        else if (key == "lambda") cfg.lambda = std::stod(val);
        else if (key == "lambda0") cfg.lambda0 = std::stod(val);
        else if (key == "lambda1") cfg.lambda1 = std::stod(val);
        else if (key == "target_eta") cfg.target_eta = std::stod(val);
        else if (key == "tunable") cfg.tunable = val;
        else if (key == "support") {
            if (val == "complex") cfg.support = SupportKind::ComplexPlane;
            else if (val == "disc") cfg.support = SupportKind::Disc;
            else if (val == "psk") cfg.support = SupportKind::PskZero;
            else throw std::invalid_argument("bad support: " + val);
        }
        else if (key == "peak") cfg.peak = std::stod(val);
        else if (key == "psk_order") cfg.psk_order = std::stoi(val);
        else if (key == "sweep_variable" || key == "variable") cfg.variable = parse_variable(val);
        else if (key == "from") cfg.from = std::stod(val);
        else if (key == "to") cfg.to = std::stod(val);
        else if (key == "step") cfg.step = std::stod(val);
        else if (key == "n") cfg.n = std::stoi(val);
        else if (key == "trials") cfg.trials = std::stoi(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "tas_eta") cfg.tas_eta = std::stod(val);
        else if (key == "xi") cfg.xi = std::stod(val);
        else if (key == "rho_rs") cfg.rho_rs = std::stod(val);
        else if (key == "tol") cfg.tol = std::stod(val);
        else if (key == "max_iter") cfg.max_iter = std::stoi(val);
        else if (key == "warm_start") cfg.warm_start = (val == "true" || val == "1");
        else if (key == "timing") cfg.timing = (val == "true" || val == "1");
        else if (key == "out") cfg.out_path = val;
        else throw std::invalid_argument("unknown config key: " + key);
    }
    if (cfg.variable != SweepVariable::None && !(cfg.step > 0.0))
        throw std::invalid_argument("config: sweep step must be positive");
    return cfg;
}

SweepConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    return parse_config(in);
}

std::string csv_header() {
    return "mode,sweep_variable,sweep_value,alpha_inv,rho,lambda,lambda0,lambda1,"
           "support,peak,psk_order,n,trials,seed,chi,p,c,mu,xi,rho_rs,rho_rsb1,"
           "distortion,distortion_db,eta,avg_power,papr,iterations,residual,"
           "converged,solver_mode,wall_time_ms";
}

std::string to_csv(const ResultRow& r) {
    std::ostringstream os;
    os << r.mode << ',' << r.sweep_variable << ',' << fmt(r.sweep_value) << ','
       << fmt(r.alpha_inv) << ',' << fmt(r.rho) << ',' << fmt(r.lambda) << ','
       << fmt(r.lambda0) << ',' << fmt(r.lambda1) << ',' << r.support << ','
       << fmt(r.peak) << ',' << r.psk_order << ',' << r.n << ',' << r.trials << ','
       << r.seed << ',' << fmt(r.chi) << ',' << fmt(r.p) << ',' << fmt(r.c) << ','
       << fmt(r.mu) << ',' << fmt(r.xi) << ',' << fmt(r.rho_rs) << ','
       << fmt(r.rho_rsb1) << ',' << fmt(r.distortion) << ',' << fmt(r.distortion_db)
       << ',' << fmt(r.eta) << ',' << fmt(r.avg_power) << ',' << fmt(r.papr) << ','
       << r.iterations << ',' << fmt(r.residual) << ',' << (r.converged ? 1 : 0)
       << ',' << r.solver_mode << ',' << fmt(r.wall_time_ms);
    return os.str();
}

std::vector<ResultRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path);
    if (line != csv_header()) throw std::runtime_error("unexpected csv header in " + path);
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 31) throw std::runtime_error("bad csv row in " + path);
        ResultRow r;
        size_t i = 0;
        r.mode = f[i++];
        r.sweep_variable = f[i++];
        r.sweep_value = std::stod(f[i++]);
        r.alpha_inv = std::stod(f[i++]);
        r.rho = std::stod(f[i++]);
        r.lambda = std::stod(f[i++]);
        r.lambda0 = std::stod(f[i++]);
        r.lambda1 = std::stod(f[i++]);
        r.support = f[i++];
        r.peak = std::stod(f[i++]);
        r.psk_order = std::stoi(f[i++]);
        r.n = std::stoi(f[i++]);
        r.trials = std::stoi(f[i++]);
        r.seed = std::stoull(f[i++]);
        r.chi = std::stod(f[i++]);
        r.p = std::stod(f[i++]);
        r.c = std::stod(f[i++]);
        r.mu = std::stod(f[i++]);
        r.xi = std::stod(f[i++]);
        r.rho_rs = std::stod(f[i++]);
        r.rho_rsb1 = std::stod(f[i++]);
        r.distortion = std::stod(f[i++]);
        r.distortion_db = std::stod(f[i++]);
        r.eta = std::stod(f[i++]);
        r.avg_power = std::stod(f[i++]);
        r.papr = std::stod(f[i++]);
        r.iterations = std::stoi(f[i++]);
        r.residual = std::stod(f[i++]);
        r.converged = f[i++] == "1";
        r.solver_mode = f[i++];
        r.wall_time_ms = std::stod(f[i++]);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

ResultRow base_row(const SweepConfig& cfg, double sweep_value) {
    ResultRow r;
    r.mode = mode_name(cfg.mode);
    r.sweep_variable = variable_name(cfg.variable);
    r.sweep_value = sweep_value;
    r.alpha_inv = cfg.alpha_inv;
    r.rho = cfg.rho;
    r.lambda = cfg.lambda;
    r.lambda0 = cfg.lambda0;
    r.lambda1 = cfg.lambda1;
    r.support = support_name(cfg.support);
    r.peak = cfg.peak;
    r.psk_order = (cfg.support == SupportKind::PskZero) ? cfg.psk_order : 0;
    r.n = cfg.n;
    r.trials = cfg.trials;
    r.seed = cfg.seed;
    return r;
}

void fill_from_rs(ResultRow& r, const RsSolution& sol) {
    r.chi = sol.chi; r.p = sol.p; r.xi = sol.xi; r.rho_rs = sol.rho_rs;
    r.distortion = sol.distortion; r.distortion_db = sol.distortion_db;
    r.eta = sol.eta; r.avg_power = sol.avg_power; r.papr = sol.papr;
    r.iterations = sol.iterations; r.residual = sol.residual;
    r.converged = sol.converged;
    r.solver_mode = "rs";
}

void fill_from_rsb(ResultRow& r, const RsbSolution& sol) {
    r.chi = sol.chi; r.p = sol.p; r.c = sol.c; r.mu = sol.mu;
    r.xi = sol.xi; r.rho_rs = sol.rho_rs; r.rho_rsb1 = sol.rho_rsb1;
    r.distortion = sol.distortion; r.distortion_db = sol.distortion_db;
    r.eta = sol.eta; r.avg_power = sol.avg_power; r.papr = sol.papr;
    r.iterations = sol.iterations; r.residual = sol.mu_residual;
    r.converged = sol.converged;
    r.solver_mode = sol.rsb_found ? "rsb" : "rsb_rs_fallback";
}

ResultRow run_point(SweepConfig cfg, double sweep_value,
                    std::pair<double, double>* warm_rs) {
    const auto t0 = std::chrono::steady_clock::now();

    if (cfg.target_eta >= 0.0 && !cfg.tunable.empty()) {
        SweepConfig point = cfg;
        point.target_eta = -1.0;
        const CalibrationResult cal =
            calibrate_eta(cfg.mode == SweepMode::Rsb ? SweepMode::Rsb : SweepMode::Rs,
                          cfg.target_eta, cfg.tunable, point);
        if (cfg.tunable == "lambda") cfg.lambda = cal.coefficient;
        else if (cfg.tunable == "lambda0") cfg.lambda0 = cal.coefficient;
        else if (cfg.tunable == "lambda1") cfg.lambda1 = cal.coefficient;
    }

    ResultRow row = base_row(cfg, sweep_value);
    const double alpha = 1.0 / cfg.alpha_inv;

    switch (cfg.mode) {
        case SweepMode::Rs: {
            const SpectralModel spec = cfg.spectral.build(alpha);
            RsOptions opt;
            opt.tol = cfg.tol;
            opt.max_iter = cfg.max_iter;
            if (warm_rs && warm_rs->second > 0.0) opt.inits = {*warm_rs};
            const RsSolution sol = rs_solve(cfg.rho, cfg.make_penalty(), cfg.make_support(),
                                            spec, opt);
            fill_from_rs(row, sol);
            if (warm_rs && sol.converged) *warm_rs = {sol.chi, sol.p};
            break;
        }
        case SweepMode::Rsb: {
            const SpectralModel spec = cfg.spectral.build(alpha);
            RsbOptions opt;
            opt.rs.tol = cfg.tol;
            opt.rs.max_iter = cfg.max_iter;
            const RsbSolution sol = rsb_solve(cfg.rho, cfg.make_penalty(), cfg.make_support(),
                                              spec, opt);
            fill_from_rsb(row, sol);
            break;
        }
        case SweepMode::Finite: {
            const Penalty pen = cfg.make_penalty();
            const Support sup = cfg.make_support();
            double dist = 0.0, eta = 0.0, power = 0.0;
            int iters = 0;
            bool ok = true;
            for (int t = 0; t < cfg.trials; ++t) {
                const ProblemInstance inst =
                    sample_instance(cfg.n, alpha, cfg.rho, pen, sup, ChannelModel::IidGaussian,
                                    cfg.seed + std::uint64_t(t));
                SolveResult res;
                if (pen.zero_norm > 0.0 || sup.kind == SupportKind::PskZero)
                    res = solve_coordinate(inst);
                else if (pen.pure_ridge() && sup.kind == SupportKind::ComplexPlane &&
                         pen.ridge > 0.0)
                    res = solve_rzf(inst);
                else
                    res = solve_convex(inst);
                dist += res.distortion;
                eta += res.active_fraction;
                power += res.avg_power;
                iters += res.iterations;
                ok = ok && res.converged;
            }
            row.distortion = dist / cfg.trials;
            row.distortion_db = 10.0 * std::log10(row.distortion);
            row.eta = eta / cfg.trials;
            row.avg_power = power / cfg.trials;
            row.papr = sup.bounded() ? sup.peak / row.avg_power
                            : std::numeric_limits<double>::infinity();
            row.iterations = iters;
            row.converged = ok;
            row.solver_mode = "finite";
            break;
        }
        case SweepMode::RandomTas: {
            const Penalty pen = Penalty::ridge_only(cfg.lambda);
            const Support sup = Support::complex_plane();
            double dist = 0.0, eta = 0.0, power = 0.0;
            for (int t = 0; t < cfg.trials; ++t) {
                const ProblemInstance inst =
                    sample_instance(cfg.n, alpha, cfg.rho, pen, sup, ChannelModel::IidGaussian,
                                    cfg.seed + std::uint64_t(t));
                const SolveResult res = random_tas(inst, cfg.tas_eta, cfg.lambda);
                dist += res.distortion;
                eta += res.active_fraction;
                power += res.avg_power;
            }
            row.distortion = dist / cfg.trials;
            row.distortion_db = 10.0 * std::log10(row.distortion);
            row.eta = eta / cfg.trials;
            row.avg_power = power / cfg.trials;
            row.papr = std::numeric_limits<double>::infinity();
            row.iterations = cfg.trials;
            row.converged = true;
            row.solver_mode = "random_tas";
            break;
        }
        case SweepMode::DecoupledEval: {
            const RsMoments mom = rs_expectations(cfg.xi, cfg.rho_rs, cfg.make_penalty(),
                                                  cfg.make_support());
            row.xi = cfg.xi;
            row.rho_rs = cfg.rho_rs;
            row.p = mom.e_x2;
            row.eta = mom.eta;
            row.avg_power = mom.e_x2;
            row.converged = true;
            row.solver_mode = "decoupled";
            break;
        }
    }

    if (cfg.timing) {
        const auto t1 = std::chrono::steady_clock::now();
        row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    return row;
}

}  // namespace

std::vector<ResultRow> run_sweep(const SweepConfig& config) {
    std::vector<double> values;
    if (config.variable == SweepVariable::None) {
        values.push_back(0.0);
    } else {
        for (double v = config.from; v <= config.to + 1e-12 * std::abs(config.step);
             v += config.step)
            values.push_back(v);
        if (values.empty()) throw std::invalid_argument("run_sweep: empty sweep range");
    }

    std::ofstream out;
    if (!config.out_path.empty()) {
        out.open(config.out_path);
        if (!out) throw std::runtime_error("run_sweep: cannot open " + config.out_path);
        out << csv_header() << '\n';
        out.flush();
    }

    std::vector<ResultRow> rows;
    std::pair<double, double> warm{0.0, -1.0};
    for (double v : values) {
        SweepConfig point = config;
        apply_variable(point, config.variable, v);
        // Per-point solver failures are recorded in the row, never abort.
        ResultRow row;
        try {
            row = run_point(point, v, config.warm_start ? &warm : nullptr);
        } catch (const std::exception& e) {
            row = base_row(point, v);
            row.converged = false;
            row.solver_mode = "error";
        }
        rows.push_back(row);
        if (out) {
            out << to_csv(row) << '\n';
            out.flush();
        }
    }
    return rows;
}

CalibrationResult calibrate_eta(SweepMode mode, double target_eta, const std::string& tunable,
                                const SweepConfig& fixed) {
    if (tunable != "lambda" && tunable != "lambda0" && tunable != "lambda1")
        throw std::invalid_argument("calibrate_eta: tunable must be lambda|lambda0|lambda1");
    const double alpha = 1.0 / fixed.alpha_inv;
    const SpectralModel spec = fixed.spectral.build(alpha);

    auto eta_at = [&](double coeff) {
        SweepConfig c = fixed;
        if (tunable == "lambda") c.lambda = coeff;
        else if (tunable == "lambda0") c.lambda0 = coeff;
        else c.lambda1 = coeff;
        if (mode == SweepMode::Rsb) {
            RsbOptions opt;
            opt.rs.tol = fixed.tol;
            opt.rs.max_iter = fixed.max_iter;
            return rsb_solve(c.rho, c.make_penalty(), c.make_support(), spec, opt).eta;
        }
        RsOptions opt;
        opt.tol = fixed.tol;
        opt.max_iter = fixed.max_iter;
        return rs_solve(c.rho, c.make_penalty(), c.make_support(), spec, opt).eta;
    };

    // eta is monotone decreasing in the coefficient: bracket then bisect.
    double lo = 0.0, hi = std::max(1.0, (tunable == "lambda") ? fixed.lambda * 2.0 : 1.0);
    const double eta_lo = eta_at(lo);
    if (eta_lo < target_eta - 1e-4)
        throw std::runtime_error("calibrate_eta: target eta unreachable (eta(" +
                                 std::to_string(lo) + ") = " + std::to_string(eta_lo) + ")");
    int expand = 0;
    while (eta_at(hi) > target_eta && expand++ < 60) hi *= 2.0;
    if (expand >= 60) throw std::runtime_error("calibrate_eta: no bracket found");

    CalibrationResult res;
    double eta_mid = eta_lo;
    for (res.iterations = 0; res.iterations < 100; ++res.iterations) {
        const double mid = 0.5 * (lo + hi);
        eta_mid = eta_at(mid);
        if (std::abs(eta_mid - target_eta) < 1e-4) { lo = hi = mid; break; }
        if (eta_mid > target_eta) lo = mid; else hi = mid;
    }
    res.coefficient = 0.5 * (lo + hi);
    res.achieved_eta = eta_mid;
    return res;
}

RsSolution random_tas_rs(double alpha_inv, double rho, double lambda, double eta,
                         const RsOptions& options) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("random_tas_rs: eta in (0, 1]");
    // Selecting eta*n columns of an i.i.d. variance-1/n H leaves a k x (eta n)
    // i.i.d. channel. Rescaling its columns to variance 1/(eta n) maps the
    // subproblem onto the standard model at load alpha/eta with ridge
    // lambda/eta; the rescaling cancels in the n-averaged transmit power.
    const double alpha_sub = (1.0 / alpha_inv) / eta;
    const SpectralModel spec = SpectralModel::marchenko_pastur(alpha_sub);
    RsSolution sol = rs_solve(rho, Penalty::ridge_only(lambda / eta), Support::complex_plane(),
                              spec, options);
    sol.eta = eta;
    sol.avg_power = sol.p;   // over all n antennas
    sol.p = sol.p / eta;     // per selected antenna
    return sol;
}

}  // namespace lseprec
