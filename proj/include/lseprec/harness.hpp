#pragma once

#include "lseprec/decoupled.hpp"
#include "lseprec/finite_sim.hpp"
#include "lseprec/rs_solver.hpp"
#include "lseprec/rsb_solver.hpp"
#include "lseprec/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lseprec {

enum class SweepMode { Rs, Rsb, Finite, RandomTas, DecoupledEval };
enum class SweepVariable { None, AlphaInv, Lambda, Lambda0, Lambda1, Rho };

struct SpectralSpec {
    enum class Kind { MarchenkoPastur, PointMass, File };
    Kind kind = Kind::MarchenkoPastur;
    double atom = 1.0;
    std::string path;

    SpectralModel build(double alpha) const;
};

/// Declarative sweep description; one sweep variable over [from, to] in
/// increments of step (a single point when the variable is None).
struct SweepConfig {
    SweepMode mode = SweepMode::Rs;
    SpectralSpec spectral;
    double alpha_inv = 2.0;
    double rho = 1.0;

    double lambda = 0.0, lambda0 = 0.0, lambda1 = 0.0;
    double target_eta = -1.0;     // >= 0: calibrate `tunable` to hit it per point
    std::string tunable;          // lambda | lambda0 | lambda1

    SupportKind support = SupportKind::ComplexPlane;
    double peak = 1.0;
    int psk_order = 2;

    SweepVariable variable = SweepVariable::None;
    double from = 0.0, to = 0.0, step = 1.0;

    int n = 256;
    int trials = 10;
    std::uint64_t seed = 1;
    double tas_eta = 0.3;         // random_tas selection fraction
    double xi = 1.0, rho_rs = 1.0;  // decoupled_eval inputs

    double tol = 1e-10;
    int max_iter = 2000;
    bool warm_start = true;
    bool timing = false;          // off keeps CSV output byte-reproducible

    std::string out_path;

    Penalty make_penalty() const;
    Support make_support() const;
};

SweepConfig parse_config_file(const std::string& path);
SweepConfig parse_config(std::istream& in);

struct ResultRow {
    std::string mode;
    std::string sweep_variable;
    double sweep_value = 0.0;
    double alpha_inv = 0.0, rho = 0.0;
    double lambda = 0.0, lambda0 = 0.0, lambda1 = 0.0;
    std::string support;
    double peak = 0.0;
    int psk_order = 0;
    int n = 0, trials = 0;
    std::uint64_t seed = 0;
    double chi = 0.0, p = 0.0, c = 0.0, mu = 0.0, xi = 0.0;
    double rho_rs = 0.0, rho_rsb1 = 0.0;
    double distortion = 0.0, distortion_db = 0.0;
    double eta = 0.0, avg_power = 0.0, papr = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::string solver_mode;
    double wall_time_ms = 0.0;
};

std::string csv_header();
std::string to_csv(const ResultRow& row);
std::vector<ResultRow> read_csv(const std::string& path);

/// Runs the sweep sequentially (fixed points warm-start from the previous
/// point), flushing rows to config.out_path when set.
std::vector<ResultRow> run_sweep(const SweepConfig& config);

struct CalibrationResult {
    double coefficient = 0.0;
    double achieved_eta = 0.0;
    int iterations = 0;
};

/// Bisection on one penalty coefficient until the predicted eta matches
/// target_eta within 1e-4 (eta is monotone decreasing in each coefficient).
CalibrationResult calibrate_eta(SweepMode mode, double target_eta, const std::string& tunable,
                                const SweepConfig& fixed);

/// RS prediction for the random-TAS baseline: ridge precoding on a random
/// fraction eta of antennas, i.e. the ridge RS solution at load alpha/eta
/// with the per-antenna power diluted by eta.
RsSolution random_tas_rs(double alpha_inv, double rho, double lambda, double eta,
                         const RsOptions& options = {});

}  // namespace lseprec
