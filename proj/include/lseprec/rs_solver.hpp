#pragma once

#include "lseprec/decoupled.hpp"
#include "lseprec/spectral.hpp"

#include <vector>

namespace lseprec {

struct RsEffective {
    double xi;      // [R(-chi)]^{-1}
    double rho_rs;  // xi^2 * d/dchi~ [(rho*chi~ - p) R(-chi~)] at chi~ = chi
};

/// Moments of the RS decoupled output x = solve_scalar(s, xi, ...) under
/// s ~ CN(0, rho_rs).
struct RsMoments {
    double e_x2;   // E|x|^2
    double e_xs;   // E Re(x* s)
    double eta;    // P(x != 0)
};

struct RsOptions {
    double damping = 0.5;
    int max_iter = 2000;
    double tol = 1e-10;
    double chi_cap = 1e8;
    int radial_nodes = 200;   // per smooth segment
    int angular_nodes = 200;  // psk sector rule
    std::vector<std::pair<double, double>> inits;  // (chi, p); empty -> defaults
};

struct RsSolution {
    double chi = 0.0, p = 0.0;
    double xi = 0.0, rho_rs = 0.0;
    double distortion = 0.0, distortion_db = 0.0;
    double eta = 0.0, avg_power = 0.0, papr = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    int n_solutions = 1;  // distinct fixed points found across initializations
};

RsEffective rs_effective_params(double chi, double p, double rho, const SpectralModel& spectral);

RsMoments rs_expectations(double xi, double rho_rs, const Penalty& penalty,
                          const Support& support, int radial_nodes = 200,
                          int angular_nodes = 200);

/// Asymptotic distortion at an RS fixed point (c = 0 specialization).
double rs_distortion(double chi, double p, double rho, const SpectralModel& spectral);

RsSolution rs_solve(double rho, const Penalty& penalty, const Support& support,
                    const SpectralModel& spectral, const RsOptions& options = {});

}  // namespace lseprec
