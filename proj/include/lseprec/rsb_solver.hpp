#pragma once

#include "lseprec/decoupled.hpp"
#include "lseprec/rs_solver.hpp"
#include "lseprec/spectral.hpp"

namespace lseprec {

struct RsbEffective {
    double xi;        // [R(-chi)]^{-1}
    double chi_tilde; // chi + mu*c
    double rho_rs;    // xi^2 * d/dchi~ [(rho*chi~ - p) R(-chi~)]
    double rho_rsb1;  // xi^2 * mu^{-1} [R(-chi) - R(-chi~)]
};

RsbEffective rsb_effective_params(double chi, double c, double p, double mu, double rho,
                                  const SpectralModel& spectral);

/// E_min(z) - |z|^2 with E_min(z) = min_v |v-z|^2 + xi*u(v). Non-positive
/// everywhere (v = 0 attains |z|^2), so the tilt exp(-(mu/xi)*.) is >= 1.
double tilt_energy(cplx z, double xi, const Penalty& penalty, const Support& support);

struct TiltedDensityParams {
    double mu, xi, rho_rsb1;
    Penalty penalty;
    Support support;
    int hermite_nodes = 96;  // normalizer quadrature
};

/// Density of the conditional law of the tilted component u given t:
/// exp(-(mu/xi) tilt_energy(u+t)) phi(u; rho_rsb1) / Z(t).
double tilted_conditional(cplx u, cplx t, const TiltedDensityParams& params);

struct RsbQuadSpec {
    int outer_radial = 64;   // Rayleigh radial rule for t
    int outer_angular = 12;  // psk sector rule for t
    int hermite = 24;        // inner product rule per axis for u
};

/// Joint expectations over t ~ CN(0, rho_rs) and u | t ~ tilted conditional,
/// with x = solve_scalar(t + u, xi, ...).
struct RsbMoments {
    double e_x2;        // E|x|^2
    double e_xu;        // E Re(x* u)
    double e_xt;        // E Re(x* t)
    double eta;         // P(x != 0)
    double e_neg_tilt;  // E[-(mu/xi) tilt_energy(u+t)]
    double e_logz;      // E[log Z(t)]
};

RsbMoments rsb_expectations(double mu, double xi, double rho_rs, double rho_rsb1,
                            const Penalty& penalty, const Support& support,
                            const RsbQuadSpec& quad = {});

/// LHS - RHS of the Parisi-parameter fixed-point equation. The RHS collapses
/// I(s1; s_rs) + D_KL(p_{s1} || phi) into E[log(p(u|t)/phi(u))], which equals
/// e_neg_tilt - e_logz.
double rsb_mu_residual(double chi, double c, double p, double mu, double rho,
                       const SpectralModel& spectral, const Penalty& penalty,
                       const Support& support, const RsbQuadSpec& quad = {});

double rsb_distortion(double chi_tilde, double p, double c, double xi, double rho_rsb1, double rho,
                      const SpectralModel& spectral);

struct RsbOptions {
    RsOptions rs;           // used for the RS reference / fallback
    double inner_damping = 0.5;
    int inner_max_iter = 400;
    double inner_tol = 1e-9;
    double mu_min = 1e-3, mu_max = 1e3;
    double mu_residual_tol = 1e-6;
    int mu_max_bisect = 60;
    RsbQuadSpec quad;
    double c_floor = 1e-9;        // below this the state counts as RS-collapsed
    bool pin_c_zero = false;      // force the RS degeneration (testing hook)
};

struct RsbRoot {
    double mu = 0.0, chi = 0.0, c = 0.0, p = 0.0;
    double distortion = 0.0, residual = 0.0;
};

struct RsbSolution {
    double chi = 0.0, c = 0.0, p = 0.0, mu = 1.0;
    double xi = 0.0, chi_tilde = 0.0, rho_rs = 0.0, rho_rsb1 = 0.0;
    double distortion = 0.0, distortion_db = 0.0;
    double eta = 0.0, avg_power = 0.0, papr = 0.0;
    double mu_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool rsb_found = false;  // false -> RS fallback (c = 0)
    // Every refined mu root (the headline fields use the largest-distortion
    // one; stationarity may admit several).
    std::vector<RsbRoot> roots;
};

/// Nested solve: outer scalar root-find on mu, inner damped fixed point on
/// (chi, c, p). Falls back to the RS solution when no c > 0 branch exists.
RsbSolution rsb_solve(double rho, const Penalty& penalty, const Support& support,
                      const SpectralModel& spectral, const RsbOptions& options = {});

}  // namespace lseprec
