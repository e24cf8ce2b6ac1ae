#include "lseprec/rsb_solver.hpp"

#include "lseprec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>
#include <cstdio>
#include <cstdlib>

namespace lseprec {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Rayleigh-weighted radial rule for |t| with t ~ CN(0, rho): nodes r_i and
// weights w_i with sum w_i = 1 - (truncation tail).
QuadRule rayleigh_rule(double rho, int nodes) {
    const double sigma = std::sqrt(rho);
    const double r_max = std::sqrt(60.0 * rho);
    // Geometric segments resolve the near-origin region where thresholds live.
    const double cuts[4] = {0.0, sigma, 3.0 * sigma, r_max};
    const int per[3] = {nodes / 2, nodes / 4, nodes - nodes / 2 - nodes / 4};
    QuadRule out;
    for (int s = 0; s < 3; ++s) {
        QuadRule q = gauss_legendre(std::max(4, per[s]), cuts[s], cuts[s + 1]);
        for (size_t i = 0; i < q.nodes.size(); ++i) {
            const double r = q.nodes[i];
            out.nodes.push_back(r);
            out.weights.push_back(q.weights[i] * (2.0 * r / rho) * std::exp(-r * r / rho));
        }
    }
    return out;
}

struct InnerGrid {
    std::vector<cplx> u;
    std::vector<double> w;  // weights summing to 1 under phi(.; rho_rsb1)
};

InnerGrid inner_grid(double rho_rsb1, int hermite) {
    const QuadRule gh = gauss_hermite_normal(hermite, std::sqrt(0.5 * rho_rsb1));
    InnerGrid g;
    g.u.reserve(size_t(hermite) * hermite);
    g.w.reserve(size_t(hermite) * hermite);
    for (int i = 0; i < hermite; ++i)
        for (int j = 0; j < hermite; ++j) {
            g.u.emplace_back(gh.nodes[i], gh.nodes[j]);
            g.w.push_back(gh.weights[i] * gh.weights[j]);
        }
    return g;
}

struct ConditionalSums {
    double logz = 0.0;
    double e_x2 = 0.0, e_xu = 0.0, e_xt = 0.0, eta = 0.0, e_neg_tilt = 0.0;
};

// Inner expectations at one outer node t under the tilted conditional.
ConditionalSums conditional_sums(cplx t, double mu_over_xi, double xi, const Penalty& penalty,
                                 const Support& support, const InnerGrid& grid,
                                 double active_tol) {
    const size_t n = grid.u.size();
    static thread_local std::vector<double> energy;
    static thread_local std::vector<cplx> xs;
    energy.resize(n);
    xs.resize(n);
    double e_min = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const cplx z = t + grid.u[i];
        const cplx x = solve_scalar(z, xi, penalty, support);
        const double e = std::norm(x - z) + xi * penalty(x) - std::norm(z);
        energy[i] = e;
        xs[i] = x;
        if (e < e_min) e_min = e;
    }
    double sw = 0.0, sx2 = 0.0, sxu = 0.0, sxt = 0.0, seta = 0.0, stilt = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double tw = grid.w[i] * std::exp(-mu_over_xi * (energy[i] - e_min));
        sw += tw;
        const cplx x = xs[i];
        sx2 += tw * std::norm(x);
        sxu += tw * (x.real() * grid.u[i].real() + x.imag() * grid.u[i].imag());
        sxt += tw * (x.real() * t.real() + x.imag() * t.imag());
        if (std::abs(x) > active_tol) seta += tw;
        stilt += tw * (-mu_over_xi) * energy[i];
    }
    ConditionalSums out;
    out.logz = std::log(sw) - mu_over_xi * e_min;
    out.e_x2 = sx2 / sw;
    out.e_xu = sxu / sw;
    out.e_xt = sxt / sw;
    out.eta = seta / sw;
    out.e_neg_tilt = stilt / sw;
    return out;
}

constexpr double kLog2Pi = 1.8378770664093454836;

// log of the standard normal upper tail, stable for large x.
double log_norm_sf(double x) {
    if (x < 30.0) return std::log(0.5 * std::erfc(x / std::sqrt(2.0)));
    const double x2 = x * x;
    return -0.5 * x2 - std::log(x) - 0.5 * kLog2Pi + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// Hazard (inverse Mills) ratio phi(x) / Phi_bar(x).
double norm_hazard(double x) {
    if (x < 30.0) {
        const double sf = 0.5 * std::erfc(x / std::sqrt(2.0));
        return std::exp(-0.5 * x * x - 0.5 * kLog2Pi) / sf;
    }
    return x + 1.0 / x - 2.0 / (x * x * x);
}

// log P(g < X < h) for standard normal X, g < h.
double log_gauss_interval(double g, double h) {
    if (g >= 0.0) {
        const double lg = log_norm_sf(g), lh = log_norm_sf(h);
        return lg + std::log1p(-std::exp(lh - lg));
    }
    if (h <= 0.0) return log_gauss_interval(-h, -g);
    const double mass = 0.5 * std::erfc(g / std::sqrt(2.0)) - 0.5 * std::erfc(h / std::sqrt(2.0));
    return std::log(mass);
}

// BPSK (psk_zero, M = 2) closed form. The minimizer and the tilt depend on
// Re(z) only, so the u-integrals reduce to Gaussian tail/moment integrals
// and the t-integral to one analytic axis. The tensor-product rule cannot
// reach the accuracy the order-parameter update needs (it multiplies the
// moment error by xi/rho_rsb1), hence the special case.
RsbMoments rsb_expectations_bpsk(double mu, double xi, double rho_rs, double rho_rsb1,
                                 const Penalty& penalty, const Support& support, int nodes) {
    const double P = support.peak, sqP = std::sqrt(P);
    const double kappa = mu / xi;
    const double A = P * (1.0 + xi * penalty.ridge);  // tilt_pm = A -+ 2 sqP Re(z)
    const double tau = A / (2.0 * sqP);               // activity threshold on Re(z)
    const double c1 = 2.0 * kappa * sqP;              // tilt slope
    const double sig = std::sqrt(0.5 * rho_rsb1);     // per-axis std of u
    const double sig_t = std::sqrt(0.5 * rho_rs);     // per-axis std of t
    const double c1s2 = c1 * sig * sig;

    // Everything is even in a = Re(t): integrate a >= 0 and double. Legendre
    // segments hug the transition band around tau, whose width is sig.
    const double a_max = std::max(sig_t * std::sqrt(60.0), tau + 12.0 * sig + sig_t);
    std::vector<double> cuts{0.0};
    const double band = 12.0 * sig;
    if (tau - band > 0.0 && tau - band < a_max) cuts.push_back(tau - band);
    if (tau + band < a_max && band > 0.0) cuts.push_back(tau + band);
    cuts.push_back(a_max);
    QuadRule rule;
    const int per = std::max(24, nodes / int(cuts.size() - 1));
    for (size_t s = 0; s + 1 < cuts.size(); ++s) {
        const QuadRule q = gauss_legendre(per, cuts[s], cuts[s + 1]);
        for (size_t i = 0; i < q.nodes.size(); ++i) {
            const double a = q.nodes[i];
            rule.nodes.push_back(a);
            rule.weights.push_back(q.weights[i] * 2.0 *
                                   std::exp(-0.5 * a * a / (sig_t * sig_t)) /
                                   (sig_t * std::sqrt(2.0 * 3.14159265358979323846)));
        }
    }

    RsbMoments m{};
    double wsum = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double a = rule.nodes[i], w = rule.weights[i];
        // active regions: Re(z) > tau (x = +sqP), Re(z) < -tau (x = -sqP)
        const double arg_p = (tau - a - c1s2) / sig;
        const double arg_m = (-tau - a + c1s2) / sig;
        const double lzp = -kappa * A + c1 * a + 0.5 * c1 * c1s2 + log_norm_sf(arg_p);
        const double lzm = -kappa * A - c1 * a + 0.5 * c1 * c1s2 + log_norm_sf(-arg_m);
        const double lm0 = log_gauss_interval((-tau - a) / sig, (tau - a) / sig);
        const double lmax = std::max({lzp, lzm, lm0});
        const double zp = std::exp(lzp - lmax), zm = std::exp(lzm - lmax),
                     m0 = std::exp(lm0 - lmax);
        const double Z = zp + zm + m0;
        const double logz = lmax + std::log(Z);
        const double Pp = zp / Z, Pm = zm / Z;
        // conditional first moments of Re(u) on the active regions
        const double r1p = c1s2 + sig * norm_hazard(arg_p);
        const double r1m = -c1s2 - sig * norm_hazard(-arg_m);

        wsum += w;
        m.e_x2 += w * P * (Pp + Pm);
        m.eta += w * (Pp + Pm);
        m.e_xu += w * sqP * (Pp * r1p - Pm * r1m);
        m.e_xt += w * sqP * a * (Pp - Pm);
        m.e_neg_tilt += w * (-kappa) *
                        (Pp * (A - 2.0 * sqP * (a + r1p)) + Pm * (A + 2.0 * sqP * (a + r1m)));
        m.e_logz += w * logz;
    }
    m.e_x2 /= wsum;
    m.eta /= wsum;
    m.e_xu /= wsum;
    m.e_xt /= wsum;
    m.e_neg_tilt /= wsum;
    m.e_logz /= wsum;
    return m;
}

}  // namespace

RsbEffective rsb_effective_params(double chi, double c, double p, double mu, double rho,
                                  const SpectralModel& spectral) {
    if (!(mu > 0.0)) throw std::invalid_argument("rsb_effective_params: mu must be positive");
    RsbEffective eff;
    eff.chi_tilde = chi + mu * c;
    const double r_chi = spectral.r_transform(-chi);
    if (!(r_chi > 0.0))
        throw std::domain_error("rsb_effective_params: R(-chi) must be positive");
    eff.xi = 1.0 / r_chi;
    const double r_ct = spectral.r_transform(-eff.chi_tilde);
    const double rp_ct = spectral.r_derivative(-eff.chi_tilde);
    eff.rho_rs = eff.xi * eff.xi * (rho * r_ct - (rho * eff.chi_tilde - p) * rp_ct);
    eff.rho_rsb1 = eff.xi * eff.xi / mu * (r_chi - r_ct);
    return eff;
}

double tilt_energy(cplx z, double xi, const Penalty& penalty, const Support& support) {
    const cplx x = solve_scalar(z, xi, penalty, support);
    return std::norm(x - z) + xi * penalty(x) - std::norm(z);
}

double tilted_conditional(cplx u, cplx t, const TiltedDensityParams& params) {
    if (!(params.rho_rsb1 > 0.0))
        throw std::invalid_argument("tilted_conditional: rho_rsb1 must be positive");
    const double mu_over_xi = params.mu / params.xi;
    const InnerGrid grid = inner_grid(params.rho_rsb1, params.hermite_nodes);
    double e_min = 0.0;
    std::vector<double> energy(grid.u.size());
    for (size_t i = 0; i < grid.u.size(); ++i) {
        energy[i] = tilt_energy(t + grid.u[i], params.xi, params.penalty, params.support);
        if (energy[i] < e_min) e_min = energy[i];
    }
    double sw = 0.0;
    for (size_t i = 0; i < grid.u.size(); ++i)
        sw += grid.w[i] * std::exp(-mu_over_xi * (energy[i] - e_min));
    const double logz = std::log(sw) - mu_over_xi * e_min;
    const double phi = std::exp(-std::norm(u) / params.rho_rsb1) / (kPi * params.rho_rsb1);
    const double e_u = tilt_energy(t + u, params.xi, params.penalty, params.support);
    return std::exp(-mu_over_xi * e_u - logz) * phi;
}

RsbMoments rsb_expectations(double mu, double xi, double rho_rs, double rho_rsb1,
                            const Penalty& penalty, const Support& support,
                            const RsbQuadSpec& quad) {
    if (!(rho_rs > 0.0) || !(rho_rsb1 > 0.0))
        throw std::invalid_argument("rsb_expectations: variances must be positive");
    if (support.kind == SupportKind::PskZero && support.psk_order == 2)
        return rsb_expectations_bpsk(mu, xi, rho_rs, rho_rsb1, penalty, support,
                                     std::max(quad.outer_radial, 2 * quad.hermite));
    const double mu_over_xi = mu / xi;
    const double active_tol = default_active_tol(support);
    const InnerGrid grid = inner_grid(rho_rsb1, quad.hermite);
    const QuadRule radial = rayleigh_rule(rho_rs, quad.outer_radial);

    RsbMoments m{};
    double wsum = 0.0;
    auto accumulate = [&](cplx t, double w) {
        const ConditionalSums s =
            conditional_sums(t, mu_over_xi, xi, penalty, support, grid, active_tol);
        wsum += w;
        m.e_x2 += w * s.e_x2;
        m.e_xu += w * s.e_xu;
        m.e_xt += w * s.e_xt;
        m.eta += w * s.eta;
        m.e_neg_tilt += w * s.e_neg_tilt;
        m.e_logz += w * s.logz;
    };

    if (support.phase_invariant()) {
        // x(e^{j a} z) = e^{j a} x(z): fix the phase of t.
        for (size_t i = 0; i < radial.nodes.size(); ++i)
            accumulate(cplx(radial.nodes[i], 0.0), radial.weights[i]);
    } else {
        // Expectations are periodic in the phase of t with period 2*pi/M.
        const QuadRule ang = gauss_legendre(quad.outer_angular, 0.0, 2.0 * kPi / support.psk_order);
        const double ang_norm = 2.0 * kPi / support.psk_order;
        for (size_t i = 0; i < radial.nodes.size(); ++i)
            for (size_t a = 0; a < ang.nodes.size(); ++a) {
                const cplx t = radial.nodes[i] *
                               cplx(std::cos(ang.nodes[a]), std::sin(ang.nodes[a]));
                accumulate(t, radial.weights[i] * ang.weights[a] / ang_norm);
            }
    }
    // Renormalize the truncated Rayleigh tail.
    m.e_x2 /= wsum; m.e_xu /= wsum; m.e_xt /= wsum;
    m.eta /= wsum; m.e_neg_tilt /= wsum; m.e_logz /= wsum;
    if (!std::isfinite(m.e_x2) || !std::isfinite(m.e_logz))
        throw std::runtime_error("rsb_expectations: non-finite quadrature value");
    return m;
}

double rsb_mu_residual(double chi, double c, double p, double mu, double rho,
                       const SpectralModel& spectral, const Penalty& penalty,
                       const Support& support, const RsbQuadSpec& quad) {
    const RsbEffective eff = rsb_effective_params(chi, c, p, mu, rho, spectral);
    if (eff.rho_rsb1 <= 0.0) return 0.0;  // degenerate RS point
    const double integral = -spectral.r_integral(chi, eff.chi_tilde);
    const double lhs = mu * mu * p * eff.rho_rsb1 / (eff.xi * eff.xi) + mu * c / eff.xi + integral;
    const RsbMoments m = rsb_expectations(mu, eff.xi, eff.rho_rs, eff.rho_rsb1,
                                          penalty, support, quad);
    const double rhs = m.e_neg_tilt - m.e_logz;
    return lhs - rhs;
}

double rsb_distortion(double chi_tilde, double p, double c, double xi, double rho_rsb1,
                      double rho, const SpectralModel& spectral) {
    const double r = spectral.r_transform(-chi_tilde);
    const double rp = spectral.r_derivative(-chi_tilde);
    const double bracket = (p - 2.0 * rho * chi_tilde) * r - (p - rho * chi_tilde) * chi_tilde * rp;
    // Correction term (xi*c - chi_tilde*rho_rsb1) / xi^2, equivalently
    // (1/mu)[chi_tilde R(-chi_tilde) - chi R(-chi)]; it vanishes as c -> 0 so
    // the expression degenerates to the replica-symmetric distortion.
    return rho + (bracket + (xi * c - chi_tilde * rho_rsb1) / (xi * xi)) / spectral.alpha();
}

namespace {

struct InnerState {
    double chi, c, p;
};

struct InnerResult {
    InnerState state{};
    RsbEffective eff{};
    RsbMoments moments{};
    int iterations = 0;
    bool converged = false;
    bool collapsed = false;  // drifted to c ~ 0
};

// One application of the order-parameter update map at fixed mu. Returns
// false when the effective parameters degenerate (rho_rsb1 <= 0).
bool apply_update(double mu, double rho, const Penalty& penalty, const Support& support,
                  const SpectralModel& spectral, const RsbOptions& opt, const InnerState& st,
                  InnerState& next, RsbEffective& eff, RsbMoments& mom) {
    const double degenerate_eps = 1e-13;
    try {
        eff = rsb_effective_params(st.chi, opt.pin_c_zero ? 0.0 : st.c, st.p, mu, rho, spectral);
    } catch (const std::domain_error&) {
        return false;
    }
    if (!(eff.rho_rs > 0.0)) return false;
    eff.rho_rsb1 = std::max(eff.rho_rsb1, 0.0);

    if (opt.pin_c_zero || eff.rho_rsb1 < degenerate_eps * eff.rho_rs) {
        const RsMoments m = rs_expectations(eff.xi, eff.rho_rs, penalty, support,
                                            opt.rs.radial_nodes, opt.rs.angular_nodes);
        next.p = m.e_x2;
        next.chi = eff.xi / eff.rho_rs * m.e_xs;
        next.c = 0.0;
        mom = RsbMoments{m.e_x2, 0.0, m.e_xs, m.eta, 0.0, 0.0};
    } else {
        mom = rsb_expectations(mu, eff.xi, eff.rho_rs, eff.rho_rsb1, penalty, support, opt.quad);
        const double chi_tilde_new = eff.xi / eff.rho_rs * mom.e_xt;
        next.p = eff.xi / eff.rho_rsb1 * mom.e_xu - chi_tilde_new;
        next.c = mom.e_x2 - next.p;
        next.chi = chi_tilde_new - mu * next.c;
    }
    next.c = std::max(next.c, 0.0);
    next.p = std::max(next.p, 1e-300);
    next.chi = std::max(next.chi, 0.0);
    return true;
}

// Fixed point on (chi, c, p) at fixed mu: a short damped warm-up followed by
// Newton on F(theta) = update(theta) - theta with a finite-difference
// Jacobian. The plain damped map contracts too slowly near the broken branch
// (spectral radius close to 1) to be usable on its own.
InnerResult inner_solve(double mu, double rho, const Penalty& penalty, const Support& support,
                        const SpectralModel& spectral, InnerState init, const RsbOptions& opt) {
    InnerState st = init;
    InnerResult out;

    auto step_norm = [](const InnerState& a, const InnerState& b) {
        return std::max({std::abs(a.chi - b.chi) / std::max(1.0, b.chi),
                         std::abs(a.c - b.c) / std::max(1.0, b.c),
                         std::abs(a.p - b.p) / std::max(1.0, b.p)});
    };

    // Warm-up: damped iterations to land in the Newton basin.
    const int warmup = std::min(12, opt.inner_max_iter);
    for (int it = 0; it < warmup; ++it) {
        InnerState next;
        if (!apply_update(mu, rho, penalty, support, spectral, opt, st, next, out.eff,
                          out.moments)) {
            st.chi *= 0.5;
            st.p = 0.5 * (st.p + rho);
            ++out.iterations;
            continue;
        }
        ++out.iterations;
        const double res = step_norm(next, st);
        const double d = opt.inner_damping;
        st.chi = (1.0 - d) * st.chi + d * next.chi;
        st.c = opt.pin_c_zero ? 0.0 : (1.0 - d) * st.c + d * next.c;
        st.p = (1.0 - d) * st.p + d * next.p;
        if (res < opt.inner_tol) {
            out.converged = true;
            break;
        }
    }

    if (!out.converged && !opt.pin_c_zero) {
        // Newton stage. F has three components; one Jacobian costs three
        // extra update evaluations.
        const int newton_max = std::max(4, opt.inner_max_iter / 8);
        for (int it = 0; it < newton_max; ++it) {
            InnerState f0;
            if (!apply_update(mu, rho, penalty, support, spectral, opt, st, f0, out.eff,
                              out.moments))
                break;
            ++out.iterations;
            const double F[3] = {f0.chi - st.chi, f0.c - st.c, f0.p - st.p};
            const double fnorm = std::max({std::abs(F[0]) / std::max(1.0, st.chi),
                                           std::abs(F[1]) / std::max(1.0, st.c),
                                           std::abs(F[2]) / std::max(1.0, st.p)});
            if (fnorm < opt.inner_tol) {
                out.converged = true;
                break;
            }
            double J[3][3];
            bool ok = true;
            const double base[3] = {st.chi, st.c, st.p};
            for (int k = 0; k < 3 && ok; ++k) {
                const double h = 1e-6 * std::max(0.05, std::abs(base[k]));
                InnerState pert = st;
                (k == 0 ? pert.chi : k == 1 ? pert.c : pert.p) += h;
                InnerState fk;
                RsbEffective efft;
                RsbMoments momt;
                ok = apply_update(mu, rho, penalty, support, spectral, opt, pert, fk, efft, momt);
                ++out.iterations;
                if (!ok) break;
                J[0][k] = ((fk.chi - pert.chi) - F[0]) / h;
                J[1][k] = ((fk.c - pert.c) - F[1]) / h;
                J[2][k] = ((fk.p - pert.p) - F[2]) / h;
            }
            if (!ok) break;
            // Solve J * d = -F by Gaussian elimination with partial pivoting.
            double A[3][4] = {{J[0][0], J[0][1], J[0][2], -F[0]},
                              {J[1][0], J[1][1], J[1][2], -F[1]},
                              {J[2][0], J[2][1], J[2][2], -F[2]}};
            bool singular = false;
            for (int col = 0; col < 3; ++col) {
                int piv = col;
                for (int r = col + 1; r < 3; ++r)
                    if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
                if (std::abs(A[piv][col]) < 1e-14) {
                    singular = true;
                    break;
                }
                if (piv != col)
                    for (int cc = 0; cc < 4; ++cc) std::swap(A[piv][cc], A[col][cc]);
                for (int r = 0; r < 3; ++r) {
                    if (r == col) continue;
                    const double f = A[r][col] / A[col][col];
                    for (int cc = col; cc < 4; ++cc) A[r][cc] -= f * A[col][cc];
                }
            }
            if (singular) break;
            double d[3] = {A[0][3] / A[0][0], A[1][3] / A[1][1], A[2][3] / A[2][2]};
            // Trust region: cap the relative step to keep the state feasible.
            double scale = 1.0;
            for (int k = 0; k < 3; ++k) {
                const double cap = 0.5 * std::max(0.05, std::abs(base[k]));
                if (std::abs(d[k]) > cap) scale = std::min(scale, cap / std::abs(d[k]));
            }
            // Backtracking on ||F||: the map is only piecewise smooth and a
            // full step can jump across an activity threshold.
            bool moved = false;
            for (double alpha : {1.0, 0.5, 0.25, 0.1}) {
                InnerState trial;
                trial.chi = std::max(st.chi + alpha * scale * d[0], 0.0);
                trial.c = std::max(st.c + alpha * scale * d[1], 0.0);
                trial.p = std::max(st.p + alpha * scale * d[2], 1e-300);
                InnerState ft;
                RsbEffective efft;
                RsbMoments momt;
                if (!apply_update(mu, rho, penalty, support, spectral, opt, trial, ft, efft,
                                  momt))
                    continue;
                ++out.iterations;
                const double fn = std::max({std::abs(ft.chi - trial.chi) / std::max(1.0, trial.chi),
                                            std::abs(ft.c - trial.c) / std::max(1.0, trial.c),
                                            std::abs(ft.p - trial.p) / std::max(1.0, trial.p)});
                if (fn < fnorm || alpha == 0.1) {
                    st = trial;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
    }

    out.state = st;
    out.collapsed = st.c < opt.c_floor;
    out.eff = rsb_effective_params(st.chi, opt.pin_c_zero ? 0.0 : st.c, st.p, mu, rho, spectral);
    out.eff.rho_rsb1 = std::max(out.eff.rho_rsb1, 0.0);
    if (!opt.pin_c_zero && out.eff.rho_rsb1 > 0.0 && !out.collapsed)
        out.moments = rsb_expectations(mu, out.eff.xi, out.eff.rho_rs, out.eff.rho_rsb1, penalty,
                                       support, opt.quad);
    return out;
}

RsbSolution from_rs(const RsSolution& rs, const Support& support) {
    RsbSolution sol;
    sol.chi = rs.chi;
    sol.c = 0.0;
    sol.p = rs.p;
    sol.mu = 0.0;
    sol.xi = rs.xi;
    sol.chi_tilde = rs.chi;
    sol.rho_rs = rs.rho_rs;
    sol.rho_rsb1 = 0.0;
    sol.distortion = rs.distortion;
    sol.distortion_db = rs.distortion_db;
    sol.eta = rs.eta;
    sol.avg_power = rs.avg_power;
    sol.papr = rs.papr;
    sol.iterations = rs.iterations;
    sol.converged = rs.converged;
    sol.rsb_found = false;
    (void)support;
    return sol;
}

}  // namespace

RsbSolution rsb_solve(double rho, const Penalty& penalty, const Support& support,
                      const SpectralModel& spectral, const RsbOptions& options) {
    if (!(rho > 0.0)) throw std::invalid_argument("rsb_solve: rho must be positive");
    const RsSolution rs = rs_solve(rho, penalty, support, spectral, options.rs);

    if (options.pin_c_zero) {
        InnerState init{std::max(rs.chi, 1e-3), 0.0, std::max(rs.p, 1e-6)};
        InnerResult res = inner_solve(1.0, rho, penalty, support, spectral, init, options);
        RsbSolution sol;
        sol.chi = res.state.chi;
        sol.c = 0.0;
        sol.p = res.state.p;
        sol.mu = 1.0;
        sol.xi = res.eff.xi;
        sol.chi_tilde = res.eff.chi_tilde;
        sol.rho_rs = res.eff.rho_rs;
        sol.rho_rsb1 = 0.0;
        sol.distortion = rsb_distortion(sol.chi_tilde, sol.p, 0.0, sol.xi, 0.0, rho, spectral);
        sol.distortion_db = 10.0 * std::log10(sol.distortion);
        sol.eta = res.moments.eta;
        sol.avg_power = res.moments.e_x2;
        sol.papr = support.bounded() ? support.peak / std::max(sol.avg_power, 1e-300)
                                     : std::numeric_limits<double>::infinity();
        sol.iterations = res.iterations;
        sol.converged = res.converged;
        sol.rsb_found = false;
        return sol;
    }

    auto residual_at = [&](const InnerResult& res, double mu) {
        if (res.eff.rho_rsb1 <= 0.0) return 0.0;
        const double integral = -spectral.r_integral(res.state.chi, res.eff.chi_tilde);
        const double lhs = mu * mu * res.state.p * res.eff.rho_rsb1 / (res.eff.xi * res.eff.xi) +
                           mu * res.state.c / res.eff.xi + integral;
        return lhs - (res.moments.e_neg_tilt - res.moments.e_logz);
    };

    const bool trace = std::getenv("LSEPREC_RSB_TRACE") != nullptr;
    const double p_floor = 1e-8 * rho;  // p = 0 corner states are spurious
    int total_iter = rs.iterations;

    auto usable = [&](const InnerResult& r) {
        return r.converged && !r.collapsed && r.state.p > p_floor;
    };

    // Anchor a converged c > 0 branch point somewhere inside the mu window.
    const InnerState cold{std::max(0.5 * rs.chi, 1e-3), std::max(0.25 * rs.p, 1e-3),
                          std::max(0.75 * rs.p, 1e-6)};
    struct BranchPoint {
        double mu;
        InnerResult res;
        double residual;
    };
    BranchPoint anchor{};
    bool anchored = false;
    for (double mu0 : {1.0, 0.3, 3.0, 0.1, 10.0, 0.01}) {
        if (mu0 < options.mu_min || mu0 > options.mu_max) continue;
        InnerResult res = inner_solve(mu0, rho, penalty, support, spectral, cold, options);
        total_iter += res.iterations;
        if (trace)
            std::fprintf(stderr, "anchor mu=%g conv=%d coll=%d chi=%g c=%g p=%g\n", mu0,
                         res.converged, res.collapsed, res.state.chi, res.state.c, res.state.p);
        if (usable(res)) {
            anchor = {mu0, res, residual_at(res, mu0)};
            anchored = true;
            break;
        }
    }
    if (!anchored) {
        RsbSolution sol = from_rs(rs, support);
        sol.iterations = total_iter;
        return sol;
    }

    // Continuation: march mu geometrically in both directions, warm-starting
    // each inner solve from its neighbor. Sign changes of the residual along
    // the branch bracket the stationary points of eq. (mu).
    std::vector<BranchPoint> branch{anchor};
    for (int dir : {+1, -1}) {
        double factor = 1.3;
        BranchPoint prev = anchor;
        int shrinks = 0;
        while (true) {
            const double mu_next = dir > 0 ? prev.mu * factor : prev.mu / factor;
            if (mu_next > options.mu_max || mu_next < options.mu_min) break;
            InnerResult res =
                inner_solve(mu_next, rho, penalty, support, spectral, prev.res.state, options);
            total_iter += res.iterations;
            if (!usable(res)) {
                if (++shrinks > 3) break;  // branch ends (collapse to RS or fold)
                factor = std::sqrt(factor);
                if (factor < 1.01) break;
                continue;
            }
            shrinks = 0;
            BranchPoint bp{mu_next, res, residual_at(res, mu_next)};
            if (trace)
                std::fprintf(stderr, "branch mu=%-10g chi=%g c=%g p=%g res=%g\n", bp.mu,
                             res.state.chi, res.state.c, res.state.p, bp.residual);
            branch.push_back(bp);
            prev = bp;
        }
    }
    std::sort(branch.begin(), branch.end(),
              [](const BranchPoint& a, const BranchPoint& b) { return a.mu < b.mu; });

    // Refine every bracketed sign change; stationarity in mu can hold at
    // several points, so keep them all and report the worst-case distortion.
    std::vector<RsbRoot> roots;
    InnerResult best{};
    double best_mu = 0.0;
    double best_distortion = -std::numeric_limits<double>::infinity();
    double best_res = std::numeric_limits<double>::infinity();
    bool found = false;

    for (size_t lo = 0; lo + 1 < branch.size(); ++lo) {
        if (!(branch[lo].residual * branch[lo + 1].residual <= 0.0)) continue;

        double mu_lo = branch[lo].mu, mu_hi = branch[lo + 1].mu;
        double f_lo = branch[lo].residual, f_hi = branch[lo + 1].residual;
        InnerResult cand =
            std::abs(f_lo) < std::abs(f_hi) ? branch[lo].res : branch[lo + 1].res;
        double cand_mu = std::abs(f_lo) < std::abs(f_hi) ? mu_lo : mu_hi;
        double cand_res = std::min(std::abs(f_lo), std::abs(f_hi));
        InnerState warm2 = branch[lo].res.state;
        for (int it = 0; it < options.mu_max_bisect; ++it) {
            double mu_mid;
            if (it % 3 == 2 && f_hi != f_lo) {
                mu_mid = mu_lo - f_lo * (mu_hi - mu_lo) / (f_hi - f_lo);  // secant probe
                if (!(mu_mid > mu_lo && mu_mid < mu_hi)) mu_mid = 0.5 * (mu_lo + mu_hi);
            } else {
                mu_mid = 0.5 * (mu_lo + mu_hi);
            }
            InnerState init = warm2;
            init.c = std::max(init.c, options.c_floor * 10.0);
            InnerResult res = inner_solve(mu_mid, rho, penalty, support, spectral, init, options);
            total_iter += res.iterations;
            if (!usable(res)) break;
            warm2 = res.state;
            const double f_mid = residual_at(res, mu_mid);
            if (std::abs(f_mid) < cand_res) {
                cand = res;
                cand_mu = mu_mid;
                cand_res = std::abs(f_mid);
            }
            if (f_lo * f_mid <= 0.0) { mu_hi = mu_mid; f_hi = f_mid; }
            else { mu_lo = mu_mid; f_lo = f_mid; }
            if (std::abs(f_mid) < options.mu_residual_tol || (mu_hi - mu_lo) < 1e-10 * mu_hi)
                break;
        }

        if (cand_res > std::max(options.mu_residual_tol, 1e-3) || cand.collapsed ||
            cand.state.c < options.c_floor)
            continue;
        const double d = rsb_distortion(cand.eff.chi_tilde, cand.state.p, cand.state.c,
                                        cand.eff.xi, cand.eff.rho_rsb1, rho, spectral);
        roots.push_back({cand_mu, cand.state.chi, cand.state.c, cand.state.p, d, cand_res});
        if (d > best_distortion) {
            best = cand;
            best_mu = cand_mu;
            best_res = cand_res;
            best_distortion = d;
            found = true;
        }
    }

    if (!found) {
        RsbSolution sol = from_rs(rs, support);
        sol.iterations = total_iter;
        return sol;
    }

    RsbSolution sol;
    sol.chi = best.state.chi;
    sol.c = best.state.c;
    sol.p = best.state.p;
    sol.mu = best_mu;
    sol.xi = best.eff.xi;
    sol.chi_tilde = best.eff.chi_tilde;
    sol.rho_rs = best.eff.rho_rs;
    sol.rho_rsb1 = best.eff.rho_rsb1;
    sol.mu_residual = best_res;
    sol.distortion = rsb_distortion(sol.chi_tilde, sol.p, sol.c, sol.xi, sol.rho_rsb1, rho, spectral);
    sol.distortion_db = 10.0 * std::log10(std::max(sol.distortion, 1e-300));
    sol.eta = best.moments.eta;
    sol.avg_power = best.moments.e_x2;
    sol.papr = support.bounded() ? support.peak / std::max(sol.avg_power, 1e-300)
                                 : std::numeric_limits<double>::infinity();
    sol.iterations = total_iter;
    sol.converged = true;
    sol.rsb_found = true;
    sol.roots = std::move(roots);
    return sol;
}

}  // namespace lseprec
