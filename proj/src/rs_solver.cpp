#include "lseprec/rs_solver.hpp"

#include "lseprec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lseprec {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Magnitude response of the decoupled precoder on the positive real axis.
double magnitude_response(double r, double xi, const Penalty& penalty, const Support& support) {
    return std::abs(solve_scalar(cplx(r, 0.0), xi, penalty, support));
}

// Kink radii of the magnitude response (closed-form thresholds).
std::vector<double> analytic_kinks(double xi, const Penalty& penalty, const Support& support) {
    std::vector<double> k;
    const double shrink = 1.0 + xi * penalty.ridge;
    if (penalty.zero_norm > 0.0)
        k.push_back(std::sqrt(xi * penalty.zero_norm * shrink));
    const double tau1 = 0.5 * xi * penalty.l1;
    if (penalty.l1 > 0.0) k.push_back(tau1);
    if (support.kind == SupportKind::Disc) {
        const double sqrtP = std::sqrt(support.peak);
        k.push_back(sqrtP * shrink + (penalty.l1 > 0.0 ? tau1 : 0.0));
        if (penalty.zero_norm > 0.0) {
            const double tau0t = shrink * sqrtP;
            const double tau0sq = xi * penalty.zero_norm * shrink;
            k.push_back(std::max(tau0t, 0.5 * tau0t + 0.5 * tau0sq / tau0t));
        }
    }
    return k;
}

RsMoments rs_expectations_phase_invariant(double xi, double rho_rs, const Penalty& penalty,
                                          const Support& support, int radial_nodes) {
    std::vector<double> kinks = analytic_kinks(xi, penalty, support);
    double kink_max = 0.0;
    for (double v : kinks) kink_max = std::max(kink_max, v);
    const double r_max = std::max(std::sqrt(120.0 * rho_rs), 1.5 * kink_max + std::sqrt(rho_rs));

    std::vector<double> pts = activity_boundaries(xi, penalty, support, r_max);
    pts.insert(pts.end(), kinks.begin(), kinks.end());
    pts.push_back(0.0);
    pts.push_back(r_max);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::remove_if(pts.begin(), pts.end(),
                             [&](double v) { return v < 0.0 || v > r_max; }),
              pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [&](double a, double b) { return std::abs(a - b) < 1e-13 * r_max; }),
              pts.end());

    RsMoments m{0.0, 0.0, 0.0};
    const double tol = default_active_tol(support);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (b - a <= 0.0) continue;
        // Activity is constant inside a segment; eta comes from the Rayleigh
        // interval mass, exactly.
        const double mid = 0.5 * (a + b);
        if (magnitude_response(mid, xi, penalty, support) > tol)
            m.eta += std::exp(-a * a / rho_rs) - std::exp(-b * b / rho_rs);
        QuadRule q = gauss_legendre(std::min(radial_nodes, 200), a, b);
        for (size_t j = 0; j < q.nodes.size(); ++j) {
            const double r = q.nodes[j];
            const double g = magnitude_response(r, xi, penalty, support);
            if (g == 0.0) continue;
            const double ray = (2.0 * r / rho_rs) * std::exp(-r * r / rho_rs);
            const double w = q.weights[j] * ray;
            m.e_x2 += w * g * g;
            m.e_xs += w * g * r;
        }
    }
    if (!std::isfinite(m.e_x2) || !std::isfinite(m.e_xs))
        throw std::runtime_error("rs_expectations: non-finite quadrature value");
    return m;
}

RsMoments rs_expectations_psk(double xi, double rho_rs, const Penalty& penalty,
                              const Support& support, int angular_nodes) {
    // Fold the source phase to the angular distance delta in [0, pi/M] from
    // the nearest constellation point (density M/pi). Conditional on delta the
    // radial integrals over the Rayleigh density are closed-form.
    const int M = support.psk_order;
    const double sqrtP = std::sqrt(support.peak);
    const double shrink = 1.0 + xi * penalty.ridge;
    const double sigma = std::sqrt(rho_rs);
    RsMoments m{0.0, 0.0, 0.0};
    QuadRule q = gauss_legendre(angular_nodes, 0.0, kPi / double(M));
    for (size_t j = 0; j < q.nodes.size(); ++j) {
        const double delta = q.nodes[j];
        const double psi = std::cos(delta);
        const double w = q.weights[j] * double(M) / kPi;
        if (psi <= 0.0) continue;
        const double tau = 0.5 * sqrtP * shrink / psi;
        const double t2 = tau * tau / rho_rs;
        if (t2 > 700.0) continue;
        const double tail = std::exp(-t2);  // P(r >= tau)
        // E[r 1{r >= tau}] under Rayleigh(rho_rs)
        const double er = tau * tail + 0.5 * std::sqrt(kPi) * sigma * std::erfc(tau / sigma);
        m.eta += w * tail;
        m.e_xs += w * sqrtP * psi * er;
    }
    m.e_x2 = support.peak * m.eta;
    return m;
}

}  // namespace

RsEffective rs_effective_params(double chi, double p, double rho, const SpectralModel& spectral) {
    const double r = spectral.r_transform(-chi);
    if (!(r > 0.0))
        throw std::domain_error("rs_effective_params: R(-chi) must be positive");
    const double rp = spectral.r_derivative(-chi);
    RsEffective eff;
    eff.xi = 1.0 / r;
    eff.rho_rs = eff.xi * eff.xi * (rho * r - (rho * chi - p) * rp);
    return eff;
}

RsMoments rs_expectations(double xi, double rho_rs, const Penalty& penalty,
                          const Support& support, int radial_nodes, int angular_nodes) {
    if (!(rho_rs > 0.0))
        throw std::invalid_argument("rs_expectations: rho_rs must be positive");
    if (support.kind == SupportKind::PskZero)
        return rs_expectations_psk(xi, rho_rs, penalty, support, angular_nodes);
    return rs_expectations_phase_invariant(xi, rho_rs, penalty, support, radial_nodes);
}

double rs_distortion(double chi, double p, double rho, const SpectralModel& spectral) {
    const double r = spectral.r_transform(-chi);
    const double rp = spectral.r_derivative(-chi);
    // d/dchi~ [(p - rho*chi~) chi~ R(-chi~)] at chi~ = chi; note
    // d/dchi~ R(-chi~) = -R'(-chi~). The closed ridge case pins this form:
    // it reproduces D = rho + rho*(lambda^2 G'(-lambda) - 1)/alpha exactly.
    const double bracket = (p - 2.0 * rho * chi) * r - (p - rho * chi) * chi * rp;
    return rho + bracket / spectral.alpha();
}

RsSolution rs_solve(double rho, const Penalty& penalty, const Support& support,
                    const SpectralModel& spectral, const RsOptions& options) {
    if (!(rho > 0.0)) throw std::invalid_argument("rs_solve: rho must be positive");
    penalty.validate();

    std::vector<std::pair<double, double>> inits = options.inits;
    if (inits.empty())
        inits = {{1.0, rho}, {0.05, 0.5 * rho}, {10.0, 2.0 * rho}};

    std::vector<RsSolution> found;
    for (auto [chi0, p0] : inits) {
        double chi = chi0, p = p0;
        double damping = options.damping;
        double residual = std::numeric_limits<double>::infinity();
        double prev_residual = residual;
        int osc = 0;
        bool diverged = false;
        int it = 0;
        RsEffective eff{};
        for (; it < options.max_iter; ++it) {
            eff = rs_effective_params(chi, p, rho, spectral);
            if (!(eff.rho_rs > 0.0)) {
                // Infeasible trial state; pull back toward a safe region.
                chi = 0.5 * chi;
                p = 0.5 * (p + rho);
                continue;
            }
            const RsMoments mom = rs_expectations(eff.xi, eff.rho_rs, penalty, support,
                                                  options.radial_nodes, options.angular_nodes);
            const double p_new = mom.e_x2;
            const double chi_new = eff.xi / eff.rho_rs * mom.e_xs;
            residual = std::max(std::abs(p_new - p) / std::max(1.0, std::abs(p)),
                                std::abs(chi_new - chi) / std::max(1.0, std::abs(chi)));
            if (residual > prev_residual) {
                if (++osc >= 2) { damping = std::max(0.05, damping * 0.7); osc = 0; }
            } else {
                osc = 0;
            }
            prev_residual = residual;
            chi = (1.0 - damping) * chi + damping * chi_new;
            p = (1.0 - damping) * p + damping * p_new;
            if (chi > options.chi_cap || !std::isfinite(chi) || !std::isfinite(p)) {
                diverged = true;
                break;
            }
            if (residual < options.tol) break;
        }

        RsSolution sol;
        sol.chi = chi;
        sol.p = p;
        sol.iterations = it;
        sol.residual = residual;
        sol.converged = !diverged && residual < options.tol;
        eff = rs_effective_params(chi, p, rho, spectral);
        sol.xi = eff.xi;
        sol.rho_rs = eff.rho_rs;
        if (eff.rho_rs > 0.0) {
            const RsMoments mom = rs_expectations(eff.xi, eff.rho_rs, penalty, support,
                                                  options.radial_nodes, options.angular_nodes);
            sol.eta = mom.eta;
        }
        sol.avg_power = p;
        sol.distortion = rs_distortion(chi, p, rho, spectral);
        sol.distortion_db = 10.0 * std::log10(sol.distortion);
        sol.papr = support.bounded() ? support.peak / std::max(p, 1e-300)
                                     : std::numeric_limits<double>::infinity();
        found.push_back(sol);
        if (options.inits.size() == 1) break;
    }

    // Keep the lowest-distortion converged fixed point; report multiplicity.
    std::vector<RsSolution> distinct;
    for (const auto& s : found) {
        if (!s.converged) continue;
        bool dup = false;
        for (const auto& d : distinct)
            if (std::abs(d.chi - s.chi) < 1e-6 * std::max(1.0, d.chi) &&
                std::abs(d.p - s.p) < 1e-6 * std::max(1.0, d.p))
                dup = true;
        if (!dup) distinct.push_back(s);
    }
    if (distinct.empty()) return found.front();
    RsSolution best = distinct.front();
    for (const auto& s : distinct)
        if (s.distortion < best.distortion) best = s;
    best.n_solutions = int(distinct.size());
    return best;
}

}  // namespace lseprec
