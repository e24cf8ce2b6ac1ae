#include "lseprec/decoupled.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lseprec {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require_finite(cplx s, double xi) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()) || !std::isfinite(xi) || !(xi > 0.0))
        throw std::invalid_argument("decoupled: inputs must be finite with xi > 0");
}
}  // namespace

Penalty Penalty::ridge_only(double l) { Penalty p; p.ridge = l; p.validate(); return p; }
Penalty Penalty::ridge_l0(double l, double l0) { Penalty p; p.ridge = l; p.zero_norm = l0; p.validate(); return p; }
Penalty Penalty::ridge_l1(double l, double l1) { Penalty p; p.ridge = l; p.l1 = l1; p.validate(); return p; }

void Penalty::validate() const {
    if (ridge < 0.0 || zero_norm < 0.0 || l1 < 0.0)
        throw std::invalid_argument("Penalty: coefficients must be non-negative");
    if (zero_norm > 0.0 && l1 > 0.0)
        throw std::invalid_argument("Penalty: at most one of zero_norm, l1 may be positive");
    if (!std::isfinite(ridge) || !std::isfinite(zero_norm) || !std::isfinite(l1))
        throw std::invalid_argument("Penalty: coefficients must be finite");
}

double Penalty::operator()(cplx v) const {
    const double a = std::abs(v);
    double u = ridge * a * a + l1 * a;
    if (a != 0.0) u += zero_norm;
    return u;
}

Support Support::complex_plane() { return Support{SupportKind::ComplexPlane, std::numeric_limits<double>::infinity(), 0}; }

Support Support::disc(double peak_power) {
    if (!(peak_power > 0.0) || !std::isfinite(peak_power))
        throw std::invalid_argument("Support: disc peak power must be positive");
    return Support{SupportKind::Disc, peak_power, 0};
}

Support Support::psk_zero(double peak_power, int order) {
    if (!(peak_power > 0.0) || !std::isfinite(peak_power))
        throw std::invalid_argument("Support: psk peak power must be positive");
    if (order < 2)
        throw std::invalid_argument("Support: psk order must be >= 2");
    return Support{SupportKind::PskZero, peak_power, order};
}

double scalar_objective(cplx v, cplx s, double xi, const Penalty& penalty, const Support& support) {
    const double a = std::abs(v);
    if (support.kind == SupportKind::Disc && a > std::sqrt(support.peak) * (1.0 + 1e-12))
        return std::numeric_limits<double>::infinity();
    return std::norm(v - s) + xi * penalty(v);
}

cplx solve_scalar(cplx s, double xi, const Penalty& penalty, const Support& support) {
    require_finite(s, xi);
    penalty.validate();
    if (support.kind == SupportKind::PskZero && (penalty.zero_norm > 0.0 || penalty.l1 > 0.0))
        throw std::invalid_argument(
            "solve_scalar: zero-norm/l1 penalties are redundant on the psk_zero support");

    const double r = std::abs(s);
    if (r == 0.0) return cplx(0.0, 0.0);
    const double shrink = 1.0 + xi * penalty.ridge;

    if (support.kind == SupportKind::PskZero) {
        // Enumerate {0} and the M constellation points; ties keep the earlier
        // candidate (silent branch first, then smaller k).
        const double sqrtP = std::sqrt(support.peak);
        cplx best(0.0, 0.0);
        double best_obj = r * r;  // objective at v = 0
        const double phase_s = std::arg(s);
        for (int k = 1; k <= support.psk_order; ++k) {
            const double th = 2.0 * kPi * double(k) / double(support.psk_order);
            const cplx v = sqrtP * cplx(std::cos(th), std::sin(th));
            // |v - s|^2 + xi*lambda*P, expanded to avoid cancellation
            const double obj = support.peak + r * r -
                               2.0 * sqrtP * r * std::cos(th - phase_s) +
                               xi * penalty.ridge * support.peak;
            if (obj < best_obj) { best_obj = obj; best = v; }
        }
        return best;
    }

    // Phase-invariant supports: minimizer has the phase of s; pick the best
    // magnitude among the silent branch and the nonzero stationary candidate.
    double m;
    if (penalty.l1 > 0.0) {
        const double tau1 = 0.5 * xi * penalty.l1;
        m = (r - tau1) / shrink;
    } else {
        m = r / shrink;
    }
    if (support.kind == SupportKind::Disc)
        m = std::min(m, std::sqrt(support.peak));
    m = std::max(m, 0.0);
    if (m == 0.0) return cplx(0.0, 0.0);

    // Direct objective comparison resolves the overlapping branch intervals
    // of the disc zero-norm rule and the hard-threshold tie.
    const double obj_zero = r * r;
    const double obj_m = (m - r) * (m - r) + xi * (penalty.ridge * m * m + penalty.l1 * m +
                                                   penalty.zero_norm);
    if (obj_m >= obj_zero) return cplx(0.0, 0.0);
    return (m / r) * s;
}

cplx oracle_scalar(cplx s, double xi, const Penalty& penalty, const Support& support,
                   const OracleGrid& grid) {
    require_finite(s, xi);
    if (grid.radial < 2 || grid.angular < 1)
        throw std::invalid_argument("oracle_scalar: grid resolution must be positive");

    if (support.kind == SupportKind::PskZero) {
        // Finite support: exact enumeration.
        const double sqrtP = std::sqrt(support.peak);
        cplx best(0.0, 0.0);
        double best_obj = scalar_objective(best, s, xi, penalty, support);
        for (int k = 1; k <= support.psk_order; ++k) {
            const double th = 2.0 * kPi * double(k) / double(support.psk_order);
            const cplx v = sqrtP * cplx(std::cos(th), std::sin(th));
            const double obj = scalar_objective(v, s, xi, penalty, support);
            if (obj < best_obj) { best_obj = obj; best = v; }
        }
        return best;
    }

    double cap = grid.radius_cap;
    if (cap <= 0.0) cap = 4.0 * std::abs(s) + 1.0;
    if (support.kind == SupportKind::Disc) cap = std::min(cap, std::sqrt(support.peak));

    cplx best(0.0, 0.0);
    double best_obj = scalar_objective(best, s, xi, penalty, support);
    for (int i = 1; i <= grid.radial; ++i) {
        const double r = cap * double(i) / double(grid.radial);
        for (int a = 0; a < grid.angular; ++a) {
            const double th = 2.0 * kPi * double(a) / double(grid.angular);
            const cplx v = r * cplx(std::cos(th), std::sin(th));
            const double obj = scalar_objective(v, s, xi, penalty, support);
            if (obj < best_obj) { best_obj = obj; best = v; }
        }
    }
    return best;
}

bool is_active(cplx x, double tol) {
    if (tol < 0.0) throw std::invalid_argument("is_active: tol must be non-negative");
    return std::abs(x) > tol;
}

double default_active_tol(const Support& support) {
    if (support.bounded()) return 1e-9 * std::sqrt(support.peak);
    return 1e-9;
}

std::vector<double> activity_boundaries(double xi, const Penalty& penalty,
                                        const Support& support, double r_max) {
    if (!support.phase_invariant())
        throw std::invalid_argument("activity_boundaries: psk_zero support is not phase-invariant");
    auto active = [&](double r) {
        return std::abs(solve_scalar(cplx(r, 0.0), xi, penalty, support)) > 0.0;
    };
    std::vector<double> flips;
    const int scan = 8192;
    bool prev = active(r_max * 0.5 / double(scan));
    double prev_r = r_max * 0.5 / double(scan);
    for (int i = 1; i <= scan; ++i) {
        const double r = r_max * double(i) / double(scan);
        const bool cur = active(r);
        if (cur != prev) {
            double lo = prev_r, hi = r;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (active(mid) == prev) lo = mid; else hi = mid;
            }
            flips.push_back(0.5 * (lo + hi));
        }
        prev = cur;
        prev_r = r;
    }
    return flips;
}

}  // namespace lseprec
