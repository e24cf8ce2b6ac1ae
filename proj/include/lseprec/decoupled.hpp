#pragma once

#include <complex>
#include <limits>
#include <vector>

namespace lseprec {

using cplx = std::complex<double>;

/// Per-entry regularizer u(v) = ridge*|v|^2 + zero_norm*1{v != 0} + l1*|v|.
/// At most one of zero_norm, l1 may be positive.
struct Penalty {
    double ridge = 0.0;      // lambda
    double zero_norm = 0.0;  // lambda0
    double l1 = 0.0;         // lambda1

    static Penalty ridge_only(double l);
    static Penalty ridge_l0(double l, double l0);
    static Penalty ridge_l1(double l, double l1);

    void validate() const;
    double operator()(cplx v) const;
    bool pure_ridge() const { return zero_norm == 0.0 && l1 == 0.0; }
};

enum class SupportKind { ComplexPlane, Disc, PskZero };

/// Constellation set X. Zero always belongs to X.
struct Support {
    SupportKind kind = SupportKind::ComplexPlane;
    double peak = std::numeric_limits<double>::infinity();  // P (disc, psk)
    int psk_order = 0;                                      // M

    static Support complex_plane();
    static Support disc(double peak_power);
    static Support psk_zero(double peak_power, int order);  // order >= 2

    bool bounded() const { return kind != SupportKind::ComplexPlane; }
    bool phase_invariant() const { return kind != SupportKind::PskZero; }
};

/// |v - s|^2 + xi*u(v); infinite outside the support.
double scalar_objective(cplx v, cplx s, double xi, const Penalty& penalty, const Support& support);

/// Global minimizer of the decoupled objective, via the closed thresholding
/// forms. Ties at exact thresholds resolve to the silent branch.
cplx solve_scalar(cplx s, double xi, const Penalty& penalty, const Support& support);

struct OracleGrid {
    int radial = 400;
    int angular = 256;
    double radius_cap = 0.0;  // 0 -> chosen from |s| and the support
};

/// Exhaustive polar-grid minimizer; exact enumeration for psk_zero.
/// Independent verification path for solve_scalar.
cplx oracle_scalar(cplx s, double xi, const Penalty& penalty, const Support& support,
                   const OracleGrid& grid = {});

bool is_active(cplx x, double tol);
double default_active_tol(const Support& support);

/// Radii where the activity of solve_scalar(r, xi, ...) flips, for real r in
/// (0, r_max). Phase-invariant supports only.
std::vector<double> activity_boundaries(double xi, const Penalty& penalty,
                                        const Support& support, double r_max);

}  // namespace lseprec
