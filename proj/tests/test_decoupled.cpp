#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lseprec/decoupled.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace lseprec;

namespace {

// Random signal amplitudes spanning the interesting range around thresholds.
std::vector<cplx> probe_points(std::uint64_t seed, int count, double radius) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ur(0.0, radius);
    std::uniform_real_distribution<double> uth(0.0, 2.0 * M_PI);
    std::vector<cplx> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double r = ur(rng), th = uth(rng);
        out.emplace_back(r * std::cos(th), r * std::sin(th));
    }
    return out;
}

void check_against_oracle(const Penalty& pen, const Support& sup, double xi, double tol) {
    OracleGrid grid;
    grid.radial = 4000;
    grid.angular = 1;  // phase-invariant cases: align with s
    for (const cplx s : probe_points(42, 60, 3.0)) {
        const cplx fast = solve_scalar(s, xi, pen, sup);
        const cplx slow = oracle_scalar(s, xi, pen, sup, grid);
        const double f_fast = scalar_objective(fast, s, xi, pen, sup);
        const double f_slow = scalar_objective(slow, s, xi, pen, sup);
        CHECK(f_fast <= f_slow + tol);
    }
}

}  // namespace

TEST_CASE("pure ridge is linear shrinkage") {
    const Penalty pen = Penalty::ridge_only(0.8);
    const Support sup = Support::complex_plane();
    for (const cplx s : probe_points(1, 25, 4.0)) {
        const cplx x = solve_scalar(s, 1.3, pen, sup);
        CHECK(std::abs(x - s / (1.0 + 1.3 * 0.8)) < 1e-12);
    }
}

TEST_CASE("soft threshold formula") {
    const double l = 0.5, l1 = 0.9, xi = 1.2;
    const Penalty pen = Penalty::ridge_l1(l, l1);
    const Support sup = Support::complex_plane();
    const double tau = xi * l1 / 2.0;
    for (const cplx s : probe_points(2, 40, 3.0)) {
        const cplx x = solve_scalar(s, xi, pen, sup);
        const double r = std::abs(s);
        if (r <= tau) {
            CHECK(std::abs(x) == 0.0);
        } else {
            CHECK(std::abs(x) == doctest::Approx((r - tau) / (1.0 + xi * l)).epsilon(1e-12));
        }
    }
}

TEST_CASE("hard threshold formula") {
    const double l = 0.4, l0 = 0.7, xi = 1.5;
    const Penalty pen = Penalty::ridge_l0(l, l0);
    const Support sup = Support::complex_plane();
    const double tau0 = std::sqrt(xi * l0 * (1.0 + xi * l));
    for (const cplx s : probe_points(3, 40, 3.0)) {
        const cplx x = solve_scalar(s, xi, pen, sup);
        const double r = std::abs(s);
        if (r < tau0 - 1e-9) {
            CHECK(std::abs(x) == 0.0);
        } else if (r > tau0 + 1e-9) {
            CHECK(std::abs(x) == doctest::Approx(r / (1.0 + xi * l)).epsilon(1e-12));
        }
    }
}

TEST_CASE("threshold ties pick the silent branch") {
    const double l = 0.4, l0 = 0.7, xi = 1.5;
    const Penalty pen = Penalty::ridge_l0(l, l0);
    const double tau0 = std::sqrt(xi * l0 * (1.0 + xi * l));
    const cplx x = solve_scalar(cplx(tau0, 0.0), xi, pen, Support::complex_plane());
    CHECK(std::abs(x) == 0.0);
}

TEST_CASE("disc support clips the ridge solution") {
    const Penalty pen = Penalty::ridge_only(0.2);
    const Support sup = Support::disc(1.0);
    for (const cplx s : probe_points(4, 40, 5.0)) {
        const cplx x = solve_scalar(s, 0.9, pen, sup);
        CHECK(std::abs(x) <= 1.0 + 1e-12);
        const double unclipped = std::abs(s) / (1.0 + 0.9 * 0.2);
        CHECK(std::abs(x) == doctest::Approx(std::min(unclipped, 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("phase equivariance on phase-invariant supports") {
    const Penalty pen = Penalty::ridge_l0(0.3, 0.5);
    const Support sup = Support::disc(2.0);
    for (const cplx s : probe_points(5, 30, 3.0)) {
        const cplx x0 = solve_scalar(s, 1.1, pen, sup);
        for (double th : {0.6, 2.2, 4.9}) {
            const cplx ph(std::cos(th), std::sin(th));
            const cplx xr = solve_scalar(s * ph, 1.1, pen, sup);
            CHECK(std::abs(xr - x0 * ph) < 1e-10);
        }
    }
}

TEST_CASE("grid oracle never beats the closed form") {
    check_against_oracle(Penalty::ridge_only(0.6), Support::complex_plane(), 1.0, 1e-9);
    check_against_oracle(Penalty::ridge_l1(0.6, 0.8), Support::complex_plane(), 1.4, 1e-9);
    check_against_oracle(Penalty::ridge_l0(0.6, 0.8), Support::complex_plane(), 1.4, 1e-9);
    check_against_oracle(Penalty::ridge_l0(0.2, 0.4), Support::disc(1.5), 0.8, 1e-9);
    check_against_oracle(Penalty::ridge_l1(0.2, 0.4), Support::disc(1.5), 0.8, 1e-9);
}

TEST_CASE("psk selection picks the nearest constellation point") {
    const Support sup = Support::psk_zero(1.0, 4);  // QPSK, |v| = 1
    const Penalty pen = Penalty::ridge_only(0.0);
    // with no penalty and a strong signal, the output is the closest point
    const cplx x = solve_scalar(cplx(3.0, 0.4), 1.0, pen, sup);
    CHECK(x.real() == doctest::Approx(1.0));
    CHECK(std::abs(x.imag()) < 1e-12);
}

TEST_CASE("psk switch-off threshold") {
    // BPSK: v in {0, +-sqrt(P)}; the ridge term alone sets the threshold
    const double P = 1.0, l = 0.5, xi = 1.0;
    const Support sup = Support::psk_zero(P, 2);
    const Penalty pen = Penalty::ridge_only(l);
    // switching boundary for real s > 0: |s-sqrt(P)|^2 + xi*l*P = |s|^2
    const double s_star = std::sqrt(P) * (1.0 + xi * l) / 2.0;
    CHECK(std::abs(solve_scalar(cplx(s_star - 1e-6, 0.0), xi, pen, sup)) == 0.0);
    CHECK(std::abs(solve_scalar(cplx(s_star + 1e-6, 0.0), xi, pen, sup)) ==
          doctest::Approx(std::sqrt(P)));
    // exact tie goes silent
    CHECK(std::abs(solve_scalar(cplx(s_star, 0.0), xi, pen, sup)) == 0.0);
    // bpsk example from the remark: no ridge, P = 1, threshold 0.5
    const Penalty none = Penalty::ridge_only(0.0);
    CHECK(solve_scalar(cplx(0.6, 0.0), 1.0, none, sup).real() == doctest::Approx(1.0));
    CHECK(std::abs(solve_scalar(cplx(0.4, 0.0), 1.0, none, sup)) == 0.0);
}

TEST_CASE("psk rejects sparsity penalties") {
    const Support sup = Support::psk_zero(1.0, 2);
    CHECK_THROWS(solve_scalar(cplx(1.0, 0.0), 1.0, Penalty::ridge_l0(0.1, 0.3), sup));
    CHECK_THROWS(solve_scalar(cplx(1.0, 0.0), 1.0, Penalty::ridge_l1(0.1, 0.3), sup));
}

TEST_CASE("psk against an exhaustive enumeration") {
    const Support sup = Support::psk_zero(2.0, 8);
    const Penalty pen = Penalty::ridge_only(0.1);
    const double xi = 1.2;
    const double amp = std::sqrt(2.0);
    for (const cplx s : probe_points(6, 50, 3.0)) {
        const cplx fast = solve_scalar(s, xi, pen, sup);
        cplx best(0.0, 0.0);
        double fbest = scalar_objective(best, s, xi, pen, sup);
        for (int k = 0; k < 8; ++k) {
            const double th = 2.0 * M_PI * k / 8.0;
            const cplx v(amp * std::cos(th), amp * std::sin(th));
            const double f = scalar_objective(v, s, xi, pen, sup);
            if (f < fbest) { fbest = f; best = v; }
        }
        CHECK(scalar_objective(fast, s, xi, pen, sup) == doctest::Approx(fbest).epsilon(1e-12));
    }
}

TEST_CASE("activity boundaries match the hard threshold") {
    const double l = 0.4, l0 = 0.7, xi = 1.5;
    const auto b =
        activity_boundaries(xi, Penalty::ridge_l0(l, l0), Support::complex_plane(), 10.0);
    REQUIRE(b.size() == 1);
    CHECK(b[0] == doctest::Approx(std::sqrt(xi * l0 * (1.0 + xi * l))).epsilon(1e-8));
}

TEST_CASE("penalty validation rejects mixed sparsity terms") {
    Penalty p;
    p.ridge = 0.1; p.zero_norm = 0.2; p.l1 = 0.3;
    CHECK_THROWS(p.validate());
    Penalty q;
    q.ridge = -0.1;
    CHECK_THROWS(q.validate());
}
