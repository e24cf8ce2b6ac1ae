#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lseprec/harness.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace lseprec;

namespace {

const char* kSweepText = R"(# ridge sweep over the load
mode = rs
support = complex
rho = 1.0
lambda = 0.1

[sweep]
variable = alpha_inv
from = 2.0
to = 4.0
step = 1.0
)";

}  // namespace

TEST_CASE("config parser reads sections, comments, and values") {
    std::istringstream in(kSweepText);
    const SweepConfig cfg = parse_config(in);
    CHECK(cfg.mode == SweepMode::Rs);
    CHECK(cfg.support == SupportKind::ComplexPlane);
    CHECK(cfg.rho == 1.0);
    CHECK(cfg.lambda == 0.1);
    CHECK(cfg.variable == SweepVariable::AlphaInv);
    CHECK(cfg.from == 2.0);
    CHECK(cfg.to == 4.0);
    CHECK(cfg.step == 1.0);
}

TEST_CASE("config parser rejects malformed input") {
    std::istringstream bad_key("mode = rs\nwhatever = 3\n");
    CHECK_THROWS(parse_config(bad_key));
    std::istringstream bad_mode("mode = unknown\n");
    CHECK_THROWS(parse_config(bad_mode));
    std::istringstream no_eq("mode rs\n");
    CHECK_THROWS(parse_config(no_eq));
}

TEST_CASE("rs sweep runs and distortion falls as antennas are added") {
    std::istringstream in(kSweepText);
    SweepConfig cfg = parse_config(in);
    const std::vector<ResultRow> rows = run_sweep(cfg);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.converged);
        CHECK(row.mode == "rs");
        CHECK(row.sweep_variable == "alpha_inv");
    }
    CHECK(rows[0].sweep_value == 2.0);
    CHECK(rows[2].sweep_value == 4.0);
    CHECK(rows[0].distortion > rows[1].distortion);
    CHECK(rows[1].distortion > rows[2].distortion);
}

TEST_CASE("CSV output round-trips losslessly") {
    std::istringstream in(kSweepText);
    SweepConfig cfg = parse_config(in);
    cfg.out_path = "harness_roundtrip.csv";
    const std::vector<ResultRow> rows = run_sweep(cfg);
    const std::vector<ResultRow> back = read_csv(cfg.out_path);
    std::remove(cfg.out_path.c_str());
    REQUIRE(back.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(to_csv(back[i]) == to_csv(rows[i]));
        CHECK(back[i].distortion == rows[i].distortion);
        CHECK(back[i].chi == rows[i].chi);
    }
}

TEST_CASE("repeated sweeps are byte identical") {
    auto render = [] {
        std::istringstream in(kSweepText);
        SweepConfig cfg = parse_config(in);
        std::string out = csv_header();
        for (const auto& row : run_sweep(cfg)) out += to_csv(row);
        return out;
    };
    CHECK(render() == render());
}

TEST_CASE("eta calibration hits the target activity") {
    SweepConfig fixed;
    fixed.mode = SweepMode::Rs;
    fixed.alpha_inv = 2.0;
    fixed.rho = 1.0;
    fixed.lambda = 0.1;
    fixed.support = SupportKind::ComplexPlane;
    const CalibrationResult cal = calibrate_eta(SweepMode::Rs, 0.3, "lambda1", fixed);
    CHECK(cal.achieved_eta == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(cal.coefficient > 0.0);
    // Re-running the RS solve at the calibrated coefficient reproduces eta.
    const SpectralModel mp = SpectralModel::marchenko_pastur(0.5);
    const RsSolution sol = rs_solve(1.0, Penalty::ridge_l1(0.1, cal.coefficient),
                                    Support::complex_plane(), mp);
    REQUIRE(sol.converged);
    CHECK(sol.eta == doctest::Approx(0.3).epsilon(1e-3));
}

TEST_CASE("random TAS reference equals diluted ridge at the reduced load") {
    const RsSolution tas = random_tas_rs(2.0, 1.0, 0.1, 0.5);
    REQUIRE(tas.converged);
    // Keeping half the antennas doubles the load (alpha/eta = 1) and, after
    // rescaling columns to the standard variance, the ridge becomes lambda/eta.
    const SpectralModel mp = SpectralModel::marchenko_pastur(1.0);
    const RsSolution dense = rs_solve(1.0, Penalty::ridge_only(0.2),
                                      Support::complex_plane(), mp);
    CHECK(tas.distortion == doctest::Approx(dense.distortion).epsilon(1e-9));
    CHECK(tas.eta == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(tas.avg_power == doctest::Approx(dense.p).epsilon(1e-9));
    CHECK(tas.p == doctest::Approx(dense.p / 0.5).epsilon(1e-9));
}
