#include "lseprec/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace lseprec;

void add_common_flags(CLI::App* cmd, SweepConfig& cfg, std::string& spectral,
                      std::string& support) {
    cmd->add_option("--alpha-inv", cfg.alpha_inv, "inverse load factor n/k");
    cmd->add_option("--rho", cfg.rho, "power control factor");
    cmd->add_option("--lambda", cfg.lambda, "ridge coefficient");
    cmd->add_option("--lambda0", cfg.lambda0, "zero-norm coefficient");
    cmd->add_option("--lambda1", cfg.lambda1, "l1 coefficient");
    cmd->add_option("--support", support, "complex|disc|psk");
    cmd->add_option("--peak", cfg.peak, "peak power P (disc, psk)");
    cmd->add_option("--psk-order", cfg.psk_order, "PSK constellation order M");
    cmd->add_option("--spectral", spectral, "mp|point|file:<path>");
    cmd->add_option("--n", cfg.n, "finite problem size");
    cmd->add_option("--trials", cfg.trials, "finite trial count");
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--out", cfg.out_path, "CSV output path");
    cmd->add_option("--tol", cfg.tol, "fixed-point tolerance");
    cmd->add_option("--max-iter", cfg.max_iter, "fixed-point iteration cap");
}

void apply_specs(SweepConfig& cfg, const std::string& spectral, const std::string& support) {
    if (spectral == "mp") cfg.spectral.kind = SpectralSpec::Kind::MarchenkoPastur;
    else if (spectral == "point") cfg.spectral.kind = SpectralSpec::Kind::PointMass;
    else if (spectral.rfind("file:", 0) == 0) {
        cfg.spectral.kind = SpectralSpec::Kind::File;
        cfg.spectral.path = spectral.substr(5);
    } else throw CLI::ValidationError("--spectral", "expected mp|point|file:<path>");

    if (support == "complex") cfg.support = SupportKind::ComplexPlane;
    else if (support == "disc") cfg.support = SupportKind::Disc;
    else if (support == "psk") cfg.support = SupportKind::PskZero;
    else throw CLI::ValidationError("--support", "expected complex|disc|psk");
}

int emit_rows(const SweepConfig& cfg) {
    const std::vector<ResultRow> rows = run_sweep(cfg);
    if (cfg.out_path.empty()) {
        std::cout << csv_header() << '\n';
        for (const auto& r : rows) std::cout << to_csv(r) << '\n';
    }
    for (const auto& r : rows)
        if (!r.converged) return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic and finite-size analysis of nonlinear LSE precoders"};
    app.require_subcommand(1);

    SweepConfig cfg;
    std::string spectral = "mp", support = "complex";
    std::string config_path, tunable;
    double target_eta = -1.0, tas_eta = 0.3;
    double xi = 1.0, rho_rs = 1.0;

    auto* rs = app.add_subcommand("rs", "replica-symmetric fixed point");
    add_common_flags(rs, cfg, spectral, support);

    auto* rsb = app.add_subcommand("rsb", "one-step RSB fixed point");
    add_common_flags(rsb, cfg, spectral, support);

    auto* finite = app.add_subcommand("finite", "finite-size Monte Carlo solve");
    add_common_flags(finite, cfg, spectral, support);

    auto* rtas = app.add_subcommand("random-tas", "random antenna-selection baseline");
    add_common_flags(rtas, cfg, spectral, support);
    rtas->add_option("--eta", tas_eta, "selected antenna fraction");

    auto* dec = app.add_subcommand("decoupled", "decoupled precoder statistics");
    add_common_flags(dec, cfg, spectral, support);
    dec->add_option("--xi", xi, "decoupled regularization scale");
    dec->add_option("--rho-rs", rho_rs, "decoupled input variance");

    auto* sweep = app.add_subcommand("sweep", "run a sweep described by a config file");
    sweep->add_option("--config", config_path, "config file path")->required();

    auto* cal = app.add_subcommand("calibrate", "tune a coefficient for a target eta");
    add_common_flags(cal, cfg, spectral, support);
    cal->add_option("--target-eta", target_eta, "target active fraction")->required();
    cal->add_option("--tunable", tunable, "lambda|lambda0|lambda1")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) {
            return emit_rows(parse_config_file(config_path));
        }
        apply_specs(cfg, spectral, support);
        if (rs->parsed()) cfg.mode = SweepMode::Rs;
        else if (rsb->parsed()) cfg.mode = SweepMode::Rsb;
        else if (finite->parsed()) cfg.mode = SweepMode::Finite;
        else if (rtas->parsed()) { cfg.mode = SweepMode::RandomTas; cfg.tas_eta = tas_eta; }
        else if (dec->parsed()) {
            cfg.mode = SweepMode::DecoupledEval;
            cfg.xi = xi;
            cfg.rho_rs = rho_rs;
        } else if (cal->parsed()) {
            const CalibrationResult res = calibrate_eta(SweepMode::Rs, target_eta, tunable, cfg);
            std::printf("%s = %.17g  (achieved eta %.6f in %d bisections)\n", tunable.c_str(),
                        res.coefficient, res.achieved_eta, res.iterations);
            return 0;
        }
        return emit_rows(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
