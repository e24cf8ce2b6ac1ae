#include "lseprec/decoupled.hpp"
#include "lseprec/finite_sim.hpp"
#include "lseprec/harness.hpp"
#include "lseprec/rs_solver.hpp"
#include "lseprec/rsb_solver.hpp"
#include "lseprec/spectral.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace lseprec;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Asymptotic and finite-size analysis of nonlinear LSE precoders";

    py::class_<SpectralModel>(m, "SpectralModel")
        .def_static("marchenko_pastur", &SpectralModel::marchenko_pastur, py::arg("alpha"))
        .def_static("point_mass", &SpectralModel::point_mass, py::arg("alpha"), py::arg("atom"))
        .def_static("empirical", &SpectralModel::empirical, py::arg("alpha"),
                    py::arg("eigenvalues"))
        .def_static("empirical_from_file", &SpectralModel::empirical_from_file, py::arg("alpha"),
                    py::arg("path"))
        .def("r_transform", &SpectralModel::r_transform, py::arg("omega"))
        .def("r_derivative", &SpectralModel::r_derivative, py::arg("omega"))
        .def("r_integral", &SpectralModel::r_integral, py::arg("a"), py::arg("b"))
        .def("build_cache", &SpectralModel::build_cache, py::arg("omega_min"),
             py::arg("omega_max"), py::arg("points"))
        .def_property_readonly("alpha", &SpectralModel::alpha);

    py::class_<Penalty>(m, "Penalty")
        .def_static("ridge_only", &Penalty::ridge_only, py::arg("l"))
        .def_static("ridge_l0", &Penalty::ridge_l0, py::arg("l"), py::arg("l0"))
        .def_static("ridge_l1", &Penalty::ridge_l1, py::arg("l"), py::arg("l1"))
        .def_readonly("ridge", &Penalty::ridge)
        .def_readonly("zero_norm", &Penalty::zero_norm)
        .def_readonly("l1", &Penalty::l1);

    py::class_<Support>(m, "Support")
        .def_static("complex_plane", &Support::complex_plane)
        .def_static("disc", &Support::disc, py::arg("peak_power"))
        .def_static("psk_zero", &Support::psk_zero, py::arg("peak_power"), py::arg("order"));

    m.def("solve_scalar", &solve_scalar, py::arg("s"), py::arg("xi"), py::arg("penalty"),
          py::arg("support"), "Decoupled single-letter precoder output.");
    m.def("scalar_objective", &scalar_objective, py::arg("v"), py::arg("s"), py::arg("xi"),
          py::arg("penalty"), py::arg("support"));

    py::class_<RsSolution>(m, "RsSolution")
        .def_readonly("chi", &RsSolution::chi)
        .def_readonly("p", &RsSolution::p)
        .def_readonly("xi", &RsSolution::xi)
        .def_readonly("rho_rs", &RsSolution::rho_rs)
        .def_readonly("distortion", &RsSolution::distortion)
        .def_readonly("distortion_db", &RsSolution::distortion_db)
        .def_readonly("eta", &RsSolution::eta)
        .def_readonly("avg_power", &RsSolution::avg_power)
        .def_readonly("papr", &RsSolution::papr)
        .def_readonly("iterations", &RsSolution::iterations)
        .def_readonly("converged", &RsSolution::converged)
        .def("__repr__", [](const RsSolution& s) {
            return "RsSolution(chi=" + std::to_string(s.chi) + ", p=" + std::to_string(s.p) +
                   ", distortion=" + std::to_string(s.distortion) + ")";
        });

    m.def(
        "rs_solve",
        [](double rho, const Penalty& pen, const Support& sup, const SpectralModel& spec,
           double tol, int max_iter) {
            RsOptions opt;
            opt.tol = tol;
            opt.max_iter = max_iter;
            return rs_solve(rho, pen, sup, spec, opt);
        },
        py::arg("rho"), py::arg("penalty"), py::arg("support"), py::arg("spectral"),
        py::arg("tol") = 1e-10, py::arg("max_iter") = 2000,
        "Replica-symmetric fixed point and asymptotic distortion.");

    py::class_<RsbSolution>(m, "RsbSolution")
        .def_readonly("chi", &RsbSolution::chi)
        .def_readonly("c", &RsbSolution::c)
        .def_readonly("p", &RsbSolution::p)
        .def_readonly("mu", &RsbSolution::mu)
        .def_readonly("xi", &RsbSolution::xi)
        .def_readonly("chi_tilde", &RsbSolution::chi_tilde)
        .def_readonly("rho_rs", &RsbSolution::rho_rs)
        .def_readonly("rho_rsb1", &RsbSolution::rho_rsb1)
        .def_readonly("distortion", &RsbSolution::distortion)
        .def_readonly("distortion_db", &RsbSolution::distortion_db)
        .def_readonly("eta", &RsbSolution::eta)
        .def_readonly("avg_power", &RsbSolution::avg_power)
        .def_readonly("converged", &RsbSolution::converged)
        .def_readonly("rsb_found", &RsbSolution::rsb_found);

    m.def(
        "rsb_solve",
        [](double rho, const Penalty& pen, const Support& sup, const SpectralModel& spec) {
            return rsb_solve(rho, pen, sup, spec);
        },
        py::arg("rho"), py::arg("penalty"), py::arg("support"), py::arg("spectral"),
        "One-step replica-symmetry-breaking fixed point (RS fallback when no "
        "broken branch exists).");

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("x", &SolveResult::x)
        .def_readonly("objective", &SolveResult::objective)
        .def_readonly("distortion", &SolveResult::distortion)
        .def_readonly("active_fraction", &SolveResult::active_fraction)
        .def_readonly("avg_power", &SolveResult::avg_power)
        .def_readonly("iterations", &SolveResult::iterations)
        .def_readonly("converged", &SolveResult::converged);

    py::class_<ProblemInstance>(m, "ProblemInstance")
        .def_readonly("H", &ProblemInstance::H)
        .def_readonly("s", &ProblemInstance::s)
        .def_readonly("rho", &ProblemInstance::rho)
        .def_property_readonly("n", &ProblemInstance::n)
        .def_property_readonly("k", &ProblemInstance::k);

    m.def(
        "sample_instance",
        [](int n, double alpha, double rho, const Penalty& pen, const Support& sup,
           std::uint64_t seed) {
            return sample_instance(n, alpha, rho, pen, sup, ChannelModel::IidGaussian, seed);
        },
        py::arg("n"), py::arg("alpha"), py::arg("rho"), py::arg("penalty"), py::arg("support"),
        py::arg("seed"), "i.i.d. Gaussian channel instance (entries CN(0, 1/n)).");
    m.def("solve_rzf", &solve_rzf, py::arg("instance"));
    m.def(
        "solve_convex",
        [](const ProblemInstance& inst) { return solve_convex(inst); }, py::arg("instance"));
    m.def(
        "solve_coordinate",
        [](const ProblemInstance& inst) { return solve_coordinate(inst); }, py::arg("instance"));
    m.def("random_tas", &random_tas, py::arg("instance"), py::arg("eta_target"),
          py::arg("lambda_"));
    m.def("dump_instance", &dump_instance, py::arg("instance"), py::arg("path"));
    m.def("load_instance", &load_instance, py::arg("path"), py::arg("rho"), py::arg("penalty"),
          py::arg("support"));

    m.def("run_sweep_config", [](const std::string& path) {
        const SweepConfig cfg = parse_config_file(path);
        std::string csv = csv_header();
        for (const auto& row : run_sweep(cfg)) {
            csv += '\n';
            csv += to_csv(row);
        }
        return csv;
    }, py::arg("config_path"), "Run a config-file sweep and return the CSV text.");
}
