"""Asymptotic and finite-size analysis of nonlinear LSE precoders."""

from lseprec._core import (
    Penalty,
    ProblemInstance,
    RsSolution,
    RsbSolution,
    SolveResult,
    SpectralModel,
    Support,
    dump_instance,
    load_instance,
    random_tas,
    rs_solve,
    rsb_solve,
    run_sweep_config,
    sample_instance,
    scalar_objective,
    solve_convex,
    solve_coordinate,
    solve_rzf,
    solve_scalar,
)

__all__ = [
    "Penalty",
    "ProblemInstance",
    "RsSolution",
    "RsbSolution",
    "SolveResult",
    "SpectralModel",
    "Support",
    "dump_instance",
    "load_instance",
    "random_tas",
    "rs_solve",
    "rsb_solve",
    "run_sweep_config",
    "sample_instance",
    "scalar_objective",
    "solve_convex",
    "solve_coordinate",
    "solve_rzf",
    "solve_scalar",
]
