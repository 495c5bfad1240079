"""Incremental minimization schemes for rate-independent evolutions."""

from ._ris import (
    ConfigError,
    ExactSolution,
    KktResiduals,
    OutOfRangeError,
    PhysicalSolution,
    Problem,
    SolverError,
    StepRecord,
    SubproblemResult,
    Trajectory,
    bifurcation_scan,
    convergence_study,
    counterexample_branches,
    counterexample_problem,
    filter_progress,
    locally_convex_exact,
    locally_convex_problem,
    make_problem,
    pde_exact,
    pde_problem,
    run_global,
    run_local,
    solve_global_step,
    solve_local_step,
    stability_set_1d,
    sup_error,
)

__all__ = [
    "ConfigError",
    "ExactSolution",
    "KktResiduals",
    "OutOfRangeError",
    "PhysicalSolution",
    "Problem",
    "SolverError",
    "StepRecord",
    "SubproblemResult",
    "Trajectory",
    "bifurcation_scan",
    "convergence_study",
    "counterexample_branches",
    "counterexample_problem",
    "filter_progress",
    "locally_convex_exact",
    "locally_convex_problem",
    "make_problem",
    "pde_exact",
    "pde_problem",
    "run_global",
    "run_local",
    "solve_global_step",
    "solve_local_step",
    "stability_set_1d",
    "sup_error",
]
