"""Reachability: perturbation sets, three sound solvers and the targeted robustness check."""

from __future__ import annotations

from enum import Enum
from functools import partial

from .exact import DEFAULT_SPLIT_BUDGET, TAU_LP, reach_exact
from .interval import reach_interval
from .relax import reach_linear_relax
from .sets import (
    ClassBounds,
    PerturbationSet,
    SolverStats,
    SpecResult,
    check_spec,
    sample_member,
    sample_members,
)


class Solver(str, Enum):
    """Solvers ordered from fastest/loosest to slowest/tightest."""

    INTERVAL = "interval"
    RELAX = "relax"
    EXACT = "exact"


def get_solver(solver, budget: int = DEFAULT_SPLIT_BUDGET):
    """Resolve a solver name (or pass through a callable ``(net, pset, stats=...)``)."""
    if callable(solver) and not isinstance(solver, str):
        return solver
    solver = Solver(solver)
    if solver is Solver.INTERVAL:
        return reach_interval
    if solver is Solver.RELAX:
        return reach_linear_relax
    return partial(reach_exact, budget=budget)


__all__ = [
    "ClassBounds",
    "DEFAULT_SPLIT_BUDGET",
    "PerturbationSet",
    "Solver",
    "SolverStats",
    "SpecResult",
    "TAU_LP",
    "check_spec",
    "get_solver",
    "reach_exact",
    "reach_interval",
    "reach_linear_relax",
    "sample_member",
    "sample_members",
]
