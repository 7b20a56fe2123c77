"""Exact per-class logit ranges by ReLU phase splitting and linear programming.

Each leaf of the search carries an affine map from the free input coordinates to the current
layer together with the half-spaces fixing the phases chosen so far.  Once every ReLU of a leaf
is fixed the network is affine on the leaf polytope, and its per-class extremes are LP optima.
The reported range of a class is the union over feasible leaves (plain min/max reductions, so
the result does not depend on the order leaves are visited).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..errors import InfeasibleLP, SolverError, SplitBudgetExceeded
from . import simplex
from .interval import _check
from .relax import reach_linear_relax
from .sets import ClassBounds, PerturbationSet, SolverStats

#: LP tolerance for bounds reported by :func:`reach_exact`.
TAU_LP = 1e-7
DEFAULT_SPLIT_BUDGET = 4096

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}
# outward padding of LP optima; absorbs solver round-off, stays far below TAU_LP
_SLACK = 1e-9


@dataclass
class _Leaf:
    coef: np.ndarray  # (width, d) affine map from free inputs to the current layer
    const: np.ndarray  # (width,)
    a_ub: np.ndarray  # (k, d) phase constraints a_ub @ x <= b_ub
    b_ub: np.ndarray


class _LP:
    def __init__(self, lo, hi, backend, stats):
        self.lo, self.hi = lo, hi
        self.bounds = list(zip(lo.tolist(), hi.tolist()))
        self.backend = backend
        self.stats = stats

    def minimize(self, c, a_ub, b_ub):
        """Minimum of ``c @ x`` over the leaf polytope, or None if the polytope is empty."""
        self.stats.lp_solves += 1
        if self.backend == "simplex":
            res = simplex.solve_lp(c, a_ub, b_ub, self.lo, self.hi)
            if res.status == simplex.INFEASIBLE:
                return None
            return res.fun
        res = linprog(
            c,
            A_ub=a_ub if a_ub.size else None,
            b_ub=b_ub if b_ub.size else None,
            bounds=self.bounds,
            method="highs",
            options=_HIGHS_OPTIONS,
        )
        if res.status == 2:
            return None
        if res.status != 0:
            raise SolverError(f"LP backend failed: {res.message}")
        return float(res.fun)

    def range(self, row, const, leaf):
        """``(min, max)`` of ``row @ x + const`` on the leaf, or None if empty."""
        lo = self.minimize(row, leaf.a_ub, leaf.b_ub)
        if lo is None:
            return None
        hi = self.minimize(-row, leaf.a_ub, leaf.b_ub)
        if hi is None:
            return None
        return lo + const, -hi + const


def _box_range(row, const, lo, hi):
    pos, neg = np.maximum(row, 0.0), np.minimum(row, 0.0)
    return pos @ lo + neg @ hi + const, pos @ hi + neg @ lo + const


def reach_exact(
    net,
    pset: PerturbationSet,
    budget: int = DEFAULT_SPLIT_BUDGET,
    stats: SolverStats | None = None,
    lp_backend: str = "highs",
) -> ClassBounds:
    """Tight per-class logit bounds (within :data:`TAU_LP`) over the perturbation set.

    Raises :class:`SplitBudgetExceeded` once more than ``budget`` ReLU splits are needed.
    The result is intersected with the linear relaxation's bounds, which are sound as well.
    """
    _check(net, pset)
    if budget < 1:
        raise ValueError("split budget must be at least 1")
    if lp_backend not in ("highs", "simplex"):
        raise ValueError(f"unknown LP backend {lp_backend!r}")
    own = SolverStats()
    start = time.perf_counter()
    try:
        return _reach_exact(net, pset, budget, own, lp_backend)
    finally:
        own.bound_queries += 1
        own.wall_time = time.perf_counter() - start
        if stats is not None:
            stats.merge(own)


def _reach_exact(net, pset, budget, stats, lp_backend):
    relaxed = reach_linear_relax(net, pset)
    free = pset.free
    if free.size == 0:
        y = net.forward(pset.center)
        pad = _SLACK * (1.0 + np.abs(y))
        return _clip_to(y - pad, y + pad, relaxed)

    lo, hi = pset.free_box()
    pinned = np.setdiff1d(np.arange(pset.n), free)
    first = net.layers[0]
    lp = _LP(lo, hi, lp_backend, stats)
    d = free.size
    leaves = [
        _Leaf(
            first.weights[:, free].copy(),
            first.bias + first.weights[:, pinned] @ pset.center[pinned],
            np.zeros((0, d)),
            np.zeros(0),
        )
    ]

    for k, layer in enumerate(net.layers):
        if k > 0:
            for leaf in leaves:
                leaf.const = layer.weights @ leaf.const + layer.bias
                leaf.coef = layer.weights @ leaf.coef
        if not layer.is_relu:
            continue
        for i in range(layer.out_dim):
            next_leaves = []
            for leaf in leaves:
                row, const = leaf.coef[i], leaf.const[i]
                zmin, zmax = _box_range(row, const, lo, hi)
                if zmin >= 0:
                    next_leaves.append(leaf)
                    continue
                if zmax <= 0:
                    leaf.coef[i] = 0.0
                    leaf.const[i] = 0.0
                    next_leaves.append(leaf)
                    continue
                if leaf.b_ub.size:
                    rng = lp.range(row, const, leaf)
                    if rng is None:
                        continue
                    # a phase only counts as fixed with a margin above LP round-off
                    margin = TAU_LP * (1.0 + np.abs(row).sum() + abs(const))
                    if rng[0] >= margin:
                        next_leaves.append(leaf)
                        continue
                    if rng[1] <= -margin:
                        leaf.coef[i] = 0.0
                        leaf.const[i] = 0.0
                        next_leaves.append(leaf)
                        continue
                stats.relu_splits += 1
                if stats.relu_splits > budget:
                    raise SplitBudgetExceeded(
                        f"exact analysis needs more than {budget} ReLU splits"
                    )
                active = _Leaf(
                    leaf.coef.copy(),
                    leaf.const.copy(),
                    np.vstack([leaf.a_ub, -row]),
                    np.append(leaf.b_ub, const),
                )
                inactive = _Leaf(
                    leaf.coef.copy(),
                    leaf.const.copy(),
                    np.vstack([leaf.a_ub, row]),
                    np.append(leaf.b_ub, -const),
                )
                inactive.coef[i] = 0.0
                inactive.const[i] = 0.0
                next_leaves.extend((active, inactive))
            leaves = next_leaves

    m = net.m
    lower = np.full(m, np.inf)
    upper = np.full(m, -np.inf)
    feasible = False
    for leaf in leaves:
        leaf_alive = True
        for c in range(m):
            row, const = leaf.coef[c], leaf.const[c]
            bmin, bmax = _box_range(row, const, lo, hi)
            if not leaf.b_ub.size:
                lower[c] = min(lower[c], bmin - _SLACK * (1.0 + abs(bmin)))
                upper[c] = max(upper[c], bmax + _SLACK * (1.0 + abs(bmax)))
                continue
            # skip LPs that cannot move the running union
            if bmin < lower[c]:
                v = lp.minimize(row, leaf.a_ub, leaf.b_ub)
                if v is None:
                    leaf_alive = False
                    break
                v += const
                lower[c] = min(lower[c], v - _SLACK * (1.0 + abs(v)))
            if bmax > upper[c]:
                v = lp.minimize(-row, leaf.a_ub, leaf.b_ub)
                if v is None:
                    leaf_alive = False
                    break
                v = -v + const
                upper[c] = max(upper[c], v + _SLACK * (1.0 + abs(v)))
        feasible = feasible or leaf_alive
    if not feasible or not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise InfeasibleLP("every leaf polytope was empty; the input box cannot be empty")

    return _clip_to(lower, upper, relaxed)


def _clip_to(lower, upper, outer: ClassBounds) -> ClassBounds:
    lower = np.minimum(np.maximum(lower, outer.lower), outer.upper)
    upper = np.maximum(np.minimum(upper, outer.upper), lower)
    return ClassBounds(lower, upper)
