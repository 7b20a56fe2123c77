"""Maximal certified prefix search over a feature ranking.

The search asks a reachability solver whether perturbing the top-``u`` ranked features by
``epsilon`` can make the target class reach the predicted class.  Because supersets of a
perturbed subset have larger reach sets, the verdict is monotone in ``u`` for the interval and
exact solvers and a binary search finds the longest certified prefix in
``floor(log2(n + 1)) + 1`` solver calls.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import PredictionMismatch, SameClass
from .heuristics import Heuristic, Ranking, make_ranking, rank_random
from .metrics import fidelity, worst_case_input
from .model import _check_class, _check_input, predict
from .reach import (
    DEFAULT_SPLIT_BUDGET,
    ClassBounds,
    PerturbationSet,
    Solver,
    SolverStats,
    SpecResult,
    check_spec,
    get_solver,
)

log = logging.getLogger(__name__)


@dataclass
class ExplainRequest:
    net: object
    x: np.ndarray
    t: int
    epsilon: float
    y: int | None = None
    solver: object = Solver.INTERVAL
    heuristic: Heuristic = Heuristic.SALIENCY
    dominance: bool = False
    clamp_domain: bool = False
    seed: int = 0
    budget: int = DEFAULT_SPLIT_BUDGET
    ig_steps: int = 50

    def __post_init__(self):
        self.x = _check_input(self.net, self.x)
        self.t = _check_class(self.net, self.t)
        predicted = predict(self.net, self.x)
        if self.y is None:
            self.y = predicted
        self.y = _check_class(self.net, self.y)
        if self.y != predicted:
            raise PredictionMismatch(
                f"class {self.y} was given but the network predicts {predicted}"
            )
        if self.t == self.y:
            raise SameClass("target class must differ from the predicted class")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        self.epsilon = float(self.epsilon)
        if isinstance(self.solver, str):
            self.solver = Solver(self.solver)
        self.heuristic = Heuristic(self.heuristic)

    @property
    def n(self) -> int:
        return self.net.n

    def perturbation_set(self, subset=()) -> PerturbationSet:
        return PerturbationSet(self.x, self.epsilon, tuple(subset), clamp_domain=self.clamp_domain)

    def ranking(self) -> Ranking:
        return make_ranking(
            self.heuristic, self.net, self.x, self.t, seed=self.seed, ig_steps=self.ig_steps
        )


@dataclass(frozen=True)
class Probe:
    prefix_len: int
    holds: bool
    target_margin: float


@dataclass
class Explanation:
    A: tuple
    pi: Ranking
    violating_classes: tuple
    probe_log: list
    oracle_calls: int
    stats: SolverStats
    maximal_certified: bool
    final_bounds: ClassBounds | None = None

    @property
    def cardinality(self) -> int:
        return len(self.A)


def max_oracle_calls(n: int) -> int:
    """Upper bound on solver calls of the binary search over ``n`` features."""
    return int(math.floor(math.log2(n + 1))) + 1


def binary_search_prefix(holds: Callable[[int], bool], n: int):
    """Largest ``u`` in ``[0, n]`` with ``holds(u)`` under the midpoint rule.

    Returns ``(best, probed)`` where ``best`` is None when no prefix held and ``probed`` is the
    sequence of lengths queried.
    """
    lo, hi = 0, n
    best = None
    probed = []
    while lo <= hi:
        u = (lo + hi) // 2
        probed.append(u)
        if holds(u):
            best = u
            lo = u + 1
        else:
            hi = u - 1
    return best, probed


def linear_scan_prefix(holds: Callable[[int], bool], n: int):
    """Same contract as :func:`binary_search_prefix`, scanning upward to the first failure."""
    best = None
    probed = []
    for u in range(n + 1):
        probed.append(u)
        if not holds(u):
            break
        best = u
    return best, probed


class _PrefixOracle:
    """Memoised ``u -> SpecResult`` for a fixed request and ordering."""

    def __init__(self, req: ExplainRequest, order, solver=None):
        self.req = req
        self.order = np.asarray(order)
        self.solve = get_solver(solver if solver is not None else req.solver, req.budget)
        self.stats = SolverStats()
        self.results: dict[int, SpecResult] = {}
        self.bounds: dict[int, ClassBounds] = {}
        self.log: list[Probe] = []

    def __call__(self, u: int) -> bool:
        if u not in self.results:
            pset = self.req.perturbation_set(self.order[:u])
            bounds = self.solve(self.req.net, pset, stats=self.stats)
            res = check_spec(bounds, self.req.y, self.req.t, self.req.dominance)
            self.results[u] = res
            self.bounds[u] = bounds
            self.log.append(Probe(u, res.holds, res.target_margin))
            log.debug("prefix %d: holds=%s margin=%.6g", u, res.holds, res.target_margin)
        return self.results[u].holds

    @property
    def calls(self) -> int:
        return len(self.results)


def _finish(req, pi, oracle, best, post_check: bool) -> Explanation:
    n = req.n
    size = 0 if best is None else best
    maximal = True
    if post_check and size < n and oracle(size + 1):
        # the verdict was not monotone: extend upward until the first failure
        log.info("relaxation verdict not monotone at prefix %d; scanning upward", size + 1)
        maximal = False
        size += 1
        while size < n and oracle(size + 1):
            size += 1
    if size < n and (size + 1) in oracle.results:
        violating = oracle.results[size + 1].violating_classes
        maximal = maximal and not oracle.results[size + 1].holds
    else:
        violating = ()
        maximal = maximal and size == n
    last = oracle.log[-1].prefix_len if oracle.log else None
    return Explanation(
        A=tuple(int(i) for i in pi.order[:size]),
        pi=pi,
        violating_classes=tuple(violating),
        probe_log=list(oracle.log),
        oracle_calls=oracle.calls,
        stats=oracle.stats,
        maximal_certified=maximal,
        final_bounds=oracle.bounds.get(last),
    )


def vitax_explain(req: ExplainRequest, ranking: Ranking | None = None, solver=None) -> Explanation:
    """Longest certified prefix of the heuristic ranking, found by binary search.

    ``ranking`` and ``solver`` override the request's heuristic and solver (the latter may be
    any callable ``(net, pset, stats=...) -> ClassBounds``).
    """
    pi = ranking if ranking is not None else req.ranking()
    oracle = _PrefixOracle(req, pi.order, solver)
    best, _ = binary_search_prefix(oracle, req.n)
    post_check = solver is None and req.solver is Solver.RELAX
    return _finish(req, pi, oracle, best, post_check)


def linear_scan_explain(
    req: ExplainRequest, ranking: Ranking | None = None, solver=None
) -> Explanation:
    """Reference search: grow the prefix one feature at a time until the check fails."""
    pi = ranking if ranking is not None else req.ranking()
    oracle = _PrefixOracle(req, pi.order, solver)
    best, _ = linear_scan_prefix(oracle, req.n)
    return _finish(req, pi, oracle, best, post_check=False)


def brute_force_explain(
    req: ExplainRequest, runs: int = 100, orderings=None, solver=None
) -> tuple[Explanation, float]:
    """Best-fidelity explanation over ``runs`` random orderings.

    Run ``r`` draws its ordering from ``rank_random(n, seed=(req.seed, r))`` unless
    ``orderings`` supplies them.  Returns the winning explanation (``oracle_calls`` and
    ``stats`` cover all runs) and its fidelity; ties keep the earliest run.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    total = SolverStats()
    calls = 0
    best = None
    for r in range(runs):
        if orderings is not None:
            pi = orderings[r] if isinstance(orderings[r], Ranking) else Ranking(
                orderings[r], np.zeros(req.n)
            )
        else:
            pi = rank_random(req.n, seed=[req.seed, r])
        exp = vitax_explain(req, ranking=pi, solver=solver)
        total.merge(exp.stats)
        calls += exp.oracle_calls
        x_adv = worst_case_input(req.net, req.x, exp.A, req.epsilon, req.t, req.clamp_domain)
        fid = fidelity(req.net, req.x, x_adv, req.y, req.t)
        if best is None or fid > best[1]:
            best = (exp, fid)
    exp, fid = best
    exp.oracle_calls = calls
    exp.stats = total
    return exp, fid


def verify_subset_bounds(
    net, x, y, t, epsilon, subset, solver=Solver.INTERVAL, dominance=False,
    clamp_domain=False, budget=DEFAULT_SPLIT_BUDGET, stats=None,
) -> tuple[SpecResult, ClassBounds]:
    pset = PerturbationSet(x, epsilon, tuple(subset), clamp_domain=clamp_domain)
    if pset.n != net.n:
        _check_input(net, x)
    bounds = get_solver(solver, budget)(net, pset, stats=stats)
    return check_spec(bounds, y, t, dominance), bounds


def verify_subset(
    net, x, y, t, epsilon, subset, solver=Solver.INTERVAL, dominance=False,
    clamp_domain=False, budget=DEFAULT_SPLIT_BUDGET,
) -> SpecResult:
    """Targeted robustness of an explicit feature subset."""
    return verify_subset_bounds(
        net, x, y, t, epsilon, subset, solver, dominance, clamp_domain, budget
    )[0]


__all__ = [
    "ExplainRequest",
    "Explanation",
    "Probe",
    "binary_search_prefix",
    "brute_force_explain",
    "linear_scan_explain",
    "linear_scan_prefix",
    "max_oracle_calls",
    "verify_subset",
    "verify_subset_bounds",
    "vitax_explain",
]
