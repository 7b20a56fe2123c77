"""Explanation quality metrics: fidelity, cardinality, noisy-execution robustness, timing."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyDonorPool, ZeroDenominator
from .model import _check_class, _check_input, forward, gradient, normalize_minmax, predict


@dataclass
class MetricReport:
    fidelity: float | None
    cardinality: int
    cardinality_pct: float
    ne_robustness: float | None
    wall_time: float


def worst_case_input(net, x, subset, epsilon: float, t: int, clamp: bool = False) -> np.ndarray:
    """Signed-gradient corner of the epsilon box on ``subset``, pushing toward class ``t``."""
    x = _check_input(net, x)
    idx = np.asarray(list(subset), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= x.size):
        raise DimensionMismatch(f"subset indices must lie in [0, {x.size})")
    out = x.copy()
    if idx.size:
        step = np.sign(gradient(net, x, t))[idx]
        out[idx] = x[idx] + epsilon * step
        if clamp:
            out[idx] = np.clip(out[idx], 0.0, 1.0)
    return out


def fidelity_score(f_x, f_adv, y: int, t: int) -> float:
    """Shift of class ``t`` toward ``y`` minus how far other classes overtake ``t``.

    ``f_x`` and ``f_adv`` are the (already normalised) outputs at the original and the
    perturbed input; both terms are scaled by ``f_x[y]``.
    """
    f_x = np.asarray(f_x, dtype=np.float64)
    f_adv = np.asarray(f_adv, dtype=np.float64)
    denom = f_x[y]
    if denom == 0:
        raise ZeroDenominator("normalised output of the original class is zero")
    others = [k for k in range(f_x.size) if k not in (y, t)]
    penalty = sum(max(0.0, f_adv[k] - f_adv[t]) for k in others)
    return float((f_adv[t] - f_x[t]) / denom - penalty / denom)


def fidelity_from_logits(logits_x, logits_adv, y: int, t: int) -> float:
    """:func:`fidelity_score` after min-max normalising each logit vector on its own."""
    return fidelity_score(normalize_minmax(logits_x), normalize_minmax(logits_adv), y, t)


def fidelity(net, x, x_prime, y: int, t: int) -> float:
    y = _check_class(net, y)
    t = _check_class(net, t)
    return fidelity_from_logits(forward(net, x), forward(net, x_prime), y, t)


def ne_robustness(net, x, subset, t: int, donors, trials: int = 500, seed: int = 0) -> float:
    """Fraction of trials whose prediction does not become ``t`` when features outside
    ``subset`` are copied from a randomly drawn donor.

    Trial ``i`` draws its donor with ``default_rng([seed, i])``, so the score does not depend
    on evaluation order.
    """
    x = _check_input(net, x)
    t = _check_class(net, t)
    donors = np.asarray(donors, dtype=np.float64)
    if donors.size == 0:
        raise EmptyDonorPool("no donor samples of the target class")
    donors = donors.reshape(-1, x.size) if donors.ndim == 1 else donors
    if donors.shape[1] != x.size:
        raise DimensionMismatch(f"donors have {donors.shape[1]} features, expected {x.size}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    keep = np.zeros(x.size, dtype=bool)
    keep[list(subset)] = True
    ok = 0
    for i in range(trials):
        donor = donors[np.random.default_rng([seed, i]).integers(donors.shape[0])]
        mixed = np.where(keep, x, donor)
        ok += predict(net, mixed) != t
    return ok / trials


@contextmanager
def stopwatch():
    """``with stopwatch() as sw: ...`` then ``sw.elapsed`` holds monotonic seconds."""
    sw = _Elapsed()
    start = time.perf_counter()
    try:
        yield sw
    finally:
        sw.elapsed = time.perf_counter() - start


class _Elapsed:
    elapsed: float = 0.0


def timing(fn, *args, **kwargs):
    """Run ``fn`` and return ``(result, seconds)``."""
    with stopwatch() as sw:
        result = fn(*args, **kwargs)
    return result, sw.elapsed
