"""Feature traversal orders: gradient saliency, integrated gradients and seeded random."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch
from .model import _check_class, _check_input, gradient


class Heuristic(str, Enum):
    SALIENCY = "saliency"
    INTEGRATED_GRADIENTS = "ig"
    RANDOM = "random"


@dataclass(frozen=True, eq=False)
class Ranking:
    """``order`` lists feature indices from most to least important."""

    order: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.int64)
        scores = np.asarray(self.scores, dtype=np.float64)
        if order.shape != scores.shape or not np.array_equal(
            np.sort(order), np.arange(order.size)
        ):
            raise ValueError("order must be a permutation matching the scores")
        order.setflags(write=False)
        scores.setflags(write=False)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "scores", scores)

    @property
    def n(self) -> int:
        return self.order.size

    def prefix(self, u: int) -> tuple:
        return tuple(int(i) for i in self.order[:u])


def order_by_magnitude(scores) -> np.ndarray:
    """Indices sorted by ``|score|`` descending, ties broken by ascending index."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.argsort(-np.abs(scores), kind="stable")


def rank_from_scores(scores) -> Ranking:
    return Ranking(order_by_magnitude(scores), scores)


def rank_saliency(net, x, t: int) -> Ranking:
    return rank_from_scores(gradient(net, x, t))


def integrated_gradients(net, x, t: int, baseline=None, steps: int = 50) -> np.ndarray:
    """Midpoint Riemann approximation of integrated gradients along the straight path."""
    x = _check_input(net, x)
    t = _check_class(net, t)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    b = np.zeros_like(x) if baseline is None else np.asarray(baseline, dtype=np.float64)
    if b.shape != x.shape:
        raise DimensionMismatch(f"baseline has shape {b.shape}, expected {x.shape}")
    alphas = (np.arange(1, steps + 1) - 0.5) / steps
    total = np.zeros_like(x)
    for a in alphas:
        total += gradient(net, b + a * (x - b), t)
    return (x - b) * total / steps


def rank_integrated_gradients(net, x, t: int, baseline=None, steps: int = 50) -> Ranking:
    return rank_from_scores(integrated_gradients(net, x, t, baseline, steps))


def rank_random(n: int, seed: int) -> Ranking:
    if n < 1:
        raise ValueError("n must be at least 1")
    order = np.random.default_rng(seed).permutation(n)
    return Ranking(order, np.zeros(n))


def make_ranking(heuristic, net, x, t: int, seed: int = 0, ig_steps: int = 50) -> Ranking:
    heuristic = Heuristic(heuristic)
    if heuristic is Heuristic.SALIENCY:
        return rank_saliency(net, x, t)
    if heuristic is Heuristic.INTEGRATED_GRADIENTS:
        return rank_integrated_gradients(net, x, t, steps=ig_steps)
    return rank_random(net.n, seed)
