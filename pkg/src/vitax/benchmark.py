"""Dataset-level studies: per-class-pair cardinality matrix, heuristic comparison, epsilon sweep."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .explain import ExplainRequest, vitax_explain
from .heuristics import Heuristic
from .model import forward, predict
from .reach import DEFAULT_SPLIT_BUDGET, Solver

log = logging.getLogger(__name__)


@dataclass
class CardinalityMatrix:
    """``mean_pct[y, t]`` is the mean ``|A| / n`` over samples of class ``y`` explained toward
    ``t``; NaN where no sample contributed (always on the diagonal)."""

    mean_pct: np.ndarray
    sample_counts: np.ndarray

    def cell(self, y: int, t: int) -> float | None:
        v = self.mean_pct[y, t]
        return None if np.isnan(v) else float(v)

    def rows(self):
        """``(y, t, mean_pct, count)`` for every filled cell, row-major."""
        m = self.mean_pct.shape[0]
        return [
            (y, t, float(self.mean_pct[y, t]), int(self.sample_counts[y, t]))
            for y in range(m)
            for t in range(m)
            if y != t and self.sample_counts[y, t] > 0
        ]


def correctly_predicted(net, X, labels) -> np.ndarray:
    """Indices of samples the network classifies correctly, in dataset order."""
    return np.array(
        [i for i, (x, lab) in enumerate(zip(X, labels)) if predict(net, x) == int(lab)],
        dtype=np.int64,
    )


def runner_up(net, x) -> int:
    """Second most likely class (ties to the lower index)."""
    z = forward(net, x)
    order = np.argsort(-z, kind="stable")
    return int(order[1])


def derived_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def benchmark_matrix(
    net,
    X,
    labels,
    epsilon: float,
    solver=Solver.INTERVAL,
    heuristic=Heuristic.SALIENCY,
    samples_per_class: int = 10,
    seed: int = 0,
    clamp_domain: bool = False,
    budget: int = DEFAULT_SPLIT_BUDGET,
) -> CardinalityMatrix:
    m = net.m
    total = np.zeros((m, m))
    counts = np.zeros((m, m), dtype=np.int64)
    good = correctly_predicted(net, X, labels)
    for y in range(m):
        members = [i for i in good if int(labels[i]) == y][:samples_per_class]
        for i in members:
            for t in range(m):
                if t == y:
                    continue
                req = ExplainRequest(
                    net, X[i], t, epsilon, y=y, solver=solver, heuristic=heuristic,
                    clamp_domain=clamp_domain, seed=derived_seed(seed, i, t), budget=budget,
                )
                total[y, t] += len(vitax_explain(req).A) / net.n
                counts[y, t] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, total / np.maximum(counts, 1), np.nan)
    return CardinalityMatrix(mean, counts)


@dataclass
class HeuristicTable:
    """Per-sample cardinalities for every heuristic on a shared ``(index, y, t)`` sample list."""

    samples: list
    cardinality: dict = field(default_factory=dict)

    def means(self) -> dict:
        """``{heuristic: {class: mean |A|}}`` with classes in ascending order."""
        out = {}
        classes = sorted({y for _, y, _ in self.samples})
        for h, cards in self.cardinality.items():
            cards = np.asarray(cards, dtype=np.float64)
            ys = np.array([y for _, y, _ in self.samples])
            out[h] = {c: float(cards[ys == c].mean()) for c in classes}
        return out


def pick_samples(net, X, labels, samples: int, seed: int) -> list:
    """First ``samples`` correctly classified samples, each with a seeded random target."""
    rng = np.random.default_rng(seed)
    chosen = []
    for i in correctly_predicted(net, X, labels)[:samples]:
        y = int(labels[i])
        t = int(rng.choice([k for k in range(net.m) if k != y]))
        chosen.append((int(i), y, t))
    return chosen


def heuristic_benchmark(
    net,
    X,
    labels,
    epsilon: float,
    solver=Solver.INTERVAL,
    heuristics=(Heuristic.SALIENCY, Heuristic.INTEGRATED_GRADIENTS, Heuristic.RANDOM),
    samples: int = 20,
    seed: int = 0,
    clamp_domain: bool = False,
    budget: int = DEFAULT_SPLIT_BUDGET,
) -> HeuristicTable:
    table = HeuristicTable(pick_samples(net, X, labels, samples, seed))
    for h in heuristics:
        h = Heuristic(h)
        cards = []
        for i, y, t in table.samples:
            req = ExplainRequest(
                net, X[i], t, epsilon, y=y, solver=solver, heuristic=h,
                clamp_domain=clamp_domain, seed=derived_seed(seed, i), budget=budget,
            )
            cards.append(len(vitax_explain(req).A))
        table.cardinality[h.value] = cards
    return table


def epsilon_sweep(
    net,
    X,
    labels,
    epsilons,
    solver=Solver.INTERVAL,
    heuristic=Heuristic.SALIENCY,
    samples: int = 20,
    seed: int = 0,
    clamp_domain: bool = False,
    budget: int = DEFAULT_SPLIT_BUDGET,
) -> list:
    """Rows ``(epsilon, sample_index, |A|)``; each sample is explained toward its runner-up class."""
    rows = []
    good = correctly_predicted(net, X, labels)[:samples]
    for i in good:
        t = runner_up(net, X[i])
        for eps in epsilons:
            req = ExplainRequest(
                net, X[i], t, eps, y=int(labels[i]), solver=solver, heuristic=heuristic,
                clamp_domain=clamp_domain, seed=derived_seed(seed, int(i)), budget=budget,
            )
            rows.append((float(eps), int(i), len(vitax_explain(req).A)))
    return rows
