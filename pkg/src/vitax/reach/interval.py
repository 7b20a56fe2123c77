"""Interval bound propagation."""

from __future__ import annotations

import time

import numpy as np

from ..errors import DimensionMismatch
from .sets import ClassBounds, PerturbationSet, SolverStats


def _check(net, pset: PerturbationSet):
    if pset.n != net.n:
        raise DimensionMismatch(f"perturbation set has {pset.n} features, network expects {net.n}")


_EPS = np.finfo(np.float64).eps


def rounding_pad(weights, bias, lo, hi):
    """Bound on the float error of ``weights @ x + bias`` for any ``x`` in ``[lo, hi]``.

    Covers both the evaluation of the interval endpoints and of the plain forward pass.
    Monotone in the box, so padding preserves the nesting of bounds.
    """
    mag = np.maximum(np.abs(lo), np.abs(hi))
    gamma = 4.0 * (weights.shape[1] + 2) * _EPS
    return gamma * (np.abs(weights) @ mag + np.abs(bias))


def affine_interval(weights, bias, lo, hi):
    """Image of the box ``[lo, hi]`` under ``x -> weights @ x + bias``, padded for round-off."""
    wp = np.maximum(weights, 0.0)
    wn = np.minimum(weights, 0.0)
    pad = rounding_pad(weights, bias, lo, hi)
    return wp @ lo + wn @ hi + bias - pad, wp @ hi + wn @ lo + bias + pad


def layer_bounds(net, pset: PerturbationSet):
    """Pre-activation intervals of every layer, computed with interval arithmetic.

    Works on all ``n`` coordinates (pinned ones have ``lo == hi``) so that nested
    perturbation sets give nested bounds exactly, not just up to rounding.
    """
    lo, hi = pset.box()
    out = []
    for layer in net.layers:
        lo, hi = affine_interval(layer.weights, layer.bias, lo, hi)
        out.append((lo, hi))
        if layer.is_relu:
            lo, hi = np.maximum(lo, 0.0), np.maximum(hi, 0.0)
    return out


def reach_interval(net, pset: PerturbationSet, stats: SolverStats | None = None) -> ClassBounds:
    """Sound per-class logit bounds by interval bound propagation."""
    _check(net, pset)
    start = time.perf_counter()
    lo, hi = layer_bounds(net, pset)[-1]
    if stats is not None:
        stats.bound_queries += 1
        stats.wall_time += time.perf_counter() - start
    return ClassBounds(lo, hi)
