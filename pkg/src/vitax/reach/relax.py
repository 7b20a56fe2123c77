"""Symbolic linear relaxation of ReLU networks (back-substitution to the input box).

Unstable ReLUs with pre-activation range ``[l, u]``, ``l < 0 < u`` are bounded above by the
chord ``u (z - l) / (u - l)`` and below by ``lam * z`` where ``lam = 1`` if ``u >= -l`` else 0.
Each layer's bounds are intersected with interval propagation from the previous (already
tightened) layer, so the result is never looser than :func:`reach_interval`.
"""

from __future__ import annotations

import time

import numpy as np

from .interval import _check, affine_interval, rounding_pad
from .sets import ClassBounds, PerturbationSet, SolverStats


def relu_relaxation(lo, hi):
    """Slopes/intercepts ``(su, tu, sl, tl)`` with ``sl*z + tl <= relu(z) <= su*z + tu``."""
    su = np.zeros_like(lo)
    tu = np.zeros_like(lo)
    sl = np.zeros_like(lo)
    active = lo >= 0
    su[active] = 1.0
    sl[active] = 1.0
    unstable = (lo < 0) & (hi > 0)
    width = hi[unstable] - lo[unstable]
    su[unstable] = hi[unstable] / width
    tu[unstable] = -hi[unstable] * lo[unstable] / width
    sl[unstable] = np.where(hi[unstable] >= -lo[unstable], 1.0, 0.0)
    return su, tu, sl, np.zeros_like(lo)


def _back_substitute(net, j, relaxations, box_lo, box_hi):
    """Bounds on layer ``j``'s pre-activations through the relaxations of layers ``< j``."""
    w, b = net.layers[j].weights, net.layers[j].bias
    up_a, up_c = w.copy(), b.copy()
    lo_a, lo_c = w.copy(), b.copy()
    for k in range(j - 1, -1, -1):
        relax = relaxations[k]
        if relax is not None:
            su, tu, sl, tl = relax
            pos, neg = np.maximum(up_a, 0.0), np.minimum(up_a, 0.0)
            up_c = up_c + pos @ tu + neg @ tl
            up_a = pos * su + neg * sl
            pos, neg = np.maximum(lo_a, 0.0), np.minimum(lo_a, 0.0)
            lo_c = lo_c + pos @ tl + neg @ tu
            lo_a = pos * sl + neg * su
        layer = net.layers[k]
        up_c = up_c + up_a @ layer.bias
        up_a = up_a @ layer.weights
        lo_c = lo_c + lo_a @ layer.bias
        lo_a = lo_a @ layer.weights
    upper = np.maximum(up_a, 0.0) @ box_hi + np.minimum(up_a, 0.0) @ box_lo + up_c
    lower = np.maximum(lo_a, 0.0) @ box_lo + np.minimum(lo_a, 0.0) @ box_hi + lo_c
    return lower, upper


def relaxed_layer_bounds(net, pset: PerturbationSet):
    """Pre-activation bounds of every layer under the linear relaxation."""
    box_lo, box_hi = pset.box()
    bounds = []
    relaxations = []
    lo, hi = box_lo, box_hi
    for j, layer in enumerate(net.layers):
        ibp_lo, ibp_hi = affine_interval(layer.weights, layer.bias, lo, hi)
        if j == 0:
            pre_lo, pre_hi = ibp_lo, ibp_hi
        else:
            sym_lo, sym_hi = _back_substitute(net, j, relaxations, box_lo, box_hi)
            # round-off of the back-substitution, scaled by the interval magnitudes
            depth = 2.0 + pset.n + sum(l.out_dim for l in net.layers[:j])
            pad = 2.0 * (j + 1) * depth * rounding_pad(layer.weights, layer.bias, lo, hi)
            sym_lo, sym_hi = sym_lo - pad, sym_hi + pad
            # clipping keeps ibp_lo <= pre_lo <= pre_hi <= ibp_hi even when rounding
            # pushes a degenerate neuron's symbolic bounds past each other
            pre_lo = np.minimum(np.maximum(sym_lo, ibp_lo), ibp_hi)
            pre_hi = np.maximum(np.minimum(sym_hi, ibp_hi), pre_lo)
        bounds.append((pre_lo, pre_hi))
        if layer.is_relu:
            relaxations.append(relu_relaxation(pre_lo, pre_hi))
            lo, hi = np.maximum(pre_lo, 0.0), np.maximum(pre_hi, 0.0)
        else:
            relaxations.append(None)
            lo, hi = pre_lo, pre_hi
    return bounds


def reach_linear_relax(net, pset: PerturbationSet, stats: SolverStats | None = None) -> ClassBounds:
    """Sound per-class logit bounds from the symbolic linear relaxation."""
    _check(net, pset)
    start = time.perf_counter()
    lo, hi = relaxed_layer_bounds(net, pset)[-1]
    if stats is not None:
        stats.bound_queries += 1
        stats.wall_time += time.perf_counter() - start
    return ClassBounds(lo, hi)
