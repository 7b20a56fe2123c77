"""Small dense two-phase simplex for box-bounded LPs.

Solves ``min c @ x  s.t.  a_ub @ x <= b_ub,  lo <= x <= hi`` with Bland's rule.  Meant for
the handful of variables that appear in exact reachability leaves; it trades speed for
being short enough to audit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = 0
INFEASIBLE = 2

_PIVOT_TOL = 1e-12
_FEAS_TOL = 1e-9


@dataclass
class LPResult:
    status: int
    x: np.ndarray | None
    fun: float | None


def _pivot(tab, row, col):
    tab[row] /= tab[row, col]
    for r in range(tab.shape[0]):
        if r != row and tab[r, col] != 0.0:
            tab[r] -= tab[r, col] * tab[row]


def _run(tab, basis, cost_row, allowed, max_iter):
    """Bland's-rule simplex on ``tab``; the last row holds reduced costs."""
    rows = tab.shape[0] - 1
    for _ in range(max_iter):
        reduced = tab[cost_row, :-1]
        entering = next(
            (j for j in range(reduced.size) if allowed[j] and reduced[j] < -_PIVOT_TOL), None
        )
        if entering is None:
            return True
        col = tab[:rows, entering]
        best, leave = None, None
        for r in range(rows):
            if col[r] > _PIVOT_TOL:
                ratio = tab[r, -1] / col[r]
                if best is None or ratio < best - _PIVOT_TOL or (
                    abs(ratio - best) <= _PIVOT_TOL and basis[r] < basis[leave]
                ):
                    best, leave = ratio, r
        if leave is None:
            raise ArithmeticError("LP is unbounded")
        _pivot(tab, leave, entering)
        basis[leave] = entering
    raise ArithmeticError("simplex iteration limit reached")


def solve_lp(c, a_ub, b_ub, lo, hi, max_iter: int = 10_000) -> LPResult:
    c = np.asarray(c, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    d = c.size
    a_ub = np.asarray(a_ub, dtype=np.float64).reshape(-1, d)
    b_ub = np.asarray(b_ub, dtype=np.float64).reshape(-1)
    if np.any(hi < lo):
        return LPResult(INFEASIBLE, None, None)

    # shift to y = x - lo >= 0 and turn the upper box limits into rows
    a = np.vstack([a_ub, np.eye(d)])
    b = np.concatenate([b_ub - a_ub @ lo, hi - lo])
    rows = a.shape[0]
    sign = np.where(b < 0, -1.0, 1.0)
    needs_art = np.flatnonzero(b < 0)
    n_art = needs_art.size

    width = d + rows + n_art
    tab = np.zeros((rows + 1, width + 1))
    tab[:rows, :d] = a * sign[:, None]
    tab[:rows, d : d + rows] = np.diag(sign)
    tab[:rows, -1] = b * sign
    basis = [d + r for r in range(rows)]
    for k, r in enumerate(needs_art):
        tab[r, d + rows + k] = 1.0
        basis[r] = d + rows + k

    if n_art:
        # phase one: drive the artificial variables to zero
        tab[-1, d + rows :] = 1.0
        tab[-1, -1] = 0.0
        for r in needs_art:
            tab[-1] -= tab[r]
        allowed = np.ones(width, dtype=bool)
        _run(tab, basis, -1, allowed, max_iter)
        if -tab[-1, -1] > _FEAS_TOL:
            return LPResult(INFEASIBLE, None, None)
        for r in range(rows):
            if basis[r] >= d + rows:
                swap = next(
                    (j for j in range(d + rows) if abs(tab[r, j]) > _PIVOT_TOL), None
                )
                if swap is not None:
                    _pivot(tab, r, swap)
                    basis[r] = swap

    allowed = np.zeros(width, dtype=bool)
    allowed[: d + rows] = True
    tab[-1] = 0.0
    tab[-1, :d] = c
    for r in range(rows):
        j = basis[r]
        if j < d and c[j] != 0.0:
            tab[-1] -= c[j] * tab[r]
    _run(tab, basis, -1, allowed, max_iter)

    y = np.zeros(width)
    for r in range(rows):
        y[basis[r]] = tab[r, -1]
    x = np.clip(lo + y[:d], lo, hi)
    return LPResult(OPTIMAL, x, float(c @ x))
