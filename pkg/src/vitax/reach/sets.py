"""Input perturbation sets, per-class output bounds and the targeted robustness check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ClassOutOfRange, DimensionMismatch, SameClass, UnsupportedNorm

_NORM_ALIASES = {"linf": "linf", "inf": "linf", "l_inf": "linf", "infinity": "linf"}


@dataclass(frozen=True, eq=False)
class PerturbationSet:
    """L-infinity box of radius ``epsilon`` around ``center`` on the features in ``subset``.

    Features outside ``subset`` stay pinned to ``center``.  With ``clamp_domain`` the box is
    additionally intersected with ``[0, 1]^n``.
    """

    center: np.ndarray
    epsilon: float
    subset: tuple = ()
    norm: str = "linf"
    clamp_domain: bool = False

    def __post_init__(self):
        center = np.array(self.center, dtype=np.float64)
        if center.ndim != 1:
            raise DimensionMismatch("center must be a vector")
        center.setflags(write=False)
        norm = _NORM_ALIASES.get(str(self.norm).lower())
        if norm is None:
            raise UnsupportedNorm(f"only the L-infinity norm is supported, got {self.norm!r}")
        eps = float(self.epsilon)
        if not eps > 0 or not np.isfinite(eps):
            raise ValueError(f"epsilon must be a positive finite number, got {self.epsilon}")
        idx = np.asarray(list(self.subset), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= center.size):
            raise DimensionMismatch(f"subset indices must lie in [0, {center.size})")
        subset = tuple(int(i) for i in np.unique(idx))
        if self.clamp_domain and (center.min(initial=0.0) < 0 or center.max(initial=0.0) > 1):
            raise ValueError("clamp_domain requires a center inside [0, 1]^n")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "norm", norm)
        object.__setattr__(self, "clamp_domain", bool(self.clamp_domain))

    @property
    def n(self) -> int:
        return self.center.size

    @property
    def free(self) -> np.ndarray:
        return np.asarray(self.subset, dtype=np.int64)

    def free_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper limits of the free coordinates only."""
        c = self.center[self.free]
        lo, hi = c - self.epsilon, c + self.epsilon
        if self.clamp_domain:
            lo, hi = np.maximum(lo, 0.0), np.minimum(hi, 1.0)
        return lo, hi

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper limits for all ``n`` coordinates."""
        lo, hi = self.center.copy(), self.center.copy()
        flo, fhi = self.free_box()
        lo[self.free] = flo
        hi[self.free] = fhi
        return lo, hi

    def with_subset(self, subset) -> "PerturbationSet":
        return PerturbationSet(self.center, self.epsilon, tuple(subset), self.norm, self.clamp_domain)

    def with_epsilon(self, epsilon: float) -> "PerturbationSet":
        return PerturbationSet(self.center, epsilon, self.subset, self.norm, self.clamp_domain)


@dataclass(frozen=True, eq=False)
class ClassBounds:
    """Per-class logit intervals ``[lower[k], upper[k]]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=np.float64)
        hi = np.array(self.upper, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatch("lower and upper bounds must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("class bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("class bounds have lower > upper")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def m(self) -> int:
        return self.lower.size

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.lower.tolist(), self.upper.tolist()))

    def within(self, other: "ClassBounds", tol: float = 0.0) -> bool:
        """True when every interval here lies inside the matching interval of ``other``."""
        return bool(
            np.all(other.lower <= self.lower + tol) and np.all(self.upper <= other.upper + tol)
        )

    def contains_point(self, y, tol: float = 0.0) -> bool:
        y = np.asarray(y)
        return bool(np.all(self.lower - tol <= y) and np.all(y <= self.upper + tol))

    def __repr__(self):
        return f"ClassBounds({self.intervals})"


@dataclass(frozen=True)
class SpecResult:
    holds: bool
    target_margin: float
    violating_classes: tuple = ()


@dataclass
class SolverStats:
    bound_queries: int = 0
    lp_solves: int = 0
    relu_splits: int = 0
    wall_time: float = 0.0

    def merge(self, other: "SolverStats") -> None:
        self.bound_queries += other.bound_queries
        self.lp_solves += other.lp_solves
        self.relu_splits += other.relu_splits
        self.wall_time += other.wall_time


def check_spec(bounds: ClassBounds, y: int, t: int, dominance: bool = False) -> SpecResult:
    """Targeted robustness ``l_y > u_t``, optionally requiring ``u_t > u_k`` for the rest.

    Comparisons are strict with no tolerance, so exact ties fail.
    """
    m = bounds.m
    for c in (y, t):
        if not 0 <= int(c) < m:
            raise ClassOutOfRange(f"class {c} outside [0, {m})")
    y, t = int(y), int(t)
    if y == t:
        raise SameClass("original and target class must differ")
    lo, hi = bounds.lower, bounds.upper
    holds = bool(lo[y] > hi[t])
    violating = ()
    if dominance:
        violating = tuple(k for k in range(m) if k not in (y, t) and not hi[t] > hi[k])
        holds = holds and not violating
    return SpecResult(holds, float(lo[y] - hi[t]), violating)


def sample_member(pset: PerturbationSet, rng) -> np.ndarray:
    """Uniform draw from the perturbation set; pinned coordinates equal the center exactly."""
    rng = np.random.default_rng(rng)
    x = pset.center.copy()
    if pset.subset:
        lo, hi = pset.free_box()
        x[pset.free] = rng.uniform(lo, hi)
    return x


def sample_members(pset: PerturbationSet, count: int, rng) -> np.ndarray:
    """``count`` uniform draws stacked row-wise."""
    rng = np.random.default_rng(rng)
    xs = np.tile(pset.center, (count, 1))
    if pset.subset:
        lo, hi = pset.free_box()
        xs[:, pset.free] = rng.uniform(lo, hi, size=(count, lo.size))
    return xs


__all__ = [
    "PerturbationSet",
    "ClassBounds",
    "SpecResult",
    "SolverStats",
    "check_spec",
    "sample_member",
    "sample_members",
]

