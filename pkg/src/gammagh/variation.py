"""Partitions of [0, T], variation functionals and their exact moments.

All moment formulas refer to the centred gamma-GH process, whose increment
over a cell of width d is ``sigma * Z * sqrt(W)``, ``W ~ gamma(a d, beta)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .distributions import GammaGhParams
from .quadrature import integral_half_line
from .rng import RngStream


class MismatchedHorizon(ValueError):
    """Partitions with different right endpoints cannot be combined."""


@dataclass(frozen=True, eq=False)
class Partition:
    """Strictly increasing grid ``0 = t_0 < ... < t_l = T``."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a partition needs at least two points")
        if pts[0] != 0.0:
            raise ValueError(f"a partition starts at 0, got {pts[0]}")
        if not np.all(np.isfinite(pts)) or not np.all(np.diff(pts) > 0):
            raise ValueError("partition points must be finite and strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    @property
    def horizon(self) -> float:
        return float(self.points[-1])

    @property
    def cells(self) -> int:
        return self.points.size - 1

    @property
    def deltas(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def mesh(self) -> float:
        return float(self.deltas.max())

    @property
    def min_mesh(self) -> float:
        return float(self.deltas.min())


def uniform_partition(T: float, cells: int) -> Partition:
    if cells < 1:
        raise ValueError(f"cells must be >= 1, got {cells}")
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T}")
    pts = T * (np.arange(cells + 1) / cells)
    pts[-1] = T
    return Partition(pts)


def random_partition(T: float, cells: int, rng: RngStream) -> Partition:
    """Partition whose cell widths are T times a flat Dirichlet draw."""
    widths = rng.dirichlet(np.ones(cells))
    pts = np.concatenate(([0.0], T * np.cumsum(widths)))
    pts[-1] = T
    return Partition(pts)


def superpose(partitions: Sequence[Partition]) -> Partition:
    """Common refinement: sorted union of all points."""
    if not partitions:
        raise ValueError("nothing to superpose")
    horizons = {p.horizon for p in partitions}
    if len(horizons) != 1:
        raise MismatchedHorizon(f"partitions end at different horizons: {sorted(horizons)}")
    return Partition(np.unique(np.concatenate([p.points for p in partitions])))


def _deltas(incr) -> np.ndarray:
    return np.asarray(getattr(incr, "deltas", incr), dtype=float)


def total_variation(incr) -> float:
    """Sum of absolute increments; accepts an IncrementSet or an array."""
    return float(np.sum(np.abs(_deltas(incr))))


def quadratic_variation(incr) -> float:
    d = _deltas(incr)
    return float(np.sum(d * d))


@dataclass(frozen=True)
class TheoryConstants:
    I1: float
    I2: float
    E1: float
    E2: float


@functools.cache
def theory_constants(rel_tol: float = 1e-13) -> TheoryConstants:
    """I1 = ∫_1^∞ x^(-1/2) e^(-x) dx, I2 = ∫_1^∞ x^(-1) e^(-x) dx, E1 = 2/e + I1, E2 = e (2 + I1)."""
    i1 = integral_half_line(lambda x: -0.5 * np.log(x) - x, 1.0, rel_tol)
    i2 = integral_half_line(lambda x: -np.log(x) - x, 1.0, rel_tol)
    return TheoryConstants(I1=i1, I2=i2, E1=2.0 / math.e + i1, E2=math.e * (2.0 + i1))


def _abs_scale(p: GammaGhParams) -> float:
    return p.sigma * math.sqrt(2.0 / (math.pi * p.beta))


def expected_abs_increment(p: GammaGhParams, delta):
    """E|Y(t + delta) - Y(t)| = sigma sqrt(2/(pi beta)) Γ(a delta + 1/2) / Γ(a delta)."""
    s = p.a * np.asarray(delta, dtype=float)
    if np.any(s <= 0):
        raise ValueError("delta must be > 0")
    out = _abs_scale(p) * np.exp(gammaln(s + 0.5) - gammaln(s))
    return float(out) if out.ndim == 0 else out


def abs_increment_bounds(p: GammaGhParams, delta: float, mesh: float, min_mesh: float) -> tuple[float, float]:
    """Finite-mesh sandwich for E|increment| with the o(1) factors dropped.

    Lower: k (2/e + I1) a d / (1 + I2 a mesh); upper: k (2 + I1) a d / (1/e + I2 a min_mesh),
    with ``k = sigma sqrt(2 / (pi beta))``. Only meaningful as the mesh shrinks.
    """
    c = theory_constants()
    k = _abs_scale(p)
    ad = p.a * delta
    lo = k * c.E1 * ad / (1.0 + c.I2 * p.a * mesh)
    hi = k * (2.0 + c.I1) * ad / (1.0 / math.e + c.I2 * p.a * min_mesh)
    return lo, hi


@dataclass(frozen=True)
class VariationTheory:
    mean: float          # exact E V_k on this partition
    lower: float         # mesh -> 0 lower bound on E V_k
    upper: float         # mesh -> 0 upper bound on E V_k
    var_limit: float     # sigma^2 a T / beta
    var: float           # exact Var V_k on this partition


def variation_moment_theory(p: GammaGhParams, partition: Partition) -> VariationTheory:
    d = partition.deltas
    e_abs = expected_abs_increment(p, d)
    second = p.sigma**2 * p.a * d / p.beta
    c = theory_constants()
    k = _abs_scale(p) * p.a * partition.horizon
    return VariationTheory(
        mean=float(np.sum(e_abs)),
        lower=k * c.E1,
        upper=k * c.E2,
        var_limit=p.sigma**2 * p.a * partition.horizon / p.beta,
        var=float(np.sum(second - e_abs * e_abs)),
    )


@dataclass(frozen=True)
class QvTheory:
    mean: float       # a sigma^2 T / beta, for every partition
    var: float        # 2 sigma^4 a^2 / beta^2 * sum d^2 + 3 a sigma^4 T / beta^2
    var_limit: float  # 3 a sigma^4 T / beta^2


def qv_moment_theory(p: GammaGhParams, partition: Partition) -> QvTheory:
    d = partition.deltas
    s4 = p.sigma**4 / p.beta**2
    T = partition.horizon
    limit = 3.0 * p.a * s4 * T
    return QvTheory(
        mean=p.a * p.sigma**2 * T / p.beta,
        var=2.0 * s4 * p.a**2 * float(np.sum(d * d)) + limit,
        var_limit=limit,
    )


def brownian_qv_moment_theory(partition: Partition) -> QvTheory:
    """Standard Brownian motion: E V_Q = T, Var V_Q = 2 sum d^2, which tends to 0."""
    d = partition.deltas
    return QvTheory(mean=partition.horizon, var=2.0 * float(np.sum(d * d)), var_limit=0.0)
