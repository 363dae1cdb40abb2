"""Path simulation: the empirical gamma-GH construction and a Brownian control.

A :class:`Path` on ``[0, T]`` with ``n`` cells is the step function

    Y_n(t) = sum_{j <= floor(n t / T)} X_j,

stored as its increments and prefix sums; any partition can be evaluated
afterwards without drawing again.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .distributions import GammaGhParams, sample_gamma_gh, sample_log_gamma
from .rng import RngStream
from .variation import Partition, uniform_partition


def _grid_index(n: int, T: float, t) -> np.ndarray:
    x = n * np.asarray(t, dtype=float) / T
    # snap values within rounding of an integer, so t = j T / n maps to j
    r = np.rint(x)
    idx = np.where(np.abs(x - r) <= 1e-12 * np.maximum(1.0, np.abs(r)), r, np.floor(x))
    return np.clip(idx, 0, n).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Path:
    horizon: float
    increments: np.ndarray
    prefix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        inc = np.array(self.increments, dtype=float)
        if inc.ndim != 1 or inc.size == 0:
            raise ValueError("a path needs at least one increment")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        prefix = np.concatenate(([0.0], np.cumsum(inc)))
        inc.setflags(write=False)
        prefix.setflags(write=False)
        object.__setattr__(self, "increments", inc)
        object.__setattr__(self, "prefix", prefix)

    @property
    def n(self) -> int:
        return self.increments.size

    def grid(self) -> np.ndarray:
        return uniform_partition(self.horizon, self.n).points.copy()

    def value(self, t):
        """Path value at time(s) ``t``; 0 on ``[0, T/n)`` and ``prefix[n]`` at ``T``."""
        out = self.prefix[_grid_index(self.n, self.horizon, t)]
        return float(out) if np.ndim(out) == 0 else out

    def increments_on(self, partition: Partition) -> IncrementSet:
        if abs(partition.horizon - self.horizon) > 1e-12 * self.horizon:
            raise ValueError("partition horizon differs from the path horizon")
        return IncrementSet(partition, np.diff(self.value(partition.points)))

    def write_csv(self, fh: TextIO) -> None:
        """``t,value`` rows at the grid points, 17 significant digits."""
        fh.write("t,value\n")
        for t, v in zip(self.grid(), self.prefix):
            fh.write(f"{t:.17g},{v:.17g}\n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class IncrementSet:
    """Signed increments of a path over the cells of a partition."""

    partition: Partition
    deltas: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.deltas, dtype=float)
        if d.shape != (self.partition.cells,):
            raise ValueError(f"expected {self.partition.cells} increments, got shape {d.shape}")
        object.__setattr__(self, "deltas", d)


def simulate_path(p: GammaGhParams, T: float, n: int, rng: RngStream) -> Path:
    """n iid gamma-gh(aT/n, beta, 0, mu T/n, sigma) increments."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Path(T, sample_gamma_gh(p, T / n, rng, size=n))


def center_path(path: Path, p: GammaGhParams) -> Path:
    """Remove the drift: each increment loses mu T / n."""
    if p.mu == 0:
        return path
    return Path(path.horizon, path.increments - p.mu * path.horizon / path.n)


def sample_increments(p: GammaGhParams, partition: Partition, rng: RngStream) -> IncrementSet:
    """One exact draw of the centred process's increments over ``partition``.

    Cell j is ``sigma * Z_j * sqrt(W_j)`` with ``W_j ~ gamma(a d_j, beta)``;
    the drift is not included.
    """
    d = partition.deltas
    z = rng.standard_normal(d.size)
    logw = sample_log_gamma(p.a * d, p.beta, rng)
    return IncrementSet(partition, p.sigma * z * np.exp(0.5 * logw))


def simulate_brownian(T: float, n: int, rng: RngStream) -> Path:
    """Random walk with N(0, T/n) steps, the Brownian comparison process."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Path(T, np.sqrt(T / n) * rng.standard_normal(n))


def grid_partition(path: Path) -> Partition:
    return uniform_partition(path.horizon, path.n)
