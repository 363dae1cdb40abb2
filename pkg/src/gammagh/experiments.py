"""Monte Carlo experiments comparing simulation with the closed-form theory.

Replication ``i`` of a moment experiment draws from ``make_stream(seed, ..., i)``
and sample-based checks draw fixed-size blocks from one stream per block, so
results do not depend on how work is split between processes. Per-item
results are assembled in index order before any reduction.

Failed checks are recorded in the reports; nothing here raises on them.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .distributions import GammaGhParams, charfn_gamma_gh, sample_gamma_gh, sample_log_gamma
from .paths import _grid_index
from .rng import make_stream
from .variation import (
    Partition,
    brownian_qv_moment_theory,
    qv_moment_theory,
    uniform_partition,
    variation_moment_theory,
)

DEFAULT_U_GRID = tuple(float(u) for u in np.arange(-10, 11) / 2.0)
SAMPLE_BLOCK = 8192
BOUNDS_MESH_THRESHOLD = 1e-2
KS_CRITICAL_1PCT = 1.63


@dataclass(frozen=True)
class MonteCarloConfig:
    params: GammaGhParams
    replications: int
    master_seed: int = 0
    horizon: float = 1.0
    cells: int | None = 4096
    points: tuple[float, ...] | None = None
    u_grid: tuple[float, ...] = DEFAULT_U_GRID
    var_rel_tol: float = 0.05
    workers: int = 1

    def __post_init__(self) -> None:
        if self.replications < 100:
            raise ValueError("replications must be >= 100 for standard errors to mean anything")
        if (self.cells is None) == (self.points is None):
            raise ValueError("give exactly one of cells or points")
        u = np.asarray(self.u_grid, dtype=float)
        if u.size == 0 or not np.all(np.isfinite(u)):
            raise ValueError("u_grid must be a non-empty finite sequence")
        if not np.allclose(np.sort(u), np.sort(-u), rtol=0, atol=1e-12):
            raise ValueError("u_grid must be symmetric about 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def partition(self) -> Partition:
        if self.points is not None:
            return Partition(np.asarray(self.points, dtype=float))
        return uniform_partition(self.horizon, self.cells)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    observed: float
    target: float
    tolerance: float
    source: str
    asserted: bool = True


@dataclass
class MomentReport:
    statistic: str
    cells: int
    mesh: float
    replications: int
    mean_theory: float
    mean_mc: float
    mean_se: float
    var_theory: float
    var_mc: float
    var_se: float
    var_limit: float
    bounds_lo: float | None = None
    bounds_hi: float | None = None
    extra: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.asserted)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


# -- execution ---------------------------------------------------------------


def _map_ranges(task: Callable[[int, int], np.ndarray], total: int, chunk: int, workers: int) -> np.ndarray:
    """Apply ``task(start, stop)`` over ``[0, total)`` and stack results in order."""
    ranges = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    if workers == 1 or len(ranges) == 1:
        parts = [task(s, e) for s, e in ranges]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, *zip(*ranges)))
    return np.concatenate(parts, axis=0)


def _replication_chunk(total: int, workers: int) -> int:
    return max(1, math.ceil(total / (4 * workers)))


def _mean_var(x: np.ndarray) -> tuple[float, float, float, float]:
    """Sample mean, its SE, unbiased variance and an SE for the variance."""
    n = x.size
    mean = float(np.mean(x))
    dev = x - mean
    var = float(np.sum(dev * dev) / (n - 1))
    m4 = float(np.mean(dev**4))
    var_se = math.sqrt(max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n)
    return mean, math.sqrt(var / n), var, var_se


def _mean_check(name: str, observed: float, target: float, se: float) -> Check:
    tol = 3.0 * se
    return Check(name, abs(observed - target) <= tol, observed, target, tol, "3*SE")


def _rel_check(name: str, observed: float, target: float, rel: float, se: float = 0.0) -> Check:
    """Relative tolerance, never tighter than 3 SE of the estimate itself."""
    tol = max(rel * abs(target), 3.0 * se)
    return Check(name, abs(observed - target) <= tol, observed, target, tol, f"max({rel:.0%} relative, 3*SE)")


# -- total variation ---------------------------------------------------------


def _tv_task(p: GammaGhParams, points: np.ndarray, seed: int, start: int, stop: int) -> np.ndarray:
    d = np.diff(points)
    shape = p.a * d
    out = np.empty(stop - start)
    for k, i in enumerate(range(start, stop)):
        rng = make_stream(seed, i)
        # same draw order as paths.sample_increments
        z = rng.standard_normal(d.size)
        logw = sample_log_gamma(shape, p.beta, rng)
        out[k] = np.sum(np.abs(p.sigma * z * np.exp(0.5 * logw)))
    return out


def run_variation_experiment(cfg: MonteCarloConfig) -> MomentReport:
    """Total variation over ``cfg.partition()`` against its exact moments."""
    p, part = cfg.params, cfg.partition()
    theory = variation_moment_theory(p, part)
    task = partial(_tv_task, p, part.points, cfg.master_seed)
    vk = _map_ranges(task, cfg.replications, _replication_chunk(cfg.replications, cfg.workers), cfg.workers)
    mean, se, var, var_se = _mean_var(vk)
    checks = [
        _mean_check("mean_vs_exact", mean, theory.mean, se),
        _rel_check("var_vs_exact", var, theory.var, cfg.var_rel_tol, var_se),
        Check(
            "mean_within_sandwich",
            theory.lower <= mean <= theory.upper,
            mean,
            0.5 * (theory.lower + theory.upper),
            0.5 * (theory.upper - theory.lower),
            "limiting bounds with E1, E2",
            asserted=part.mesh <= BOUNDS_MESH_THRESHOLD,
        ),
    ]
    return MomentReport(
        statistic="total_variation",
        cells=part.cells,
        mesh=part.mesh,
        replications=cfg.replications,
        mean_theory=theory.mean,
        mean_mc=mean,
        mean_se=se,
        var_theory=theory.var,
        var_mc=var,
        var_se=var_se,
        var_limit=theory.var_limit,
        bounds_lo=theory.lower,
        bounds_hi=theory.upper,
        checks=checks,
    )


# -- quadratic variation -----------------------------------------------------


def _qv_task(p: GammaGhParams, points: np.ndarray, seed: int, rung: int, start: int, stop: int) -> np.ndarray:
    """Columns: gamma-GH V_Q and the Brownian V_Q built from the same normals."""
    d = np.diff(points)
    shape = p.a * d
    out = np.empty((stop - start, 2))
    for k, i in enumerate(range(start, stop)):
        rng = make_stream(seed, rung, i)
        z2 = rng.standard_normal(d.size) ** 2
        logw = sample_log_gamma(shape, p.beta, rng)
        out[k, 0] = p.sigma**2 * np.sum(z2 * np.exp(logw))
        out[k, 1] = np.sum(z2 * d)
    return out


def run_qv_experiment(cfg: MonteCarloConfig, mesh_ladder: Sequence[int]) -> list[MomentReport]:
    """Quadratic variation on uniform partitions with ``mesh_ladder`` cell counts.

    Each rung also runs a Brownian control on the same normals. The last
    report carries the plateau checks: the gamma-GH variance stays near
    3 a sigma^4 T / beta^2 while the Brownian one collapses.
    """
    ladder = [int(c) for c in mesh_ladder]
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("mesh_ladder must be a non-empty increasing sequence of cell counts")
    p = cfg.params
    reports = []
    for rung, cells in enumerate(ladder):
        part = uniform_partition(cfg.horizon, cells)
        theory = qv_moment_theory(p, part)
        bm_theory = brownian_qv_moment_theory(part)
        task = partial(_qv_task, p, part.points, cfg.master_seed, rung)
        vq = _map_ranges(task, cfg.replications, _replication_chunk(cfg.replications, cfg.workers), cfg.workers)
        mean, se, var, var_se = _mean_var(vq[:, 0])
        bm_mean, bm_se, bm_var, bm_var_se = _mean_var(vq[:, 1])
        msd = float(np.mean((vq[:, 0] - theory.mean) ** 2))
        checks = [
            _mean_check("mean_vs_exact", mean, theory.mean, se),
            _rel_check("var_vs_exact", var, theory.var, cfg.var_rel_tol, var_se),
            _mean_check("brownian_mean_vs_exact", bm_mean, bm_theory.mean, bm_se),
            _rel_check("brownian_var_vs_exact", bm_var, bm_theory.var, cfg.var_rel_tol, bm_var_se),
        ]
        reports.append(
            MomentReport(
                statistic="quadratic_variation",
                cells=part.cells,
                mesh=part.mesh,
                replications=cfg.replications,
                mean_theory=theory.mean,
                mean_mc=mean,
                mean_se=se,
                var_theory=theory.var,
                var_mc=var,
                var_se=var_se,
                var_limit=theory.var_limit,
                extra={
                    "msd_about_mean": msd,
                    "brownian_mean_theory": bm_theory.mean,
                    "brownian_mean_mc": bm_mean,
                    "brownian_mean_se": bm_se,
                    "brownian_var_theory": bm_theory.var,
                    "brownian_var_mc": bm_var,
                    "brownian_var_se": bm_var_se,
                },
                checks=checks,
            )
        )
    first, last = reports[0], reports[-1]
    # a 10% floor is only meaningful once the variance SE is well below it
    floor = min(0.9 * last.var_limit, last.var_limit - 3.0 * last.var_se)
    src = "min(0.9 x limit, limit - 3*SE), limit = 3a*sigma^4*T/beta^2"
    last.checks.append(Check("variance_plateau", last.var_mc >= floor, last.var_mc, last.var_limit, floor, src))
    last.checks.append(
        Check(
            "msd_plateau", last.extra["msd_about_mean"] >= floor, last.extra["msd_about_mean"],
            last.var_limit, floor, src,
        )
    )
    bm_cap = 0.1 * first.extra["brownian_var_mc"]
    last.checks.append(
        Check(
            "brownian_variance_collapse", last.extra["brownian_var_mc"] <= bm_cap,
            last.extra["brownian_var_mc"], 0.0, bm_cap, "0.1 x coarsest Brownian variance",
            asserted=len(reports) > 1,
        )
    )
    return reports


# -- characteristic function and infinite divisibility ------------------------


def _block_draws(draw: Callable, seed: int, key: tuple[int, ...], total: int, start: int, stop: int) -> np.ndarray:
    """Samples ``[start, stop)`` of a stream of ``total`` iid draws, block-wise seeded."""
    out = []
    first, last = start // SAMPLE_BLOCK, (stop - 1) // SAMPLE_BLOCK
    for b in range(first, last + 1):
        size = min(SAMPLE_BLOCK, total - b * SAMPLE_BLOCK)
        out.append(draw(make_stream(seed, *key, b), size))
    return np.concatenate(out)


def _draw_direct(p: GammaGhParams, ts: float, rng, size: int) -> np.ndarray:
    return sample_gamma_gh(p, ts, rng, size=size)


def _draw_sum(p: GammaGhParams, parts: int, rng, size: int) -> np.ndarray:
    return sample_gamma_gh(p, 1.0 / parts, rng, size=(size, parts)).sum(axis=1)


def draw_samples(draw: Callable, n: int, seed: int, key: tuple[int, ...] = (), workers: int = 1) -> np.ndarray:
    """``n`` iid draws from ``draw(rng, size)`` in fixed blocks; worker-count independent."""
    chunk = SAMPLE_BLOCK * max(1, math.ceil(math.ceil(n / SAMPLE_BLOCK) / workers))
    task = partial(_block_draws, draw, seed, key, n)
    return _map_ranges(task, n, chunk, workers)


def empirical_charfn(x: np.ndarray, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    arg = np.multiply.outer(x, u)
    return np.cos(arg).mean(axis=0) + 1j * np.sin(arg).mean(axis=0)


def ks_2samp_statistic(x: np.ndarray, y: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_x - F_y|."""
    x, y = np.sort(x), np.sort(y)
    grid = np.concatenate((x, y))
    fx = np.searchsorted(x, grid, side="right") / x.size
    fy = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


@dataclass
class CharfnReport:
    n_samples: int
    u_grid: list[float]
    errors: list[float]
    max_error: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def run_charfn_check(cfg: MonteCarloConfig) -> CharfnReport:
    """Empirical charfn of ``cfg.replications`` draws over ``cfg.horizon`` against the closed form."""
    p, n, ts = cfg.params, cfg.replications, cfg.horizon
    x = draw_samples(partial(_draw_direct, p, ts), n, cfg.master_seed, workers=cfg.workers)
    u = np.asarray(cfg.u_grid, dtype=float)
    err = np.abs(empirical_charfn(x, u) - charfn_gamma_gh(p, ts, u))
    bound = 4.0 / math.sqrt(n)
    max_err = float(err.max())
    return CharfnReport(n, u.tolist(), err.tolist(), max_err, bound, max_err <= bound)


@dataclass
class IdecompReport:
    n_parts: int
    n_samples: int
    ks_statistic: float
    ks_critical: float
    charfn_distance: float
    charfn_bound: float
    identity_error: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def run_idecomp_check(
    p: GammaGhParams,
    n_parts: int,
    N: int,
    seed: int,
    u_grid: Sequence[float] = DEFAULT_U_GRID,
    workers: int = 1,
) -> IdecompReport:
    """Sums of ``n_parts`` draws at time 1/n_parts against direct draws at time 1."""
    if n_parts < 1:
        raise ValueError("n_parts must be >= 1")
    summed = draw_samples(partial(_draw_sum, p, n_parts), N, seed, key=(0,), workers=workers)
    direct = draw_samples(partial(_draw_direct, p, 1.0), N, seed, key=(1,), workers=workers)
    ks = ks_2samp_statistic(summed, direct)
    crit = KS_CRITICAL_1PCT * math.sqrt(2.0 / N)
    u = np.asarray(u_grid, dtype=float)
    dist = float(np.max(np.abs(empirical_charfn(summed, u) - empirical_charfn(direct, u))))
    identity = float(np.max(np.abs(charfn_gamma_gh(p, 1.0 / n_parts, u) ** n_parts - charfn_gamma_gh(p, 1.0, u))))
    return IdecompReport(
        n_parts=n_parts,
        n_samples=N,
        ks_statistic=ks,
        ks_critical=crit,
        charfn_distance=dist,
        charfn_bound=8.0 / math.sqrt(N),
        identity_error=identity,
        passed=ks <= crit and identity <= 1e-12,
    )


# -- finite-dimensional convergence ----------------------------------------------


def _fdd_draw(p: GammaGhParams, T: float, n: int, k1: int, k2: int, rng, size: int) -> np.ndarray:
    x = sample_gamma_gh(p, T / n, rng, size=(size, n))
    return np.column_stack((x[:, :k1].sum(axis=1), x[:, k1:k2].sum(axis=1)))


@dataclass
class FddReport:
    n: int
    horizon: float
    t1: float
    t2: float
    n_samples: int
    u_grid: list[float]
    max_error_vs_limit: float
    max_error_vs_finite: float
    discretization_gap: float
    mc_bound: float
    correlation: float | None
    correlation_bound: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def run_fdd_check(
    p: GammaGhParams,
    T: float,
    n: int,
    times: tuple[float, float],
    N: int,
    seed: int,
    u_grid: Sequence[float] = DEFAULT_U_GRID,
    workers: int = 1,
) -> FddReport:
    """Law of ``Y_n(t2) - Y_n(t1)`` for the n-cell construction against its limit.

    The finite-n law is gamma-gh over ``T (k2 - k1) / n`` time units with
    ``k = floor(n t / T)``; the limit uses ``t2 - t1``. The distance between the
    two closed forms is the discretisation gap, so only Monte Carlo error
    remains once it is accounted for.
    """
    t1, t2 = times
    if not 0 < t1 < t2 <= T:
        raise ValueError("need 0 < t1 < t2 <= T")
    k1, k2 = (int(k) for k in _grid_index(n, T, [t1, t2]))
    draws = draw_samples(partial(_fdd_draw, p, T, n, k1, k2), N, seed, workers=workers)
    y1, incr = draws[:, 0], draws[:, 1]
    u = np.asarray(u_grid, dtype=float)
    emp = empirical_charfn(incr, u)
    limit = charfn_gamma_gh(p, t2 - t1, u)
    if k2 > k1:
        finite = charfn_gamma_gh(p, T * (k2 - k1) / n, u)
    else:
        finite = np.ones_like(limit)
    gap = float(np.max(np.abs(finite - limit)))
    err_limit = float(np.max(np.abs(emp - limit)))
    err_finite = float(np.max(np.abs(emp - finite)))
    bound = 4.0 / math.sqrt(N)
    corr = None
    if k1 > 0 and k2 > k1:
        corr = float(np.corrcoef(y1, incr)[0, 1])
    corr_bound = 3.0 / math.sqrt(N)
    passed = err_limit <= bound + gap and err_finite <= bound and (corr is None or abs(corr) <= corr_bound)
    return FddReport(
        n=n,
        horizon=T,
        t1=t1,
        t2=t2,
        n_samples=N,
        u_grid=u.tolist(),
        max_error_vs_limit=err_limit,
        max_error_vs_finite=err_finite,
        discretization_gap=gap,
        mc_bound=bound,
        correlation=corr,
        correlation_bound=corr_bound,
        passed=passed,
    )


# -- serialisation ---------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(payload) -> str:
    """Deterministic JSON text for a report, a list of reports or a plain dict."""
    if hasattr(payload, "to_dict"):
        payload = payload.to_dict()
    elif isinstance(payload, list):
        payload = [r.to_dict() if hasattr(r, "to_dict") else r for r in payload]
    return json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n"


MOMENT_CSV_FIELDS = (
    "statistic", "cells", "mesh", "replications", "mean_theory", "mean_mc", "mean_se",
    "var_theory", "var_mc", "var_se", "var_limit", "bounds_lo", "bounds_hi", "passed",
)


def moment_csv(reports: Sequence[MomentReport]) -> str:
    """One CSV row per report (per mesh) for plotting."""
    lines = [",".join(MOMENT_CSV_FIELDS)]
    for r in reports:
        d = r.to_dict()
        row = []
        for key in MOMENT_CSV_FIELDS:
            v = d[key]
            if v is None:
                row.append("")
            elif isinstance(v, float):
                row.append(f"{v:.17g}")
            else:
                row.append(str(v))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
