"""Double-exponential (DE) quadrature for positive integrands.

Everything here works on the logarithm of the integrand so that integrals
whose value over- or underflows a double (GIG constants at extreme
arguments, densities far in the tails) stay representable. The caller maps
its integral onto the whole real line with a transform that makes the
integrand decay double-exponentially at both ends; the trapezoidal rule is
then refined by halving the step until two successive levels agree.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

LogIntegrand = Callable[[np.ndarray], np.ndarray]

# Terms below exp(-_CUTOFF) of the peak cannot move a double-precision sum.
_CUTOFF = 80.0
_SCAN_STEP = 0.25
_SCAN_LIMIT = 40.0


class QuadratureError(ArithmeticError):
    """Refinement did not reach the requested tolerance."""


def _finite_log(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.where(np.isnan(values), -np.inf, values)


def _extent(log_f: LogIntegrand, direction: float, peak: float) -> float:
    """Distance from 0 along ``direction`` past which the integrand is negligible."""
    s = 0.0
    ref = peak
    while s < _SCAN_LIMIT:
        s += _SCAN_STEP
        val = float(_finite_log(log_f(np.array([direction * s])))[0])
        ref = max(ref, val)
        if val < ref - _CUTOFF:
            return s
    raise QuadratureError("integrand does not decay within the scan window")


def de_log_integral(
    log_f: LogIntegrand,
    rel_tol: float = 1e-10,
    h0: float = 0.5,
    max_levels: int = 16,
) -> float:
    """Return ``log ∫ exp(log_f(s)) ds`` over the real line.

    ``log_f`` must be vectorised and already include the Jacobian of the
    caller's DE transform, so that ``exp(log_f)`` decays double
    exponentially as ``|s| → ∞`` and is of order one near ``s = 0``.
    """
    peak = float(_finite_log(log_f(np.array([0.0])))[0])
    if not np.isfinite(peak):
        raise QuadratureError("integrand vanishes at the centre of the transform")
    left = _extent(log_f, -1.0, peak)
    right = _extent(log_f, 1.0, peak)

    h = h0
    k = np.arange(-math.ceil(left / h), math.ceil(right / h) + 1)
    logs = _finite_log(log_f(k * h))
    ref = float(np.max(logs))
    total = h * float(np.sum(np.exp(logs - ref)))

    for level in range(1, max_levels + 1):
        h /= 2.0
        # only the odd nodes are new at this level
        s = np.arange(-math.ceil(left / h), math.ceil(right / h) + 1)
        s = s[s % 2 != 0] * h
        logs = _finite_log(log_f(s))
        new = 0.5 * total + h * float(np.sum(np.exp(logs - ref)))
        if level >= 2 and abs(new - total) <= rel_tol * new:
            return ref + math.log(new)
        total = new
    raise QuadratureError(f"no convergence to rel_tol={rel_tol} after {max_levels} levels")


def log_integral_half_line(
    log_g: Callable[[np.ndarray], np.ndarray],
    lower: float,
    rel_tol: float = 1e-10,
) -> float:
    """``log ∫_lower^∞ g(x) dx`` for positive ``g`` given as ``log_g``.

    Uses the exp-sinh map ``x = lower + exp(π/2 · sinh s)``; adequate when
    ``g`` decays at least exponentially at infinity and is integrable at
    ``lower``.
    """
    half_pi = 0.5 * math.pi

    def log_f(s: np.ndarray) -> np.ndarray:
        arg = half_pi * np.sinh(s)
        with np.errstate(over="ignore", invalid="ignore"):
            x = lower + np.exp(arg)
            return log_g(x) + arg + np.log(half_pi * np.cosh(s))

    return de_log_integral(log_f, rel_tol=rel_tol)


def integral_half_line(
    log_g: Callable[[np.ndarray], np.ndarray],
    lower: float,
    rel_tol: float = 1e-10,
) -> float:
    return math.exp(log_integral_half_line(log_g, lower, rel_tol))
