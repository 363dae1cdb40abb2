"""Gamma-GH law and its normal-variance-mixture relatives.

A gamma-GH variable is ``X = mu + sigma * Z * sqrt(W)`` with ``Z`` standard
normal and ``W ~ gamma(a, beta)`` independent of ``Z``. The rate ``beta``
is used both in the characteristic function and in the sampler. Densities
for inverse-gamma and GIG mixing are provided as well, but only the gamma
case can be sampled.

The GIG normalising constant

    C(a, b, c) = ∫_0^∞ x^(a-1) exp(-(b x + c / x) / 2) dx

is computed by DE quadrature after the substitution ``x = exp(t)``; it is
never taken from a Bessel-function identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .quadrature import de_log_integral
from .rng import RngStream

DEFAULT_REL_TOL = 1e-10
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_TINY = float(np.nextafter(0.0, 1.0))


class DomainError(ValueError):
    """A parameter lies outside the domain of the law or operation."""


class DivergentIntegral(DomainError):
    """The GIG integral C(a, b, c) is infinite for these parameters."""


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class GammaGhParams:
    """Parameters of gamma-gh(a, beta, 0, mu, sigma)."""

    a: float
    beta: float
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        _check_finite(a=self.a, beta=self.beta, mu=self.mu, sigma=self.sigma)
        if self.a <= 0:
            raise DomainError(f"a must be > 0, got {self.a}")
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    def scaled(self, time_scale: float) -> GammaGhParams:
        """Margin law at time ``time_scale``: shape and drift scale, beta and sigma do not."""
        return GammaGhParams(self.a * time_scale, self.beta, self.mu * time_scale, self.sigma)


@dataclass(frozen=True)
class IgParams:
    a: float
    beta: float

    def __post_init__(self) -> None:
        _check_finite(a=self.a, beta=self.beta)
        if self.a <= 0 or self.beta <= 0:
            raise DomainError(f"inverse gamma needs a > 0 and beta > 0, got a={self.a}, beta={self.beta}")


def _gig_divergent(a: float, b: float, c: float) -> bool:
    return (c == 0 and a <= 0) or (b == 0 and a >= 0)


@dataclass(frozen=True)
class GigParams:
    """GIG(a, b, c) with density proportional to x^(a-1) exp(-(b x + c/x)/2)."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        _check_finite(a=self.a, b=self.b, c=self.c)
        if self.b < 0 or self.c < 0:
            raise DomainError(f"b and c must be >= 0, got b={self.b}, c={self.c}")
        if _gig_divergent(self.a, self.b, self.c):
            raise DivergentIntegral(
                f"C(a={self.a}, b={self.b}, c={self.c}) diverges: "
                "needs c > 0 when a <= 0 and b > 0 when a >= 0"
            )
        # Remaining domain conditions are implied once divergence is excluded:
        # a = 0 -> b > 0, c > 0;  a > 0 -> b > 0;  a < 0 -> c > 0.


def _check_rel_tol(rel_tol: float) -> None:
    if not 0 < rel_tol <= 1e-4:
        raise DomainError(f"rel_tol must lie in (0, 1e-4], got {rel_tol}")


def _gig_mode(a: float, b: float, c: float) -> float:
    """Maximiser y of y^a exp(-(b y + c/y)/2), i.e. the mode in t = log y."""
    root = math.sqrt(a * a + b * c)
    if a > 0:
        return (a + root) / b
    return c / (root - a)


def log_gig_integral(a: float, b: float, c: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``log C(a, b, c)`` without the parameter-domain bookkeeping of :class:`GigParams`.

    Only divergence is checked. Used internally where the first argument is
    shifted (``a - 1/2``) and may leave the nominal GIG domain.
    """
    if _gig_divergent(a, b, c):
        raise DivergentIntegral(f"C(a={a}, b={b}, c={c}) diverges")
    _check_rel_tol(rel_tol)

    # x = exp(t):  integrand exp(phi(t)),  phi(t) = a t - (b e^t + c e^-t) / 2
    y0 = _gig_mode(a, b, c)
    t0 = math.log(y0)
    curvature = 0.5 * (b * y0 + c / y0)
    width = 1.0 / math.sqrt(curvature)
    phi0 = a * t0 - 0.5 * (b * y0 + c / y0)

    def log_f(s: np.ndarray) -> np.ndarray:
        dt = width * np.sinh(s)
        with np.errstate(over="ignore", invalid="ignore"):
            val = a * dt
            if b > 0:
                val = val - 0.5 * b * y0 * np.expm1(dt)
            if c > 0:
                val = val - 0.5 * (c / y0) * np.expm1(-dt)
            return val + np.log(width * np.cosh(s))

    # phi(t0 + dt) - phi0 = a dt - (b y0 (e^dt - 1) + (c / y0)(e^-dt - 1)) / 2
    return phi0 + de_log_integral(log_f, rel_tol=rel_tol)


def gig_norm_constant(p: GigParams, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """C(a, b, c) to relative accuracy ``rel_tol``."""
    return math.exp(log_gig_integral(p.a, p.b, p.c, rel_tol))


def pdf_gamma_gh(p: GammaGhParams, u: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Density of gamma-gh(a, beta, 0, mu, sigma) at ``u``.

    Returns ``inf`` at ``u == mu`` when ``a <= 1/2``; the singularity is
    integrable.
    """
    z2 = ((u - p.mu) / p.sigma) ** 2
    if z2 == 0 and p.a <= 0.5:
        return math.inf
    log_c = log_gig_integral(p.a - 0.5, 2.0 * p.beta, z2, rel_tol)
    log_norm = p.a * math.log(p.beta) - math.log(p.sigma) - _LOG_SQRT_2PI - float(gammaln(p.a))
    return math.exp(log_norm + log_c)


def pdf_ig_gh(p: IgParams, mu: float, sigma: float, u: float) -> float:
    """Density of the inverse-gamma mixture (a scaled Student t with 2a dof)."""
    _check_finite(mu=mu, sigma=sigma, u=u)
    if sigma <= 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    a, beta = p.a, p.beta
    z2 = ((u - mu) / sigma) ** 2
    log_f = (
        (a + 0.5) * math.log(2.0)
        + a * math.log(beta)
        + float(gammaln(a + 0.5))
        - math.log(sigma)
        - float(gammaln(a))
        - _LOG_SQRT_2PI
        - (a + 0.5) * math.log(z2 + 2.0 * beta)
    )
    return math.exp(log_f)


def pdf_gig_gh(
    p: GigParams, mu: float, sigma: float, u: float, rel_tol: float = DEFAULT_REL_TOL
) -> float:
    """Density of the GIG mixture, as a ratio of two GIG constants."""
    _check_finite(mu=mu, sigma=sigma, u=u)
    if sigma <= 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    z2 = ((u - mu) / sigma) ** 2
    inner_c = p.c + z2
    if inner_c == 0 and p.a <= 0.5:
        return math.inf
    log_num = log_gig_integral(p.a - 0.5, p.b, inner_c, rel_tol)
    log_den = log_gig_integral(p.a, p.b, p.c, rel_tol)
    return math.exp(log_num - log_den - math.log(sigma) - _LOG_SQRT_2PI)


def charfn_gamma_gh(p: GammaGhParams, time_scale: float, u):
    """Characteristic function of the time-``time_scale`` margin.

    ``exp(i mu s u) * (1 + sigma^2 u^2 / (2 beta))^(-a s)`` with ``s`` the
    time scale. Accepts a scalar (returns ``complex``) or an array.
    """
    if not time_scale > 0:
        raise DomainError(f"time_scale must be > 0, got {time_scale}")
    uu = np.asarray(u, dtype=float)
    modulus = np.exp(-p.a * time_scale * np.log1p(p.sigma**2 * uu**2 / (2.0 * p.beta)))
    phase = p.mu * time_scale * uu
    out = modulus * np.cos(phase) + 1j * (modulus * np.sin(phase))
    if out.ndim == 0:
        return complex(out)
    return out


def moment_transform_gamma(p: GammaGhParams, t):
    """Laplace transform E exp(-t W) of the gamma(a, beta) mixing law."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise DomainError("moment transform is defined for t >= 0")
    out = np.exp(-p.a * np.log1p(tt / p.beta))
    return float(out) if out.ndim == 0 else out


def sample_log_gamma(shape, rate: float, rng: RngStream, size=None):
    """Draw ``log G`` with ``G ~ gamma(shape, rate)``, exact for any shape > 0.

    For shape < 1 uses ``G = G' * U^(1/shape)`` with ``G' ~ gamma(shape + 1)``,
    evaluated as ``log G' - E / shape`` with ``E ~ Exp(1)`` so that draws
    far below the smallest double keep their value.
    """
    shape = np.asarray(shape, dtype=float)
    if np.any(shape <= 0) or not rate > 0:
        raise DomainError("gamma sampling needs shape > 0 and rate > 0")
    if size is None and shape.ndim > 0:
        size = shape.shape
    boosted = shape < 1
    logw = np.log(rng.standard_gamma(np.where(boosted, shape + 1.0, shape), size=size))
    if np.any(boosted):
        e = rng.standard_exponential(size=size)
        logw = logw - np.where(boosted, e / shape, 0.0)
    logw = logw - math.log(rate)
    return float(logw) if np.ndim(logw) == 0 else logw


def sample_gamma(shape, rate: float, rng: RngStream, size=None):
    """Draw from gamma(shape, rate).

    Values below the smallest positive double are returned as that double,
    so every draw is strictly positive.
    """
    logw = sample_log_gamma(shape, rate, rng, size)
    out = np.maximum(np.exp(logw), _TINY)
    return float(out) if np.ndim(out) == 0 else out


def sample_gamma_gh(p: GammaGhParams, time_scale: float, rng: RngStream, size=None):
    """Draw from gamma-gh(a s, beta, 0, mu s, sigma) with ``s = time_scale``.

    The normal variates are drawn before the gamma variates, so two calls on
    identically seeded streams share their normals whatever ``a`` is.
    """
    if not time_scale > 0:
        raise DomainError(f"time_scale must be > 0, got {time_scale}")
    z = rng.standard_normal(size)
    logw = sample_log_gamma(p.a * time_scale, p.beta, rng, size)
    out = p.mu * time_scale + p.sigma * z * np.exp(0.5 * logw)
    return float(out) if np.ndim(out) == 0 else out
