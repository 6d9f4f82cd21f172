"""Generalized Gamma density family on the half-line.

A member is identified by (theta, kappa, delta): scale, shape, exponent.
The family contains the Gamma (delta = 1), Chi (delta = 2), Weibull
(kappa = delta) and exponential densities, and degenerates to a fixed
log-normal density in the limit handled by the ``lognormal_limit`` flag.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .special import erf_array, log_gamma, reg_lower_gamma, reg_upper_gamma

__all__ = [
    "GenGammaParams",
    "pdf",
    "logpdf",
    "log_pdf_derivative",
    "cdf",
    "quantile",
    "moment",
    "power_transform_params",
    "lognormal_limit_params",
]

_SOLVER_DELTA_MAX = 2.0


@dataclass(frozen=True)
class GenGammaParams:
    """Parameter triple of one family member.

    When ``lognormal_limit`` is set the triple is ignored and the fixed
    log-normal density (log X ~ N(-1, 1)) is used instead.
    """

    theta: float = 1.0
    kappa: float = 1.0
    delta: float = 1.0
    lognormal_limit: bool = False

    def __post_init__(self):
        if self.lognormal_limit:
            return
        if not (self.theta > 0.0 and math.isfinite(self.theta)):
            raise ValueError(f"scale theta must be positive, got {self.theta}")
        if not (self.kappa > 0.0 and math.isfinite(self.kappa)):
            raise ValueError(f"shape kappa must be positive, got {self.kappa}")
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise ValueError(f"exponent delta must be positive, got {self.delta}")
        if self.delta > _SOLVER_DELTA_MAX:
            warnings.warn(
                f"exponent delta={self.delta} lies outside (0, 2]; the density is "
                "still valid but solver guarantees only cover (0, 2]",
                stacklevel=2,
            )

    @property
    def in_solver_range(self) -> bool:
        return self.lognormal_limit or self.delta <= _SOLVER_DELTA_MAX

    @property
    def shape_ratio(self) -> float:
        """Gamma shape kappa/delta of the power-mapped variable X**delta."""
        if self.lognormal_limit:
            raise ValueError("shape_ratio undefined in log-normal mode")
        return self.kappa / self.delta


def _lognormal_logpdf(x: np.ndarray) -> np.ndarray:
    out = np.full_like(x, -np.inf)
    pos = x > 0.0
    lx = np.log(x[pos])
    out[pos] = -0.5 * math.log(2.0 * math.pi) - lx - 0.5 * (lx + 1.0) ** 2
    return out


def logpdf(params: GenGammaParams, x):
    """log of the density; -inf where the density vanishes."""
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr).astype(float)
    if np.any(x_arr < 0.0):
        raise ValueError("density is supported on x >= 0")

    if params.lognormal_limit:
        out = _lognormal_logpdf(x_arr)
    else:
        th, ka, de = params.theta, params.kappa, params.delta
        zero = x_arr == 0.0
        if np.any(zero) and ka < 1.0:
            raise ValueError("density diverges at x = 0 for kappa < 1")
        out = np.empty_like(x_arr)
        log_norm = math.log(de) - ka * math.log(th) - log_gamma(ka / de)
        pos = ~zero
        out[pos] = log_norm + (ka - 1.0) * np.log(x_arr[pos]) - (x_arr[pos] / th) ** de
        if np.any(zero):
            # kappa == 1 has a finite positive boundary value, kappa > 1 vanishes
            out[zero] = log_norm if ka == 1.0 else -np.inf
    return float(out[0]) if scalar else out


def pdf(params: GenGammaParams, x):
    """Density value(s) at x >= 0."""
    lp = logpdf(params, x)
    out = np.exp(lp)
    return float(out) if np.ndim(out) == 0 else out


def log_pdf_derivative(params: GenGammaParams, x):
    """d/dx log f(x) for x > 0."""
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr).astype(float)
    if np.any(x_arr <= 0.0):
        raise ValueError("log-density derivative requires x > 0")
    if params.lognormal_limit:
        out = -(np.log(x_arr) + 2.0) / x_arr
    else:
        th, ka, de = params.theta, params.kappa, params.delta
        out = (ka - 1.0) / x_arr - (de / th**de) * x_arr ** (de - 1.0)
    return float(out[0]) if scalar else out


def cdf(params: GenGammaParams, x):
    """Probability distribution function P(X <= x)."""
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr).astype(float)
    if np.any(x_arr < 0.0):
        raise ValueError("cdf argument must be >= 0")
    if params.lognormal_limit:
        out = np.zeros_like(x_arr)
        pos = x_arr > 0.0
        out[pos] = 0.5 * (1.0 + erf_array((np.log(x_arr[pos]) + 1.0) / math.sqrt(2.0)))
    else:
        z = (x_arr / params.theta) ** params.delta
        out = np.asarray(reg_lower_gamma(params.shape_ratio, z), dtype=float)
        out = np.atleast_1d(out)
    return float(out[0]) if scalar else out


def survival(params: GenGammaParams, x):
    """Upper-tail probability P(X > x), computed without cancellation."""
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr).astype(float)
    if params.lognormal_limit:
        out = 1.0 - np.atleast_1d(np.asarray(cdf(params, x_arr)))
    else:
        z = (x_arr / params.theta) ** params.delta
        out = np.atleast_1d(np.asarray(reg_upper_gamma(params.shape_ratio, z), dtype=float))
    return float(out[0]) if scalar else out


def quantile(params: GenGammaParams, p: float, rel_tol: float = 1e-13) -> float:
    """Inverse cdf by bisection in log x."""
    if not 0.0 < p < 1.0:
        raise ValueError("quantile level must lie strictly in (0, 1)")
    if params.lognormal_limit:
        lo, hi = -1.0, -1.0
        while cdf(params, math.exp(lo)) > p:
            lo -= 8.0
        while cdf(params, math.exp(hi)) < p:
            hi += 8.0
    else:
        # start from the median-scale point and expand in log space
        lo = hi = math.log(params.theta)
        while cdf(params, math.exp(lo)) > p:
            lo -= 8.0 / params.kappa if params.kappa < 1.0 else 8.0
        while cdf(params, math.exp(hi)) < p:
            hi += 8.0 / params.delta
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf(params, math.exp(mid)) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < rel_tol:
            break
    return math.exp(0.5 * (lo + hi))


def moment(params: GenGammaParams, n: int) -> float:
    """n-th raw moment theta^n Gamma((kappa+n)/delta) / Gamma(kappa/delta)."""
    if params.lognormal_limit:
        raise ValueError("closed-form moments are provided for the triple family only")
    if n < 0 or n != int(n):
        raise ValueError("moment order must be a nonnegative integer")
    n = int(n)
    if n == 0:
        return 1.0
    th, ka, de = params.theta, params.kappa, params.delta
    return math.exp(n * math.log(th) + log_gamma((ka + n) / de) - log_gamma(ka / de))


def power_transform_params(params: GenGammaParams, m: float) -> GenGammaParams:
    """Parameters of X**m when X has the given density: (theta^m, kappa/m, delta/m).

    Emits a warning (via the constructor) when the mapped exponent leaves
    (0, 2], the range the solver covers.
    """
    if params.lognormal_limit:
        raise ValueError("power transform is defined on the (theta, kappa, delta) family")
    if not m > 0.0:
        raise ValueError("power-map exponent m must be positive")
    return GenGammaParams(
        theta=params.theta**m,
        kappa=params.kappa / m,
        delta=params.delta / m,
    )


def lognormal_limit_params(delta: float, m: float) -> tuple[float, float]:
    """(theta, kappa) along the path whose m -> infinity limit is log-normal."""
    if not (delta > 0.0 and m > 0.0):
        raise ValueError("delta and m must be positive")
    theta = (delta / m) ** (2.0 / delta)
    kappa = m * (m / delta + delta / m - 1.0)
    return theta, kappa
