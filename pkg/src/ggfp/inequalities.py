"""Verification suites for the weighted variance and entropy inequalities.

For a family member Y with exponent delta the variance (Chernoff/Poincare)
bound reads  Var[psi(Y)] <= (theta^delta/delta^2) E[Y^(2-delta) psi'(Y)^2],
and, when kappa >= delta/2, the entropy bound reads
Ent[psi(Y)^2] <= (4 theta^delta/delta^2) E[Y^(2-delta) psi'(Y)^2].
The log-normal mode replaces the weight by Y^2 with constants 1 and 4.

Suites evaluate both sides by analytic-density quadrature on seeded families
of bounded smooth test functions; the pass tolerance is tied to the
quadrature budget, never a free parameter.  A failing margin inside the
budget is reported as inconclusive, outside it as a violation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import densities
from .densities import GenGammaParams, quantile
from .functionals import (
    analytic_expectation,
    ent_of,
    relative_entropy,
    variance_of,
    weighted_fisher,
)
from .grids import DensityField, project
from .solver import fisher_weight_exponent

__all__ = [
    "TestFunction",
    "InequalityReport",
    "PreconditionError",
    "ConvexityResult",
    "chernoff_report",
    "logsobolev_report",
    "density_lsi_report",
    "potential_convexity",
    "generate_test_functions",
    "sharpness_test_functions",
    "run_suite",
    "suite_to_csv",
]

BUDGET_SCALE = 1e-8
_DERIV_CHECK_POINTS = 100
_DERIV_CHECK_RTOL = 1e-6

STATUS_PASS = "pass"
STATUS_INCONCLUSIVE = "inconclusive"
STATUS_VIOLATION = "violation"


class PreconditionError(ValueError):
    """A hypothesis of one of the inequalities is not met."""


@dataclass(frozen=True)
class TestFunction:
    """Bounded smooth test function with its analytic derivative.

    The derivative is validated against central differences at construction;
    ``bound`` is the certificate used by the generators.
    """

    psi: Callable
    dpsi: Callable
    label: str
    bound: float
    check_interval: tuple[float, float] = (1e-3, 20.0)

    def __post_init__(self):
        lo, hi = self.check_interval
        rng = np.random.default_rng(abs(hash(self.label)) % (2**32))
        x = np.exp(rng.uniform(math.log(lo), math.log(hi), _DERIV_CHECK_POINTS))
        # keep x - h positive and the step meaningful next to a singular origin
        h = np.minimum(6e-6 * (x + 0.01 * (hi - lo)), 0.25 * x)
        fd = (np.asarray(self.psi(x + h)) - np.asarray(self.psi(x - h))) / (2.0 * h)
        d = np.asarray(self.dpsi(x), dtype=float)
        scale = float(np.max(np.abs(d))) + 1e-12
        tol = _DERIV_CHECK_RTOL * (np.abs(d) + 1e-3 * scale)
        if np.any(np.abs(fd - d) > tol):
            worst = int(np.argmax(np.abs(fd - d) - tol))
            raise ValueError(
                f"derivative of test function {self.label!r} disagrees with finite "
                f"differences at x={x[worst]:.6g}: {d[worst]:.9g} vs {fd[worst]:.9g}"
            )


@dataclass(frozen=True)
class InequalityReport:
    label: str
    lhs: float
    rhs: float
    weight: str
    constant: float
    ratio: float | None
    margin: float
    budget: float
    status: str

    @property
    def passed(self) -> bool:
        return self.status != STATUS_VIOLATION


def _classify(lhs: float, rhs: float, budget: float) -> str:
    if lhs <= rhs:
        return STATUS_PASS
    if lhs <= rhs + budget:
        return STATUS_INCONCLUSIVE
    return STATUS_VIOLATION


def _report(label, lhs, rhs, weight, constant) -> InequalityReport:
    budget = BUDGET_SCALE * max(1.0, rhs)
    return InequalityReport(
        label=label,
        lhs=lhs,
        rhs=rhs,
        weight=weight,
        constant=constant,
        ratio=(lhs / rhs) if rhs > 1e-300 else None,
        margin=rhs - lhs,
        budget=budget,
        status=_classify(lhs, rhs, budget),
    )


def _weight_and_constant(params: GenGammaParams) -> tuple[str, float, float]:
    """Weight exponent label and the variance-bound constant theta^delta/delta^2."""
    beta = fisher_weight_exponent(params)
    if params.lognormal_limit:
        return f"x^{beta:g}", 1.0, beta
    return f"x^{beta:g}", params.theta**params.delta / params.delta**2, beta


def _weighted_gradient_energy(params: GenGammaParams, psi: TestFunction, **quad) -> float:
    beta = fisher_weight_exponent(params)
    return analytic_expectation(
        params, lambda x: x**beta * np.asarray(psi.dpsi(x)) ** 2, **quad
    )


def chernoff_report(params: GenGammaParams, psi: TestFunction, **quad) -> InequalityReport:
    """Variance bound report: lhs = Var[psi], rhs = constant * E[x^(2-delta) psi'^2]."""
    weight, constant, _ = _weight_and_constant(params)
    lhs = variance_of(psi.psi, params, **quad)
    rhs = constant * _weighted_gradient_energy(params, psi, **quad)
    return _report(psi.label, lhs, rhs, weight, constant)


def _require_log_sobolev_hypothesis(params: GenGammaParams) -> None:
    if params.lognormal_limit:
        return
    if params.kappa < params.delta / 2.0:
        raise PreconditionError(
            "the weighted logarithmic Sobolev inequality holds provided "
            f"kappa >= delta/2; got kappa={params.kappa:g} < delta/2={params.delta / 2.0:g}"
        )


def logsobolev_report(params: GenGammaParams, psi: TestFunction, **quad) -> InequalityReport:
    """Entropy bound report: lhs = Ent[psi^2], rhs = 4 * constant * E[x^(2-delta) psi'^2]."""
    _require_log_sobolev_hypothesis(params)
    weight, constant, _ = _weight_and_constant(params)
    lhs = ent_of(psi.psi, params, **quad)
    rhs = 4.0 * constant * _weighted_gradient_energy(params, psi, **quad)
    return _report(psi.label, lhs, rhs, weight, 4.0 * constant)


def density_lsi_report(fld: DensityField, params: GenGammaParams) -> InequalityReport:
    """Density-level bound: H(f|f_inf) <= constant * I_(2-delta)(f|f_inf)."""
    _require_log_sobolev_hypothesis(params)
    weight, constant, beta = _weight_and_constant(params)
    eq = project(lambda x: densities.pdf(params, x), fld.grid, tail_threshold=np.inf)
    eq_plain = eq.with_values(eq.values)
    lhs = relative_entropy(fld, eq_plain)
    rhs = constant * weighted_fisher(fld, eq_plain, beta)
    return _report("density_lsi", lhs, rhs, weight, constant)


class ConvexityResult(NamedTuple):
    rho: float
    lsi_constant: float


def potential_convexity(params: GenGammaParams) -> ConvexityResult:
    """Uniform-convexity modulus of the constant-diffusion reduction.

    The reduced potential has w''(x) = 2/theta^delta + (2 kappa/delta - 1)/x^2,
    so for kappa >= delta/2 the infimum is rho = 2/theta^delta and the entropy
    bound constant is 1/(2 rho) = theta^delta/4.
    """
    if params.lognormal_limit:
        td = 1.0
    else:
        if params.kappa < params.delta / 2.0:
            raise PreconditionError(
                "the reduced potential is not uniformly convex: its curvature "
                f"2/theta^delta + (2*kappa/delta - 1)/x^2 has no positive infimum "
                f"for kappa={params.kappa:g} < delta/2={params.delta / 2.0:g}"
            )
        td = params.theta**params.delta
    return ConvexityResult(rho=2.0 / td, lsi_constant=td / 4.0)


def _tanh_cubic(coeffs: np.ndarray, scale: float, label: str) -> TestFunction:
    c0, c1, c2, c3 = (float(c) for c in coeffs)

    def psi(x):
        u = np.asarray(x, dtype=float) / scale
        return np.tanh(c0 + u * (c1 + u * (c2 + u * c3)))

    def dpsi(x):
        u = np.asarray(x, dtype=float) / scale
        inner = c0 + u * (c1 + u * (c2 + u * c3))
        return (1.0 - np.tanh(inner) ** 2) * (c1 + u * (2.0 * c2 + 3.0 * c3 * u)) / scale

    return TestFunction(psi=psi, dpsi=dpsi, label=label, bound=1.0,
                        check_interval=(1e-3 * scale, 20.0 * scale))


def _sin_log(c: float, scale: float, label: str) -> TestFunction:
    def psi(x):
        return np.sin(c * np.log1p(np.asarray(x, dtype=float) / scale))

    def dpsi(x):
        x = np.asarray(x, dtype=float)
        return c * np.cos(c * np.log1p(x / scale)) / (scale + x)

    return TestFunction(psi=psi, dpsi=dpsi, label=label, bound=1.0,
                        check_interval=(1e-3 * scale, 20.0 * scale))


def _sigmoid(c: float, label: str, scale: float) -> TestFunction:
    def psi(x):
        x = np.asarray(x, dtype=float)
        return x / (x + c)

    def dpsi(x):
        x = np.asarray(x, dtype=float)
        return c / (x + c) ** 2

    return TestFunction(psi=psi, dpsi=dpsi, label=label, bound=1.0,
                        check_interval=(1e-3 * scale, 20.0 * scale))


def generate_test_functions(
    seed: int, count: int, domain_scale: float = 1.0
) -> list[TestFunction]:
    """Deterministic family of bounded smooth test functions.

    Cycles through tanh-of-random-cubic, sin(c*log(1+x/scale)) and rational
    sigmoid x/(x+c) shapes; identical seeds yield identical families.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if domain_scale <= 0.0:
        raise ValueError("domain_scale must be positive")
    rng = np.random.default_rng(seed)
    out: list[TestFunction] = []
    for k in range(count):
        kind = k % 3
        if kind == 0:
            coeffs = rng.uniform(-2.0, 2.0, size=4)
            out.append(_tanh_cubic(coeffs, domain_scale, f"tanh_cubic_{k}"))
        elif kind == 1:
            c = float(rng.uniform(0.3, 2.5))
            out.append(_sin_log(c, domain_scale, f"sin_log_{k}"))
        else:
            c = float(rng.uniform(0.2, 5.0)) * domain_scale
            out.append(_sigmoid(c, f"sigmoid_{k}", domain_scale))
    return out


def _smooth_clip_above(v: np.ndarray, hi: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    """C^1 clip of v at hi from above; returns (clipped, chain factor)."""
    over = v > hi
    out = np.where(over, hi + width * np.tanh((v - hi) / width), v)
    factor = np.where(over, 1.0 / np.cosh(np.minimum((v - hi) / width, 300.0)) ** 2, 1.0)
    return out, factor


def _smooth_clip_below(v: np.ndarray, lo: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    under = v < lo
    out = np.where(under, lo + width * np.tanh((v - lo) / width), v)
    factor = np.where(under, 1.0 / np.cosh(np.minimum((lo - v) / width, 300.0)) ** 2, 1.0)
    return out, factor


def sharpness_test_functions(
    params: GenGammaParams,
    coefficients: tuple[tuple[float, float], ...] = ((1.0, 0.0), (0.5, 1.0), (2.0, -1.0)),
    tail_mass: float = 1e-10,
) -> list[TestFunction]:
    """The equality family a * x^delta + b, smoothly clipped far in the tail.

    Equality in the variance bound is attained by functions linear in
    x^delta (log x in the log-normal mode).  Those are unbounded, so beyond
    the 1 - tail_mass quantile the profile is blended to a constant; the
    clipping is noted in the label and perturbs the ratio at the tail-mass
    level.
    """
    x_hi = quantile(params, 1.0 - tail_mass)
    # derivative validation stays in the bulk, away from the singular origin
    check_hi = quantile(params, 0.95)
    check_lo = quantile(params, 0.05)
    out: list[TestFunction] = []
    for a, b in coefficients:
        if params.lognormal_limit:
            x_lo = quantile(params, tail_mass)
            lo, hi, width = math.log(x_lo), math.log(x_hi), 2.0

            def psi(x, a=a, b=b, lo=lo, hi=hi, width=width):
                v = np.log(np.asarray(x, dtype=float))
                v, _ = _smooth_clip_above(v, hi, width)
                v, _ = _smooth_clip_below(v, lo, width)
                return a * v + b

            def dpsi(x, a=a, lo=lo, hi=hi, width=width):
                x = np.asarray(x, dtype=float)
                v = np.log(x)
                _, f_hi = _smooth_clip_above(v, hi, width)
                _, f_lo = _smooth_clip_below(v, lo, width)
                return a * f_hi * f_lo / x

            bound = abs(a) * (max(abs(lo), abs(hi)) + width) + abs(b)
            label = f"sharpness_log_a{a:g}_b{b:g}_clipped"
        else:
            de = params.delta
            v_hi = x_hi**de
            width = 0.5 * v_hi

            def psi(x, a=a, b=b, de=de, v_hi=v_hi, width=width):
                v = np.asarray(x, dtype=float) ** de
                v, _ = _smooth_clip_above(v, v_hi, width)
                return a * v + b

            def dpsi(x, a=a, de=de, v_hi=v_hi, width=width):
                x = np.asarray(x, dtype=float)
                v = x**de
                _, factor = _smooth_clip_above(v, v_hi, width)
                return a * de * x ** (de - 1.0) * factor

            bound = abs(a) * (v_hi + width) + abs(b)
            label = f"sharpness_a{a:g}_b{b:g}_clipped"
        out.append(
            TestFunction(psi=psi, dpsi=dpsi, label=label, bound=bound,
                         check_interval=(check_lo, check_hi))
        )
    return out


def run_suite(
    kind: str,
    params: GenGammaParams,
    functions: list[TestFunction],
    **quad,
) -> list[InequalityReport]:
    """Evaluate one report per test function, in input order."""
    if kind == "chernoff":
        return [chernoff_report(params, psi, **quad) for psi in functions]
    if kind == "logsobolev":
        return [logsobolev_report(params, psi, **quad) for psi in functions]
    raise ValueError(f"unknown suite kind {kind!r}")


def suite_to_csv(reports: list[InequalityReport], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("label,lhs,rhs,ratio,margin,pass\n")
        for r in reports:
            ratio = "nan" if r.ratio is None else f"{r.ratio:.17g}"
            fh.write(
                f"{r.label},{r.lhs:.17g},{r.rhs:.17g},{ratio},"
                f"{r.margin:.17g},{str(r.passed).lower()}\n"
            )
