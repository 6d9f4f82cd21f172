"""Truncated half-line grids, density fields, and quadrature helpers.

A grid is a strictly increasing partition of [x_min, x_max] with fixed-order
Gauss-Legendre nodes per cell.  A density field stores nonnegative cell
averages; fields produced by projecting an analytic density additionally keep
the node values so expectations can be taken at quadrature accuracy rather
than the piecewise-constant order of solver output.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .densities import GenGammaParams, pdf, quantile

__all__ = [
    "Grid",
    "DensityField",
    "build_grid",
    "equilibrium_grid",
    "project",
    "field_from_samples",
    "expectation",
    "l1_distance",
    "cdf_of_field",
    "field_to_csv",
]

MIN_CELLS = 16
QUAD_ORDER_RANGE = (2, 16)
CSV_FMT = "%.17g"


@dataclass(frozen=True)
class Grid:
    """Cell partition of [edges[0], edges[-1]] with per-cell quadrature rules."""

    edges: np.ndarray
    quad_order: int
    spacing: str = "uniform"
    centers: np.ndarray = field(init=False, repr=False)
    widths: np.ndarray = field(init=False, repr=False)
    node_x: np.ndarray = field(init=False, repr=False)
    node_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or edges.size < MIN_CELLS + 1:
            raise ValueError(f"grid needs at least {MIN_CELLS} cells")
        if edges[0] <= 0.0:
            raise ValueError("grid must start at a strictly positive coordinate")
        widths = np.diff(edges)
        if np.any(widths <= 0.0):
            raise ValueError("grid edges must be strictly increasing")
        qlo, qhi = QUAD_ORDER_RANGE
        if not qlo <= self.quad_order <= qhi:
            raise ValueError(f"quad_order must lie in [{qlo}, {qhi}]")
        centers = 0.5 * (edges[:-1] + edges[1:])
        ref_x, ref_w = np.polynomial.legendre.leggauss(self.quad_order)
        half = 0.5 * widths
        node_x = centers[:, None] + half[:, None] * ref_x[None, :]
        node_w = half[:, None] * ref_w[None, :]
        for name, arr in (
            ("edges", edges),
            ("centers", centers),
            ("widths", widths),
            ("node_x", node_x),
            ("node_w", node_w),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_cells(self) -> int:
        return self.widths.size

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.edges.shape == other.edges.shape and np.array_equal(self.edges, other.edges)
        )


def build_grid(
    x_min: float,
    x_max: float,
    n_cells: int,
    spacing: str = "uniform",
    quad_order: int = 8,
) -> Grid:
    """Uniform or geometric partition of [x_min, x_max]."""
    if not (0.0 < x_min < x_max):
        raise ValueError("need 0 < x_min < x_max")
    if n_cells < MIN_CELLS:
        raise ValueError(f"n_cells must be >= {MIN_CELLS}")
    if spacing == "uniform":
        edges = np.linspace(x_min, x_max, n_cells + 1)
    elif spacing == "geometric":
        edges = np.geomspace(x_min, x_max, n_cells + 1)
    else:
        raise ValueError(f"spacing must be 'uniform' or 'geometric', got {spacing!r}")
    return Grid(edges=edges, quad_order=quad_order, spacing=spacing)


def equilibrium_grid(
    params: GenGammaParams,
    n_cells: int = 512,
    quad_order: int = 8,
    tail_mass: float = 1e-12,
    moment_order: int = 0,
    spacing: str | None = None,
    x_min: float | None = None,
    x_max: float | None = None,
    deep_lower: bool = False,
) -> Grid:
    """Grid sized so the equilibrium tail mass beyond x_max is below tail_mass.

    ``moment_order`` widens the domain so expectations of x**n against the
    density keep the same tail budget (x**n * f is a member with shape
    kappa + n).  The lower cut defaults to 1e-4 * theta, which is what the
    solver wants: cutting much deeper makes the first cells so stiff that
    floating-point mass conservation degrades.  Pure quadrature grids pass
    ``deep_lower=True`` to push the cut to the tail_mass quantile instead,
    which captures the near-origin mass of densities that stay positive or
    diverge at 0.
    """
    if params.lognormal_limit:
        ref = params
    elif moment_order:
        ref = GenGammaParams(params.theta, params.kappa + moment_order, params.delta)
    else:
        ref = params

    if x_max is None:
        x_max = quantile(ref, 1.0 - tail_mass) * 1.25
    if x_min is None:
        if params.lognormal_limit:
            x_min = quantile(params, tail_mass) * 0.8
        elif deep_lower:
            x_min = min(1e-4 * params.theta, quantile(params, tail_mass) * 0.8)
        else:
            x_min = 1e-4 * params.theta
    if spacing is None:
        if params.lognormal_limit:
            spacing = "geometric"
        else:
            spacing = "geometric" if (params.delta < 1.0 or params.kappa < 1.0) else "uniform"
    return build_grid(x_min, x_max, n_cells, spacing=spacing, quad_order=quad_order)


@dataclass(frozen=True)
class DensityField:
    """Nonnegative cell-average density values on a grid.

    ``node_values`` is populated by :func:`project` and carries the density at
    the grid's quadrature nodes; solver output drops it.
    """

    grid: Grid
    values: np.ndarray
    node_values: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_cells,):
            raise ValueError("values must hold one entry per grid cell")
        if np.any(~np.isfinite(values)) or np.any(values < 0.0):
            raise ValueError("density values must be finite and nonnegative")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.node_values is not None:
            nv = np.asarray(self.node_values, dtype=float).copy()
            nv.setflags(write=False)
            object.__setattr__(self, "node_values", nv)

    @property
    def mass(self) -> float:
        return float(self.values @ self.grid.widths)

    def scaled(self, factor: float) -> "DensityField":
        nv = None if self.node_values is None else self.node_values * factor
        return replace(self, values=self.values * factor, node_values=nv)

    def with_values(self, values: np.ndarray) -> "DensityField":
        return DensityField(grid=self.grid, values=values)


def project(pdf_evaluator, grid: Grid, tail_threshold: float = 1e-6) -> DensityField:
    """Cell-average projection of an analytic density by per-cell quadrature.

    Warns when the mass missing from the truncated domain exceeds
    ``tail_threshold``.
    """
    node_values = np.asarray(pdf_evaluator(grid.node_x), dtype=float)
    if node_values.shape != grid.node_x.shape:
        node_values = node_values.reshape(grid.node_x.shape)
    if np.any(~np.isfinite(node_values)) or np.any(node_values < -1e-300):
        raise ValueError("density evaluator must be finite and nonnegative on the domain")
    node_values = np.maximum(node_values, 0.0)
    values = np.sum(grid.node_w * node_values, axis=1) / grid.widths
    fld = DensityField(grid=grid, values=values, node_values=node_values)
    tail = 1.0 - fld.mass
    if abs(tail) > tail_threshold:
        warnings.warn(
            f"projected mass {fld.mass:.12g} differs from 1 by {tail:.3g}; "
            "domain truncation may be too aggressive",
            stacklevel=2,
        )
    return fld


def field_from_samples(evaluator, grid: Grid) -> DensityField:
    """Field whose cell values are pointwise samples at the cell centers."""
    values = np.asarray(evaluator(grid.centers), dtype=float)
    return DensityField(grid=grid, values=values)


def expectation(fld: DensityField, g) -> float:
    """Integral of g against the field's density on the truncated domain.

    Projected fields integrate g * f at the quadrature nodes; solver fields use
    the piecewise-constant reconstruction (cell value times the cell integral
    of g).
    """
    grid = fld.grid
    g_nodes = np.asarray(g(grid.node_x), dtype=float)
    if np.any(~np.isfinite(g_nodes)):
        raise ValueError("test function must be finite at the quadrature nodes")
    if fld.node_values is not None:
        return float(np.sum(grid.node_w * g_nodes * fld.node_values))
    cell_int = np.sum(grid.node_w * g_nodes, axis=1)
    return float(fld.values @ cell_int)


def l1_distance(f: DensityField, g: DensityField) -> float:
    """Sum over cells of |f_i - g_i| * width_i."""
    if not f.grid.same_as(g.grid):
        raise ValueError("fields live on different grids")
    return float(np.abs(f.values - g.values) @ f.grid.widths)


def cdf_of_field(fld: DensityField, x: float) -> float:
    """Cumulative mass of the field up to x, linear inside the covering cell."""
    edges = fld.grid.edges
    if x <= edges[0]:
        return 0.0
    if x >= edges[-1]:
        return fld.mass
    cell_mass = fld.values * fld.grid.widths
    i = int(np.searchsorted(edges, x, side="right")) - 1
    below = float(np.sum(cell_mass[:i]))
    return below + fld.values[i] * (x - edges[i])


def field_to_csv(fld: DensityField, path) -> None:
    """Write `x_center, width, value` rows with 17-significant-digit formatting."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x_center,width,value\n")
        for xc, w, v in zip(fld.grid.centers, fld.grid.widths, fld.values):
            fh.write(f"{xc:.17g},{w:.17g},{v:.17g}\n")
