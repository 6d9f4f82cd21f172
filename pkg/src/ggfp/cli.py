"""Experiment driver: JSON config in, CSVs and a machine-readable summary out.

Exit codes: 0 all checks pass, 1 usage/config error, 2 at least one bound
violated beyond its quadrature budget, 3 inconclusive (violations inside the
budget only).  Repeating a run with the same config and seed produces
byte-identical outputs.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np
import scipy

from . import __version__, densities
from .densities import GenGammaParams, quantile
from .grids import build_grid, equilibrium_grid, field_to_csv, project
from .inequalities import (
    PreconditionError,
    generate_test_functions,
    run_suite,
    sharpness_test_functions,
    suite_to_csv,
)
from .scaling import scaling_equivalence_report, scaling_report_to_csv
from .solver import (
    SolverConfig,
    SolverError,
    classify_boundary,
    default_dt,
    fisher_weight_exponent,
    solve,
    stationary_flux_residual,
)

STATUS_ORDER = {"pass": 0, "inconclusive": 3, "violation": 2}

DEFAULT_TOLERANCES = {
    "residual": 1e-12,
    "mass_drift": 1e-12,
    "decay_slack": 0.05,
    "ck_slack": 1e-10,
    "identity_rtol": 0.02,
    "identity_window": [0.25, 0.75],
    "scaling_sup": 5e-3,
    "initial_mass": 1e-6,
}

DEFAULT_GRID = {
    "n_cells": 512,
    "quad_order": 8,
    "x_min": None,
    "x_max": None,
    "spacing": None,
    "tail_mass": 1e-12,
}

DEFAULT_SOLVER = {
    "dt": None,
    "t_end": 1.0,
    "cadence": 1,
    "fitting": "exact",
    "snapshot_every": None,
}

DEFAULT_SUITE = {"count": 200, "seed": 42, "domain_scale": None, "include_sharpness": True}


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


def _section(cfg: dict, name: str, defaults: dict) -> dict:
    raw = cfg.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    unknown = set(raw) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(raw)
    return merged


def _parse_params(cfg: dict, key: str) -> GenGammaParams:
    raw = cfg.get(key)
    if raw is None:
        raise ConfigError(f"config is missing the {key!r} section")
    if not isinstance(raw, dict):
        raise ConfigError(f"config section {key!r} must be an object")
    try:
        if raw.get("lognormal_limit", False):
            return GenGammaParams(lognormal_limit=True)
        return GenGammaParams(
            theta=float(raw.get("theta", 1.0)),
            kappa=float(raw.get("kappa", 1.0)),
            delta=float(raw.get("delta", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {key!r} parameters: {exc}") from exc


def _grid_for(params_list, grid_cfg: dict, cells_override: int | None):
    n_cells = cells_override if cells_override is not None else int(grid_cfg["n_cells"])
    tail = float(grid_cfg["tail_mass"])
    sub = [
        equilibrium_grid(
            p,
            n_cells=n_cells,
            quad_order=int(grid_cfg["quad_order"]),
            tail_mass=tail,
            spacing=grid_cfg["spacing"],
            x_min=grid_cfg["x_min"],
            x_max=grid_cfg["x_max"],
        )
        for p in params_list
    ]
    if len(sub) == 1:
        return sub[0]
    x_min = min(g.edges[0] for g in sub)
    x_max = max(g.edges[-1] for g in sub)
    spacing = "geometric" if any(g.spacing == "geometric" for g in sub) else "uniform"
    if grid_cfg["spacing"] is not None:
        spacing = grid_cfg["spacing"]
    return build_grid(x_min, x_max, n_cells, spacing=spacing,
                      quad_order=int(grid_cfg["quad_order"]))


def _solver_config(solver_cfg: dict) -> SolverConfig:
    try:
        return SolverConfig(
            dt=None if solver_cfg["dt"] is None else float(solver_cfg["dt"]),
            t_end=float(solver_cfg["t_end"]),
            cadence=int(solver_cfg["cadence"]),
            fitting=str(solver_cfg["fitting"]),
            snapshot_every=(
                None if solver_cfg["snapshot_every"] is None else int(solver_cfg["snapshot_every"])
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver section: {exc}") from exc


def _params_json(p: GenGammaParams) -> dict:
    if p.lognormal_limit:
        return {"lognormal_limit": True}
    return {"theta": p.theta, "kappa": p.kappa, "delta": p.delta}


def _check(name: str, lhs: float, rhs: float, status: str | None = None, **extra) -> dict:
    if status is None:
        status = "pass" if lhs <= rhs else "violation"
    out = {
        "name": name,
        "lhs": lhs,
        "rhs": rhs,
        "margin": rhs - lhs,
        "pass": status != "violation",
        "status": status,
    }
    out.update(extra)
    return out


def _write_summary(out_dir: Path, command: str, params, checks, extras: dict, quiet: bool) -> int:
    summary = {
        "command": command,
        "params": _params_json(params) if params is not None else None,
        "checks": checks,
        "versions": {
            "ggfp": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
    }
    summary.update(extras)
    (out_dir / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2, allow_nan=True) + "\n",
        encoding="utf-8",
    )
    code = 0
    for c in checks:
        code = max(code, STATUS_ORDER.get(c.get("status", "pass"), 2))
    if not quiet:
        n_bad = sum(1 for c in checks if not c["pass"])
        click.echo(f"{command}: {len(checks)} checks, {n_bad} violations -> exit {code}")
    return code


def _run_solver_command(command, cfg, out_dir, cells, quiet):
    params = _parse_params(cfg, "params")
    initial_params = _parse_params(cfg, "initial") if "initial" in cfg else params
    grid_cfg = _section(cfg, "grid", DEFAULT_GRID)
    solver_cfg = _section(cfg, "solver", DEFAULT_SOLVER)
    tol = _section(cfg, "tolerances", DEFAULT_TOLERANCES)
    grid = _grid_for([params, initial_params], grid_cfg, cells)
    config = _solver_config(solver_cfg)

    initial = project(lambda x: densities.pdf(initial_params, x), grid,
                      tail_threshold=float(tol["initial_mass"]))
    traj = solve(initial, params, config)
    traj.to_csv(out_dir / "trajectory.csv")
    for idx, (_, snap) in enumerate(traj.snapshots):
        field_to_csv(snap, out_dir / f"snapshot_{idx}.csv")

    checks = [_check("mass_conservation", traj.max_mass_drift, float(tol["mass_drift"]))]

    rate = 1.0 if params.lognormal_limit else params.delta**2 / params.theta**params.delta
    h0 = traj.records[0].entropy
    slack = float(tol["decay_slack"])
    if h0 > 1e-300:
        worst = max(r.entropy / (h0 * math.exp(-rate * r.t)) for r in traj.records)
        checks.append(_check("decay_bound_ratio", worst, 1.0 + slack))

    if command == "verify-decay":
        ck_slack = float(tol["ck_slack"])
        worst_ck = max(r.l1 - 2.0 * math.sqrt(max(r.entropy, 0.0)) for r in traj.records)
        checks.append(_check("csiszar_kullback_excess", worst_ck, ck_slack))

        constant = 1.0 if params.lognormal_limit else params.theta**params.delta / params.delta**2
        worst_lsi = max(
            r.entropy - constant * r.fisher - 1e-8 * max(1.0, constant * r.fisher)
            for r in traj.records
        )
        checks.append(_check("density_lsi_excess", worst_lsi, 0.0))

        w0, w1 = (float(v) for v in tol["identity_window"])
        times = traj.times
        ent = traj.entropies
        fis = traj.fishers
        mism = []
        for k in range(1, len(times) - 1):
            t = times[k]
            if not (w0 * config.t_end <= t <= w1 * config.t_end):
                continue
            dh = (ent[k + 1] - ent[k - 1]) / (times[k + 1] - times[k - 1])
            if fis[k] > 1e-300:
                mism.append(abs(dh + fis[k]) / fis[k])
        if mism:
            checks.append(
                _check("entropy_production_identity", max(mism), float(tol["identity_rtol"]))
            )

    extras = {
        "grid": {
            "n_cells": grid.n_cells,
            "x_min": grid.edges[0],
            "x_max": grid.edges[-1],
            "spacing": grid.spacing,
            "quad_order": grid.quad_order,
        },
        "solver": {
            "dt": config.dt if config.dt is not None else default_dt(params),
            "t_end": config.t_end,
            "cadence": config.cadence,
            "fitting": config.fitting,
        },
        "initial": _params_json(initial_params),
        "tolerances": tol,
        "decay_rate": rate,
    }
    return _write_summary(out_dir, command, params, checks, extras, quiet)


def _run_suite_command(command, cfg, out_dir, cells, seed_override, quiet):
    params = _parse_params(cfg, "params")
    suite_cfg = _section(cfg, "suite", DEFAULT_SUITE)
    grid_cfg = _section(cfg, "grid", DEFAULT_GRID)
    tol = _section(cfg, "tolerances", DEFAULT_TOLERANCES)
    seed = int(seed_override if seed_override is not None else suite_cfg["seed"])
    count = int(suite_cfg["count"])
    scale = suite_cfg["domain_scale"]
    if scale is None:
        scale = quantile(params, 0.5)
    kind = "chernoff" if command == "verify-poincare" else "logsobolev"

    functions = generate_test_functions(seed, count, domain_scale=float(scale))
    if suite_cfg["include_sharpness"] and kind == "chernoff":
        functions = functions + sharpness_test_functions(params)

    n_cells = cells if cells is not None else int(grid_cfg["n_cells"])
    reports = run_suite(kind, params, functions,
                        n_cells=n_cells, quad_order=12)
    suite_to_csv(reports, out_dir / "suite.csv")

    checks = [
        _check(r.label, r.lhs, r.rhs + r.budget, status=r.status,
               ratio=r.ratio, budget=r.budget)
        for r in reports
    ]
    n_viol = sum(1 for r in reports if r.status == "violation")
    checks.append(_check("suite_violations", float(n_viol), 0.0))
    extras = {
        "suite": {"count": count, "seed": seed, "domain_scale": float(scale),
                  "kind": kind, "n_cells": n_cells},
        "tolerances": tol,
    }
    return _write_summary(out_dir, command, params, checks, extras, quiet)


def _run_steady(cfg, out_dir, cells, quiet):
    params = _parse_params(cfg, "params")
    grid_cfg = _section(cfg, "grid", DEFAULT_GRID)
    tol = _section(cfg, "tolerances", DEFAULT_TOLERANCES)
    grid = _grid_for([params], grid_cfg, cells)
    eq = project(lambda x: densities.pdf(params, x), grid, tail_threshold=np.inf)
    field_to_csv(eq, out_dir / "equilibrium.csv")
    residual = stationary_flux_residual(params, grid)
    checks = [
        _check("stationary_flux_residual", residual, float(tol["residual"])),
        _check("projected_mass_deficit", abs(1.0 - eq.mass), float(tol["initial_mass"])),
    ]
    extras = {
        "grid": {
            "n_cells": grid.n_cells,
            "x_min": grid.edges[0],
            "x_max": grid.edges[-1],
            "spacing": grid.spacing,
            "quad_order": grid.quad_order,
        },
        "tolerances": tol,
    }
    return _write_summary(out_dir, "steady", params, checks, extras, quiet)


def _run_scaling(cfg, out_dir, cells, quiet):
    params = _parse_params(cfg, "params")
    initial_params = _parse_params(cfg, "initial") if "initial" in cfg else params
    grid_cfg = _section(cfg, "grid", DEFAULT_GRID)
    solver_cfg = _section(cfg, "solver", DEFAULT_SOLVER)
    tol = _section(cfg, "tolerances", DEFAULT_TOLERANCES)
    scaling_cfg = cfg.get("scaling")
    if not isinstance(scaling_cfg, dict) or "m" not in scaling_cfg:
        raise ConfigError("verify-scaling needs a 'scaling' section with at least 'm'")
    m = float(scaling_cfg["m"])
    t = float(scaling_cfg.get("t", 0.5))

    grid = _grid_for([params, initial_params], grid_cfg, cells)
    config = _solver_config(solver_cfg)
    initial = project(lambda x: densities.pdf(initial_params, x), grid,
                      tail_threshold=float(tol["initial_mass"]))
    report = scaling_equivalence_report(
        params, initial, m, t, config, tol=float(tol["scaling_sup"])
    )
    scaling_report_to_csv([report], out_dir / "scaling.csv")
    checks = [_check("scaling_sup_cdf_diff", report.sup_cdf_diff, float(tol["scaling_sup"]))]
    extras = {
        "scaling": {"m": m, "t": t, "n_cells": grid.n_cells},
        "tolerances": tol,
    }
    return _write_summary(out_dir, "verify-scaling", params, checks, extras, quiet)


def _run_classify(cfg, out_dir, quiet):
    params = _parse_params(cfg, "params")
    regime = classify_boundary(params)
    click.echo(regime)
    checks = [_check("boundary_regime", 0.0, 0.0, regime=regime)]
    extras = {"fisher_weight_exponent": fisher_weight_exponent(params)}
    return _write_summary(out_dir, "classify", params, checks, extras, quiet)


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="JSON experiment config")(fn)
    fn = click.option("--out", "out_dir", default="ggfp_out", show_default=True,
                      type=click.Path(), help="output directory")(fn)
    fn = click.option("--seed", type=int, default=None, help="override the suite seed")(fn)
    fn = click.option("--cells", type=int, default=None, help="override the grid cell count")(fn)
    fn = click.option("--quiet", is_flag=True, default=False, help="suppress the banner")(fn)
    return fn


def _dispatch(command, config_path, out_dir, seed, cells, quiet):
    try:
        cfg = _load_config(config_path)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if command in ("solve", "verify-decay"):
            code = _run_solver_command(command, cfg, out, cells, quiet)
        elif command in ("verify-poincare", "verify-logsobolev"):
            code = _run_suite_command(command, cfg, out, cells, seed, quiet)
        elif command == "steady":
            code = _run_steady(cfg, out, cells, quiet)
        elif command == "verify-scaling":
            code = _run_scaling(cfg, out, cells, quiet)
        elif command == "classify":
            code = _run_classify(cfg, out, quiet)
        else:  # pragma: no cover
            raise ConfigError(f"unknown command {command}")
    except (ConfigError, PreconditionError, SolverError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    sys.exit(code)


@click.group()
@click.version_option(__version__)
def main():
    """Generalized-Gamma Fokker-Planck lab."""


def _register(name: str, doc: str):
    @main.command(name, help=doc)
    @_common_options
    def _cmd(config_path, out_dir, seed, cells, quiet, _name=name):
        _dispatch(_name, config_path, out_dir, seed, cells, quiet)

    return _cmd


_register("steady", "Project the equilibrium and report the stationary flux residual.")
_register("solve", "Run the relaxation flow and write the diagnostic trajectory.")
_register("verify-decay", "Run the flow and check the entropy decay bounds along it.")
_register("verify-poincare", "Run the weighted variance-inequality suite.")
_register("verify-logsobolev", "Run the weighted entropy-inequality suite.")
_register("verify-scaling", "Compare the two power-map solution routes.")
_register("classify", "Print the boundary regime of the parameter triple.")


if __name__ == "__main__":
    main()
