"""Config-driven experiment runner.

``schrodingerize run <config.json>`` executes one experiment and writes
``summary.json`` plus ``solution.csv`` into the output directory;
``schrodingerize sweep <config.json> --axis N --values 64,128,256`` repeats
it over one numeric parameter and aggregates ``sweep.csv``.

Exit codes: 0 success, 2 config/validation failure, 3 numerical failure
(reference disagreement beyond the configured tolerance, or a solver
error).  The env var SCHRO_THREADS caps worker parallelism.  Floats in CSV
output carry 17 significant digits so values round-trip exactly, and the
per-mode evolution writes into preallocated slots, so repeated runs of the
same config produce byte-identical files for any thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import apps
from .core import (
    Grid1D,
    InvalidArgumentError,
    StateVector,
    StabilityError,
    DegenerateStateError,
    UnsupportedProblemError,
)
from .operators import TransportModel, assemble_eta_diagonal
from .costs import hamsim_cost, transport_norm_parity

__all__ = ["ExperimentConfig", "load_config", "run", "sweep", "main", "validate_summary"]

EXPERIMENTS = ("heat", "general", "ground_state", "gibbs", "transport", "cost")

DEFAULT_TOLERANCES = {
    "heat": 1e-2,
    "general": 1e-2,
    "transport": 5e-2,
    "ground_state": 1e-2,
    "gibbs": 1e-4,
    "cost": math.inf,
}

_SAFE_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "pi": np.pi,
    "e": np.e,
}


class ConfigError(Exception):
    """Invalid or missing configuration; maps to exit code 2."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _eval_expression(expr: str, names: dict) -> np.ndarray:
    env = dict(_SAFE_FUNCS)
    env.update(names)
    try:
        return np.asarray(eval(expr, {"__builtins__": {}}, env))  # noqa: S307 desk tool
    except Exception as exc:
        raise ConfigError(f"cannot evaluate expression {expr!r}: {exc}") from exc


def _complex_array(spec, what: str) -> np.ndarray:
    if isinstance(spec, dict):
        real = np.asarray(spec.get("real", 0.0), dtype=float)
        imag = np.asarray(spec.get("imag", 0.0), dtype=float)
        return real + 1j * imag
    try:
        return np.asarray(spec, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: expected numbers or a real/imag object") from exc


def _threads() -> int | None:
    env = os.environ.get("SCHRO_THREADS", "")
    if not env:
        return None
    try:
        return max(1, int(env))
    except ValueError:
        return None


@dataclass
class ExperimentConfig:
    experiment: str
    resolution: dict = field(default_factory=dict)
    physics: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    tolerance: dict = field(default_factory=dict)

    def res(self, key: str, default=None):
        value = self.resolution.get(key, default)
        if value is None:
            raise ConfigError(f"resolution.{key} is required for {self.experiment}")
        return value


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such config file")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"{path}: experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    cfg = ExperimentConfig(
        experiment=experiment,
        resolution=dict(raw.get("resolution", {})),
        physics=dict(raw.get("physics", {})),
        output=dict(raw.get("output", {})),
        tolerance=dict(raw.get("tolerance", {})),
    )
    for key in ("M", "N", "K", "J"):
        if key in cfg.resolution:
            value = cfg.resolution[key]
            if not isinstance(value, int) or value < 2 or value % 2:
                raise ConfigError(f"{path}: resolution.{key} must being even and >= 2, got {value}")
    return cfg


def _p_grid(cfg: ExperimentConfig, default_l=12.0, default_n=256) -> Grid1D:
    half_width = float(cfg.resolution.get("L", default_l))
    count = int(cfg.resolution.get("N", default_n))
    return Grid1D(half_width, count)


def _run_heat(cfg: ExperimentConfig, workers):
    m = int(cfg.res("M", 64))
    grid = Grid1D(1.0, m)
    x = grid.points
    ic = cfg.physics.get("initial_condition", "1 + cos(pi*x)")
    u0 = _eval_expression(ic, {"x": x}) if isinstance(ic, str) else _complex_array(ic, "u0")
    u0 = np.broadcast_to(np.asarray(u0, dtype=complex), (m,))
    pot = cfg.physics.get("potential")
    if isinstance(pot, str):
        pot = _eval_expression(pot, {"x": x})
        if not np.any(pot):
            pot = None
    t = float(cfg.physics.get("t", 0.1))
    result = apps.run_heat(
        u0, pot, grid, p_config=_p_grid(cfg), t=t,
        epsilon=float(cfg.physics.get("epsilon", 1e-3)), workers=workers,
    )
    coords = [("x", x)]
    return result, coords, result.u_recovered.amplitudes, result.u_reference.amplitudes, {
        "l2_relative_error": result.l2_relative_error,
        "norms": result.norms,
        "cost": result.cost.as_dict(),
    }


def _run_general(cfg: ExperimentConfig, workers):
    if "matrix" not in cfg.physics:
        raise ConfigError("physics.matrix is required for the general experiment")
    a = _complex_array(cfg.physics["matrix"], "physics.matrix")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError("physics.matrix must be square")
    dim = a.shape[0]
    u0_spec = cfg.physics.get("u0")
    u0 = (
        _complex_array(u0_spec, "physics.u0").reshape(-1)
        if u0_spec is not None
        else np.ones(dim, dtype=complex) / math.sqrt(dim)
    )
    if u0.size != dim:
        raise ConfigError("physics.u0 length must match the matrix dimension")
    t = float(cfg.physics.get("t", 0.5))
    from .core import AxisSpec
    from .oracle import expm_apply
    from .pipeline import project_positive, schrodingerize_evolve

    state = StateVector(u0, (AxisSpec("x1", dim),))
    w_t, rec = schrodingerize_evolve(
        state, a, _p_grid(cfg), t,
        epsilon=float(cfg.physics.get("epsilon", 1e-3)), workers=workers,
    )
    projection = project_positive(w_t)
    u_ref = expm_apply(a, u0, t)
    err = float(np.linalg.norm(rec.u.amplitudes - u_ref) / np.linalg.norm(u_ref))
    coords = [("index", np.arange(dim))]
    return rec, coords, rec.u.amplitudes, u_ref, {
        "l2_relative_error": err,
        "norms": {
            "u_initial": float(np.linalg.norm(u0)),
            "u_recovered": rec.u.norm,
            "success_probability": projection.success_probability,
            "cost_factor": projection.cost_factor,
        },
        "cost": rec.cost.as_dict(),
    }


def _run_ground_state(cfg: ExperimentConfig, workers):
    if "matrix" not in cfg.physics:
        raise ConfigError("physics.matrix is required for the ground_state experiment")
    h = _complex_array(cfg.physics["matrix"], "physics.matrix")
    dim = h.shape[0]
    u0_spec = cfg.physics.get("u0")
    u0 = (
        _complex_array(u0_spec, "physics.u0").reshape(-1)
        if u0_spec is not None
        else np.ones(dim, dtype=complex) / math.sqrt(dim)
    )
    epsilon = float(cfg.physics.get("epsilon", 0.01))
    report = apps.prepare_ground_state(h, u0, epsilon, workers=workers)
    ground = np.linalg.eigh(np.asarray(h, dtype=complex))[1][:, 0]
    overlap = ground.conj() @ report.u_recovered.amplitudes
    aligned = ground * np.exp(1j * np.angle(overlap))
    err = 1.0 - report.fidelity
    coords = [("index", np.arange(dim))]
    return report, coords, report.u_recovered.amplitudes, aligned, {
        "l2_relative_error": err,
        "t_final": report.t_final,
        "fidelity": report.fidelity,
        "gap": report.gap,
        "alpha0_sq": report.alpha0_sq,
        "cost": report.cost.as_dict(),
        "norms": {},
    }


def _run_gibbs(cfg: ExperimentConfig, workers):
    if "matrix" not in cfg.physics:
        raise ConfigError("physics.matrix is required for the gibbs experiment")
    h = _complex_array(cfg.physics["matrix"], "physics.matrix")
    beta = float(cfg.physics.get("beta", 1.0))
    p_grid = None
    if "L" in cfg.resolution or "N" in cfg.resolution:
        p_grid = _p_grid(cfg, default_l=10.0, default_n=2048)
    report = apps.prepare_gibbs(h, beta, p_grid=p_grid, workers=workers)
    dim = report.rho.shape[0]
    energies, vectors = np.linalg.eigh(np.asarray(h, dtype=complex))
    weights = np.exp(-beta * (energies - energies[0]))
    exact = (vectors * weights) @ vectors.conj().T / weights.sum()
    rows, cols = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    coords = [("row", rows.reshape(-1)), ("col", cols.reshape(-1))]
    return report, coords, report.rho.reshape(-1), exact.reshape(-1), {
        "l2_relative_error": report.trace_distance_to_exact,
        "trace_distance": report.trace_distance_to_exact,
        "partition_function": report.partition_function,
        "beta": beta,
        "cost": report.cost.as_dict(),
        "norms": {},
    }


def _sigma_matrix(cfg: ExperimentConfig, k_count: int) -> np.ndarray:
    spec = cfg.physics.get("sigma", {"kind": "constant", "value": 1.0})
    if isinstance(spec, dict):
        kind = spec.get("kind", "constant")
        if kind != "constant":
            raise ConfigError(f"unknown sigma kind {kind!r}")
        c = float(spec.get("value", 1.0))
        return np.full((k_count, k_count), c / k_count)
    sigma = np.asarray(spec, dtype=float)
    if sigma.shape != (k_count, k_count):
        raise ConfigError(f"sigma must be {k_count}x{k_count}")
    return sigma


def _run_transport(cfg: ExperimentConfig, workers):
    j = int(cfg.res("J", 16))
    k = int(cfg.res("K", 16))
    x_grid = Grid1D(1.0, j)
    k_grid = Grid1D(1.0, k)
    model = TransportModel.create([x_grid], [k_grid], _sigma_matrix(cfg, k))
    ic = cfg.physics.get("initial_condition", "1 + 0.5*cos(pi*x) + 0.25*cos(pi*k)")
    if isinstance(ic, str):
        xx, kk = np.meshgrid(x_grid.points, k_grid.points, indexing="ij")
        w0 = _eval_expression(ic, {"x": xx, "k": kk})
        w0 = np.broadcast_to(np.asarray(w0, dtype=float), (j, k))
    else:
        w0 = _complex_array(ic, "initial_condition").reshape(j, k)
    t = float(cfg.physics.get("t", 1.0))
    p_config = None
    if "L" in cfg.resolution or "N" in cfg.resolution:
        p_config = _p_grid(cfg, default_l=8.0, default_n=64)
    result = apps.run_transport(model, w0, p_config=p_config, t=t, workers=workers)
    xx, kk = np.meshgrid(x_grid.points, k_grid.points, indexing="ij")
    coords = [("x", xx.reshape(-1)), ("k", kk.reshape(-1))]
    return result, coords, result.w_recovered.amplitudes, result.w_reference.amplitudes, {
        "l2_relative_error": result.l2_relative_error,
        "moments": {
            "mass": result.moments.mass,
            "momentum": list(result.moments.momentum),
            "energy": result.moments.energy,
        },
        "norms": result.norms,
        "cost": result.cost.as_dict(),
    }


def _run_cost(cfg: ExperimentConfig, workers):
    phys = cfg.physics
    report = hamsim_cost(
        s=float(phys.get("s", 2.0)),
        t=float(phys.get("t", 1.0)),
        max_norm=float(phys.get("max_norm", 1.0)),
        epsilon=float(phys.get("epsilon", 0.01)),
        m_h=float(phys.get("m_h", 4.0)),
    )
    extras = {"l2_relative_error": 0.0, "cost": report.as_dict(), "norms": {}}
    if "J" in cfg.resolution and "K" in cfg.resolution:
        j, k = int(cfg.res("J")), int(cfg.res("K"))
        model = TransportModel.create(
            [Grid1D(1.0, j)], [Grid1D(1.0, k)], _sigma_matrix(cfg, k)
        )
        d_matrix = assemble_eta_diagonal(_p_grid(cfg, default_l=1.0, default_n=64))
        extras["transport_parity"] = transport_norm_parity(model, d_matrix)
    return report, [], None, None, extras


_RUNNERS = {
    "heat": _run_heat,
    "general": _run_general,
    "ground_state": _run_ground_state,
    "gibbs": _run_gibbs,
    "transport": _run_transport,
    "cost": _run_cost,
}


def _write_solution_csv(path: Path, coords, solution, reference) -> None:
    names = [name for name, _ in coords]
    header = names + ["re", "im", "ref_re", "ref_im", "abs_error"]
    lines = [",".join(header)]
    solution = np.asarray(solution, dtype=complex).reshape(-1)
    reference = np.asarray(reference, dtype=complex).reshape(-1)
    err = np.abs(solution - reference)
    for i in range(solution.size):
        row = [_fmt(vals[i]) for _, vals in coords]
        row += [_fmt(solution[i].real), _fmt(solution[i].imag)]
        row += [_fmt(reference[i].real), _fmt(reference[i].imag), _fmt(err[i])]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def validate_summary(summary: dict) -> list[str]:
    """Check a summary dict against the shipped schema; returns problems."""
    problems = []
    for key in ("schema_version", "experiment", "config", "results", "status"):
        if key not in summary:
            problems.append(f"missing key {key!r}")
    if summary.get("experiment") not in EXPERIMENTS:
        problems.append("experiment not in the known set")
    if summary.get("status") not in ("ok", "tolerance_exceeded", "error"):
        problems.append("status must be ok, tolerance_exceeded or error")
    results = summary.get("results", {})
    if not isinstance(results, dict):
        problems.append("results must be an object")
    elif "l2_relative_error" in results:
        value = results["l2_relative_error"]
        if not isinstance(value, (int, float)):
            problems.append("results.l2_relative_error must be a number")
    return problems


def _execute(cfg: ExperimentConfig, out_dir: Path) -> tuple[int, dict]:
    workers = _threads()
    runner = _RUNNERS[cfg.experiment]
    try:
        _, coords, solution, reference, results = runner(cfg, workers)
    except ConfigError:
        raise
    except (InvalidArgumentError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    except (StabilityError, DegenerateStateError, UnsupportedProblemError) as exc:
        summary = {
            "schema_version": 1,
            "experiment": cfg.experiment,
            "config": {
                "resolution": cfg.resolution,
                "physics": _jsonable(cfg.physics),
                "tolerance": cfg.tolerance,
            },
            "results": {},
            "status": "error",
            "error": str(exc),
        }
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
        return 3, summary

    tol = float(cfg.tolerance.get("l2_relative_error", DEFAULT_TOLERANCES[cfg.experiment]))
    err = float(results.get("l2_relative_error", 0.0))
    status = "ok" if err <= tol else "tolerance_exceeded"
    summary = {
        "schema_version": 1,
        "experiment": cfg.experiment,
        "config": {
            "resolution": cfg.resolution,
            "physics": _jsonable(cfg.physics),
            "tolerance": cfg.tolerance,
        },
        "results": _jsonable(results),
        "status": status,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    formats = cfg.output.get("formats", ["json", "csv"])
    if solution is not None and "csv" in formats:
        _write_solution_csv(out_dir / "solution.csv", coords, solution, reference)
    return (0 if status == "ok" else 3), summary


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def run(config_path) -> int:
    """Execute one experiment; returns the process exit code."""
    try:
        cfg = load_config(config_path)
        out_dir = Path(cfg.output.get("directory", "out"))
        code, _ = _execute(cfg, out_dir)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def sweep(config_path, axis: str, values) -> int:
    """Re-run one experiment over a list of values of a numeric parameter."""
    try:
        cfg = load_config(config_path)
        if not values:
            raise ConfigError("sweep needs at least one value")
        rows = []
        base_dir = Path(cfg.output.get("directory", "out"))
        for value in values:
            sub = ExperimentConfig(
                experiment=cfg.experiment,
                resolution=dict(cfg.resolution),
                physics=dict(cfg.physics),
                output=dict(cfg.output),
                tolerance=dict(cfg.tolerance),
            )
            numeric = int(value) if float(value).is_integer() and axis in (
                "M", "N", "K", "J"
            ) else float(value)
            if axis in sub.resolution or axis in ("M", "N", "L", "K", "J"):
                sub.resolution[axis] = numeric
            elif axis in sub.physics or axis in ("t", "beta", "epsilon"):
                sub.physics[axis] = numeric
            else:
                raise ConfigError(f"unknown sweep axis {axis!r}")
            out_dir = base_dir / f"{axis}={value:g}"
            code, summary = _execute(sub, out_dir)
            if code == 2:
                return 2
            results = summary.get("results", {})
            rows.append(
                (
                    float(value),
                    results.get("l2_relative_error", float("nan")),
                    results.get("norms", {}).get("success_probability", float("nan")),
                    results.get("cost", {}).get("queries", float("nan")),
                )
            )
        lines = ["value,l2_relative_error,success_probability,queries"]
        for row in rows:
            lines.append(",".join(_fmt(v if v is not None else float("nan")) for v in row))
        base_dir.mkdir(parents=True, exist_ok=True)
        (base_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="schrodingerize",
        description="config-driven warped-phase simulation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute one experiment")
    p_run.add_argument("config", help="path to a JSON config")
    p_sweep = sub.add_parser("sweep", help="sweep one numeric parameter")
    p_sweep.add_argument("config", help="path to a JSON config")
    p_sweep.add_argument("--axis", required=True, help="parameter name, e.g. N")
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated numeric values, e.g. 64,128,256"
    )
    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        print("config error: --values must be comma-separated numbers", file=sys.stderr)
        return 2
    return sweep(args.config, args.axis, values)


if __name__ == "__main__":
    sys.exit(main())
