"""Turn a validated manifest into runs and artifact directories."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .diagnostics import (
    ConservationSeries,
    check_l1_contraction,
    check_mass_conservation,
    check_nonnegativity,
    decay_weight_series,
)
from .io import read_field, write_csv, write_json, write_trajectory
from .manifest import RunManifest
from .norms import field_norm_report, make_ball_family
from .presets import DataPreset, generate_field
from .solver import (
    SolutionState,
    SolverConfig,
    Trajectory,
    fixed_point_residual,
    smallness_report,
    solve_cns_picard,
    solve_dcns_picard,
)
from .spectral import ScalarField, VectorField, make_grid

__all__ = ["build_problem", "run", "verify_trajectory", "EXIT_PASS", "EXIT_VERDICT", "EXIT_CONFIG", "EXIT_NUMERIC"]

EXIT_PASS, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
_COMPONENT_SEED = {"c": 0, "n": 1, "u": 2, "v": 3, "d0": 4, "forcing": 5}


def _field(m: RunManifest, grid, comp: str, vector: bool):
    spec = m.preset_spec(comp)
    if spec is None:
        return None
    if "path" in spec:
        f = read_field(Path(m.base_dir) / spec["path"])
        if f.grid != grid:
            raise ValueError(f"{comp}_path: snapshot grid {f.grid} does not match the manifest grid")
        if isinstance(f, VectorField) != vector:
            raise ValueError(f"{comp}_path: expected a {'vector' if vector else 'scalar'} snapshot")
        return f
    kw = {k: v for k, v in spec.items() if k in ("amplitude", "width", "kmax", "offset", "degree", "core")}
    if "mode" in spec:
        kw["mode"] = tuple(spec["mode"])
    extra = {"radial": True} if comp == "forcing" else {}
    preset = DataPreset(spec["kind"], seed=m.seed * 16 + _COMPONENT_SEED[comp], extra=extra, **kw)
    return generate_field(preset, grid, vector=vector)


def build_problem(m: RunManifest):
    """``(SolutionState, SolverConfig)`` for a manifest."""
    grid = make_grid(m.dim, m.box_length, m.points_per_axis)
    c = _field(m, grid, "c", False) or ScalarField.zeros(grid)
    n = _field(m, grid, "n", False) or ScalarField.zeros(grid)
    u = _field(m, grid, "u", True) or VectorField.zeros(grid)
    v = None
    if m.system == "dcns":
        v = _field(m, grid, "v", False) or ScalarField.zeros(grid)
    init = SolutionState(c, n, u, v)
    cfg = SolverConfig(horizon=m.horizon, n_uniform=m.n_uniform, refine_start=m.refine_start, kappa=m.kappa,
                       forcing=_field(m, grid, "forcing", True), d0=_field(m, grid, "d0", False),
                       delta0=m.delta0, picard_tol=m.picard_tol, picard_max_iter=m.picard_max_iter,
                       epsilon=m.epsilon, metric=m.metric, center_stride=m.center_stride)
    return init, cfg


def solve(init: SolutionState, cfg: SolverConfig, system: str):
    if system == "dcns":
        return solve_dcns_picard(init, cfg)
    return solve_cns_picard(init, cfg)


def verify_trajectory(traj: Trajectory, out: Path, checks: Sequence[str]) -> dict:
    """Run the trajectory diagnostics, write CSVs, return the verdict summary."""
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    if "mass" in checks or "l1" in checks or "nonnegativity" in checks:
        series, mass = check_mass_conservation(traj)
        write_csv(out / "conservation.csv", ConservationSeries.header, series.rows())
        if "mass" in checks:
            summary["mass"] = mass
    if "nonnegativity" in checks:
        summary["nonnegativity"] = check_nonnegativity(traj)
    if "l1" in checks:
        summary["l1"] = check_l1_contraction(traj)
    if "decay" in checks:
        decay = decay_weight_series(traj)
        names = list(decay["series"])
        write_csv(out / "decay_weights.csv", ["t"] + names,
                  zip(decay["times"], *(decay["series"][k] for k in names)))
        summary["decay"] = {k: decay[k] for k in ("reference_index", "reference_values", "verdict")}
    return summary


def _verdicts(summary: dict) -> list:
    out = []
    for name, rep in summary.items():
        v = rep.get("pass", rep.get("verdict")) if isinstance(rep, dict) else None
        if v is not None:
            out.append((name, bool(v)))
    return out


def run(m: RunManifest, out_dir: Optional[str] = None):
    """Solve, diagnose and report; returns ``(out_path, summary, exit_code)``."""
    out = Path(out_dir or m.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.toml").write_text(m.to_toml())
    init, cfg = build_problem(m)
    traj, trace = solve(init, cfg, m.system)
    write_csv(out / "picard_trace.csv", ["iter", "diff", "ratio"], trace.rows())
    write_trajectory(out / "trajectory", traj)
    summary = {"picard": trace.summary()}
    summary.update(verify_trajectory(traj, out, m.diagnostics))
    if "residual" in m.diagnostics and trace.converged:
        res = fixed_point_residual(traj, init, cfg)
        summary["residual"] = {"value": res, "bound": 2 * cfg.picard_tol, "pass": res <= 2 * cfg.picard_tol}
    if "smallness" in m.diagnostics:
        summary["smallness"] = smallness_report(init, cfg)
    if "norms" in m.diagnostics:
        balls = make_ball_family(init.grid, m.center_stride)
        for name, f in (("c0", init.c), ("n0", init.n), ("u0", init.u)):
            rep = field_norm_report(f, balls)
            (out / f"norms_{name}.txt").write_text(rep.to_text())
            (out / f"norms_{name}.json").write_text(rep.to_json() + "\n")
    verdicts = _verdicts(summary)
    summary["verdicts"] = dict(verdicts)
    write_json(out / "summary.json", summary)
    if trace.status == "diverged":
        code = EXIT_NUMERIC
    elif not trace.converged or not all(v for _, v in verdicts):
        code = EXIT_VERDICT
    else:
        code = EXIT_PASS
    return out, summary, code


def scaled_manifest(m: RunManifest, factor: float) -> RunManifest:
    """Manifest with every data amplitude (not the forcing) multiplied by ``factor``."""
    data = {k: dict(v) for k, v in m.data.items()}
    for comp in ("c", "n", "u", "v"):
        if comp in data and "path" not in data[comp]:
            data[comp]["amplitude"] = data[comp].get("amplitude", 1.0) * factor
    return replace(m, data=data)


def first_ratio(trace) -> float:
    r = trace.ratios
    return float(r[0]) if r else float("nan")


def sweep(m: RunManifest, factors: Sequence[float], out: Path) -> list:
    rows = []
    for f in factors:
        init, cfg = build_problem(scaled_manifest(m, f))
        _, trace = solve(init, cfg, m.system)
        r = trace.ratios
        rows.append((f, first_ratio(trace), float(np.max(r[1:])) if len(r) > 1 else float("nan"),
                     trace.iterations, trace.status))
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", ["amplitude_factor", "first_ratio", "max_later_ratio", "iterations", "status"], rows)
    return rows
