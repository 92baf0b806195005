"""Command-line interface.

Exit codes: 0 pass, 1 verdict failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .diagnostics import embedding_suite, operator_constant_suite, scaling_covariance_test
from .io import read_field, read_trajectory, write_csv, write_json
from .manifest import DIAGNOSTICS, ManifestError, load_manifest
from .norms import field_norm_report, make_ball_family
from .runner import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_PASS,
    EXIT_VERDICT,
    _verdicts,
    build_problem,
    run,
    sweep,
    verify_trajectory,
)
from .solver import uniqueness_probe

SCALING_TOL = 1e-2
UNIQUENESS_TOL = 1e-8


def _common(p: argparse.ArgumentParser, manifest: bool = True):
    if manifest:
        p.add_argument("--manifest", required=True, help="flat TOML run manifest")
    p.add_argument("--out", help="output directory (overrides the manifest)")
    p.add_argument("--seed", type=int, help="override the manifest seed")
    p.add_argument("--grid", type=int, help="override points per axis")
    p.add_argument("--dim", type=int, choices=(2, 3), help="override the dimension")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chemomild", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Picard solve plus diagnostics and norm reports")
    _common(p)

    p = sub.add_parser("norms", help="norm report for a field snapshot")
    p.add_argument("--field", required=True, help="MFLD snapshot")
    p.add_argument("--select", help="comma-separated norm names (default: all applicable)")
    p.add_argument("--stride", type=int, default=1, help="ball-centre stride")
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="diagnostics on a stored trajectory")
    p.add_argument("--trajectory", required=True, help="trajectory directory written by 'solve'")
    p.add_argument("--checks", default="mass,nonnegativity,l1,decay")
    p.add_argument("--out", required=True)

    p = sub.add_parser("scaling-test", help="parabolic scaling covariance (delta = 2)")
    _common(p)
    p.add_argument("--delta", type=int, default=2)

    p = sub.add_parser("uniqueness-test", help="Picard limits from two initial guesses")
    _common(p)

    p = sub.add_parser("embedding-suite", help="embedding ratios over random band-limited samples")
    _common(p, manifest=False)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--resolutions", default="32,64")

    p = sub.add_parser("operator-constants", help="fitted Duhamel operator constants and their stability")
    _common(p, manifest=False)
    p.add_argument("--samples", type=int, default=30)
    p.add_argument("--resolutions", default="32,64")

    p = sub.add_parser("sweep", help="contraction ratios over an amplitude grid")
    _common(p)
    p.add_argument("--factors", default="0.25,0.5,1,2,4")
    return ap


def _load(args):
    m = load_manifest(args.manifest)
    return m.with_overrides(seed=args.seed, grid=args.grid, dim=args.dim, out=args.out)


def _finish(out: Path, summary: dict, code: int) -> int:
    write_json(out / "summary.json", summary)
    print(json.dumps({"out": str(out), "exit": code}))
    return code


def _cmd_solve(args) -> int:
    m = _load(args)
    out, summary, code = run(m)
    for name, ok in _verdicts(summary):
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    print(f"picard: {summary['picard']['status']} after {summary['picard']['iterations']} iterations")
    return code


def _cmd_norms(args) -> int:
    f = read_field(args.field)
    balls = make_ball_family(f.grid, args.stride)
    select = args.select.split(",") if args.select else None
    rep = field_norm_report(f, balls, select)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "norms.txt").write_text(rep.to_text())
    (out / "norms.json").write_text(rep.to_json() + "\n")
    sys.stdout.write(rep.to_text())
    return EXIT_PASS


def _cmd_verify(args) -> int:
    traj = read_trajectory(args.trajectory)
    checks = [c for c in args.checks.split(",") if c]
    bad = [c for c in checks if c not in DIAGNOSTICS]
    if bad:
        raise ManifestError([f"unknown check {c!r}" for c in bad])
    out = Path(args.out)
    summary = verify_trajectory(traj, out, checks)
    verdicts = _verdicts(summary)
    summary["verdicts"] = dict(verdicts)
    return _finish(out, summary, EXIT_PASS if all(v for _, v in verdicts) else EXIT_VERDICT)


def _cmd_scaling(args) -> int:
    m = _load(args)
    init, cfg = build_problem(m)
    rep = scaling_covariance_test(init, cfg, args.delta)
    rep["tolerance"] = SCALING_TOL
    rep["pass"] = rep["base_converged"] and rep["rescaled_converged"] and rep["max_discrepancy"] <= SCALING_TOL
    out = Path(m.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _finish(out, rep, EXIT_PASS if rep["pass"] else EXIT_VERDICT)


def _cmd_uniqueness(args) -> int:
    m = _load(args)
    init, cfg = build_problem(m)
    rep = uniqueness_probe(init, cfg)
    rep["tolerance"] = UNIQUENESS_TOL
    rep["pass"] = rep["both_converged"] and rep["distance"] <= UNIQUENESS_TOL
    out = Path(m.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "small_time_norms.csv", ["T", "c", "n", "u", "total"],
              ([r["T"], r["c"], r["n"], r["u"], r["total"]] for r in rep["small_time_norms"]))
    return _finish(out, rep, EXIT_PASS if rep["pass"] else EXIT_VERDICT)


def _cmd_embedding(args) -> int:
    res = tuple(int(x) for x in args.resolutions.split(","))
    if args.grid is not None:
        res = (args.grid, 2 * args.grid)
    rep = embedding_suite(args.samples, args.seed or 0, args.dim or 3, res)
    rep["pass"] = rep["finite"] and rep["stable_within_3"]
    out = Path(args.out or "embedding-suite")
    out.mkdir(parents=True, exist_ok=True)
    rows = [(M, k, v) for M, r in rep["per_resolution"].items() for k, v in sorted(r["max_ratio"].items())]
    write_csv(out / "embedding_ratios.csv", ["M", "embedding", "max_ratio"], rows)
    return _finish(out, rep, EXIT_PASS if rep["pass"] else EXIT_VERDICT)


def _cmd_operators(args) -> int:
    res = tuple(int(x) for x in args.resolutions.split(","))
    if args.grid is not None:
        res = (args.grid, 2 * args.grid)
    rep = operator_constant_suite(args.samples, args.seed or 0, args.dim or 2, res)
    rep["pass"] = rep["finite"] and rep["stable_within_3"]
    out = Path(args.out or "operator-constants")
    out.mkdir(parents=True, exist_ok=True)
    rows = [(M, k, v) for M, r in rep["constants"].items() for k, v in r.items()]
    write_csv(out / "operator_constants.csv", ["M", "operator", "constant"], rows)
    return _finish(out, rep, EXIT_PASS if rep["pass"] else EXIT_VERDICT)


def _cmd_sweep(args) -> int:
    m = _load(args)
    factors = [float(x) for x in args.factors.split(",")]
    out = Path(m.output_dir)
    rows = sweep(m, factors, out)
    for r in rows:
        print(f"factor {r[0]:g}: first ratio {r[1]:.4g}, status {r[4]}")
    return EXIT_PASS


COMMANDS = {
    "solve": _cmd_solve,
    "norms": _cmd_norms,
    "verify": _cmd_verify,
    "scaling-test": _cmd_scaling,
    "uniqueness-test": _cmd_uniqueness,
    "embedding-suite": _cmd_embedding,
    "operator-constants": _cmd_operators,
    "sweep": _cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, FileNotFoundError) as exc:
        # ManifestError and SnapshotError are ValueErrors
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
