"""Flat TOML run manifests, validated completely before any field is allocated.

Every key is top level.  Per-component data use the prefixes ``c_``, ``n_``,
``u_``, ``v_`` and ``d0_`` (UC ansatz profile) and the forcing uses
``forcing_``; each accepts ``kind``, ``amplitude``, ``path`` (an MFLD snapshot
that replaces the preset), ``width``, ``mode``, ``kmax``, ``offset``,
``degree`` and ``core``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .presets import PRESET_KINDS

__all__ = ["ManifestError", "RunManifest", "load_manifest", "parse_manifest", "DIAGNOSTICS"]

DIAGNOSTICS = ("mass", "nonnegativity", "l1", "decay", "smallness", "norms", "residual")
COMPONENTS = ("c", "n", "u", "v", "d0", "forcing")
_PRESET_KEYS = {"kind": str, "amplitude": float, "path": str, "width": float, "mode": list,
                "kmax": int, "offset": float, "degree": float, "core": float}


class ManifestError(ValueError):
    """All problems found in a manifest, reported together."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("invalid manifest:\n  " + "\n  ".join(self.problems))


@dataclass
class RunManifest:
    dim: int = 2
    points_per_axis: int = 64
    box_length: float = 6.283185307179586
    horizon: float = 1.0
    n_uniform: int = 32
    refine_start: bool = True
    system: str = "cns"
    kappa: float = 0.0
    delta0: Optional[float] = None
    picard_tol: float = 1e-12
    picard_max_iter: int = 60
    metric: str = "path"
    center_stride: int = 1
    epsilon: float = 0.1
    seed: int = 0
    output_dir: str = "out"
    diagnostics: List[str] = field(default_factory=lambda: list(DIAGNOSTICS))
    data: dict = field(default_factory=dict)
    base_dir: str = "."

    def preset_spec(self, comp: str) -> Optional[dict]:
        return self.data.get(comp)

    def to_toml(self) -> str:
        lines = []
        for f in fields(self):
            if f.name in ("data", "base_dir"):
                continue
            v = getattr(self, f.name)
            if v is not None:
                lines.append(f"{f.name} = {_toml_value(v)}")
        for comp in COMPONENTS:
            for k, v in sorted(self.data.get(comp, {}).items()):
                lines.append(f"{comp}_{k} = {_toml_value(v)}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, seed=None, grid=None, dim=None, out=None) -> "RunManifest":
        m = replace(self, data={k: dict(v) for k, v in self.data.items()})
        if seed is not None:
            m.seed = int(seed)
        if grid is not None:
            m.points_per_axis = int(grid)
        if dim is not None:
            m.dim = int(dim)
        if out is not None:
            m.output_dir = str(out)
        validate(m)
        return m


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _typed(name, value, kind, problems):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is bool and not isinstance(value, bool):
        problems.append(f"{name}: expected a boolean, got {value!r}")
        return None
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        problems.append(f"{name}: expected an integer, got {value!r}")
        return None
    if not isinstance(value, kind):
        problems.append(f"{name}: expected {kind.__name__}, got {value!r}")
        return None
    return value


def parse_manifest(doc: dict, base_dir: str = ".") -> RunManifest:
    problems: List[str] = []
    kw, data = {}, {}
    simple = {f.name: f for f in fields(RunManifest) if f.name not in ("data", "base_dir")}
    types = {"dim": int, "points_per_axis": int, "box_length": float, "horizon": float, "n_uniform": int,
             "refine_start": bool, "system": str, "kappa": float, "delta0": float, "picard_tol": float,
             "picard_max_iter": int, "metric": str, "center_stride": int, "epsilon": float, "seed": int,
             "output_dir": str, "diagnostics": list}
    for key, value in doc.items():
        if isinstance(value, dict):
            problems.append(f"{key}: nested tables are not allowed (flat keys only)")
            continue
        if key in simple:
            v = _typed(key, value, types[key], problems)
            if v is not None:
                kw[key] = v
            continue
        comp, _, sub = key.partition("_")
        if comp in COMPONENTS and sub in _PRESET_KEYS:
            v = _typed(key, value, _PRESET_KEYS[sub], problems)
            if v is not None:
                data.setdefault(comp, {})[sub] = v
        else:
            problems.append(f"{key}: unknown key")
    m = RunManifest(**kw, data=data, base_dir=str(base_dir))
    try:
        validate(m)
    except ManifestError as exc:
        problems.extend(exc.problems)
    if problems:
        raise ManifestError(problems)
    return m


def validate(m: RunManifest) -> None:
    """Check every constraint; raise :class:`ManifestError` listing all failures."""
    p: List[str] = []
    if m.dim not in (2, 3):
        p.append(f"dim: must be 2 or 3, got {m.dim}")
    if m.points_per_axis % 2:
        p.append(f"points_per_axis: odd resolution {m.points_per_axis}")
    if m.points_per_axis < 8:
        p.append(f"points_per_axis: {m.points_per_axis} is below the minimum 8")
    if not m.box_length > 0:
        p.append("box_length: must be positive")
    if not m.horizon > 0:
        p.append("horizon: must be positive")
    if m.n_uniform < 1:
        p.append("n_uniform: must be at least 1")
    if m.system not in ("cns", "dcns"):
        p.append(f"system: must be 'cns' or 'dcns', got {m.system!r}")
    if m.kappa < 0:
        p.append("kappa: must be nonnegative")
    if not m.picard_tol > 0:
        p.append("picard_tol: must be positive")
    if m.picard_max_iter < 1:
        p.append("picard_max_iter: must be at least 1")
    if m.metric not in ("path", "sup"):
        p.append(f"metric: must be 'path' or 'sup', got {m.metric!r}")
    if m.center_stride < 1:
        p.append("center_stride: must be at least 1")
    if m.seed < 0:
        p.append("seed: must be nonnegative")
    for d in m.diagnostics:
        if d not in DIAGNOSTICS:
            p.append(f"diagnostics: unknown entry {d!r}")
    if m.system == "cns" and "v" in m.data:
        p.append("v_*: attractant data given for the cns system")
    if ("d0" in m.data) != (m.delta0 is not None):
        p.append("d0_* and delta0 must be given together")
    if m.delta0 is not None and not m.delta0 > 0:
        p.append("delta0: must be positive")
    for comp, spec in m.data.items():
        kind = spec.get("kind")
        if "path" in spec:
            path = Path(m.base_dir) / spec["path"]
            if not path.is_file():
                p.append(f"{comp}_path: file {spec['path']!r} does not exist")
        elif kind is None:
            p.append(f"{comp}_kind: missing (or give {comp}_path)")
        elif kind not in PRESET_KINDS:
            p.append(f"{comp}_kind: unknown preset {kind!r}")
        if "mode" in spec and (len(spec["mode"]) != m.dim or not all(isinstance(x, int) for x in spec["mode"])):
            p.append(f"{comp}_mode: needs {m.dim} integers")
    if p:
        raise ManifestError(p)


def load_manifest(path) -> RunManifest:
    path = Path(path)
    if not path.is_file():
        raise ManifestError([f"manifest {str(path)!r} does not exist"])
    try:
        doc = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ManifestError([f"TOML syntax: {exc}"]) from exc
    return parse_manifest(doc, base_dir=str(path.parent))
