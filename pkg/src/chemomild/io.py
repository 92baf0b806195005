"""Binary field snapshots, trajectory directories and deterministic CSV/JSON writers.

Snapshot layout (little endian)::

    magic "MFLD" | version u32 | dim u32 | M u32 | L float64 | ncomp u32 | float64 data

Data are the components one after another, each row-major over the grid.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .duhamel import SourceTrajectory, TimeGrid
from .spectral import Grid, ScalarField, VectorField, make_grid

__all__ = [
    "SnapshotError",
    "write_snapshot",
    "read_snapshot",
    "read_field",
    "write_trajectory",
    "read_trajectory",
    "write_csv",
    "write_json",
    "to_jsonable",
]

MAGIC = b"MFLD"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdI")


class SnapshotError(ValueError):
    pass


def write_snapshot(path: Union[str, Path], grid: Grid, components: np.ndarray) -> None:
    """Write ``components`` of shape ``(ncomp, *grid.shape)`` (or ``grid.shape`` for one)."""
    data = np.asarray(components, dtype="<f8")
    if data.shape == grid.shape:
        data = data[None]
    if data.shape[1:] != grid.shape:
        raise SnapshotError(f"component shape {data.shape[1:]} does not match grid {grid.shape}")
    header = _HEADER.pack(MAGIC, VERSION, grid.dim, grid.points_per_axis, grid.box_length, data.shape[0])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data).tobytes())


def read_snapshot(path: Union[str, Path]):
    """Return ``(grid, components)`` with components of shape ``(ncomp, *grid.shape)``."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    magic, version, dim, M, L, ncomp = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported version {version}")
    try:
        grid = make_grid(dim, L, M)
    except ValueError as exc:
        raise SnapshotError(f"{path}: {exc}") from exc
    expected = _HEADER.size + 8 * ncomp * grid.n_points
    if len(raw) != expected:
        raise SnapshotError(f"{path}: size {len(raw)} bytes, expected {expected}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape((ncomp,) + grid.shape)
    return grid, data.astype(float)


def read_field(path: Union[str, Path]):
    """Snapshot as a ScalarField (one component) or VectorField (``dim`` components)."""
    grid, data = read_snapshot(path)
    if data.shape[0] == 1:
        return ScalarField(grid, data[0])
    if data.shape[0] == grid.dim:
        return VectorField(grid, data)
    raise SnapshotError(f"{path}: {data.shape[0]} components is neither scalar nor vector")


def _layout(traj) -> list:
    layout = [("c", 1), ("n", 1), ("u", traj.grid.dim)]
    if traj.v is not None:
        layout.append(("v", 1))
    return layout


def write_trajectory(directory: Union[str, Path], traj) -> Path:
    """One snapshot per node (components ``c, n, u[, v]`` stacked) plus ``trajectory.json``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    layout = _layout(traj)
    files = []
    for k in range(len(traj.times)):
        parts = []
        for name, width in layout:
            vals = getattr(traj, name).values[k]
            parts.append(vals[None] if width == 1 else vals)
        fname = f"node_{k:05d}.mfld"
        write_snapshot(d / fname, traj.grid, np.concatenate(parts))
        files.append(fname)
    manifest = {"times": [float(t) for t in traj.times.nodes], "files": files,
                "components": [{"name": n, "width": w} for n, w in layout], "meta": traj.meta}
    write_json(d / "trajectory.json", manifest)
    return d


def read_trajectory(directory: Union[str, Path]):
    from .solver import Trajectory

    d = Path(directory)
    info = json.loads((d / "trajectory.json").read_text())
    times = TimeGrid(np.array(info["times"], dtype=float))
    grid, stacks = None, []
    for fname in info["files"]:
        g, data = read_snapshot(d / fname)
        if grid is not None and g != grid:
            raise SnapshotError(f"{fname}: grid differs from earlier nodes")
        grid = g
        stacks.append(data)
    arr = np.stack(stacks)
    comps, i = {}, 0
    for entry in info["components"]:
        w = entry["width"]
        comps[entry["name"]] = arr[:, i] if w == 1 else arr[:, i:i + w]
        i += w
    mk = lambda name: SourceTrajectory(grid, times, comps[name]) if name in comps else None  # noqa: E731
    return Trajectory(grid, times, mk("c"), mk("n"), mk("u"), mk("v"), meta=info.get("meta", {}))


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_json(path: Union[str, Path], obj) -> None:
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
