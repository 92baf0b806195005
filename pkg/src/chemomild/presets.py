"""Deterministic initial-data and forcing presets.

Random presets draw from ``numpy.random.Generator(PCG64(seed))`` so streams are
portable to any PCG64 implementation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .spectral import Grid, ScalarField, VectorField, leray_hat

__all__ = ["DataPreset", "PRESET_KINDS", "generate_field", "generate_initial_data", "small_data_state", "rng"]

PRESET_KINDS = (
    "zero",
    "constant",
    "gaussian_blob",
    "single_mode",
    "taylor_green",
    "random_divfree",
    "random_bandlimited",
    "windowed_homogeneous",
)


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class DataPreset:
    """Recipe for one field.

    ``width`` is the Gaussian standard deviation as a fraction of ``L``;
    ``mode`` the integer wave numbers of ``single_mode``; ``kmax`` the band limit
    of random kinds; ``degree`` the homogeneity degree and ``core`` the
    regularising core radius (fraction of ``L``) of ``windowed_homogeneous``.
    """

    kind: str
    amplitude: float = 1.0
    seed: int = 0
    mode: Optional[Sequence[int]] = None
    width: float = 0.1
    kmax: int = 4
    offset: float = 0.0
    degree: float = 2.0
    core: float = 0.05
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in PRESET_KINDS:
            raise ValueError(f"unknown preset kind {self.kind!r}")
        if not np.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.width <= 0 or self.core <= 0:
            raise ValueError("width and core must be positive")
        if self.kmax < 1:
            raise ValueError("kmax must be at least 1")


def _gaussian(grid: Grid, width: float) -> np.ndarray:
    L = grid.box_length
    sigma = width * L
    x = grid.coordinates - L / 2
    out = np.zeros(grid.shape)
    for shift in itertools.product(range(-2, 3), repeat=grid.dim):
        d2 = sum((x[j] - L * shift[j]) ** 2 for j in range(grid.dim))
        out += np.exp(-d2 / (2 * sigma**2))
    return out


def _random_hat(grid: Grid, gen: np.random.Generator, kmax: int) -> np.ndarray:
    m = grid.mode_indices
    band = np.all(np.abs(m) <= kmax, axis=0)
    band.flat[0] = False
    hat = np.zeros(grid.spectral_shape, dtype=complex)
    k = int(band.sum())
    hat[band] = gen.standard_normal(k) + 1j * gen.standard_normal(k)
    return hat


def _normalise(values: np.ndarray, amplitude: float) -> np.ndarray:
    peak = float(np.max(np.abs(values)))
    return values * (amplitude / peak) if peak > 0 else values


def _window(grid: Grid, r: np.ndarray) -> np.ndarray:
    """Smooth radial cut-off: 1 for r <= L/8, 0 for r >= 3L/8."""
    L = grid.box_length
    x = np.clip((r - L / 8) / (L / 4), 0.0, 1.0)
    return np.where(x <= 0, 1.0, np.where(x >= 1, 0.0, 0.5 * (1 + np.cos(np.pi * x))))


def generate_field(preset: DataPreset, grid: Grid, vector: bool = False):
    """Build the scalar (or vector) field described by ``preset``."""
    A, kind = float(preset.amplitude), preset.kind
    L, dim = grid.box_length, grid.dim
    x = grid.coordinates
    k0 = 2 * np.pi / L
    if kind == "zero":
        return VectorField.zeros(grid) if vector else ScalarField.zeros(grid)
    if kind == "constant":
        if vector:
            vals = np.array(preset.mode if preset.mode is not None else [A] + [0.0] * (dim - 1), dtype=float)
            if vals.shape != (dim,):
                raise ValueError("constant vector preset needs dim entries")
            return VectorField(grid, np.broadcast_to(vals.reshape((dim,) + (1,) * dim), (dim,) + grid.shape))
        return ScalarField.constant(grid, A)
    if kind == "gaussian_blob":
        if vector:
            raise ValueError("gaussian_blob is a scalar preset")
        return ScalarField(grid, A * _gaussian(grid, preset.width) + preset.offset)
    if kind == "single_mode":
        m = np.array(preset.mode if preset.mode is not None else [1] + [0] * (dim - 1), dtype=float)
        if m.shape != (dim,) or not np.any(m):
            raise ValueError("single_mode needs a nonzero mode vector of length dim")
        phase = k0 * np.tensordot(m, x, axes=1)
        if not vector:
            return ScalarField(grid, A * np.cos(phase) + preset.offset)
        # amplitude direction orthogonal to m keeps the field solenoidal
        a = np.zeros(dim)
        j = int(np.argmax(np.abs(m)))
        a[(j + 1) % dim] = m[j]
        a[j] = -m[(j + 1) % dim]
        a /= np.linalg.norm(a)
        return VectorField(grid, A * a.reshape((dim,) + (1,) * dim) * np.cos(phase))
    if kind == "taylor_green":
        if not vector:
            raise ValueError("taylor_green is a vector preset")
        s = [np.sin(k0 * x[j]) for j in range(dim)]
        c = [np.cos(k0 * x[j]) for j in range(dim)]
        if dim == 2:
            vals = np.array([s[0] * c[1], -c[0] * s[1]])
        else:
            vals = np.array([s[0] * c[1] * c[2], -c[0] * s[1] * c[2], np.zeros(grid.shape)])
        return VectorField(grid, A * vals)
    if kind in ("random_bandlimited", "random_divfree"):
        gen = rng(preset.seed)
        if kind == "random_bandlimited" and not vector:
            vals = grid.ifft(_random_hat(grid, gen, preset.kmax))
            return ScalarField(grid, _normalise(vals, A) + preset.offset)
        hat = np.stack([_random_hat(grid, gen, preset.kmax) for _ in range(dim)])
        if kind == "random_divfree":
            if not vector:
                raise ValueError("random_divfree is a vector preset")
            hat = leray_hat(grid, hat)
        return VectorField(grid, _normalise(grid.ifft(hat), A))
    if kind == "windowed_homogeneous":
        # periodic surrogate of a homogeneous profile, smoothly cut off at radius ~L/4
        d = x - L / 2
        r = np.sqrt(np.sum(d**2, axis=0))
        reg = np.sqrt(r**2 + (preset.core * L) ** 2)
        w = _window(grid, r)
        if not vector:
            return ScalarField(grid, A * w * reg ** (-preset.degree))
        # degree -1 solenoidal swirl (or radial profile for forcing use)
        if preset.extra.get("radial", False):
            vals = A * w * d / reg ** (preset.degree + 1)
            return VectorField(grid, vals)
        if dim == 2:
            perp = np.array([-d[1], d[0]])
        else:
            perp = np.array([-d[1], d[0], np.zeros(grid.shape)])
        vals = A * w * perp / reg ** (preset.degree + 1)
        return VectorField(grid, grid.ifft(leray_hat(grid, grid.fft(vals))))
    raise ValueError(f"unknown preset kind {kind!r}")


def generate_initial_data(presets: dict, grid: Grid):
    """Map of component name (``c``, ``n``, ``u``, optionally ``v``) to preset -> SolutionState."""
    from .solver import SolutionState

    unknown = set(presets) - {"c", "n", "u", "v"}
    if unknown:
        raise ValueError(f"unknown components {sorted(unknown)}")
    zero = DataPreset("zero")
    c = generate_field(presets.get("c", zero), grid)
    n = generate_field(presets.get("n", zero), grid)
    u = generate_field(presets.get("u", zero), grid, vector=True)
    v = generate_field(presets["v"], grid) if "v" in presets else None
    return SolutionState(c, n, u, v)


def small_data_state(grid: Grid, amplitude: float = 1e-2, with_v: bool = False):
    """Gaussian ``n0`` of the given amplitude, ``c0 = 10 * amplitude``, small Taylor-Green ``u0``."""
    presets = {
        "c": DataPreset("constant", amplitude=10 * amplitude),
        "n": DataPreset("gaussian_blob", amplitude=amplitude),
        "u": DataPreset("taylor_green", amplitude=amplitude),
    }
    if with_v:
        presets["v"] = DataPreset("gaussian_blob", amplitude=amplitude, width=0.15)
    return generate_initial_data(presets, grid)
