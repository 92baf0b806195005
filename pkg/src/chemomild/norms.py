"""Ball-supremum function norms on the periodic box.

Suprema over ``(x, R)`` are taken over a :class:`BallFamily`: dyadic radii
``L/4, L/8, ...`` that resolve at least four grid cells, and centres on a
(strided) sub-lattice.  Ball integrals for every centre at once come from one
FFT circular convolution with the ball indicator, so the full lattice of centres
costs no more than a strided one.  Ball volumes are quadrature volumes
(``#points * cell volume``).

Time integrals ``int_0^{R^2}`` use cubic-spline quadrature weights on either a
geometric caloric mesh (static data) or the nodes of a trajectory.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .duhamel import SourceTrajectory
from .spectral import Grid, ScalarField, VectorField, _Field, grad_hat

__all__ = [
    "BallFamily",
    "NormParams",
    "LPBank",
    "CaloricQuadrature",
    "NormReport",
    "make_ball_family",
    "ball_mask",
    "ball_volume",
    "ball_integrals",
    "morrey_norm",
    "campanato_seminorm",
    "carleson_caloric_norm",
    "bmo_caloric_seminorm",
    "besov_caloric_sup",
    "besov_morrey_norm",
    "path_norm_X1",
    "path_norm_X2",
    "path_norm_X3",
    "path_norm_terms",
    "carleson_exponent_check",
    "caloric_mesh",
    "caloric_density",
    "field_norm_report",
    "small_radius_slope",
    "lp_profile",
]


# ---------------------------------------------------------------------------
# ball families and ball integrals


@dataclass(frozen=True)
class BallFamily:
    """Discrete stand-in for the ``sup over x in R^N, R > 0`` of the norm definitions."""

    radii: tuple
    center_stride: int = 1

    def __post_init__(self):
        if len(self.radii) == 0:
            raise ValueError("empty ball family")
        if self.center_stride < 1:
            raise ValueError("center_stride must be >= 1")
        object.__setattr__(self, "radii", tuple(sorted((float(r) for r in self.radii), reverse=True)))

    def restricted(self, r_max: float) -> Optional["BallFamily"]:
        radii = tuple(r for r in self.radii if r <= r_max * (1 + 1e-12))
        return BallFamily(radii, self.center_stride) if radii else None

    def validate(self, grid: Grid):
        for r in self.radii:
            if r > grid.box_length / 4 * (1 + 1e-12):
                raise ValueError(f"radius {r} exceeds the torus cap L/4")
            if r < 4 * grid.spacing * (1 - 1e-12):
                raise ValueError(f"radius {r} resolves fewer than 4 grid cells")
        if self.center_stride * grid.spacing > min(self.radii) * (1 + 1e-12):
            raise ValueError("centre stride too coarse to cover the torus with these radii")

    def describe(self) -> dict:
        return {"radii": list(self.radii), "center_stride": self.center_stride}


def make_ball_family(grid: Grid, center_stride: int = 1, n_radii: Optional[int] = None,
                     min_cells: int = 4) -> BallFamily:
    """Dyadic radii ``L/4, L/8, ...`` down to ``min_cells`` grid spacings."""
    if min_cells < 4:
        raise ValueError("radii must resolve at least 4 grid cells")
    radii, r = [], grid.box_length / 4
    while r >= min_cells * grid.spacing * (1 - 1e-12):
        radii.append(r)
        r /= 2
    if n_radii is not None:
        radii = radii[:n_radii]
    if not radii:
        raise ValueError("grid too coarse for any admissible radius")
    fam = BallFamily(tuple(radii), center_stride)
    fam.validate(grid)
    return fam


@lru_cache(maxsize=128)
def ball_mask(grid: Grid, radius: float) -> np.ndarray:
    """Indicator of the periodic ball ``|y| <= r`` centred at the origin grid point."""
    x = grid.coordinates
    d = np.minimum(x, grid.box_length - x)
    mask = np.sum(d**2, axis=0) <= radius**2 * (1 + 1e-12)
    mask.setflags(write=False)
    return mask


def ball_volume(grid: Grid, radius: float) -> float:
    return float(np.count_nonzero(ball_mask(grid, radius))) * grid.cell_volume


@lru_cache(maxsize=128)
def _ball_hat(grid: Grid, radius: float) -> np.ndarray:
    return grid.fft(ball_mask(grid, radius).astype(float))


def ball_integrals(grid: Grid, values: np.ndarray, radius: float, stride: int = 1) -> np.ndarray:
    """``int_{B(x, r)} values`` for every (strided) centre ``x``; values must be nonnegative."""
    out = grid.ifft(grid.fft(values) * _ball_hat(grid, radius)) * grid.cell_volume
    out = np.maximum(out, 0.0)
    if stride > 1:
        out = out[(slice(None, None, stride),) * grid.dim]
    return out


def _center_index(grid: Grid, flat_index: int, stride: int) -> list:
    n = -(-grid.points_per_axis // stride)
    idx = np.unravel_index(flat_index, (n,) * grid.dim)
    return [int(i) * stride for i in idx]


@dataclass(frozen=True)
class NormParams:
    """Exponents of the Morrey/Campanato/Besov displays."""

    p: float = 2.0
    lam: float = 0.0
    s: float = 0.0
    q: float = math.inf
    T: Optional[float] = None

    def check_morrey(self, dim: int):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not 0 <= self.lam < dim:
            raise ValueError(f"Morrey exponent must lie in [0, {dim})")

    def check_campanato(self, dim: int):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not 0 <= self.lam < dim + self.p:
            raise ValueError(f"Campanato exponent must lie in [0, {dim + self.p})")


# ---------------------------------------------------------------------------
# static norms


def _as_array(f) -> np.ndarray:
    return f.values if isinstance(f, _Field) else np.asarray(f)


def _pointwise_abs(f, grid: Grid) -> np.ndarray:
    v = _as_array(f)
    return np.sqrt(np.sum(v**2, axis=0)) if v.ndim == grid.dim + 1 else np.abs(v)


def _morrey(grid: Grid, absval: np.ndarray, p: float, mu: float, balls: BallFamily):
    best, arg = 0.0, None
    powered = absval**p
    for r in balls.radii:
        vals = ball_integrals(grid, powered, r, balls.center_stride)
        i = int(np.argmax(vals))
        v = r ** (-mu / p) * vals.flat[i] ** (1.0 / p)
        if v > best or arg is None:
            best, arg = v, {"radius": r, "center": _center_index(grid, i, balls.center_stride)}
    return float(best), arg


def morrey_norm(f, p: float, mu: float, balls: BallFamily) -> float:
    """``max r^{-mu/p} ||f||_{L^p(B_r(x))}`` over the ball family (vector fields use ``|f|``)."""
    grid = f.grid
    NormParams(p=p, lam=mu).check_morrey(grid.dim)
    return _morrey(grid, _pointwise_abs(f, grid), p, mu, balls)[0]


def _ball_offsets(grid: Grid, radius: float) -> np.ndarray:
    return np.argwhere(ball_mask(grid, radius))


def campanato_seminorm(f: ScalarField, p: float, lam: float, balls: BallFamily,
                       chunk: int = 4096) -> float:
    """``max (r^{-lam} int_B |f - mean_B f|^p)^{1/p}`` over the ball family."""
    grid = f.grid
    NormParams(p=p, lam=lam).check_campanato(grid.dim)
    M, s = grid.points_per_axis, balls.center_stride
    vals = f.values
    centers = np.array(np.meshgrid(*([np.arange(0, M, s)] * grid.dim), indexing="ij")).reshape(grid.dim, -1).T
    best = 0.0
    for r in balls.radii:
        offs = _ball_offsets(grid, r)
        for start in range(0, len(centers), chunk):
            c = centers[start:start + chunk]
            idx = (c[:, None, :] + offs[None, :, :]) % M
            samples = vals[tuple(idx[..., d] for d in range(grid.dim))]
            dev = samples - samples.mean(axis=1, keepdims=True)
            osc = np.sum(np.abs(dev) ** p, axis=1) * grid.cell_volume
            best = max(best, float(np.max(r ** (-lam) * osc) ** (1.0 / p)))
    return best


# ---------------------------------------------------------------------------
# time quadrature


@lru_cache(maxsize=512)
def _spline_weights(nodes: tuple, upper: float) -> np.ndarray:
    t = np.asarray(nodes)
    if upper > t[-1] * (1 + 1e-12):
        raise ValueError(f"time integral up to {upper} exceeds the sampled range {t[-1]}")
    if t.size < 4:
        # too few nodes for a cubic; fall back to the trapezoid rule on the linear interpolant
        w = np.zeros(t.size)
        for i in range(t.size - 1):
            a, b = t[i], min(t[i + 1], upper)
            if b <= a:
                break
            h = t[i + 1] - t[i]
            fa, fb = 1 - (a - t[i]) / h, 1 - (b - t[i]) / h
            w[i] += 0.5 * (b - a) * (fa + fb)
            w[i + 1] += 0.5 * (b - a) * (2 - fa - fb)
        return w
    return CubicSpline(t, np.eye(t.size), axis=0).integrate(0.0, min(upper, t[-1]))


@dataclass(frozen=True)
class CaloricQuadrature:
    """Geometric mesh ``0, t_min, t_min*ratio, ...`` with ``t_min = t_min_cells * spacing^2``."""

    ratio: float = 1.3
    t_min_cells: float = 1e-3

    def __post_init__(self):
        if not self.ratio > 1:
            raise ValueError("mesh ratio must exceed 1")
        if not self.t_min_cells > 0:
            raise ValueError("t_min_cells must be positive")

    def describe(self) -> dict:
        return {"ratio": self.ratio, "t_min_cells": self.t_min_cells}


def caloric_mesh(grid: Grid, t_max: float, quad: CaloricQuadrature = CaloricQuadrature(),
                 extra: Sequence[float] = ()) -> np.ndarray:
    t_min = quad.t_min_cells * grid.spacing**2
    n = max(1, int(math.ceil(math.log(t_max / t_min) / math.log(quad.ratio)))) if t_max > t_min else 0
    geo = t_min * quad.ratio ** np.arange(n + 1)
    geo = geo[geo < t_max]
    nodes = np.concatenate([[0.0], geo, [t_max], np.asarray(extra, dtype=float)])
    nodes = np.unique(nodes[nodes <= t_max])
    return nodes


def _caloric_hat(f, gradient: bool) -> np.ndarray:
    hat = f.hat
    if gradient:
        if isinstance(f, VectorField):
            raise TypeError("gradient density is defined for scalar data")
        hat = grad_hat(f.grid, hat)
    return hat


def _caloric_density_at(grid: Grid, hat: np.ndarray, t: float) -> np.ndarray:
    v = grid.ifft(np.exp(-grid.k2 * t) * hat)
    return np.sum(v**2, axis=0) if v.ndim == grid.dim + 1 else v**2


def caloric_density(f, nodes: np.ndarray, gradient: bool = False) -> np.ndarray:
    """``|e^{t Delta} f|^2`` (or ``|grad e^{t Delta} f|^2``) at each node, shape ``(n_t, *shape)``."""
    hat = _caloric_hat(f, gradient)
    return np.stack([_caloric_density_at(f.grid, hat, t) for t in nodes])


def _box_sup(grid: Grid, nodes: np.ndarray, density_at: Callable[[int], np.ndarray],
             balls: BallFamily, exponent: float):
    """``max over (x, r) of |B_r|^{exponent} * int_0^{r^2} int_{B_r(x)} density``.

    The time quadrature is applied pointwise first and the ball convolution once
    per radius afterwards (both are linear).  Returns ``(value, argmax, per_radius)``.
    """
    key = tuple(float(t) for t in nodes)
    radii = [r for r in balls.radii if r**2 <= nodes[-1] * (1 + 1e-12)]
    if not radii:
        return 0.0, None, {}
    weights = {r: _spline_weights(key, r**2) for r in radii}
    acc = {r: np.zeros(grid.shape) for r in radii}
    for i in range(len(nodes)):
        wi = {r: weights[r][i] for r in radii if weights[r][i] != 0.0}
        if not wi:
            continue
        dens = density_at(i)
        for r, w in wi.items():
            acc[r] += w * dens
    best, arg, per_radius = 0.0, None, {}
    for r in radii:
        vals = ball_integrals(grid, acc[r], r, balls.center_stride) * ball_volume(grid, r) ** exponent
        j = int(np.argmax(vals))
        v = float(vals.flat[j])
        per_radius[r] = v
        if v > best or arg is None:
            best, arg = v, {"radius": r, "center": _center_index(grid, j, balls.center_stride)}
    return best, arg, per_radius


def _carleson_caloric(f, lam: float, balls: BallFamily, quad: CaloricQuadrature, gradient: bool = False):
    grid = f.grid
    t_max = max(balls.radii) ** 2
    nodes = caloric_mesh(grid, t_max, quad, [r**2 for r in balls.radii])
    hat = _caloric_hat(f, gradient)
    value, arg, per_r = _box_sup(grid, nodes, lambda i: _caloric_density_at(grid, hat, nodes[i]),
                                 balls, lam / grid.dim - 1.0)
    if not np.isfinite(value):
        raise FloatingPointError("Carleson quadrature produced a non-finite value")
    return math.sqrt(value), arg, {r: math.sqrt(v) for r, v in per_r.items()}


def carleson_caloric_norm(f, lam: float, balls: BallFamily,
                          time_quadrature: CaloricQuadrature = CaloricQuadrature()) -> float:
    """``sup (|B|^{lam/N - 1} int_0^{R^2} int_B |e^{t Delta} f|^2)^{1/2}``.

    ``lam = 2`` is the critical density norm, ``lam = 0`` the BMO^{-1}-type norm
    (vector data use ``|e^{t Delta} f|`` pointwise).
    """
    if not -2 < lam <= 2:
        raise ValueError("lam must lie in (-2, 2]")
    return _carleson_caloric(f, lam, balls, time_quadrature)[0]


def bmo_caloric_seminorm(f: ScalarField, balls: BallFamily,
                         time_quadrature: CaloricQuadrature = CaloricQuadrature()) -> float:
    """``sup (|B|^{-1} int_0^{r^2} int_B |grad e^{t Delta} f|^2)^{1/2}``."""
    return _carleson_caloric(f, 0.0, balls, time_quadrature, gradient=True)[0]


def besov_caloric_sup(f: ScalarField, smoothness: float = -2.0, t_max: Optional[float] = None,
                      time_quadrature: CaloricQuadrature = CaloricQuadrature()) -> float:
    """Caloric form ``sup_t t^{-smoothness/2} ||e^{t Delta} f||_inf`` of a negative-order
    ``B^{smoothness}_{inf,inf}`` norm, mean removed, ``t`` in ``(0, (L/4)^2]`` by default."""
    if smoothness >= 0:
        raise ValueError("the caloric characterisation needs negative smoothness")
    grid = f.grid
    t_max = (grid.box_length / 4) ** 2 if t_max is None else t_max
    hat = np.array(f.hat)
    hat.flat[0] = 0.0
    best = 0.0
    for t in caloric_mesh(grid, t_max, time_quadrature)[1:]:
        v = grid.ifft(np.exp(-grid.k2 * t) * hat)
        best = max(best, t ** (-smoothness / 2) * float(np.max(np.abs(v))))
    return best


# ---------------------------------------------------------------------------
# Littlewood-Paley blocks


def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 for x <= 0, 0 for x >= 1, built from exp(-1/x)."""
    x = np.clip(x, 0.0, 1.0)

    def e(y):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)

    a, b = e(1.0 - x), e(x)
    return a / (a + b)


def _theta(r: np.ndarray) -> np.ndarray:
    # 1 on [0, 1], 0 on [2, inf)
    return _smooth_step(r - 1.0)


def lp_profile(xi_abs: np.ndarray) -> np.ndarray:
    """Radial bump ``psi(r) = theta(r) - theta(2r)``, supported in ``1/2 <= r <= 2``."""
    return _theta(xi_abs) - _theta(2.0 * xi_abs)


@dataclass
class LPBank:
    """Dyadic Littlewood-Paley blocks ``psi(2^{-j} xi)`` resolvable on a grid."""

    grid: Grid
    levels: list = field(default_factory=list)
    dropped: list = field(default_factory=list)

    def __post_init__(self):
        kabs = np.sqrt(self.grid.k2)
        nz = kabs[kabs > 0]
        j_lo = int(math.floor(math.log2(nz.min()))) - 1
        j_hi = int(math.ceil(math.log2(nz.max()))) + 1
        self._symbols = {}
        for j in range(j_lo, j_hi + 1):
            sym = lp_profile(kabs * 2.0 ** (-j))
            sym.flat[0] = 0.0
            if np.any(sym > 0):
                self.levels.append(j)
                self._symbols[j] = sym
            else:
                self.dropped.append(j)

    def symbol(self, j: int) -> np.ndarray:
        return self._symbols[j]

    def partition_error(self) -> float:
        total = sum(self._symbols.values())
        nz = self.grid.k2 > 0
        return float(np.max(np.abs(total[nz] - 1.0)))

    def block(self, f: ScalarField, j: int) -> ScalarField:
        return ScalarField.from_hat(self.grid, self._symbols[j] * f.hat)


def besov_morrey_norm(f: ScalarField, s: float, p: float, lam: float, q: float,
                      bank: LPBank, balls: BallFamily) -> float:
    """``l^q`` over levels of ``2^{js} ||Delta_j f||_{M_{p,lam}}``."""
    if not bank.levels:
        raise ValueError("no admissible Littlewood-Paley levels")
    if q < 1:
        raise ValueError("q must be >= 1")
    grid = f.grid
    NormParams(p=p, lam=lam).check_morrey(grid.dim)
    terms = []
    for j in bank.levels:
        block = bank.block(f, j)
        terms.append(2.0 ** (j * s) * _morrey(grid, np.abs(block.values), p, lam, balls)[0])
    terms = np.asarray(terms)
    if math.isinf(q):
        return float(terms.max())
    return float(np.sum(terms**q) ** (1.0 / q))


# ---------------------------------------------------------------------------
# path norms on trajectories


def _restrict_nodes(traj: SourceTrajectory, T: Optional[float]):
    t = traj.times.nodes
    if T is None:
        T = t[-1]
    if T > t[-1] * (1 + 1e-12):
        raise ValueError(f"trajectory covers (0, {t[-1]}], not (0, {T}]")
    return T, np.nonzero(t <= T * (1 + 1e-12))[0]


def _sq_density(grid: Grid, v: np.ndarray) -> np.ndarray:
    return np.sum(v**2, axis=0) if v.ndim == grid.dim + 1 else v**2


def _traj_carleson(traj: SourceTrajectory, values: np.ndarray, T: float, balls: BallFamily, exponent: float):
    fam = balls.restricted(math.sqrt(T))
    if fam is None:
        return 0.0, None
    grid = traj.grid
    value, arg, _ = _box_sup(grid, traj.times.nodes, lambda i: _sq_density(grid, values[i]), fam, exponent)
    return math.sqrt(value), arg


def path_norm_terms(traj: SourceTrajectory, kind: str, balls: BallFamily, T: Optional[float] = None) -> dict:
    """The individual terms of the ``X1``/``X2``/``X3`` path norms."""
    if len(traj.times) < 2:
        raise ValueError("empty trajectory")
    grid = traj.grid
    T, idx = _restrict_nodes(traj, T)
    t = traj.times.nodes
    vals = traj.values
    sup_abs = lambda a: float(np.max(np.sqrt(_sq_density(grid, a))))  # noqa: E731
    if kind == "X1":
        if traj.is_vector:
            raise ValueError("X1 takes a scalar trajectory")
        grads = np.stack([grid.ifft(grad_hat(grid, grid.fft(vals[i]))) for i in range(len(t))])
        terms = {
            "sup_linf": max(sup_abs(vals[i]) for i in idx),
            "sup_sqrt_t_grad": max(math.sqrt(t[i]) * sup_abs(grads[i]) for i in idx),
        }
        terms["carleson_grad"], terms["argmax"] = _traj_carleson(traj, grads, T, balls, -1.0)
    elif kind == "X2":
        if traj.is_vector:
            raise ValueError("X2 takes a scalar trajectory")
        terms = {"sup_t_linf": max(t[i] * sup_abs(vals[i]) for i in idx)}
        if grid.dim == 2:
            energy = grid.integrate(vals**2)
            w = _spline_weights(tuple(float(x) for x in t), T)
            terms["spacetime_l2"] = math.sqrt(max(float(w @ energy), 0.0))
            terms["argmax"] = None
        else:
            terms["carleson"], terms["argmax"] = _traj_carleson(traj, vals, T, balls, 2.0 / grid.dim - 1.0)
    elif kind == "X3":
        if not traj.is_vector:
            raise ValueError("X3 takes a vector trajectory")
        terms = {"sup_sqrt_t_linf": max(math.sqrt(t[i]) * sup_abs(vals[i]) for i in idx)}
        terms["carleson"], terms["argmax"] = _traj_carleson(traj, vals, T, balls, -1.0)
    else:
        raise ValueError(f"unknown path norm {kind!r}")
    terms["total"] = sum(v for k, v in terms.items() if k != "argmax")
    return terms


def path_norm_X1(traj: SourceTrajectory, T: Optional[float] = None, balls: BallFamily = None) -> float:
    """``sup ||c||_inf + sup t^{1/2} ||grad c||_inf + Carleson term of |grad c|^2``."""
    return path_norm_terms(traj, "X1", balls, T)["total"]


def path_norm_X2(traj: SourceTrajectory, T: Optional[float] = None, balls: BallFamily = None) -> float:
    """``sup t ||n||_inf`` plus the critical Carleson term (space-time ``L^2`` when ``N = 2``)."""
    return path_norm_terms(traj, "X2", balls, T)["total"]


def path_norm_X3(traj: SourceTrajectory, T: Optional[float] = None, balls: BallFamily = None) -> float:
    """``sup t^{1/2} ||u||_inf + sup (|B|^{-1} int int |u|^2)^{1/2}``."""
    return path_norm_terms(traj, "X3", balls, T)["total"]


def carleson_exponent_check(density: SourceTrajectory, alpha: float, balls: BallFamily) -> dict:
    """``sup mu(T(B)) / |B|^alpha`` over Carleson boxes ``B_r(x) x (0, r^2]``.

    Radii whose box height exceeds the sampled time range are skipped and listed.
    """
    if density.is_vector:
        raise ValueError("density must be scalar")
    if np.any(density.values < 0):
        raise ValueError("negative density")
    grid = density.grid
    nodes = density.times.nodes
    skipped = [r for r in balls.radii if r**2 > nodes[-1] * (1 + 1e-12)]
    fam = balls.restricted(math.sqrt(nodes[-1]))
    if fam is None:
        return {"value": 0.0, "per_radius": {}, "skipped_radii": skipped, "finite": True, "argmax": None}
    value, arg, per_r = _box_sup(grid, nodes, lambda i: density.values[i], fam, -alpha)
    return {
        "value": value,
        "per_radius": per_r,
        "skipped_radii": skipped,
        "finite": bool(np.isfinite(value)),
        "argmax": arg,
    }


def small_radius_slope(per_radius: Dict[float, float]) -> Optional[float]:
    """Log-log slope of a radius profile over its two smallest radii (VMO-type trend)."""
    items = sorted((r, v) for r, v in per_radius.items() if v > 0)
    if len(items) < 2:
        return None
    (r0, v0), (r1, v1) = items[0], items[1]
    return math.log(v1 / v0) / math.log(r1 / r0)


# ---------------------------------------------------------------------------
# reports


@dataclass
class NormReport:
    """Named norm values plus the ball-family/parameter provenance and argmax data."""

    values: Dict[str, float] = field(default_factory=dict)
    meta: Dict[str, object] = field(default_factory=dict)

    def add(self, name: str, value: float, **info):
        value = float(value)
        if not (np.isfinite(value) and value >= 0):
            raise ValueError(f"norm {name} = {value} is not a finite nonnegative number")
        self.values[name] = value
        if info:
            self.meta.setdefault("details", {})[name] = info

    def to_text(self) -> str:
        return "".join(f"{k} = {v:.17g}\n" for k, v in self.values.items())

    def to_json(self) -> str:
        return json.dumps({"values": self.values, "meta": self.meta}, indent=2, sort_keys=True, default=_jsonable)

    @classmethod
    def from_text(cls, text: str) -> "NormReport":
        rep = cls()
        for line in text.splitlines():
            if line.strip():
                k, v = line.split("=", 1)
                rep.values[k.strip()] = float(v)
        return rep


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def field_norm_report(f, balls: BallFamily, selection: Optional[Sequence[str]] = None,
                      quad: CaloricQuadrature = CaloricQuadrature()) -> NormReport:
    """Evaluate a selection of static norms of ``f`` and record argmax/cap metadata."""
    grid = f.grid
    scalar = isinstance(f, ScalarField)
    default = ["linf", "morrey_2_N-2", "carleson_lam2", "carleson_lam0"]
    if scalar:
        default += ["campanato_2_N", "bmo_caloric", "besov_caloric_-2"]
    selection = list(selection) if selection else default
    rep = NormReport(meta={"balls": balls.describe(), "quadrature": quad.describe(),
                           "grid": {"dim": grid.dim, "M": grid.points_per_axis, "L": grid.box_length}})
    cap = grid.box_length / 4
    for name in selection:
        if name == "linf":
            rep.add(name, f.sup())
        elif name == "morrey_2_N-2":
            v, arg = _morrey(grid, _pointwise_abs(f, grid), 2.0, grid.dim - 2.0, balls)
            rep.add(name, v, argmax=arg, cap_hit=abs(arg["radius"] - cap) < 1e-12 * cap)
        elif name in ("carleson_lam2", "carleson_lam0"):
            lam = 2.0 if name.endswith("2") else 0.0
            v, arg, per_r = _carleson_caloric(f, lam, balls, quad)
            rep.add(name, v, argmax=arg, cap_hit=abs(arg["radius"] - cap) < 1e-12 * cap,
                    small_radius_slope=small_radius_slope(per_r))
        elif name == "campanato_2_N" and scalar:
            rep.add(name, campanato_seminorm(f, 2.0, float(grid.dim), balls))
        elif name == "bmo_caloric" and scalar:
            v, arg, per_r = _carleson_caloric(f, 0.0, balls, quad, gradient=True)
            rep.add(name, v, argmax=arg, cap_hit=abs(arg["radius"] - cap) < 1e-12 * cap,
                    small_radius_slope=small_radius_slope(per_r))
        elif name == "besov_caloric_-2" and scalar:
            rep.add(name, besov_caloric_sup(f, -2.0, time_quadrature=quad))
        else:
            raise ValueError(f"norm {name!r} is not available for {type(f).__name__}")
    return rep
