"""Duhamel integral operators on time-sampled trajectories.

Every operator has the form ``Y(t) = int_0^t exp(-(t-s)(|k|^2 + kappa)) F(s) ds``
applied mode by mode, where ``F`` is a pseudospectral (2/3-dealiased) product of
the inputs.  Sources are interpolated linearly in time between nodes and the
exponential factor is integrated exactly on each panel, which gives the
recursion

    Y[k+1] = exp(-a h) Y[k] + w0(a h) F[k] + w1(a h) F[k+1].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .spectral import Grid, VectorField, div_hat, grad_hat, leray_hat

__all__ = [
    "TimeGrid",
    "SourceTrajectory",
    "make_time_grid",
    "panel_weights",
    "duhamel_integrate",
    "duhamel_B1",
    "duhamel_B2",
    "duhamel_B3",
    "duhamel_B4",
    "linear_L_phi",
    "linear_L_kappa",
]


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing nodes ``0 = t_0 < ... < t_K = T``."""

    nodes: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.nodes, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a time grid needs at least two nodes")
        if t[0] != 0.0:
            raise ValueError("time grids start at t=0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time nodes must be strictly increasing")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "nodes", t)

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    def __len__(self) -> int:
        return self.nodes.size

    def key(self) -> tuple:
        return tuple(self.nodes.tolist())

    def scaled(self, factor: float) -> "TimeGrid":
        return TimeGrid(self.nodes * factor)

    def refined(self) -> "TimeGrid":
        """Insert panel midpoints (halves every step)."""
        t = self.nodes
        mid = 0.5 * (t[1:] + t[:-1])
        out = np.empty(2 * t.size - 1)
        out[0::2] = t
        out[1::2] = mid
        return TimeGrid(out)


def make_time_grid(horizon: float, n_uniform: int = 32, refine_start: bool = True) -> TimeGrid:
    """Uniform nodes of spacing ``h = T/n`` preceded by a geometric cluster near 0.

    The cluster starts at ``h^2/T`` and doubles until it reaches ``h``.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if n_uniform < 1:
        raise ValueError("need at least one uniform step")
    h = horizon / n_uniform
    uniform = np.linspace(0.0, horizon, n_uniform + 1)
    if not refine_start:
        return TimeGrid(uniform)
    t, geo = h * h / horizon, []
    while t < h * (1 - 1e-12):
        geo.append(t)
        t *= 2.0
    return TimeGrid(np.concatenate([[0.0], geo, uniform[1:]]))


@dataclass(frozen=True, eq=False)
class SourceTrajectory:
    """Fields sampled at the nodes of a :class:`TimeGrid` (piecewise linear in time).

    ``values`` has shape ``(K+1, *shape)`` for scalars and ``(K+1, dim, *shape)`` for vectors.
    """

    grid: Grid
    times: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        g = self.grid
        if v.shape[0] != len(self.times):
            raise ValueError("trajectory length does not match the time grid")
        if v.shape[-g.dim:] != g.shape or v.ndim not in (g.dim + 1, g.dim + 2):
            raise ValueError(f"trajectory shape {v.shape} incompatible with grid {g.shape}")
        if v.ndim == g.dim + 2 and v.shape[1] != g.dim:
            raise ValueError("vector trajectories need dim components")
        if not np.all(np.isfinite(v)):
            raise ValueError("trajectory contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == self.grid.dim + 2

    @classmethod
    def constant(cls, grid: Grid, times: TimeGrid, value) -> "SourceTrajectory":
        value = np.asarray(value, dtype=float)
        if value.shape == ():
            value = np.full(grid.shape, float(value))
        return cls(grid, times, np.broadcast_to(value, (len(times),) + value.shape).copy())

    @classmethod
    def from_function(cls, grid: Grid, times: TimeGrid, fn) -> "SourceTrajectory":
        return cls(grid, times, np.stack([np.asarray(fn(t), dtype=float) for t in times.nodes]))

    def _check_compatible(self, other: "SourceTrajectory"):
        if other.grid != self.grid:
            raise ValueError("trajectories live on different grids")
        if other.times is not self.times and other.times.key() != self.times.key():
            raise ValueError("trajectories use different time grids")

    def __add__(self, other):
        self._check_compatible(other)
        return SourceTrajectory(self.grid, self.times, self.values + other.values)

    def __sub__(self, other):
        self._check_compatible(other)
        return SourceTrajectory(self.grid, self.times, self.values - other.values)

    def __mul__(self, scalar: float):
        return SourceTrajectory(self.grid, self.times, self.values * float(scalar))

    __rmul__ = __mul__

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def _phi_series(z: np.ndarray, offset: int, terms: int = 14) -> np.ndarray:
    # sum_n (-z)^n c_n with c_n = 1/(n+1)! (offset 1) or (n+1)/(n+2)! (offset 2)
    out = np.zeros_like(z)
    term = np.ones_like(z)
    fact = 1.0
    for n in range(terms):
        fact *= n + offset
        coeff = 1.0 / fact if offset == 1 else (n + 1) / fact
        out += coeff * term
        term = term * (-z)
    return out


def panel_weights(a: np.ndarray, h: float):
    """Exact panel integrals of ``exp(-a (h - tau))`` against linear hat functions.

    Returns ``(decay, w_left, w_right)`` with ``decay = exp(-a h)``,
    ``w_left = int_0^h e^{-a(h-tau)} (1 - tau/h) dtau`` and
    ``w_right = int_0^h e^{-a(h-tau)} tau/h dtau``.
    """
    a = np.asarray(a, dtype=float)
    z = a * h
    small = z < 0.1
    zs = np.where(small, z, 0.0)
    zl = np.where(small, 1.0, z)
    em1 = -np.expm1(-zl)  # 1 - e^{-z}
    phi1 = np.where(small, _phi_series(zs, 1), em1 / zl)
    g = np.where(small, _phi_series(zs, 2), (em1 - zl * np.exp(-zl)) / zl**2)
    return np.exp(-z), h * g, h * (phi1 - g)


@lru_cache(maxsize=64)
def _weights(grid: Grid, nodes: tuple, kappa: float):
    a = grid.k2 + kappa
    steps = np.diff(np.asarray(nodes))
    cache, out = {}, []
    for h in steps:
        if h not in cache:
            cache[h] = panel_weights(a, h)
        out.append(cache[h])
    return out


def duhamel_integrate(grid: Grid, times: TimeGrid, source_hat: np.ndarray, kappa: float = 0.0) -> np.ndarray:
    """Node values of ``int_0^t exp((t-s)(Delta - kappa)) F(s) ds`` in spectral space."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    weights = _weights(grid, times.key(), float(kappa))
    out = np.zeros_like(source_hat)
    for k, (decay, w0, w1) in enumerate(weights):
        out[k + 1] = decay * out[k] + w0 * source_hat[k] + w1 * source_hat[k + 1]
    return out


# ---------------------------------------------------------------------------
# pseudospectral products, all returning dealiased spectral coefficients


def product_hat(grid: Grid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return grid.fft(a * b) * grid.dealias_mask


def _component_axis(grid: Grid, arr: np.ndarray) -> int:
    return arr.ndim - grid.dim - 1


def dot_hat(grid: Grid, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Dealiased ``u . w`` for stacked vector arrays."""
    return grid.fft(np.sum(u * w, axis=_component_axis(grid, u))) * grid.dealias_mask


def scalar_vector_hat(grid: Grid, n: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Dealiased ``n w`` (scalar times vector); a static ``w`` broadcasts over leading axes of ``n``."""
    return grid.fft(np.expand_dims(n, n.ndim - grid.dim) * w) * grid.dealias_mask


def advection_div_hat(grid: Grid, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``div(u (x) w)_j = sum_l d_l (u_j w_l)`` from dealiased tensor products."""
    caxis = _component_axis(grid, u)
    uj = np.expand_dims(u, caxis + 1)
    wl = np.expand_dims(w, caxis)
    tensor_hat = grid.fft(uj * wl) * grid.dealias_mask  # (..., j, l, spec)
    return np.sum(1j * grid.wavevector_odd * tensor_hat, axis=caxis + 1)


def gradient_values(grid: Grid, f: np.ndarray) -> np.ndarray:
    return grid.ifft(grad_hat(grid, grid.fft(f)))


# ---------------------------------------------------------------------------
# public operators


def _check_pair(a: SourceTrajectory, b: SourceTrajectory, times: Optional[TimeGrid]):
    a._check_compatible(b)
    if times is not None and times.key() != a.times.key():
        raise ValueError("time grid does not match the source trajectories")
    return a.grid, a.times


def _wrap(grid, times, hat) -> SourceTrajectory:
    return SourceTrajectory(grid, times, grid.ifft(hat))


def duhamel_B1(w: SourceTrajectory, n: SourceTrajectory, times: Optional[TimeGrid] = None) -> SourceTrajectory:
    """``int_0^t e^{(t-s)Delta} (w n) ds``; two vector inputs are contracted (``w . n``)."""
    grid, times = _check_pair(w, n, times)
    if w.is_vector != n.is_vector:
        raise ValueError("B1 takes two scalars or two vectors")
    src = dot_hat(grid, w.values, n.values) if w.is_vector else product_hat(grid, w.values, n.values)
    return _wrap(grid, times, duhamel_integrate(grid, times, src))


def duhamel_B2(n: SourceTrajectory, w: SourceTrajectory, times: Optional[TimeGrid] = None) -> SourceTrajectory:
    """``int_0^t e^{(t-s)Delta} div(n w) ds`` for scalar ``n`` and vector ``w``."""
    grid, times = _check_pair(n, w, times)
    if n.is_vector or not w.is_vector:
        raise ValueError("B2 takes a scalar and a vector trajectory")
    src = div_hat(grid, scalar_vector_hat(grid, n.values, w.values))
    return _wrap(grid, times, duhamel_integrate(grid, times, src))


def duhamel_B3(u: SourceTrajectory, w: SourceTrajectory, times: Optional[TimeGrid] = None) -> SourceTrajectory:
    """``int_0^t e^{(t-s)Delta} P div(u (x) w) ds``."""
    grid, times = _check_pair(u, w, times)
    if not (u.is_vector and w.is_vector):
        raise ValueError("B3 takes two vector trajectories")
    src = leray_hat(grid, advection_div_hat(grid, u.values, w.values))
    return _wrap(grid, times, duhamel_integrate(grid, times, src))


def duhamel_B4(u: SourceTrajectory, v: SourceTrajectory, times: Optional[TimeGrid] = None, kappa: float = 0.0) -> SourceTrajectory:
    """``int_0^t e^{-kappa(t-s)} e^{(t-s)Delta} (u . grad v) ds``."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    grid, times = _check_pair(u, v, times)
    if not u.is_vector or v.is_vector:
        raise ValueError("B4 takes a vector and a scalar trajectory")
    src = dot_hat(grid, u.values, gradient_values(grid, v.values))
    return _wrap(grid, times, duhamel_integrate(grid, times, src, kappa))


def linear_L_phi(n: SourceTrajectory, grad_phi: VectorField, times: Optional[TimeGrid] = None) -> SourceTrajectory:
    """``int_0^t e^{(t-s)Delta} P(n grad_phi) ds`` for a static forcing field."""
    if grad_phi.grid != n.grid:
        raise ValueError("forcing lives on a different grid")
    if n.is_vector:
        raise ValueError("L_phi takes a scalar trajectory")
    if times is not None and times.key() != n.times.key():
        raise ValueError("time grid does not match the source trajectory")
    grid = n.grid
    src = leray_hat(grid, scalar_vector_hat(grid, n.values, grad_phi.values))
    return _wrap(grid, n.times, duhamel_integrate(grid, n.times, src))


def linear_L_kappa(n: SourceTrajectory, times: Optional[TimeGrid] = None, kappa: float = 0.0) -> SourceTrajectory:
    """``int_0^t e^{-kappa(t-s)} e^{(t-s)Delta} n ds``."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if times is not None and times.key() != n.times.key():
        raise ValueError("time grid does not match the source trajectory")
    grid = n.grid
    return _wrap(grid, n.times, duhamel_integrate(grid, n.times, grid.fft(n.values), kappa))
