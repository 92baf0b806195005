"""Periodic grids, spectral field algebra and exact semigroup propagators.

All transforms use ``scipy.fft.rfftn`` over the trailing ``dim`` axes with the
default normalisation, so ``irfftn(rfftn(f)) == f`` up to roundoff.  Odd-order
derivative symbols drop the Nyquist wavenumber; even-order symbols (Laplacian,
heat multipliers) keep it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
import scipy.fft

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "PropagatorSpec",
    "make_grid",
    "gradient",
    "divergence",
    "laplacian",
    "leray_project",
    "riesz_transform",
    "propagate",
    "oseen_propagate",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the box ``[0, L)^dim`` with ``M`` points per axis."""

    dim: int
    box_length: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        M = self.points_per_axis
        if M % 2:
            raise ValueError(f"odd resolution M={M}; points_per_axis must be even")
        if M < 8:
            raise ValueError(f"resolution M={M} too small; need M >= 8")

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def n_points(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return self.box_length**self.dim

    @property
    def axes(self) -> tuple:
        """Trailing axes holding the spatial dimensions (negative indices)."""
        return tuple(range(-self.dim, 0))

    @cached_property
    def spectral_shape(self) -> tuple:
        M = self.points_per_axis
        return (M,) * (self.dim - 1) + (M // 2 + 1,)

    @cached_property
    def mode_indices(self) -> np.ndarray:
        """Integer mode numbers ``m`` of shape ``(dim, *spectral_shape)``."""
        M = self.points_per_axis
        full = np.fft.fftfreq(M, d=1.0 / M)
        half = np.arange(M // 2 + 1, dtype=float)
        axes = [full] * (self.dim - 1) + [half]
        return np.array(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def wavevector(self) -> np.ndarray:
        """Wavevectors ``2*pi*m/L``; the Nyquist entry carries ``-pi*M/L``."""
        k = self.mode_indices * (2.0 * np.pi / self.box_length)
        # rfft stores the last-axis Nyquist as +M/2; the lattice convention is [-M/2, M/2)
        M = self.points_per_axis
        k[-1][..., M // 2] *= -1.0
        return k

    @cached_property
    def wavevector_odd(self) -> np.ndarray:
        """Wavevectors with Nyquist components zeroed, for odd-order derivatives."""
        M = self.points_per_axis
        k = self.wavevector.copy()
        nyq = np.abs(self.mode_indices) == M // 2
        k[nyq] = 0.0
        return k

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.wavevector**2, axis=0)

    @cached_property
    def k2_safe(self) -> np.ndarray:
        k2 = self.k2.copy()
        k2.flat[0] = 1.0
        return k2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep modes with ``|m_j| <= M/3`` on every axis."""
        cutoff = self.points_per_axis / 3.0
        return np.all(np.abs(self.mode_indices) <= cutoff, axis=0)

    @cached_property
    def coordinates(self) -> np.ndarray:
        """Grid point coordinates, shape ``(dim, *shape)``."""
        x = np.arange(self.points_per_axis) * self.spacing
        return np.array(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def fft(self, values: np.ndarray) -> np.ndarray:
        return scipy.fft.rfftn(values, axes=self.axes)

    def ifft(self, hat: np.ndarray) -> np.ndarray:
        return scipy.fft.irfftn(hat, s=self.shape, axes=self.axes)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Grid quadrature over the spatial axes (exact for band-limited data)."""
        return np.sum(values, axis=self.axes) * self.cell_volume


def make_grid(dim: int, box_length: float, points_per_axis: int) -> Grid:
    return Grid(int(dim), float(box_length), int(points_per_axis))


class _Field:
    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=float)
        expected = self._expected_shape(grid)
        if values.shape != expected:
            raise ValueError(f"field shape {values.shape} does not match {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def _expected_shape(self, grid: Grid) -> tuple:
        raise NotImplementedError

    @cached_property
    def hat(self) -> np.ndarray:
        h = self.grid.fft(self.values)
        h.setflags(write=False)
        return h

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray):
        return cls(grid, grid.ifft(hat))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __add__(self, other):
        return type(self)(self.grid, self.values + _values(other))

    def __sub__(self, other):
        return type(self)(self.grid, self.values - _values(other))

    def __mul__(self, scalar: float):
        return type(self)(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(self.grid, -self.values)

    def __repr__(self):
        return f"{type(self).__name__}(grid={self.grid}, sup={self.sup():.3e})"


def _values(x):
    return x.values if isinstance(x, _Field) else x


class ScalarField(_Field):
    """Real scalar field sampled on a :class:`Grid`."""

    def _expected_shape(self, grid):
        return grid.shape

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def total(self) -> float:
        return float(self.grid.integrate(self.values))


class VectorField(_Field):
    """Real vector field with ``dim`` components, values shape ``(dim, *shape)``."""

    def _expected_shape(self, grid):
        return (grid.dim,) + grid.shape

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    def component(self, j: int) -> ScalarField:
        return ScalarField(self.grid, self.values[j])


Field = Union[ScalarField, VectorField]


# ---------------------------------------------------------------------------
# array-level operators on spectral coefficients (shared with the Duhamel layer)


def grad_hat(grid: Grid, fhat: np.ndarray) -> np.ndarray:
    """``i k_j fhat``; a new leading axis of length ``dim`` is inserted before the spatial axes."""
    return 1j * grid.wavevector_odd * np.expand_dims(fhat, axis=fhat.ndim - grid.dim)


def div_hat(grid: Grid, vhat: np.ndarray) -> np.ndarray:
    """``sum_j i k_j vhat_j`` over the component axis just before the spatial axes."""
    return np.sum(1j * grid.wavevector_odd * vhat, axis=vhat.ndim - grid.dim - 1)


def leray_hat(grid: Grid, vhat: np.ndarray) -> np.ndarray:
    """``vhat - k (k . vhat)/|k|^2``, zero mode passed through."""
    k = grid.wavevector_odd
    caxis = vhat.ndim - grid.dim - 1
    kk = np.sum(k**2, axis=0)
    kk_safe = np.where(kk > 0, kk, 1.0)
    proj = np.sum(k * vhat, axis=caxis, keepdims=True) / kk_safe
    return vhat - k * proj


def heat_multiplier(grid: Grid, t: float, kappa: float = 0.0) -> np.ndarray:
    return np.exp(-(grid.k2 + kappa) * t)


# ---------------------------------------------------------------------------
# field-level operations


def gradient(f: ScalarField) -> VectorField:
    return VectorField(f.grid, f.grid.ifft(grad_hat(f.grid, f.hat)))


def divergence(v: VectorField) -> ScalarField:
    return ScalarField(v.grid, v.grid.ifft(div_hat(v.grid, v.hat)))


def laplacian(f: Field) -> Field:
    return type(f).from_hat(f.grid, -f.grid.k2 * f.hat)


def leray_project(v: VectorField) -> VectorField:
    return VectorField(v.grid, v.grid.ifft(leray_hat(v.grid, v.hat)))


def riesz_transform(f: ScalarField, j: int) -> ScalarField:
    """``R_j = d_j (-Delta)^{-1/2}`` with the zero mode mapped to 0."""
    g = f.grid
    if not 0 <= j < g.dim:
        raise ValueError(f"component {j} out of range for dim {g.dim}")
    kabs = np.sqrt(g.k2_safe)
    mult = 1j * g.wavevector_odd[j] / kabs
    mult.flat[0] = 0.0
    return ScalarField.from_hat(g, mult * f.hat)


_PROPAGATOR_KINDS = ("heat", "damped_heat", "heat_gradient", "oseen", "oseen_gradient")


@dataclass(frozen=True)
class PropagatorSpec:
    """Fourier-multiplier description of a heat-type kernel.

    ``heat``: ``exp(-|k|^2 t)``; ``damped_heat``: ``exp(-kappa t) exp(-|k|^2 t)``;
    ``heat_gradient``: ``i k_j exp(-|k|^2 t)`` (scalar to scalar, component ``j``);
    ``oseen``: Leray projector times heat (vector to vector);
    ``oseen_gradient``: ``d_j`` of the Oseen propagator (vector to vector).
    """

    kind: str = "heat"
    kappa: float = 0.0
    component: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _PROPAGATOR_KINDS:
            raise ValueError(f"unknown propagator kind {self.kind!r}")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.kind in ("heat_gradient", "oseen_gradient") and self.component is None:
            raise ValueError(f"{self.kind} needs a component index")

    def multiplier(self, grid: Grid, t: float) -> np.ndarray:
        """Scalar symbol on the spectral lattice (the Leray factor is applied separately)."""
        if t < 0:
            raise ValueError(f"negative time t={t}")
        kappa = self.kappa if self.kind == "damped_heat" else 0.0
        m = heat_multiplier(grid, t, kappa)
        if self.kind in ("heat_gradient", "oseen_gradient"):
            m = 1j * grid.wavevector_odd[self.component] * m
        return m


def propagate(f: Field, spec: PropagatorSpec, t: float) -> Field:
    if t < 0:
        raise ValueError(f"negative time t={t}")
    g = f.grid
    hat = spec.multiplier(g, t) * f.hat
    if spec.kind in ("oseen", "oseen_gradient"):
        if not isinstance(f, VectorField):
            raise TypeError("Oseen propagators act on vector fields")
        hat = leray_hat(g, hat)
    return type(f).from_hat(g, hat)


def oseen_propagate(v: VectorField, t: float) -> VectorField:
    return propagate(v, PropagatorSpec("oseen"), t)
