"""Independent time stepper for the differential form of the systems.

Fourth-order exponential time differencing (ETDRK4) with phi-function
coefficients from a complex contour average, so the stiff linear part
``Delta`` (``Delta - kappa`` for the attractant) is integrated exactly.  This
shares the grid and product rules with the Picard solver but none of the
Duhamel quadrature, and serves as an oracle for it.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional

import numpy as np

from .duhamel import TimeGrid, advection_div_hat, dot_hat, product_hat, scalar_vector_hat
from .spectral import Grid, VectorField, div_hat, grad_hat, leray_hat

__all__ = ["etdrk4_coefficients", "reference_solve"]


def etdrk4_coefficients(lin: np.ndarray, h: float, n_contour: int = 32):
    """``(E, E2, Q, f1, f2, f3)`` for the diagonal linear operator ``lin`` and step ``h``."""
    L = h * lin
    r = np.exp(1j * np.pi * (np.arange(1, n_contour + 1) - 0.5) / n_contour)
    LR = L[..., None] + r
    Q = h * np.real(np.mean((np.exp(LR / 2) - 1) / LR, axis=-1))
    e = np.exp(LR)
    f1 = h * np.real(np.mean((-4 - LR + e * (4 - 3 * LR + LR**2)) / LR**3, axis=-1))
    f2 = h * np.real(np.mean((2 + LR + e * (LR - 2)) / LR**3, axis=-1))
    f3 = h * np.real(np.mean((-4 - 3 * LR - LR**2 + e * (4 - LR)) / LR**3, axis=-1))
    return np.exp(L), np.exp(L / 2), Q, f1, f2, f3


@lru_cache(maxsize=32)
def _coeffs(grid: Grid, kappa: float, h: float):
    return etdrk4_coefficients(-(grid.k2 + kappa), h)


def _rhs(grid: Grid, state: dict, forcing: Optional[np.ndarray], with_v: bool) -> dict:
    g = grid
    c, n, u = g.ifft(state["c"]), g.ifft(state["n"]), g.ifft(state["u"])
    grad_c = g.ifft(grad_hat(g, state["c"]))
    drift = grad_c + u
    out = {"c": -(product_hat(g, c, n) + dot_hat(g, u, grad_c))}
    if with_v:
        grad_v = g.ifft(grad_hat(g, state["v"]))
        drift = drift + grad_v
        out["v"] = state["n"] - dot_hat(g, u, grad_v)
    out["n"] = -div_hat(g, scalar_vector_hat(g, n, drift))
    src_u = advection_div_hat(g, u, u)
    if forcing is not None:
        src_u = src_u + scalar_vector_hat(g, n, forcing)
    out["u"] = -leray_hat(g, src_u)
    return out


def _step(grid: Grid, state: dict, h: float, kappa: float, forcing, with_v: bool) -> dict:
    co = {k: _coeffs(grid, kappa if k == "v" else 0.0, h) for k in state}

    def lin(k, i):
        c = co[k][i]
        return c if state[k].ndim == c.ndim else c[None]

    Nu = _rhs(grid, state, forcing, with_v)
    a = {k: lin(k, 1) * state[k] + lin(k, 2) * Nu[k] for k in state}
    Na = _rhs(grid, a, forcing, with_v)
    b = {k: lin(k, 1) * state[k] + lin(k, 2) * Na[k] for k in state}
    Nb = _rhs(grid, b, forcing, with_v)
    cc = {k: lin(k, 1) * a[k] + lin(k, 2) * (2 * Nb[k] - Nu[k]) for k in state}
    Nc = _rhs(grid, cc, forcing, with_v)
    return {k: lin(k, 0) * state[k] + lin(k, 3) * Nu[k] + 2 * lin(k, 4) * (Na[k] + Nb[k]) + lin(k, 5) * Nc[k]
            for k in state}


def reference_solve(init, times: TimeGrid, forcing: Optional[VectorField] = None, kappa: float = 0.0,
                    max_step: float = 2e-3) -> dict:
    """Integrate from ``init`` (a SolutionState) and sample at ``times``.

    Each panel of ``times`` is split into equal substeps no longer than ``max_step``.
    Returns a dict of node-value arrays keyed ``c``, ``n``, ``u`` (and ``v``).
    """
    g = init.grid
    with_v = init.v is not None
    state = {"c": g.fft(init.c.values), "n": g.fft(init.n.values), "u": g.fft(init.u.values)}
    if with_v:
        state["v"] = g.fft(init.v.values)
    fvals = None if forcing is None else forcing.values
    out = {k: [g.ifft(v)] for k, v in state.items()}
    for H in times.steps:
        m = max(1, int(math.ceil(H / max_step)))
        h = float(H / m)
        for _ in range(m):
            state = _step(g, state, h, kappa, fvals, with_v)
        for k, v in state.items():
            out[k].append(g.ifft(v))
    return {k: np.stack(v) for k, v in out.items()}
