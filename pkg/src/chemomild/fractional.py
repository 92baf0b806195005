"""The one-dimensional fractional integral ``E`` and the Hardy-Littlewood maximal function.

    E(h)(s) = int_0^s (s - sigma)^{alpha - 1} sigma^{-beta} h(sigma) d sigma

``h`` is sampled on nodes ``0 = sigma_0 < ... < sigma_K`` and interpolated linearly.
On each panel the substitution ``sigma = s x`` turns both endpoint singularities
into incomplete beta functions, so the quadrature is exact for piecewise-linear h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc, betaincc

__all__ = ["FracIntegralParams", "fractional_integral_E", "maximal_function_1d"]


@dataclass(frozen=True)
class FracIntegralParams:
    alpha: float
    beta: float
    p: float = 2.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not self.p > 1:
            raise ValueError("p must exceed 1")

    def bounded_range(self) -> bool:
        """Whether ``-1/p < alpha - beta < 1/p'`` holds."""
        d = self.alpha - self.beta
        return -1 / self.p < d < 1 - 1 / self.p


def _beta_segment(a: float, b: float, x0: np.ndarray, x1: np.ndarray) -> np.ndarray:
    """``int_{x0}^{x1} x^{a-1} (1-x)^{b-1} dx`` without cancellation near either end."""
    lower = betainc(a, b, x1) - betainc(a, b, x0)
    upper = betaincc(a, b, x0) - betaincc(a, b, x1)
    return beta_fn(a, b) * np.where(x0 > 0.5, upper, lower)


def fractional_integral_E(nodes, h, alpha: float, beta: float) -> np.ndarray:
    """``E(h)`` at every node (``E(h)(0) = 0``); ``h`` must be finite and nonnegative."""
    FracIntegralParams(alpha, beta)
    s = np.asarray(nodes, dtype=float)
    h = np.asarray(h, dtype=float)
    if s.ndim != 1 or s.shape != h.shape or s.size < 2:
        raise ValueError("nodes and h must be matching 1-d arrays with at least two samples")
    if s[0] != 0.0 or np.any(np.diff(s) <= 0):
        raise ValueError("nodes must start at 0 and increase strictly")
    if not np.all(np.isfinite(h)):
        raise ValueError("h must be finite")
    if np.any(h < 0):
        raise ValueError("h must be nonnegative")
    # h = A_i + B_i sigma on panel i
    slope = np.diff(h) / np.diff(s)
    icpt = h[:-1] - slope * s[:-1]
    out = np.zeros_like(s)
    for k in range(1, s.size):
        x0 = s[:k] / s[k]
        x1 = s[1:k + 1] / s[k]
        j0 = _beta_segment(1.0 - beta, alpha, x0, x1)
        j1 = _beta_segment(2.0 - beta, alpha, x0, x1)
        out[k] = s[k] ** (alpha - beta) * np.sum(icpt[:k] * j0 + slope[:k] * s[k] * j1)
    return out


def maximal_function_1d(nodes, h) -> np.ndarray:
    """Uncentred maximal function of the linear interpolant of ``|h|``, at every node.

    Scans every window ``[sigma_i, sigma_j]`` containing the node; the singleton
    window contributes ``|h|`` itself.
    """
    s = np.asarray(nodes, dtype=float)
    a = np.abs(np.asarray(h, dtype=float))
    if s.ndim != 1 or s.shape != a.shape or s.size < 1:
        raise ValueError("nodes and h must be matching non-empty 1-d arrays")
    if np.any(np.diff(s) <= 0):
        raise ValueError("nodes must increase strictly")
    if not np.all(np.isfinite(a)):
        raise ValueError("h must be finite")
    n = s.size
    if n == 1:
        return a.copy()
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (a[1:] + a[:-1]) * np.diff(s))])
    i, j = np.triu_indices(n, k=1)
    avg = np.full((n, n), -np.inf)
    avg[i, j] = (cum[j] - cum[i]) / (s[j] - s[i])
    # best[i, k] = max over windows starting at i and ending at or after k
    best = np.maximum.accumulate(avg[:, ::-1], axis=1)[:, ::-1]
    best[np.tril_indices(n, k=-1)] = -np.inf  # drop windows starting after k
    return np.maximum(best.max(axis=0), a)
