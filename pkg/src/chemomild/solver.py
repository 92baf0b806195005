"""Picard iteration for the mild (Duhamel) form of the chemotaxis-fluid systems.

CNS map, applied simultaneously to all components (Jacobi style):

    c <- e^{t Delta} c0 - B1(c, n) - B1(u, grad c)
    n <- e^{t Delta} n0 - B2(n, grad c + u)
    u <- e^{t Delta} u0 - B3(u, u) - L_Phi(n)

The decaying-attractant system adds ``v`` through ``w = v - e^{-kappa t} e^{t Delta} v0``:

    n <- ... - B2(n, grad v)
    w <- L_kappa(n) - B4(u, w + e^{-kappa t} e^{t Delta} v0)

with the fluid forcing ``n Psi`` in place of ``n grad Phi``.  Both systems share one
engine; with ``couple_v=False`` the ``v`` equation is frozen at ``w = 0`` and the
engine performs exactly the CNS arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .duhamel import (
    SourceTrajectory,
    TimeGrid,
    advection_div_hat,
    dot_hat,
    duhamel_integrate,
    make_time_grid,
    product_hat,
    scalar_vector_hat,
)
from .norms import (
    BallFamily,
    bmo_caloric_seminorm,
    carleson_caloric_norm,
    make_ball_family,
    morrey_norm,
    path_norm_terms,
)
from .spectral import (
    Grid,
    PropagatorSpec,
    ScalarField,
    VectorField,
    div_hat,
    divergence,
    grad_hat,
    leray_hat,
    propagate,
)

__all__ = [
    "SolutionState",
    "SolverConfig",
    "PicardTrace",
    "Trajectory",
    "solve_cns_picard",
    "solve_dcns_picard",
    "uc_ansatz_prepare",
    "smallness_report",
    "uniqueness_probe",
    "fixed_point_residual",
    "besov_dot_minus1_22",
]

DIV_TOL = 1e-10


@dataclass(frozen=True)
class SolutionState:
    c: ScalarField
    n: ScalarField
    u: VectorField
    v: Optional[ScalarField] = None

    def __post_init__(self):
        g = self.c.grid
        others = [self.n, self.u] + ([self.v] if self.v is not None else [])
        if any(f.grid != g for f in others):
            raise ValueError("state components live on different grids")

    @property
    def grid(self) -> Grid:
        return self.c.grid

    def divergence_error(self) -> float:
        return divergence(self.u).sup()

    def check_divergence_free(self, tol: float = DIV_TOL):
        err = self.divergence_error()
        if err > tol * max(1.0, self.u.sup()):
            raise ValueError(f"u0 is not divergence-free (sup |div u0| = {err:.3e})")

    def scaled(self, factor: float) -> "SolutionState":
        return SolutionState(self.c * factor, self.n * factor, self.u * factor,
                             None if self.v is None else self.v * factor)

    @classmethod
    def zeros(cls, grid: Grid, with_v: bool = False) -> "SolutionState":
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid), VectorField.zeros(grid),
                   ScalarField.zeros(grid) if with_v else None)


@dataclass
class SolverConfig:
    """Physical parameters, discretisation and Picard controls.

    ``forcing`` is ``grad Phi`` for CNS and ``Psi`` for the attractant system.
    ``metric`` selects the convergence norm: ``"path"`` (discrete X_T / Z_T) or ``"sup"``.
    """

    horizon: float = 1.0
    n_uniform: int = 32
    refine_start: bool = True
    times: Optional[TimeGrid] = None
    kappa: float = 0.0
    forcing: Optional[VectorField] = None
    d0: Optional[ScalarField] = None
    delta0: Optional[float] = None
    picard_tol: float = 1e-12
    picard_max_iter: int = 60
    divergence_cap: float = 1e8
    epsilon: float = 0.1
    metric: str = "path"
    center_stride: int = 1

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be at least 1")
        if self.metric not in ("path", "sup"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if (self.d0 is None) != (self.delta0 is None):
            raise ValueError("d0 and delta0 must be given together")
        if self.delta0 is not None and not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if self.times is not None and abs(self.times.horizon - self.horizon) > 1e-12 * self.horizon:
            raise ValueError("explicit time grid does not end at the horizon")

    def time_grid(self) -> TimeGrid:
        if self.times is not None:
            return self.times
        return make_time_grid(self.horizon, self.n_uniform, self.refine_start)


@dataclass
class PicardTrace:
    diffs: List[float] = field(default_factory=list)
    converged: bool = False
    status: str = "running"
    metric: str = "path"

    @property
    def ratios(self) -> List[float]:
        d = self.diffs
        return [d[i + 1] / d[i] if d[i] > 0 else 0.0 for i in range(len(d) - 1)]

    @property
    def iterations(self) -> int:
        return len(self.diffs)

    def rows(self):
        ratios = [math.nan] + self.ratios
        return [(i + 1, d, r) for i, (d, r) in enumerate(zip(self.diffs, ratios))]

    def summary(self) -> dict:
        return {"iterations": self.iterations, "converged": self.converged, "status": self.status,
                "metric": self.metric, "final_diff": self.diffs[-1] if self.diffs else None,
                "ratios": self.ratios}


@dataclass
class Trajectory:
    grid: Grid
    times: TimeGrid
    c: SourceTrajectory
    n: SourceTrajectory
    u: SourceTrajectory
    v: Optional[SourceTrajectory] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def components(self) -> Dict[str, SourceTrajectory]:
        out = {"c": self.c, "n": self.n, "u": self.u}
        if self.v is not None:
            out["v"] = self.v
        return out

    def state(self, k: int) -> SolutionState:
        return SolutionState(ScalarField(self.grid, self.c.values[k]), ScalarField(self.grid, self.n.values[k]),
                             VectorField(self.grid, self.u.values[k]),
                             None if self.v is None else ScalarField(self.grid, self.v.values[k]))

    def sup_distance(self, other: "Trajectory") -> float:
        a, b = self.components(), other.components()
        if a.keys() != b.keys():
            raise ValueError("trajectories carry different components")
        return max(float(np.max(np.abs(a[k].values - b[k].values))) for k in a)


# ---------------------------------------------------------------------------
# ansatz and data checks


def uc_ansatz_prepare(c0: ScalarField, d0: ScalarField, delta0: float):
    """``Gamma = e^{delta0^2 Delta} d0`` and ``cbar0 = c0 - Gamma`` plus the smallness quantities."""
    if not delta0 > 0:
        raise ValueError("delta0 must be positive")
    if d0.grid != c0.grid:
        raise ValueError("d0 and c0 live on different grids")
    g = c0.grid
    gamma = propagate(d0, PropagatorSpec("heat"), delta0**2)
    grad = g.ifft(grad_hat(g, gamma.hat))
    hess = g.ifft(grad_hat(g, grad_hat(g, gamma.hat)))
    info = {
        "gamma_minus_d0": (gamma - d0).sup(),
        "delta0_grad": delta0 * float(np.max(np.sqrt(np.sum(grad**2, axis=0)))),
        "delta0sq_hessian": delta0**2 * float(np.max(np.abs(hess))),
    }
    return gamma, c0 - gamma, info


def _check_init(init: SolutionState, cfg: SolverConfig, with_v: bool):
    init.check_divergence_free()
    g = init.grid
    if cfg.forcing is not None and cfg.forcing.grid != g:
        raise ValueError("forcing lives on a different grid")
    if cfg.d0 is not None and cfg.d0.grid != g:
        raise ValueError("d0 lives on a different grid")
    if with_v and init.v is None:
        raise ValueError("the attractant system needs v0")


# ---------------------------------------------------------------------------
# the Picard engine


def _heat_traj(grid: Grid, times: TimeGrid, hat: np.ndarray, kappa: float = 0.0) -> np.ndarray:
    t = times.nodes.reshape((-1,) + (1,) * hat.ndim)
    return grid.ifft(np.exp(-(grid.k2 + kappa) * t) * hat)


class _Engine:
    def __init__(self, init: SolutionState, cfg: SolverConfig, couple_v: bool):
        self.grid = g = init.grid
        self.cfg = cfg
        self.times = cfg.time_grid()
        self.couple_v = couple_v
        self.kappa = cfg.kappa
        c0 = init.c
        self.gamma = None
        if cfg.d0 is not None:
            self.gamma, c0, self.uc_info = uc_ansatz_prepare(init.c, cfg.d0, cfg.delta0)
        self.lin_c = _heat_traj(g, self.times, c0.hat)
        if self.gamma is not None:
            # int_0^t e^{(t-s)Delta} Delta Gamma ds = e^{t Delta} Gamma - Gamma
            self.lin_c = self.lin_c + _heat_traj(g, self.times, self.gamma.hat) - self.gamma.values
        self.lin_n = _heat_traj(g, self.times, init.n.hat)
        self.lin_u = _heat_traj(g, self.times, init.u.hat)
        self.v_tilde = None
        if couple_v:
            self.v_tilde = _heat_traj(g, self.times, init.v.hat, self.kappa)
        self.forcing = None if cfg.forcing is None else cfg.forcing.values
        self.balls = make_ball_family(g, cfg.center_stride) if cfg.metric == "path" else None

    def linear(self) -> dict:
        U = {"c": self.lin_c, "n": self.lin_n, "u": self.lin_u}
        if self.couple_v:
            U["w"] = np.zeros_like(self.lin_n)
        return U

    def zero(self) -> dict:
        return {k: np.zeros_like(v) for k, v in self.linear().items()}

    def full_c(self, cbar: np.ndarray) -> np.ndarray:
        return cbar if self.gamma is None else cbar + self.gamma.values

    def apply(self, U: dict) -> dict:
        g, T = self.grid, self.times
        c, n, u = self.full_c(U["c"]), U["n"], U["u"]
        grad_c = g.ifft(grad_hat(g, g.fft(c)))
        src_c = product_hat(g, c, n) + dot_hat(g, u, grad_c)
        new_c = self.lin_c - g.ifft(duhamel_integrate(g, T, src_c))
        drift = grad_c + u
        if self.couple_v:
            v = U["w"] + self.v_tilde
            grad_v = g.ifft(grad_hat(g, g.fft(v)))
            drift = drift + grad_v
        new_n = self.lin_n - g.ifft(duhamel_integrate(g, T, div_hat(g, scalar_vector_hat(g, n, drift))))
        src_u = advection_div_hat(g, u, u)
        if self.forcing is not None:
            src_u = src_u + scalar_vector_hat(g, n, self.forcing)
        new_u = self.lin_u - g.ifft(duhamel_integrate(g, T, leray_hat(g, src_u)))
        out = {"c": new_c, "n": new_n, "u": new_u}
        if self.couple_v:
            src_w = g.fft(n) - dot_hat(g, u, grad_v)
            out["w"] = g.ifft(duhamel_integrate(g, T, src_w, self.kappa))
        return out

    def distance(self, A: dict, B: dict) -> float:
        if self.cfg.metric == "sup":
            return max(float(np.max(np.abs(A[k] - B[k]))) for k in A)
        g, T = self.grid, self.times
        total = 0.0
        kinds = {"c": "X1", "n": "X2", "u": "X3", "w": "X1"}
        for k in A:
            diff = SourceTrajectory(g, T, A[k] - B[k])
            total += path_norm_terms(diff, kinds[k], self.balls)["total"]
        return total

    def trajectory(self, U: dict, system: str, trace: "PicardTrace") -> Trajectory:
        g, T = self.grid, self.times
        traj = Trajectory(g, T, SourceTrajectory(g, T, self.full_c(U["c"])),
                          SourceTrajectory(g, T, U["n"]), SourceTrajectory(g, T, U["u"]))
        if self.couple_v:
            traj.v = SourceTrajectory(g, T, U["w"] + self.v_tilde)
        traj.meta = {"system": system, "kappa": self.kappa, "couple_v": self.couple_v,
                     "picard": trace.summary()}
        if self.gamma is not None:
            traj.meta["uc_ansatz"] = dict(self.uc_info, delta0=self.cfg.delta0)
        return traj


def _iterate(engine: _Engine, guess, system: str):
    cfg = engine.cfg
    if guess is None or guess == "caloric":
        U = engine.linear()
    elif guess == "zero":
        U = engine.zero()
    elif isinstance(guess, dict):
        U = {k: np.asarray(v, dtype=float) for k, v in guess.items()}
        if set(U) != set(engine.linear()):
            raise ValueError("initial guess has the wrong components")
    else:
        raise ValueError(f"unknown initial guess {guess!r}")
    trace = PicardTrace(metric=cfg.metric)
    for _ in range(cfg.picard_max_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            new = engine.apply(U)
        if not all(np.all(np.isfinite(v)) for v in new.values()):
            trace.status = "diverged"
            break
        d = engine.distance(new, U)
        trace.diffs.append(d)
        U = new
        if d <= cfg.picard_tol:
            trace.converged, trace.status = True, "converged"
            break
        if d > cfg.divergence_cap:
            trace.status = "diverged"
            break
    else:
        trace.status = "max_iter"
    return engine.trajectory(U, system, trace), trace, U


def solve_cns_picard(init: SolutionState, cfg: SolverConfig, guess=None):
    """Picard solution of the CNS mild system; returns ``(Trajectory, PicardTrace)``.

    ``guess`` is ``"caloric"`` (default), ``"zero"`` or a dict of node arrays.
    Non-convergence is reported through ``PicardTrace.status``.
    """
    _check_init(init, cfg, with_v=False)
    traj, trace, _ = _iterate(_Engine(init, cfg, couple_v=False), guess, "cns")
    return traj, trace


def solve_dcns_picard(init: SolutionState, cfg: SolverConfig, couple_v: bool = True, guess=None):
    """Picard solution of the attractant system with damping ``cfg.kappa``.

    With ``couple_v=False`` the attractant is dropped from the iteration and the
    run is arithmetically identical to :func:`solve_cns_picard` (``v`` is then
    reported as its damped caloric extension).
    """
    _check_init(init, cfg, with_v=couple_v)
    engine = _Engine(init, cfg, couple_v=couple_v)
    traj, trace, _ = _iterate(engine, guess, "dcns")
    if not couple_v and init.v is not None:
        g, T = engine.grid, engine.times
        traj.v = SourceTrajectory(g, T, _heat_traj(g, T, init.v.hat, cfg.kappa))
    return traj, trace


def fixed_point_residual(traj: Trajectory, init: SolutionState, cfg: SolverConfig) -> float:
    """Distance (in the configured metric) between a trajectory and its Picard image."""
    couple_v = traj.v is not None and traj.meta.get("couple_v", True)
    engine = _Engine(init, SolverConfig(**{**cfg.__dict__, "times": traj.times}), couple_v)
    cbar = traj.c.values if engine.gamma is None else traj.c.values - engine.gamma.values
    U = {"c": cbar, "n": traj.n.values, "u": traj.u.values}
    if couple_v:
        U["w"] = traj.v.values - engine.v_tilde
    return engine.distance(engine.apply(U), U)


# ---------------------------------------------------------------------------
# smallness and uniqueness


def besov_dot_minus1_22(f: ScalarField) -> float:
    """``(int_0^inf ||e^{t Delta} f||_2^2 dt)^{1/2} = (sum_{k != 0} |f_k|^2 / (2|k|^2))^{1/2}``.

    The mean (zero mode) is excluded.
    """
    g = f.grid
    hat = np.array(f.hat) / (2.0 * g.k2_safe)
    hat.flat[0] = 0.0
    return math.sqrt(max(float(g.integrate(f.values * g.ifft(hat))), 0.0))


def smallness_report(init: SolutionState, cfg: SolverConfig, balls: Optional[BallFamily] = None) -> dict:
    """Data size in the critical norms, summed and compared with ``cfg.epsilon``."""
    g = init.grid
    balls = balls or make_ball_family(g, cfg.center_stride)
    terms = {"c0_linf": init.c.sup()}
    if g.dim == 2:
        terms["n0_besov_-1_22"] = besov_dot_minus1_22(init.n)
    else:
        terms["n0_carleson"] = carleson_caloric_norm(init.n, 2.0, balls)
    terms["u0_bmo_minus1"] = carleson_caloric_norm(init.u, 0.0, balls)
    if init.v is not None:
        terms["v0_bmo"] = bmo_caloric_seminorm(init.v, balls)
    terms["forcing_morrey"] = 0.0 if cfg.forcing is None else morrey_norm(cfg.forcing, 2.0, g.dim - 2.0, balls)
    total = 0.0
    for v in terms.values():
        total += v
    return {"terms": terms, "total": total, "epsilon": cfg.epsilon, "below_epsilon": total < cfg.epsilon,
            "balls": balls.describe()}


def uniqueness_probe(init: SolutionState, cfg: SolverConfig, guess_a="caloric", guess_b="zero",
                     t_fractions=(1.0, 0.5, 0.25, 0.125)) -> dict:
    """Run Picard from two starting guesses and compare the limits.

    Also evaluates the X_{T'} norm of the limit on a shrinking ``T'`` sequence.
    """
    system = "dcns" if init.v is not None else "cns"
    solve = (lambda g: solve_dcns_picard(init, cfg, guess=g)) if system == "dcns" else \
        (lambda g: solve_cns_picard(init, cfg, guess=g))
    ta, tra = solve(guess_a)
    tb, trb = solve(guess_b)
    report = {"system": system, "trace_a": tra.summary(), "trace_b": trb.summary(),
              "both_converged": tra.converged and trb.converged}
    report["distance"] = ta.sup_distance(tb) if report["both_converged"] else None
    balls = make_ball_family(init.grid, cfg.center_stride)
    horizon = ta.times.horizon
    series = []
    for frac in t_fractions:
        Tp = frac * horizon
        nodes = ta.times.nodes
        Tp = float(nodes[nodes <= Tp * (1 + 1e-12)][-1])
        if Tp <= 0:
            continue
        row = {"T": Tp}
        for name, kind in (("c", "X1"), ("n", "X2"), ("u", "X3")):
            row[name] = path_norm_terms(getattr(ta, name), kind, balls, Tp)["total"]
        row["total"] = row["c"] + row["n"] + row["u"]
        series.append(row)
    report["small_time_norms"] = series
    totals = [r["total"] for r in series]
    report["decreasing_as_T_shrinks"] = all(b <= a * (1 + 1e-12) for a, b in zip(totals, totals[1:]))
    return report
