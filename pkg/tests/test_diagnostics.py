"""Conservation, sign, decay, scaling and suite diagnostics."""

import numpy as np
import pytest

from _helpers import bandlimited
from chemomild.diagnostics import (
    OPERATORS,
    check_l1_contraction,
    check_mass_conservation,
    check_nonnegativity,
    conservation_series,
    decay_weight_series,
    embedding_suite,
    mollification_study,
    operator_constant_suite,
    operator_ratios,
    scaling_covariance_test,
)
from chemomild.duhamel import SourceTrajectory, make_time_grid
from chemomild.norms import make_ball_family
from chemomild.presets import small_data_state
from chemomild.solver import SolutionState, SolverConfig, Trajectory, solve_cns_picard
from chemomild.spectral import ScalarField, VectorField, make_grid

G = make_grid(2, 2 * np.pi, 32)
CFG = SolverConfig(horizon=1.0, n_uniform=16)


def heat_trajectory(n0, c0=None, horizon=1.0, n_uniform=32):
    """Trajectory with ``n`` and ``c`` following the heat flow and ``u = 0``."""
    g = n0.grid
    times = make_time_grid(horizon, n_uniform)
    c0 = c0 if c0 is not None else ScalarField.zeros(g)
    heat = lambda f: SourceTrajectory(  # noqa: E731
        g, times, np.stack([g.ifft(np.exp(-g.k2 * t) * f.hat) for t in times.nodes]))
    u = SourceTrajectory(g, times, np.zeros((len(times), g.dim) + g.shape))
    return Trajectory(g, times, heat(c0), heat(n0), u)


class TestConservation:
    def test_series_columns(self):
        traj = heat_trajectory(bandlimited(G, 1, offset=2.0))
        s = conservation_series(traj)
        assert len(s.rows()) == len(traj.times)
        assert len(s.rows()[0]) == len(s.header)
        assert np.all(s.min_n <= s.max_n)

    def test_heat_flow_conserves_mass(self):
        traj = heat_trajectory(bandlimited(G, 1, offset=2.0))
        _, rep = check_mass_conservation(traj)
        assert rep["pass"]
        assert rep["mass0"] == pytest.approx(2.0 * G.volume, rel=1e-12)

    def test_injected_drift_detected(self):
        traj = heat_trajectory(bandlimited(G, 1, offset=2.0))
        traj.n.values[-1] += 1e-6
        _, rep = check_mass_conservation(traj)
        assert not rep["pass"]

    def test_small_data_run(self):
        traj, trace = solve_cns_picard(small_data_state(G, 1e-2), CFG)
        assert trace.converged
        assert check_mass_conservation(traj)[1]["pass"]
        assert check_nonnegativity(traj)["verdict"]
        assert check_l1_contraction(traj)["verdict"]


class TestSign:
    def test_signed_data_has_no_verdict(self):
        rep = check_nonnegativity(heat_trajectory(bandlimited(G, 2)))
        assert rep["hypothesis_met"] is False and rep["verdict"] is None

    def test_nonnegative_heat_flow(self):
        rep = check_nonnegativity(heat_trajectory(bandlimited(G, 2, amplitude=0.5, offset=1.0)))
        assert rep["hypothesis_met"] and rep["verdict"]

    def test_l1_non_increasing_under_heat(self):
        rep = check_l1_contraction(heat_trajectory(bandlimited(G, 3)))
        assert rep["verdict"]
        assert all(b <= a * (1 + 1e-8) for a, b in zip(rep["l1_series"], rep["l1_series"][1:]))

    def test_l1_growth_detected(self):
        traj = heat_trajectory(bandlimited(G, 3))
        traj.n.values[-1] = 2.0 * traj.n.values[0]
        assert not check_l1_contraction(traj)["verdict"]


class TestDecay:
    def test_zero_data(self):
        rep = decay_weight_series(heat_trajectory(ScalarField.zeros(G)))
        assert all(np.all(np.asarray(s) == 0.0) for s in rep["series"].values())
        assert rep["verdict"]

    def test_single_mode_closed_form(self):
        k = 4
        n0 = ScalarField(G, np.cos(k * G.coordinates[0]))
        traj = heat_trajectory(n0, horizon=1.0, n_uniform=64)
        rep = decay_weight_series(traj)
        t = np.asarray(rep["times"])
        np.testing.assert_allclose(rep["series"]["t_n_inf"], t * np.exp(-k**2 * t), atol=1e-14)
        assert rep["verdict"]
        # the weight peaks at t = 1/k^2 and decays afterwards
        s = np.asarray(rep["series"]["t_n_inf"])
        late = t >= 1.0 / k**2
        assert np.all(np.diff(s[late]) <= 0)

    def test_mean_of_n_is_not_weighted(self):
        rep = decay_weight_series(heat_trajectory(ScalarField.constant(G, 1.0)))
        assert np.all(np.asarray(rep["series"]["t_n_inf"]) == 0.0)

    def test_late_growth_detected(self):
        traj = heat_trajectory(ScalarField(G, np.cos(4 * G.coordinates[0])))
        traj.n.values[-1] += np.cos(G.coordinates[0])
        assert not decay_weight_series(traj)["verdict"]


class TestScaling:
    def test_zero_data_exact(self):
        rep = scaling_covariance_test(SolutionState.zeros(G), CFG)
        assert rep["max_discrepancy"] == 0.0

    def test_heat_flow(self):
        init = SolutionState(bandlimited(G, 1), ScalarField.zeros(G), VectorField.zeros(G))
        rep = scaling_covariance_test(init, CFG)
        assert rep["max_discrepancy"] <= 1e-10

    def test_small_data(self):
        rep = scaling_covariance_test(small_data_state(G, 1e-2), CFG)
        assert rep["base_converged"] and rep["rescaled_converged"]
        assert rep["max_discrepancy"] <= 1e-2

    def test_attractant_system(self):
        init = small_data_state(G, 1e-2, with_v=True)
        rep = scaling_covariance_test(init, SolverConfig(horizon=1.0, n_uniform=16, kappa=1.0))
        assert set(rep["discrepancy"]) == {"c", "n", "u", "v"}
        assert rep["max_discrepancy"] <= 1e-2

    @pytest.mark.parametrize("delta", [1, 2.5])
    def test_incompatible_delta(self, delta):
        with pytest.raises(ValueError):
            scaling_covariance_test(SolutionState.zeros(G), CFG, delta)

    def test_ansatz_not_supported(self):
        cfg = SolverConfig(horizon=1.0, n_uniform=16, d0=ScalarField.zeros(G), delta0=0.1)
        with pytest.raises(ValueError):
            scaling_covariance_test(SolutionState.zeros(G), cfg)


class TestSuites:
    def test_embedding_requires_30_samples(self):
        with pytest.raises(ValueError):
            embedding_suite(10)

    def test_embedding_small_2d(self):
        rep = embedding_suite(30, 0, dim=2, resolutions=(16, 32))
        assert rep["finite"]
        assert set(rep["cross_resolution_spread"]) == {
            "besov_morrey_to_critical", "critical_to_besov_inf", "besov_morrey_to_bmo_minus1"}
        assert all(v >= 1.0 for v in rep["cross_resolution_spread"].values())

    def test_operator_ratios_positive(self):
        times = make_time_grid(1.0, 8)
        r = operator_ratios(G, 0, times, make_ball_family(G))
        assert set(r) == set(OPERATORS)
        assert all(np.isfinite(v) and v > 0 for v in r.values())

    def test_operator_ratios_deterministic(self):
        times = make_time_grid(1.0, 8)
        balls = make_ball_family(G)
        assert operator_ratios(G, 3, times, balls) == operator_ratios(G, 3, times, balls)

    def test_operator_suite_requires_30_samples(self):
        with pytest.raises(ValueError):
            operator_constant_suite(5)

    def test_operator_suite_structure(self):
        rep = operator_constant_suite(30, 0, resolutions=(16, 32), n_uniform=8)
        assert rep["finite"]
        assert set(rep["constants"]) == {16, 32}
        assert set(rep["resolution_spread"]) == set(OPERATORS)


class TestMollification:
    def test_drift_shrinks_with_eps(self):
        rep = mollification_study(small_data_state(G, 1e-2), CFG, eps=(0.02, 0.01, 0.005))
        assert all(r["converged"] for r in rep["rows"])
        assert rep["decreasing"]
