import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from turing_rd.errors import ConfigError, GridMismatch, GridTooSmall, NonFiniteState, StepRejected
from turing_rd.kinetics import KineticParams
from turing_rd.solver import (
    GridState,
    SolverConfig,
    advance,
    apply_boundary,
    max_timestep,
    norms,
    read_profile,
    run,
    step,
    write_profile,
    write_run,
)
from turing_rd.turing import DiffusionParams

# independent node-by-node evaluation of the update formulas (plain Python)
STEP_ORACLE_N = [0.16669919444444448, 0.20002133333333336, 0.29998775, 0.20002133333333336, 0.16669919444444448]
STEP_ORACLE_P = [0.3667360396825397, 0.4000699047619048, 0.5000715, 0.4000699047619048, 0.3667360396825397]


class TestTimestep:
    def test_reference_bounds(self, params):
        b02 = max_timestep(params, DiffusionParams(0.005, 0.2), 0.005)
        b032 = max_timestep(params, DiffusionParams(0.005, 0.32), 0.005)
        h2 = 0.005**2
        assert b02 == pytest.approx(h2 / (0.5 * h2 + 0.4), rel=1e-15)
        assert b02 == pytest.approx(6.2498e-5, rel=1e-4)
        assert b032 == pytest.approx(3.906e-5, rel=1e-3)
        assert 0.00006 <= b02 and 0.0000375 <= b032

    def test_large_mesh_limit(self, params):
        b = max_timestep(params, DiffusionParams(0.005, 0.2), 1e6)
        assert b == pytest.approx(min(1 / params.alpha, 1.0, 1 / (params.epsilon * params.delta)), rel=1e-9)


class TestBoundary:
    def test_constant(self):
        s = apply_boundary(GridState(0.25, [9, 2, 2, 2, 9], [0, 1, 1, 1, 5]))
        assert s.n_values[0] == 2 and s.n_values[-1] == 2 and s.p_values[0] == 1 and s.p_values[-1] == 1

    def test_quadratic_with_flat_end(self):
        h = 0.1
        x = h * np.arange(11)
        s = apply_boundary(GridState(h, 1 + x**2, np.ones(11)))
        assert s.n_values[0] == pytest.approx(1.0, abs=1e-15)

    def test_hand_value_and_interior_untouched(self):
        n = np.array([5.0, 0.2, 0.3, 0.4, 0.5])
        s = apply_boundary(GridState(0.25, n, n))
        assert s.n_values[0] == pytest.approx((0.8 - 0.3) / 3, abs=1e-16)
        assert np.array_equal(s.n_values[1:-1], n[1:-1])
        assert 3 * s.p_values[-1] - 4 * s.p_values[-2] + s.p_values[-3] == pytest.approx(0, abs=1e-15)

    def test_grid_too_small(self):
        with pytest.raises(GridTooSmall):
            apply_boundary(GridState(0.5, [0, 1, 2], [0, 1, 2]))


class TestStep:
    def test_equilibrium_is_fixed(self, params, eq):
        s = GridState.uniform(eq.n_bar, eq.p_bar, 1.0, 0.05)
        out = step(s, params, DiffusionParams(), 1e-3)
        assert np.abs(out.n_values - eq.n_bar).max() < 1e-15
        assert np.abs(out.p_values - eq.p_bar).max() < 1e-15

    def test_boundary_equilibrium_is_fixed(self, params):
        s = GridState.uniform(1.0, 0.0, 1.0, 0.05)
        out = step(s, params, DiffusionParams(), 1e-3)
        assert np.all(out.n_values == 1.0) and np.all(out.p_values == 0.0)

    def test_origin_stays(self, params):
        s = GridState.uniform(0.0, 0.0, 1.0, 0.05)
        out = step(s, params, DiffusionParams(), 1e-3)
        assert np.all(out.n_values == 0.0) and np.all(out.p_values == 0.0)

    def test_five_node_oracle(self, params):
        s = GridState(0.25, [0.2, 0.2, 0.3, 0.2, 0.2], [0.4, 0.4, 0.5, 0.4, 0.4])
        out = step(s, params, DiffusionParams(0.005, 0.005, 1.0), 1e-3)
        assert out.n_values == pytest.approx(STEP_ORACLE_N, abs=1e-15)
        assert out.p_values == pytest.approx(STEP_ORACLE_P, abs=1e-15)
        assert out.t == 1e-3

    def test_rejects_large_step(self, params):
        s = GridState.uniform(0.5, 0.5, 1.0, 0.01)
        dp = DiffusionParams(0.005, 0.2)
        with pytest.raises(StepRejected):
            step(s, params, dp, 1.01 * max_timestep(params, dp, 0.01))

    def test_non_finite(self, params):
        s = GridState(0.25, [0.2, np.nan, 0.3, 0.2, 0.2], [0.4] * 5)
        with pytest.raises(NonFiniteState):
            step(s, params, DiffusionParams(), 1e-3)

    def test_fixed_point_drift(self, params, eq):
        dp = DiffusionParams(0.005, 0.2)
        s = GridState.uniform(eq.n_bar, eq.p_bar, 1.0, 0.01)
        out, _ = advance(s, params, dp, max_timestep(params, dp, 0.01), 100_000)
        assert np.abs(out.n_values - eq.n_bar).max() <= 1e-10
        assert np.abs(out.p_values - eq.p_bar).max() <= 1e-10

    def test_mirror_symmetry(self, params):
        x = np.linspace(0, 1, 101)
        n = 0.3 + 0.2 * np.cos(2 * np.pi * x) ** 2
        p = 0.5 + 0.3 * np.cos(4 * np.pi * x)
        dp = DiffusionParams(0.005, 0.32)
        s = GridState(0.01, n, p)
        dt = max_timestep(params, dp, 0.01)
        for _ in range(50):
            s, _ = advance(s, params, dp, dt, 200)
            assert np.abs(s.n_values - s.n_values[::-1]).max() < 1e-14
            assert np.abs(s.p_values - s.p_values[::-1]).max() < 1e-14

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([(0.005, 0.2), (0.005, 0.32), (0.05, 0.01)]))
    def test_bounds_preserved(self, params, seed, diff):
        rng = np.random.default_rng(seed)
        dp = DiffusionParams(*diff)
        s = GridState(0.02, rng.uniform(0, 1, 51), rng.uniform(0, 3, 51))
        _, ext = advance(s, params, dp, max_timestep(params, dp, 0.02), 2000)
        assert ext.interior_bounds_respected

    def test_boundary_closure_can_overshoot(self, params):
        # interior nodes obey the bounds, the extrapolated end value does not: (4*1 - 0)/3 > 1
        n = np.array([0.5, 1.0, 0.0, 0.5, 0.5, 0.5])
        s = GridState(0.2, n, np.full(6, 0.5))
        _, ext = advance(s, params, DiffusionParams(0.005, 0.2), 1e-4, 1)
        assert ext.interior_bounds_respected
        assert ext.n_max > 1


class TestNorms:
    def test_identical(self):
        s = GridState(0.1, np.linspace(0, 1, 11), np.ones(11))
        assert norms(s, (s.n_values, s.p_values)) == (0.0, 0.0)

    def test_offset_prey_only(self):
        s = GridState(0.1, np.full(11, 0.5), np.ones(11))
        l2, linf = norms(s, (np.full(11, 0.3), np.ones(11)))
        assert linf == pytest.approx(0.2, abs=1e-15) and l2 == pytest.approx(0.2, abs=1e-15)

    def test_offset_both(self):
        s = GridState(0.1, np.full(11, 0.5), np.full(11, 1.2))
        l2, linf = norms(s, (np.full(11, 0.3), np.ones(11)))
        assert linf == pytest.approx(0.2, abs=1e-15) and l2 == pytest.approx(0.2 * math.sqrt(2), abs=1e-15)

    def test_mismatch(self):
        s = GridState(0.1, np.zeros(11), np.zeros(11))
        with pytest.raises(GridMismatch):
            norms(s, (np.zeros(10), np.zeros(10)))


class TestRun:
    def test_starts_converged_at_equilibrium(self, params, eq):
        s = GridState.uniform(eq.n_bar, eq.p_bar, 1.0, 0.01)
        cfg = SolverConfig(h=0.01, t_end=50.0, n_snapshots=100)
        rep = run(s, params, DiffusionParams(), cfg)
        assert rep.converged and len(rep.times) == 2
        assert rep.t_final == rep.times[1] < 1.0

    def test_report_consistency(self, params, eq):
        x = np.linspace(0, 1, 51)
        s = GridState(0.02, eq.n_bar + 0.05 * np.cos(np.pi * x), eq.p_bar + 0.05 * np.cos(np.pi * x))
        cfg = SolverConfig(h=0.02, t_end=20.0, n_snapshots=40)
        rep = run(s, params, DiffusionParams(0.005, 0.32), cfg)
        assert len(rep.l2_series) == len(rep.linf_series) == len(rep.snapshots) == len(rep.times) == 41
        assert rep.t_final == pytest.approx(20.0, rel=1e-12)
        assert rep.dt <= 0.95 * max_timestep(params, DiffusionParams(0.005, 0.32), 0.02)
        assert np.all(rep.l2_series <= math.sqrt(2 * 1.0) * rep.linf_series + 1e-15)
        assert rep.bounds_respected
        again = run(s, params, DiffusionParams(0.005, 0.32), cfg)
        assert np.array_equal(rep.final_state.n_values, again.final_state.n_values)
        assert np.array_equal(rep.linf_series, again.linf_series)

    def test_reference_none_measures_change(self, params, eq):
        s = GridState.uniform(eq.n_bar, eq.p_bar, 1.0, 0.02)
        rep = run(s, params, DiffusionParams(), SolverConfig(h=0.02, t_end=5.0, reference="none", n_snapshots=5))
        assert math.isnan(rep.linf_series[0]) and rep.converged

    def test_grid_mismatch(self, params):
        s = GridState.uniform(0.2, 0.2, 1.0, 0.02)
        with pytest.raises(GridMismatch):
            run(s, params, DiffusionParams(), SolverConfig(h=0.01, t_end=1.0))

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            GridState.uniform(0.1, 0.1, 1.0, 0.03)
        with pytest.raises(ConfigError):
            SolverConfig(dt_safety=1.5)
        with pytest.raises(ConfigError):
            SolverConfig(reference="other")

    def test_supplied_dt_over_bound(self, params):
        s = GridState.uniform(0.2, 0.2, 1.0, 0.01)
        with pytest.raises(StepRejected):
            run(s, params, DiffusionParams(), SolverConfig(h=0.01, t_end=1.0, dt=1e-3))


class TestPersistence:
    def test_profile_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        s = GridState(0.1, rng.random(11), rng.random(11))
        write_profile(tmp_path / "p.csv", s)
        assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x,N,P"
        x, n, p = read_profile(tmp_path / "p.csv")
        assert np.array_equal(n, s.n_values) and np.array_equal(p, s.p_values) and np.array_equal(x, s.x)

    def test_run_files(self, params, eq, tmp_path):
        s = GridState.uniform(eq.n_bar + 0.01, eq.p_bar, 1.0, 0.05)
        rep = run(s, params, DiffusionParams(), SolverConfig(h=0.05, t_end=2.0, n_snapshots=4))
        write_run(rep, tmp_path)
        manifest = (tmp_path / "manifest.csv").read_text().splitlines()
        assert manifest[0] == "index,file,t" and len(manifest) == len(rep.snapshots) + 1
        for line in manifest[1:]:
            _, name, t = line.split(",")
            assert (tmp_path / name).exists()
        table = np.loadtxt(tmp_path / "norms.csv", delimiter=",", skiprows=1)
        assert (tmp_path / "norms.csv").read_text().startswith("t,l2,linf,N_probe,P_probe\n")
        assert np.array_equal(table[:, 2], rep.linf_series)
