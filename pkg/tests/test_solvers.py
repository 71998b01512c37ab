from __future__ import annotations

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from isingbench import (
    IsingProblem, SquareLatticeSpec, VianaBraySpec, brute_force_ground_state, default_params, gen_planted_square,
    gen_viana_bray, readout, run, run_batch, run_restarts,
)
from isingbench.schedules import ScheduleSpec
from isingbench.solvers import SolverParams, run_hopfield, run_sa, run_sbm
from isingbench.solvers.annealing import metropolis_sweeps
from isingbench.solvers.base import RunRecord, Trajectory, make_rngs
from isingbench.solvers.cim import oeo_cim_map, opo_drift, sim_cim_map
from isingbench.solvers.defaults import DEFAULT_KINDS
from isingbench.solvers.gd import densities, gd_constants, simulate_gd
from isingbench.solvers.hopfield import hopfield_drift
from isingbench.solvers.oim import oim_drift, wrap_phase

SINGLE = IsingProblem.from_couplings(1, [])
PAIR = IsingProblem.from_couplings(2, [(0, 1, 1.0)])
CONTINUOUS = ("opo-cim", "oim", "gd", "hopfield")


def const(v, n=1):
    return np.full(n + 1, float(v))


@pytest.fixture(scope="module")
def lattice():
    return gen_planted_square(SquareLatticeSpec(4, seed=3), "random-verified")


@pytest.fixture(scope="module")
def vb20():
    return gen_viana_bray(VianaBraySpec(20, 8, seed=2), verify=True)


def with_schedule(params: SolverParams, role: str, spec: ScheduleSpec) -> SolverParams:
    return params.updated(schedules={**params.schedules, role: spec})


class TestSimCim:
    def test_single_spin_update(self):
        x = sim_cim_map(SINGLE, np.array([[0.2]]), 0.5, 0.2, 0.0, 3.0)
        assert x[0, 0] == pytest.approx(0.3)

    def test_saturation(self):
        assert sim_cim_map(SINGLE, np.array([[5.0]]), 0.0, 0.0, 0.0, 3.0)[0, 0] == 3.0

    def test_noise_outside_clamp(self):
        x = sim_cim_map(SINGLE, np.array([[5.0]]), 0.0, 0.0, 0.5, 3.0, inside=False)
        assert x[0, 0] == 3.5

    def test_table_row_l4(self):
        p = default_params("sim-cim", 4)
        assert p.n_steps == 1000 and p.extra("x_sat") == 3.0
        assert p.schedules["pump"].params == {"amplitude": 0.7, "sharpness": 1.0}
        assert p.schedules["coupling"].params["value"] == 0.2
        assert p.schedules["noise"].params["value"] == 0.1

    def test_state_bounded(self, lattice):
        params = default_params("sim-cim", 4).updated(n_steps=50)
        traj = Trajectory(lattice, 8)
        from isingbench.solvers.cim import simulate_sim_cim
        simulate_sim_cim(lattice, params, make_rngs(range(8)), traj)
        assert np.all(np.abs(traj.final_state) <= 3.0)


class TestOeoCim:
    def test_origin_fixed_point(self):
        assert oeo_cim_map(SINGLE, np.zeros((1, 1)), 0.45, 0.29, 0.0)[0, 0] == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
    def test_range(self, x, alpha):
        out = oeo_cim_map(SINGLE, np.array([[x]]), alpha, 0.0, 0.0)
        assert -0.5 <= out[0, 0] <= 0.5

    def test_table_row_l4(self):
        p = default_params("oeo-cim", 4)
        assert p.schedules["pump"].params["amplitude"] == 0.45
        assert p.schedules["coupling"].params["value"] == 0.29

    def test_reduces_to_opo_cubic(self):
        # third-order truncation of the cos^2 map gives f - (2/3) f^3: the OPO drift's cubic form
        f = sp.symbols("f")
        series = sp.series(sp.cos(f - sp.pi / 4) ** 2 - sp.Rational(1, 2), f, 0, 4).removeO()
        assert sp.simplify(series - (f - sp.Rational(2, 3) * f ** 3)) == 0
        # with the pump dominating, f ~ alpha x, so the map increment is (alpha - 1) x - (2/3) alpha^3 x^3
        x, a = sp.symbols("x alpha")
        assert sp.expand(series.subs(f, a * x) - x) == sp.expand((a - 1) * x - sp.Rational(2, 3) * a ** 3 * x ** 3)


class TestOpoCim:
    def test_single_spin_fixed_points(self):
        f = opo_drift(SINGLE, const(1.0), const(0.0))
        root = brentq(lambda v: f(np.array([[v]]), 0)[0, 0], 0.5, 3.0)
        assert root == pytest.approx(math.sqrt(1.5), abs=1e-12)
        assert f(np.array([[-root]]), 0)[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_origin_stays(self):
        f = opo_drift(SINGLE, const(1.0), const(0.0))
        assert f(np.zeros((1, 1)), 0)[0, 0] == 0.0

    def test_ferromagnetic_pair_fixed_point(self):
        f = opo_drift(PAIR, const(0.5), const(0.5))
        root = brentq(lambda v: f(np.array([[v, v]]), 0)[0, 0], 0.5, 3.0)
        assert root == pytest.approx(math.sqrt(1.5), abs=1e-12)


class TestOim:
    def test_locked_origin(self):
        f = oim_drift(PAIR, const(1.0), const(1.0))
        assert np.all(f(np.zeros((1, 2)), 0) == 0.0)

    def test_antiphase_stationary_without_shil(self):
        f = oim_drift(PAIR, const(0.0), const(1.0))
        assert np.allclose(f(np.array([[0.0, np.pi]]), 0), 0.0, atol=1e-15)

    @given(st.floats(-1e4, 1e4))
    def test_wrap_range(self, x):
        w = wrap_phase(np.array([x]))[0]
        assert -np.pi < w <= np.pi

    def test_euler_and_rk4_consistent(self, lattice):
        euler = default_params("oim", 4)
        rk4 = euler.updated(integrator="rk4", dt=0.05, n_steps=400)
        p_e = np.mean([r.success for r in run_restarts(lattice, euler, 1, 100)])
        p_r = np.mean([r.success for r in run_restarts(lattice, rk4, 1, 100)])
        assert p_e > 0 and p_r > 0
        assert abs(p_e - p_r) < 0.3


class TestGd:
    def test_pair_synchronises(self):
        params = with_schedule(default_params("gd", 4).updated(n_steps=1024, dt=1.0), "noise",
                               ScheduleSpec.constant(0.0))
        traj = Trajectory(PAIR, 4)
        simulate_gd(PAIR, params, make_rngs(range(4)), traj)
        rho = gd_constants(PAIR, params)["rho_th"]
        assert np.all(np.abs(densities(traj.final_state, 2) - rho) / rho < 0.05)
        assert np.all(traj.final_config[:, 0] == traj.final_config[:, 1])

    def test_constants_scale_with_row_sum(self, lattice):
        c = gd_constants(lattice, default_params("gd", 4))
        s = lattice.max_abs_row_sum
        assert (c["eps_gain"], c["rho_th"], c["gain0"]) == pytest.approx((0.005 * s, 0.15 * s, -s))

    def test_steps_at_l4(self):
        assert default_params("gd", 4).n_steps == 2 ** 6


class TestSbm:
    def test_harmonic_reduction_bounded(self):
        params = SolverParams("sbm", 10_000, dt=0.1, integrator="symplectic",
                              schedules={"pump": ScheduleSpec.constant(0.0)},
                              extras={"K": 0.0, "beta": 0.0, "delta": 1.0, "init_spread": 1.0})
        traj = Trajectory(SINGLE, 1)
        from isingbench.solvers.sbm import simulate_sbm
        rng = make_rngs([5])
        simulate_sbm(SINGLE, params, rng, traj)
        x, y = traj.final_state
        g = np.random.default_rng(5)
        x0, y0 = g.uniform(-1, 1), g.uniform(-1, 1)
        shadow = x[0, 0] ** 2 + y[0, 0] ** 2 + 0.1 * x[0, 0] * y[0, 0]
        assert shadow == pytest.approx(x0 ** 2 + y0 ** 2 + 0.1 * x0 * y0, rel=1e-9)
        assert abs((x[0, 0] ** 2 + y[0, 0] ** 2) / (x0 ** 2 + y0 ** 2) - 1) <= 0.1 / 0.95

    def test_rejects_rk4(self, lattice):
        with pytest.raises(ValueError):
            run(lattice, default_params("sbm", 4).updated(integrator="rk4"), 0)

    def test_table_row_l4(self):
        p = default_params("sbm", 4)
        assert p.n_steps == 2 ** 5 and p.dt == 0.5

    def test_vb_n20_c8_reaches_oracle(self, vb20):
        recs = run_restarts(vb20, default_params("sbm", 4), 0, 100)
        best = min(r.best_energy for r in recs)
        assert best == pytest.approx(vb20.ground_energy, abs=1e-9)

    def test_named_wrapper(self, lattice):
        assert run_sbm(lattice, default_params("sbm", 4), 3).solver == "sbm"


class TestHopfield:
    def test_origin_stationary(self):
        f = hopfield_drift(PAIR, const(1.0), const(1.0), const(10.0))
        assert np.all(f(np.zeros((1, 2)), 0) == 0.0)

    def test_discrete_two_cycle(self):
        s = np.array([[1.0, -1.0]])
        nxt = readout(PAIR.field(s))
        assert nxt.tolist() == [[-1, 1]]
        assert readout(PAIR.field(nxt.astype(float))).tolist() == [[1, -1]]

    def test_integrator_rows(self):
        rk4, rk45 = default_params("hopfield-rk4", 4), default_params("hopfield-rk45", 4)
        assert (rk4.integrator, rk4.dt, rk4.n_steps) == ("rk4", 1.0, 2 ** 5)
        assert (rk45.integrator, rk45.dt, rk45.eps, rk45.n_steps) == ("rk45", 1.0, 1.0, 2 ** 8)

    @pytest.mark.parametrize("kind, per_step", [("hopfield", 1), ("hopfield-rk4", 4), ("hopfield-rk45", 6)])
    def test_derivative_evaluations(self, lattice, kind, per_step):
        p = default_params(kind, 4).updated(n_steps=10)
        assert run(lattice, p, 0).derivative_evals == 10 * per_step

    def test_discrete_reports_work_done(self, lattice):
        rec = run_hopfield(lattice, default_params("hopfield", 4).updated(n_steps=50), 1, variant="discrete")
        assert rec.solver == "hopfield-discrete" and 1 <= rec.steps <= 50

    def test_bad_variant(self, lattice):
        with pytest.raises(ValueError):
            run_hopfield(lattice, default_params("hopfield", 4), 0, variant="quantum")


class TestSa:
    def test_aligned_spin_never_flips_at_huge_beta(self):
        p = IsingProblem.from_couplings(2, [(0, 1, 1.0)])
        spins = np.ones((50, 2))
        for s in metropolis_sweeps(p, spins, [1e9] * 20, make_rngs(range(50))):
            assert np.all(s == 1.0)

    def test_downhill_always_accepted(self):
        # beta = 0 accepts everything; at huge beta a misaligned pair still aligns in one sweep
        p = IsingProblem.from_couplings(2, [(0, 1, 1.0)])
        s = next(metropolis_sweeps(p, np.array([[1.0, -1.0]] * 10), [1e9], make_rngs(range(10))))
        assert np.all(s[:, 0] == s[:, 1])

    def test_table_row_l4(self):
        p = default_params("sa", 4)
        assert p.n_steps == 4 and p.schedules["temperature"].params["beta_final"] == 3.0

    def test_random_order(self, lattice):
        p = default_params("sa", 4).updated(sweep_order="random", n_steps=16)
        recs = run_restarts(lattice, p, 0, 50)
        assert any(r.success for r in recs)

    def test_named_wrapper(self, lattice):
        with pytest.raises(ValueError):
            run_sa(lattice, default_params("sbm", 4), 0)


class TestContract:
    @pytest.mark.parametrize("kind", DEFAULT_KINDS)
    def test_deterministic(self, lattice, kind):
        p = default_params(kind, 4)
        a, b = run(lattice, p, 11), run(lattice, p, 11)
        da, db = a.to_dict(), b.to_dict()
        da.pop("elapsed_us"), db.pop("elapsed_us")
        assert da == db and np.array_equal(a.final_config, b.final_config)

    @pytest.mark.parametrize("kind", DEFAULT_KINDS)
    def test_batch_composition_irrelevant(self, lattice, kind):
        p = default_params(kind, 4)
        batch = run_batch(lattice, p, [3, 4, 5, 6])
        alone = run(lattice, p, 5)
        assert batch[2].best_energy == alone.best_energy
        assert np.array_equal(batch[2].final_config, alone.final_config)

    @pytest.mark.parametrize("kind", DEFAULT_KINDS)
    def test_record_invariants(self, lattice, kind):
        for rec in run_restarts(lattice, default_params(kind, 4), 0, 20):
            assert rec.best_energy <= rec.final_energy
            assert rec.best_energy >= lattice.ground_energy
            assert rec.success == (rec.best_energy == lattice.ground_energy)

    def test_success_undefined_without_ground(self):
        p = gen_viana_bray(VianaBraySpec(30, 4, seed=0))
        assert run(p, default_params("sa", 5), 0).success is None

    def test_final_success_mode(self, lattice):
        recs = run_restarts(lattice, default_params("sa", 4).updated(success="final"), 0, 30)
        for r in recs:
            assert r.success == (r.final_energy == lattice.ground_energy)

    def test_divergence_is_a_failed_record(self, lattice):
        p = default_params("opo-cim", 4).updated(dt=50.0, n_steps=20)
        rec = run(lattice, p, 0)
        assert rec.diverged and rec.success is False

    def test_json_round_trip(self, lattice):
        rec = run(lattice, default_params("sa", 4), 2)
        back = RunRecord.from_json(rec.to_json())
        assert back.to_dict() == rec.to_dict()

    @pytest.mark.parametrize("kind", CONTINUOUS)
    def test_first_order_rejects_symplectic(self, lattice, kind):
        with pytest.raises(ValueError):
            run(lattice, default_params(kind, 4).updated(integrator="symplectic"), 0)

    @pytest.mark.parametrize("changes", [{"n_steps": 0}, {"dt": 0.0}, {"integrator": "leapfrog"},
                                         {"success": "sometimes"}, {"extras": {"x_sat": -1.0}}])
    def test_invalid_params(self, changes):
        with pytest.raises(ValueError):
            default_params("sim-cim", 4).updated(**changes)

    def test_missing_schedule(self, lattice):
        with pytest.raises(ValueError):
            run(lattice, SolverParams("oim", 10), 0)


@st.composite
def small_problems(draw):
    n = draw(st.integers(2, 8))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1, max_size=len(pairs)))
    ws = draw(st.lists(st.sampled_from([-2.0, -1.0, 1.0, 2.0]), min_size=len(chosen), max_size=len(chosen)))
    p = IsingProblem.from_couplings(n, [(i, j, w) for (i, j), w in zip(chosen, ws)])
    return IsingProblem(p.n, p.edges, p.weights, ground_energy=brute_force_ground_state(p)[0])


@settings(max_examples=20, deadline=None)
@given(small_problems(), st.sampled_from(DEFAULT_KINDS), st.integers(0, 1000))
def test_never_below_oracle(problem, kind, seed):
    for rec in run_batch(problem, default_params(kind, 3).updated(n_steps=20), [seed, seed + 1]):
        assert rec.best_energy >= problem.ground_energy
