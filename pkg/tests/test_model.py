from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isingbench.instances import SquareLatticeSpec, brute_force_ground_state, gen_planted_square, planted_config
from isingbench.model import DimensionError, IsingProblem, energy, readout, validate


def pair(j):
    return IsingProblem.from_couplings(2, [(0, 1, j)])


@st.composite
def problems_and_configs(draw, max_n=10):
    n = draw(st.integers(2, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    weights = draw(st.lists(st.floats(-3, 3, allow_nan=False), min_size=len(chosen), max_size=len(chosen)))
    config = draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    prob = IsingProblem.from_couplings(n, [(i, j, w) for (i, j), w in zip(chosen, weights)])
    return prob, np.array(config, dtype=np.int8)


class TestEnergy:
    def test_ferromagnetic_pair(self):
        assert energy(pair(1.0), [1, 1]) == -1.0

    def test_antiferromagnetic_pair_satisfied(self):
        assert energy(pair(-1.0), [1, -1]) == -1.0

    def test_planted_seed7_matches_recorded_ground(self):
        for mode in ("mattis", "frustrated-loops"):
            p = gen_planted_square(SquareLatticeSpec(4, seed=7), mode)
            assert energy(p, planted_config(p)) == p.ground_energy
            assert brute_force_ground_state(p)[0] == p.ground_energy

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            energy(pair(1.0), [1, 1, 1])

    def test_half_prefactor_counts_pairs_once(self):
        p = IsingProblem.from_couplings(3, [(0, 1, 2.0), (1, 2, -1.0)])
        s = np.array([1, -1, -1])
        J = p.matrix.toarray()
        assert energy(p, s) == pytest.approx(-0.5 * s @ J @ s)
        assert p.energies(s[None, :])[0] == pytest.approx(energy(p, s))


class TestInvariants:
    @given(problems_and_configs(), st.integers(0, 9))
    def test_gauge_invariance(self, pc, k):
        p, s = pc
        k %= p.n
        hit = (p.edges[:, 0] == k) | (p.edges[:, 1] == k)
        gauged = IsingProblem(p.n, p.edges, np.where(hit, -p.weights, p.weights))
        s2 = s.copy()
        s2[k] = -s2[k]
        assert energy(gauged, s2) == pytest.approx(energy(p, s), abs=1e-12)

    @given(problems_and_configs())
    def test_global_flip(self, pc):
        p, s = pc
        assert energy(p, -s) == energy(p, s)

    @settings(max_examples=30, deadline=None)
    @given(problems_and_configs(max_n=12))
    def test_energy_not_below_oracle(self, pc):
        p, s = pc
        e0, cfg = brute_force_ground_state(p)
        assert energy(p, s) >= e0 - 1e-9
        assert energy(p, cfg) == e0

    @given(problems_and_configs())
    def test_matrix_symmetric(self, pc):
        p, _ = pc
        m = p.matrix
        assert (m != m.T).nnz == 0


class TestReadout:
    def test_sign(self):
        assert readout(np.array([0.3, -0.2])).tolist() == [1, -1]

    def test_phase(self):
        assert readout(np.array([0.0, np.pi]), "phase").tolist() == [1, -1]

    def test_real_part(self):
        assert readout(np.array([1 + 0.2j, -0.5 + 0.1j]), "real-part").tolist() == [1, -1]

    def test_zero_ties_to_plus(self):
        assert readout(np.zeros(3)).tolist() == [1, 1, 1]

    def test_batch(self):
        out = readout(np.array([[0.1, -0.1], [-2.0, 0.0]]))
        assert out.tolist() == [[1, -1], [-1, 1]]

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            readout(np.zeros(2), "magnitude")


class TestValidate:
    def test_well_formed(self):
        assert validate(gen_planted_square(SquareLatticeSpec(4, seed=1), "mattis")) == []

    def test_self_coupling(self):
        v = validate(IsingProblem(4, np.array([[3, 3]]), np.array([1.0])))
        assert any("self-coupling" in m for m in v)

    def test_duplicate(self):
        v = validate(IsingProblem(3, np.array([[0, 1], [0, 1]]), np.array([1.0, 2.0])))
        assert any("duplicate" in m for m in v)

    def test_out_of_range(self):
        v = validate(IsingProblem(2, np.array([[0, 5]]), np.array([1.0])))
        assert any("out of range" in m for m in v)


def test_problem_is_immutable():
    p = pair(1.0)
    with pytest.raises(ValueError):
        p.weights[0] = 3.0
    with pytest.raises(AttributeError):
        p.n = 4


def test_energy_tolerance_depends_on_couplings():
    assert pair(1.0).energy_tol == 0.0
    assert pair(0.5).energy_tol == pytest.approx(1e-9)


def test_field_is_row_deterministic():
    p = gen_planted_square(SquareLatticeSpec(6, seed=2), "mattis")
    rng = np.random.default_rng(0)
    X = rng.standard_normal((7, p.n))
    batch = p.field(X)
    for r in range(7):
        assert np.array_equal(batch[r], p.field(X[r:r + 1])[0])
