import numpy as np
import pytest

from conftest import all_configs, oracle_ground, py_energy
from pfembed.errors import CapacityError, InputError
from pfembed.model import IsingModel, energy
from pfembed.problems import chain, random_tree
from pfembed.reduction import (PAIR_KEYS, Reduction, enumerate_segment, evaluate_fit,
                               fit_boundary_model, fixpoint, reconstruct, reduce_chain)


def energies_of(table):
    return {k: e for k, (_, e) in table.items()}


class TestEnumerateSegment:
    def test_boundary_only(self):
        m = IsingModel(2, {}, {(0, 1): -1.0})
        t = enumerate_segment(m, [0, 1], (0, 1))
        assert energies_of(t) == {(1, 1): -1.0, (1, -1): 1.0, (-1, 1): 1.0, (-1, -1): -1.0}

    def test_ferromagnetic_path(self):
        m = chain(3, -1.0)
        t = enumerate_segment(m, [0, 1, 2], (0, 2))
        assert energies_of(t) == {(1, 1): -2.0, (1, -1): 0.0, (-1, 1): 0.0, (-1, -1): -2.0}
        assert t[(1, 1)][0] == {1: 1}

    def test_equal_field_segment_has_four_minima(self):
        # three spins, equal couplings and fields; the middle one is internal
        m = chain(3, 1.0, h=1.0)
        t = enumerate_segment(m, [0, 1, 2], (0, 2))
        assert len(t) == 4
        for key, (internal, e) in t.items():
            s = np.array([key[0], internal[1], key[1]])
            assert e == pytest.approx(energy(m, s))
            other = s.copy()
            other[1] = -other[1]
            assert e <= energy(m, other)

    def test_leaky_internal_node(self):
        with pytest.raises(InputError):
            enumerate_segment(chain(4, 1.0), [0, 1, 2], (0, 1))

    def test_bad_boundary(self):
        with pytest.raises(InputError):
            enumerate_segment(chain(3, 1.0), [0, 1, 2], (0, 1, 2))

    def test_capacity(self):
        with pytest.raises(CapacityError):
            enumerate_segment(chain(26, 1.0), range(26), (0, 25))


class TestFit:
    def test_symmetric_ferromagnet(self):
        table = {(1, 1): ({}, -2.0), (1, -1): ({}, 0.0), (-1, 1): ({}, 0.0), (-1, -1): ({}, -2.0)}
        assert fit_boundary_model(table) == (-1.0, 0.0, 0.0, -1.0)

    def test_constant_table(self):
        table = {k: ({}, 2.5) for k in PAIR_KEYS}
        assert fit_boundary_model(table) == (2.5, 0.0, 0.0, 0.0)

    def test_path_table_reproduced(self):
        t = enumerate_segment(chain(3, -1.0, h=0.3), [0, 1, 2], (0, 2))
        fit = fit_boundary_model(t)
        for key, (_, e) in t.items():
            assert evaluate_fit(fit, key) == pytest.approx(e, abs=1e-12)

    def test_arbitrary_table_reproduced(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            table = {k: ({}, float(v)) for k, v in zip(PAIR_KEYS, rng.normal(size=4))}
            fit = fit_boundary_model(table)
            for key, (_, e) in table.items():
                assert evaluate_fit(fit, key) == pytest.approx(e, abs=1e-12)


def check_exact(model: IsingModel, red: Reduction):
    """Every reduced configuration maps to a full one of equal energy, and the
    reduced ground equals the original ground."""
    best = np.inf
    for r in all_configs(red.model.n):
        full = reconstruct(red, r)
        e_red = energy(red.model, r)
        assert py_energy(model, full) == pytest.approx(e_red, abs=1e-9)
        best = min(best, e_red)
    assert best == pytest.approx(oracle_ground(model)[0], abs=1e-9)


class TestReduceChain:
    def test_ferromagnetic_chain(self):
        m = chain(8, -1.0)
        red = reduce_chain(m)
        assert len(red.survivors) <= 2
        assert red.eliminated >= 6
        assert min(energy(red.model, r) for r in all_configs(red.model.n)) == pytest.approx(-7.0)
        check_exact(m, red)

    def test_reconstruct_gives_global_optimum(self):
        m = chain(8, -1.0)
        red = reduce_chain(m)
        ground_r = min(all_configs(red.model.n), key=lambda r: energy(red.model, r))
        full = reconstruct(red, ground_r)
        assert energy(m, full) == pytest.approx(-7.0)

    @pytest.mark.parametrize("seed", range(15))
    def test_random_trees(self, seed):
        n = 4 + seed % 10
        m = random_tree(n, seed)
        check_exact(m, reduce_chain(m))

    @pytest.mark.parametrize("n", [3, 6, 9])
    def test_rings(self, n):
        rng = np.random.default_rng(n)
        base = chain(n, 1.0, periodic=True)
        m = IsingModel(n, {i: float(rng.uniform(-1, 1)) for i in range(n)},
                       {e: float(rng.uniform(-1, 1)) for e in base.quadratic})
        check_exact(m, reduce_chain(m))

    def test_all_protected_unchanged(self, afm_triangle):
        red = reduce_chain(afm_triangle, protected=[0, 1, 2])
        assert red.model == afm_triangle and red.records == ()
        assert fixpoint(afm_triangle, protected=[0, 1, 2])

    def test_protected_survive(self):
        m = chain(10, 1.0, h=0.2)
        red = reduce_chain(m, protected=[0, 9])
        assert {0, 9} <= set(red.survivors)
        check_exact(m, red)

    def test_result_is_fixpoint(self):
        m = random_tree(12, seed=4)
        red = reduce_chain(m)
        assert fixpoint(red.model)

    def test_no_records_is_identity(self):
        red = reduce_chain(IsingModel(3, {0: 1.0}))
        assert red.records == ()
        np.testing.assert_array_equal(reconstruct(red, [1, -1, 1]), [1, -1, 1])

    def test_offset_carries_constants(self):
        m = IsingModel(2, {0: 0.5, 1: -0.25}, {(0, 1): 1.0})
        red = reduce_chain(m)
        assert red.model.n == 1
        check_exact(m, red)

    def test_records_serialise(self):
        red = reduce_chain(chain(5, -1.0))
        doc = red.to_dict()
        assert doc["n_original"] == 5 and len(doc["records"]) == red.eliminated
