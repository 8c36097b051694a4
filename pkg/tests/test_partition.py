import networkx as nx
import numpy as np
import pytest

from conftest import oracle_ground, py_energy, all_configs
from pfembed.errors import InputError
from pfembed.model import IsingModel, energy
from pfembed.partition import (boundary_bound, boundary_energy, edge_betweenness,
                               girvan_newman_bipartition, induced_submodel, make_partition,
                               refined_bound)
from pfembed.problems import LatticeSpec, chain, kagome_lattice, random_ising


def path_oracle(model: IsingModel) -> dict:
    """Edge betweenness by listing every simple path between every pair."""
    g = nx.Graph()
    g.add_nodes_from(range(model.n))
    for (i, j), w in model.quadratic.items():
        g.add_edge(i, j, length=1.0 / abs(w))
    score = {e: 0.0 for e in model.quadratic}
    for u in range(model.n):
        for v in range(u + 1, model.n):
            paths = list(nx.all_simple_paths(g, u, v))
            if not paths:
                continue
            lengths = [sum(g[a][b]["length"] for a, b in zip(p, p[1:])) for p in paths]
            best = min(lengths)
            shortest = [p for p, L in zip(paths, lengths) if abs(L - best) <= 1e-9 * best]
            for p in shortest:
                for a, b in zip(p, p[1:]):
                    score[(min(a, b), max(a, b))] += 1.0 / len(shortest)
    return score


def networkx_betweenness(model: IsingModel) -> dict:
    g = nx.Graph()
    g.add_nodes_from(range(model.n))
    for (i, j), w in model.quadratic.items():
        g.add_edge(i, j, length=1.0 / abs(w))
    raw = nx.edge_betweenness_centrality(g, normalized=False, weight="length")
    return {(min(a, b), max(a, b)): v for (a, b), v in raw.items()}


class TestEdgeBetweenness:
    def test_path(self):
        m = chain(3, 1.0)
        assert edge_betweenness(m) == {(0, 1): 2.0, (1, 2): 2.0}

    def test_star(self):
        m = IsingModel(4, {}, {(0, 1): 1.0, (0, 2): 1.0, (0, 3): 1.0})
        assert all(v == 3.0 for v in edge_betweenness(m).values())

    def test_bridge_strictly_largest(self, two_triangles):
        score = edge_betweenness(two_triangles)
        assert score[(2, 3)] == 9.0
        assert all(v < 9.0 for e, v in score.items() if e != (2, 3))

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_path_enumeration(self, seed):
        m = random_ising(7, seed=seed, edge_prob=0.35)
        got = edge_betweenness(m)
        want = path_oracle(m)
        for e in want:
            assert got[e] == pytest.approx(want[e], abs=1e-9)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_networkx(self, seed):
        m = random_ising(14, seed=100 + seed, edge_prob=0.25)
        got = edge_betweenness(m)
        want = networkx_betweenness(m)
        for e in want:
            assert got[e] == pytest.approx(want[e], rel=1e-9)

    def test_equal_length_paths_split(self):
        # 4-cycle with unit weights: each opposite pair has two shortest paths
        m = chain(4, 1.0, periodic=True)
        assert all(v == pytest.approx(2.0) for v in edge_betweenness(m).values())

    def test_negligible_couplings_excluded(self):
        m = IsingModel(3, {}, {(0, 1): 1.0, (1, 2): 1e-13})
        assert set(edge_betweenness(m)) == {(0, 1)}

    def test_no_couplings(self):
        with pytest.raises(InputError):
            edge_betweenness(IsingModel(3))


class TestGirvanNewman:
    def test_two_triangles(self, two_triangles):
        p = girvan_newman_bipartition(two_triangles)
        assert p.labels == (0, 0, 0, 1, 1, 1)
        assert p.boundary_edges == ((2, 3, 1.0),)
        assert p.bound_a == 2.0

    @pytest.mark.parametrize("seed", range(6))
    def test_even_cycle_splits_in_halves(self, seed):
        p = girvan_newman_bipartition(chain(10, 1.0, periodic=True), seed=seed)
        sides = [p.members(0), p.members(1)]
        assert sorted(map(len, sides)) == [5, 5]
        for side in sides:  # each half is a contiguous arc
            gaps = np.diff(np.sort(side))
            assert (gaps == 1).sum() >= len(side) - 2

    def test_deterministic_for_seed(self):
        m = chain(12, 1.0, periodic=True)
        assert girvan_newman_bipartition(m, seed=4) == girvan_newman_bipartition(m, seed=4)

    def test_seed_changes_tie_breaks(self):
        m = chain(12, 1.0, periodic=True)
        labels = {girvan_newman_bipartition(m, seed=s).labels for s in range(10)}
        assert len(labels) > 1

    def test_disconnected_rejected(self):
        with pytest.raises(InputError):
            girvan_newman_bipartition(IsingModel(4, {}, {(0, 1): 1.0, (2, 3): 1.0}))

    def test_too_small(self):
        with pytest.raises(InputError):
            girvan_newman_bipartition(IsingModel(1))

    def test_kagome_bound_matches_cut_count(self):
        m = kagome_lattice(LatticeSpec(5, 6, J=1.0, h=1.0))
        p = girvan_newman_bipartition(m)
        assert p.n_parts == 2
        cut = sum(1 for (i, j) in m.quadratic if p.labels[i] != p.labels[j])
        assert p.bound_a == 2.0 * cut * 1.0


class TestBounds:
    def test_no_boundary(self):
        p = make_partition(IsingModel(4, {}, {(0, 1): 1.0, (2, 3): 1.0}), [0, 0, 1, 1])
        assert boundary_bound(p) == 0.0

    def test_arithmetic(self):
        m = IsingModel(4, {}, {(0, 1): 1.0, (0, 2): 0.5, (1, 3): -0.25})
        p = make_partition(m, [0, 0, 1, 1])
        assert boundary_bound(p) == 1.5

    def test_refined_equal_configs(self):
        m = IsingModel(4, {}, {(0, 2): 1.0, (1, 3): 0.5})
        p = make_partition(m, [0, 0, 1, 1])
        assert refined_bound([1, 1], [1, 1], p, 0) == 0.0

    def test_refined_non_boundary_difference(self):
        m = IsingModel(4, {}, {(0, 1): 1.0, (1, 2): 0.5, (2, 3): 0.3})
        p = make_partition(m, [0, 0, 1, 1])
        # local node 0 has no boundary couplings
        assert refined_bound([-1, 1], [1, 1], p, 0) == 0.0

    def test_refined_one_boundary_node(self):
        m = IsingModel(4, {}, {(0, 2): 1.0, (0, 3): -0.5, (1, 2): 0.7})
        p = make_partition(m, [0, 0, 1, 1])
        assert refined_bound([-1, 1], [1, 1], p, 0) == 3.0


class TestSubmodels:
    def test_decoupled_grounds_concatenate(self):
        m = IsingModel(4, {0: 0.3, 3: -0.2}, {(0, 1): -1.0, (2, 3): 1.0})
        p = make_partition(m, [0, 0, 1, 1])
        full = np.empty(4, dtype=int)
        for side in (0, 1):
            sub, members = induced_submodel(m, p, side)
            full[members] = oracle_ground(sub)[1][0]
        assert energy(m, full) == pytest.approx(oracle_ground(m)[0])

    def test_two_triangles_give_triangles(self, two_triangles):
        p = girvan_newman_bipartition(two_triangles)
        for side in (0, 1):
            sub, _ = induced_submodel(two_triangles, p, side)
            assert sub.n == 3 and len(sub.quadratic) == 3

    @pytest.mark.parametrize("seed", range(5))
    def test_energy_additivity(self, seed):
        m = random_ising(9, seed=seed)
        m = IsingModel(m.n, m.linear, m.quadratic, offset=1.25)
        p = girvan_newman_bipartition(m, seed=seed)
        subs = [induced_submodel(m, p, s) for s in (0, 1)]
        for s in all_configs(9)[::7]:
            total = sum(py_energy(sub, s[mem]) for sub, mem in subs) + boundary_energy(p, s)
            assert total == pytest.approx(py_energy(m, s), abs=1e-9)

    def test_labels_ordered_by_smallest_index(self):
        m = random_ising(12, seed=9)
        p = girvan_newman_bipartition(m)
        assert p.labels[0] == 0
