"""Weighted edge betweenness, Girvan-Newman bipartition and boundary bounds."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError
from .model import Edge, IsingModel, as_config

log = logging.getLogger(__name__)

MIN_WEIGHT = 1e-12
TIE_RTOL = 1e-9
_DIST_RTOL = 1e-12


@dataclass(frozen=True)
class Partition:
    """Community labels with the couplings that cross between communities.

    ``boundary_edges`` holds ``(i, j, w)`` triples with ``i < j`` taken from
    the original model, and ``bound_a`` is twice the summed magnitude of
    those couplings.
    """

    labels: tuple[int, ...]
    boundary_edges: tuple[tuple[int, int, float], ...]
    bound_a: float

    @property
    def n_parts(self) -> int:
        return len(set(self.labels))

    def members(self, side: int) -> np.ndarray:
        """Global indices of ``side`` in ascending order (the local index order)."""
        return np.flatnonzero(np.asarray(self.labels) == side)

    def boundary_weights(self, side: int) -> np.ndarray:
        """Summed |w| of boundary couplings at each local node of ``side``."""
        members = self.members(side)
        pos = {int(g): k for k, g in enumerate(members)}
        out = np.zeros(len(members))
        for i, j, w in self.boundary_edges:
            for v in (i, j):
                if self.labels[v] == side:
                    out[pos[v]] += abs(w)
        return out

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "boundary_edges": [[i, j, w] for i, j, w in self.boundary_edges],
            "bound_a": self.bound_a,
        }


def make_partition(model: IsingModel, labels) -> Partition:
    """Partition of ``model`` with the given per-variable labels."""
    labels = tuple(int(x) for x in labels)
    if len(labels) != model.n:
        raise InputError(f"{len(labels)} labels for {model.n} variables")
    boundary = tuple((i, j, w) for (i, j), w in sorted(model.quadratic.items())
                     if labels[i] != labels[j])
    return Partition(labels, boundary, boundary_bound_of(boundary))


def boundary_bound_of(edges) -> float:
    return 2.0 * sum(abs(w) for _, _, w in edges)


def boundary_bound(partition: Partition) -> float:
    """Twice the summed magnitude of the boundary couplings."""
    return boundary_bound_of(partition.boundary_edges)


class _WorkingGraph:
    """CSR view of the coupling graph with a removable-edge mask."""

    def __init__(self, model: IsingModel):
        self.n = model.n
        self.edges = [e for e, w in sorted(model.quadratic.items()) if abs(w) >= MIN_WEIGHT]
        lengths = [1.0 / abs(model.quadratic[e]) for e in self.edges]
        src, dst, eid, ln = [], [], [], []
        for k, (i, j) in enumerate(self.edges):
            src += [i, j]
            dst += [j, i]
            eid += [k, k]
            ln += [lengths[k], lengths[k]]
        order = np.lexsort((dst, src)) if src else np.zeros(0, dtype=np.int64)
        src = np.asarray(src, dtype=np.int64)[order]
        self.indices = np.asarray(dst, dtype=np.int64)[order]
        self.edge_id = np.asarray(eid, dtype=np.int64)[order]
        self.lengths = np.asarray(ln, dtype=np.float64)[order]
        counts = np.bincount(src, minlength=self.n) if len(src) else np.zeros(self.n, np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.active = np.ones(len(self.indices), dtype=np.bool_)
        self.alive = np.ones(len(self.edges), dtype=bool)

    def scores(self) -> np.ndarray:
        return _kernels.edge_betweenness(self.indptr, self.indices, self.lengths, self.edge_id,
                                         self.active, len(self.edges), _DIST_RTOL)

    def remove(self, k: int):
        self.alive[k] = False
        self.active[self.edge_id == k] = False

    def components(self) -> list[list[int]]:
        labels = -np.ones(self.n, dtype=np.int64)
        comps = []
        for root in range(self.n):
            if labels[root] >= 0:
                continue
            labels[root] = len(comps)
            stack, comp = [root], [root]
            while stack:
                v = stack.pop()
                for p in range(self.indptr[v], self.indptr[v + 1]):
                    w = self.indices[p]
                    if self.active[p] and labels[w] < 0:
                        labels[w] = len(comps)
                        stack.append(int(w))
                        comp.append(int(w))
            comps.append(sorted(comp))
        return comps

    def connected(self, i: int, j: int) -> bool:
        seen = {i}
        stack = [i]
        while stack:
            v = stack.pop()
            if v == j:
                return True
            for p in range(self.indptr[v], self.indptr[v + 1]):
                w = int(self.indices[p])
                if self.active[p] and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False


def edge_betweenness(model: IsingModel) -> dict[Edge, float]:
    """Edge betweenness with coupling ``w`` treated as path length ``1/|w|``.

    Each unordered pair of variables contributes one unit, split evenly over
    its equal-length shortest paths. Couplings with ``|w| < 1e-12`` are not
    part of the graph.
    """
    g = _WorkingGraph(model)
    if not g.edges:
        raise InputError("model has no couplings; betweenness is undefined")
    return dict(zip(g.edges, g.scores().tolist()))


def girvan_newman_bipartition(model: IsingModel, seed: int = 0, parts: int = 2) -> Partition:
    """Split ``model`` by repeatedly deleting a maximum-betweenness coupling.

    Betweenness is recomputed after every deletion and ties (relative
    tolerance 1e-9) are broken uniformly at random from ``seed``. Deletion
    stops as soon as the working graph has ``parts`` connected components.
    Labels are assigned in order of each component's smallest index.
    """
    if model.n < 2:
        raise InputError("need at least two variables to partition")
    if parts < 2 or parts > model.n:
        raise InputError(f"parts must lie in [2, {model.n}]")
    g = _WorkingGraph(model)
    if len(g.components()) != 1:
        raise InputError("model graph is disconnected; split components before partitioning")
    rng = np.random.default_rng(seed)
    n_comp = 1
    removed = 0
    while n_comp < parts:
        scores = np.where(g.alive, g.scores(), -np.inf)
        top = scores.max()
        ties = np.flatnonzero(scores >= top - TIE_RTOL * abs(top))
        k = int(ties[rng.integers(len(ties))]) if len(ties) > 1 else int(ties[0])
        g.remove(k)
        removed += 1
        i, j = g.edges[k]
        if not g.connected(i, j):
            n_comp += 1
    log.debug("girvan-newman removed %d edges", removed)
    labels = [0] * model.n
    for label, comp in enumerate(g.components()):
        for v in comp:
            labels[v] = label
    return make_partition(model, labels)


def refined_bound(local_config, local_ground, partition: Partition, side: int) -> float:
    """Twice the boundary weight incident to nodes where the two configs differ."""
    bw = partition.boundary_weights(side)
    a = as_config(local_config, len(bw))
    g = as_config(local_ground, len(bw))
    return 2.0 * float(bw @ (a != g))


def induced_submodel(model: IsingModel, partition: Partition, side: int
                     ) -> tuple[IsingModel, np.ndarray]:
    """Sub-model of one community and its local-to-global index map.

    Boundary couplings are dropped. The model offset is carried by side 0 so
    that sub-model energies plus boundary terms add up to the full energy.
    """
    members = partition.members(side)
    if len(members) == 0:
        raise InputError(f"partition side {side} is empty")
    pos = {int(g): k for k, g in enumerate(members)}
    lin = {pos[i]: w for i, w in model.linear.items() if i in pos}
    quad = {(pos[i], pos[j]): w for (i, j), w in model.quadratic.items()
            if i in pos and j in pos}
    offset = model.offset if side == 0 else 0.0
    return IsingModel(len(members), lin, quad, offset), members


def boundary_energy(partition: Partition, config) -> float:
    s = np.asarray(config)
    return float(sum(w * s[i] * s[j] for i, j, w in partition.boundary_edges))
