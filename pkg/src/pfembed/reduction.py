"""Exact elimination of low-degree spins.

A spin whose only couplings go to one or two other spins can be minimised out:
for every assignment of its neighbours we keep the best value of the spin, and
the resulting table of minimal energies is reproduced exactly by a constant,
two fields and one coupling on the neighbours. Repeating this reduces any tree
or ring to a single spin per connected component.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import CapacityError, InputError
from .model import IsingModel, all_energies, as_config, canonical_edge, states_to_spins

SEGMENT_MAX = 24

# Boundary assignments in table order: (+,+), (+,-), (-,+), (-,-)
PAIR_KEYS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
SINGLE_KEYS = ((1,), (-1,))


@dataclass(frozen=True)
class ReductionRecord:
    """One elimination step.

    ``table`` maps each boundary assignment to the minimising internal spins
    (``{variable: spin}``) and the minimal energy of the eliminated terms.
    ``fitted`` is ``(c, h1)`` for one boundary spin and ``(c, h1, h2, J12)``
    for two.
    """

    segment: tuple[int, ...]
    boundary: tuple[int, ...]
    table: dict
    fitted: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "segment": list(self.segment),
            "boundary": list(self.boundary),
            "table": [{"boundary": list(k), "internal": {str(v): s for v, s in cfg.items()},
                       "energy": e} for k, (cfg, e) in self.table.items()],
            "fitted": list(self.fitted),
        }


@dataclass(frozen=True)
class Reduction:
    model: IsingModel
    survivors: tuple[int, ...]  # original index of each reduced variable
    records: tuple[ReductionRecord, ...]
    n_original: int

    @property
    def eliminated(self) -> int:
        return self.n_original - len(self.survivors)

    def to_dict(self) -> dict:
        return {"n_original": self.n_original, "survivors": list(self.survivors),
                "records": [r.to_dict() for r in self.records]}


def enumerate_segment(model: IsingModel, segment: Iterable[int], boundary: tuple[int, ...]) -> dict:
    """Minimal segment energy, and its internal spins, for each boundary assignment.

    The segment energy counts the fields of every segment variable and the
    couplings with both ends in the segment. Internal (non-boundary) variables
    must not couple outside the segment.
    """
    segment = sorted(set(int(v) for v in segment))
    boundary = tuple(int(b) for b in boundary)
    if len(boundary) not in (1, 2) or len(set(boundary)) != len(boundary):
        raise InputError("boundary must hold one or two distinct variables")
    if not set(boundary) <= set(segment):
        raise InputError("boundary variables must belong to the segment")
    if len(segment) > SEGMENT_MAX:
        raise CapacityError(f"segment of {len(segment)} exceeds {SEGMENT_MAX}")
    inside = set(segment)
    internal = [v for v in segment if v not in boundary]
    for v in internal:
        leaks = [u for u in model.neighbors(v) if u not in inside]
        if leaks:
            raise InputError(f"internal variable {v} couples outside the segment ({leaks[0]})")
    pos = {g: k for k, g in enumerate(segment)}
    sub = IsingModel(
        len(segment),
        {pos[i]: w for i, w in model.linear.items() if i in inside},
        {(pos[i], pos[j]): w for (i, j), w in model.quadratic.items()
         if i in inside and j in inside},
    )
    e = all_energies(sub)
    spins = states_to_spins(np.arange(len(e)), len(segment))
    keys = PAIR_KEYS if len(boundary) == 2 else SINGLE_KEYS
    table = {}
    for key in keys:
        mask = np.ones(len(e), dtype=bool)
        for b, s in zip(boundary, key):
            mask &= spins[:, pos[b]] == s
        idx = np.flatnonzero(mask)
        best = idx[np.argmin(e[idx])]
        table[key] = ({v: int(spins[best, pos[v]]) for v in internal}, float(e[best]))
    return table


def fit_boundary_model(table: dict) -> tuple[float, ...]:
    """Constant, fields and coupling reproducing the table energies exactly."""
    if len(table) == 4:
        epp, epm, emp, emm = (table[k][1] for k in PAIR_KEYS)
        return ((epp + epm + emp + emm) / 4.0,
                (epp + epm - emp - emm) / 4.0,
                (epp - epm + emp - emm) / 4.0,
                (epp - epm - emp + emm) / 4.0)
    if len(table) == 2:
        ep, em = (table[k][1] for k in SINGLE_KEYS)
        return ((ep + em) / 2.0, (ep - em) / 2.0)
    raise InputError(f"table must have 2 or 4 entries, got {len(table)}")


def evaluate_fit(fitted: tuple[float, ...], key: tuple[int, ...]) -> float:
    if len(fitted) == 4:
        c, h1, h2, j12 = fitted
        return c + h1 * key[0] + h2 * key[1] + j12 * key[0] * key[1]
    c, h1 = fitted
    return c + h1 * key[0]


def reduce_chain(model: IsingModel, protected: Iterable[int] = ()) -> Reduction:
    """Eliminate degree-1 and degree-2 variables until none remain.

    Variables in ``protected`` are never eliminated. Elimination proceeds in
    ascending index order among eligible variables; isolated variables stay.
    """
    protected = set(int(p) for p in protected)
    lin = dict(model.linear)
    adj: dict[int, dict[int, float]] = {i: {} for i in range(model.n)}
    for (i, j), w in model.quadratic.items():
        adj[i][j] = w
        adj[j][i] = w
    offset = model.offset
    alive = set(range(model.n))
    records = []

    def eligible(v):
        return v in alive and v not in protected and 1 <= len(adj[v]) <= 2

    heap = [v for v in range(model.n) if eligible(v)]
    heapq.heapify(heap)
    while heap:
        v = heapq.heappop(heap)
        if not eligible(v):
            continue
        boundary = tuple(sorted(adj[v]))
        hv = lin.get(v, 0.0)
        keys = PAIR_KEYS if len(boundary) == 2 else SINGLE_KEYS
        table = {}
        for key in keys:
            local = hv + sum(adj[v][b] * s for b, s in zip(boundary, key))
            # min over s_v of s_v * local; ties resolve to s_v = +1
            sv = -1 if local > 0 else 1
            table[key] = ({v: sv}, float(sv * local))
        fitted = fit_boundary_model(table)
        offset += fitted[0]
        for b, hb in zip(boundary, fitted[1:3]):
            lin[b] = lin.get(b, 0.0) + hb
        if len(boundary) == 2:
            u1, u2 = boundary
            j12 = adj[u1].get(u2, 0.0) + fitted[3]
            if j12 != 0.0:
                adj[u1][u2] = j12
                adj[u2][u1] = j12
            else:
                adj[u1].pop(u2, None)
                adj[u2].pop(u1, None)
        for b in boundary:
            del adj[b][v]
        adj[v] = {}
        lin.pop(v, None)
        alive.discard(v)
        records.append(ReductionRecord((v,) + boundary, boundary, table, fitted))
        for b in boundary:
            if eligible(b):
                heapq.heappush(heap, b)

    survivors = tuple(sorted(alive))
    pos = {g: k for k, g in enumerate(survivors)}
    quad = {}
    for i in survivors:
        for j, w in adj[i].items():
            if i < j and w != 0.0:
                quad[canonical_edge(pos[i], pos[j])] = w
    reduced = IsingModel(len(survivors),
                         {pos[i]: w for i, w in lin.items() if w != 0.0},
                         quad, offset)
    return Reduction(reduced, survivors, tuple(records), model.n)


def reconstruct(reduction: Reduction, reduced_config) -> np.ndarray:
    """Full configuration of the original model from a reduced configuration.

    Records are replayed newest first, so every boundary spin is known by the
    time the spin eliminated against it is looked up.
    """
    r = as_config(reduced_config, len(reduction.survivors))
    full = np.zeros(reduction.n_original, dtype=np.int8)
    full[list(reduction.survivors)] = r
    for rec in reversed(reduction.records):
        key = tuple(int(full[b]) for b in rec.boundary)
        if 0 in key:
            raise RuntimeError(f"boundary of eliminated segment {rec.segment} is unassigned")
        for v, s in rec.table[key][0].items():
            full[v] = s
    if (full == 0).any():
        raise RuntimeError("reduction records do not cover every variable")
    return full


def fixpoint(model: IsingModel, protected: Iterable[int] = ()) -> bool:
    """True when ``model`` has no eliminable variable."""
    protected = set(protected)
    return not any(v not in protected and 1 <= model.degree(v) <= 2 for v in range(model.n))


__all__ = ["ReductionRecord", "Reduction", "enumerate_segment", "fit_boundary_model",
           "evaluate_fit", "reduce_chain", "reconstruct", "fixpoint", "PAIR_KEYS"]
