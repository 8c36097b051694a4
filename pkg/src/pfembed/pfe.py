"""Divide-and-conquer ground-state search.

The model is bipartitioned by Girvan-Newman, each side is solved within an
energy window above its local ground state, and the two candidate lists are
merged across the boundary. With exhaustive sides and the window set to the
boundary bound ``a`` the merge is exact: the global optimum restricted to a
side can sit at most ``a`` above that side's ground energy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import InputError
from .model import IsingModel, energy, is_connected
from .partition import Partition, girvan_newman_bipartition, induced_submodel
from .solvers import (AnnealParams, LocalSolutionSet, enumerate_low_energy, sample_low_energy)

MERGE_CHUNK = 1 << 22
SUBSOLVERS = ("exhaustive", "annealed")


class DegradedError(InputError):
    """A side was left without candidates after filtering."""


@dataclass(frozen=True)
class PfeConfig:
    subsolver: str = "exhaustive"
    anneal: Optional[AnnealParams] = None
    window: Union[str, float] = "auto"  # "auto" means the boundary bound a
    refined: bool = False
    top_k: Optional[int] = None
    seed: int = 0
    parts: int = 2

    def __post_init__(self):
        if self.subsolver == "sa":
            object.__setattr__(self, "subsolver", "annealed")
        if self.subsolver not in SUBSOLVERS:
            raise InputError(f"unknown subsolver {self.subsolver!r}")
        if self.window != "auto" and (not isinstance(self.window, (int, float)) or self.window < 0):
            raise InputError("window must be 'auto' or a non-negative number")
        if self.top_k is not None and self.top_k < 1:
            raise InputError("top_k must be >= 1")
        if self.parts != 2:
            raise InputError("only bipartition is supported")


@dataclass
class PfeResult:
    config: np.ndarray
    energy: float
    partition: Partition
    n_local: tuple[int, int]
    merge_pairs_evaluated: int
    window: float
    local_sets: Optional[tuple[LocalSolutionSet, LocalSolutionSet]] = None
    merged: list = field(default_factory=list)  # top_k (config, energy) pairs
    stage_seconds: dict = field(default_factory=dict)

    def to_dict(self, include_sets: bool = False) -> dict:
        doc = {
            "config": self.config.tolist(),
            "energy": self.energy,
            "partition": self.partition.to_dict(),
            "n_local": list(self.n_local),
            "merge_pairs_evaluated": self.merge_pairs_evaluated,
            "window": self.window,
        }
        if self.merged:
            doc["merged"] = [{"config": c.tolist(), "energy": e} for c, e in self.merged]
        if include_sets and self.local_sets is not None:
            doc["local_sets"] = [{"configs": s.configs.tolist(), "energies": s.energies.tolist(),
                                  "window": s.window} for s in self.local_sets]
        return doc


def filter_by_bound(sset: LocalSolutionSet, window: float) -> LocalSolutionSet:
    """Entries within ``window`` of the set's ground energy."""
    keep = sset.energies <= sset.ground_energy + window + 1e-9
    return LocalSolutionSet(sset.configs[keep], sset.energies[keep],
                            min(window, sset.window), sset.complete)


def refined_gaps(sset: LocalSolutionSet, partition: Partition, side: int) -> np.ndarray:
    """Per-entry bound: twice the boundary weight at nodes differing from the ground entry."""
    bw = partition.boundary_weights(side)
    return 2.0 * ((sset.configs != sset.ground) @ bw)


def filter_refined(sset: LocalSolutionSet, partition: Partition, side: int) -> LocalSolutionSet:
    """Keep entries whose excess over the ground entry is within their refined bound."""
    keep = sset.energies - sset.ground_energy <= refined_gaps(sset, partition, side) + 1e-9
    return LocalSolutionSet(sset.configs[keep], sset.energies[keep], sset.window, sset.complete)


def merge(set_a: LocalSolutionSet, set_b: LocalSolutionSet, boundary, maps, top_k: Optional[int] = None):
    """Best combination of one entry from each side.

    ``boundary`` holds global ``(i, j, w)`` couplings and ``maps`` the two
    local-to-global index arrays. All N*M pairs are scored; ties go to the
    lowest (a, b) index pair. Returns ``(config, energy, pairs, top)`` where
    ``top`` lists the ``top_k`` best merged (config, energy) pairs.
    """
    if len(set_a) == 0 or len(set_b) == 0:
        raise InputError("cannot merge an empty solution set")
    map_a, map_b = (np.asarray(m) for m in maps)
    pos_a = {int(g): k for k, g in enumerate(map_a)}
    pos_b = {int(g): k for k, g in enumerate(map_b)}
    ia, ib, w = [], [], []
    for i, j, wij in boundary:
        if i in pos_a and j in pos_b:
            ia.append(pos_a[i]); ib.append(pos_b[j])
        elif j in pos_a and i in pos_b:
            ia.append(pos_a[j]); ib.append(pos_b[i])
        else:
            raise InputError(f"boundary edge ({i}, {j}) does not cross the two sides")
        w.append(wij)
    w = np.asarray(w, dtype=np.float64)
    left = set_a.configs[:, ia].astype(np.float64) * w
    right = set_b.configs[:, ib].astype(np.float64).T
    n_a, n_b = len(set_a), len(set_b)
    rows = max(1, MERGE_CHUNK // n_b)
    k = top_k or 1
    cand_e = np.empty(0)
    cand_idx = np.empty(0, dtype=np.int64)
    for start in range(0, n_a, rows):
        stop = min(n_a, start + rows)
        block = set_a.energies[start:stop, None] + set_b.energies[None, :]
        if len(w):
            block = block + left[start:stop] @ right
        flat = block.ravel()
        if k == 1:
            pick = np.array([int(np.argmin(flat))])
        else:
            kk = min(k, flat.size)
            pick = np.argpartition(flat, kk - 1)[:kk]
        cand_e = np.concatenate([cand_e, flat[pick]])
        cand_idx = np.concatenate([cand_idx, pick + start * n_b])
        order = np.lexsort((cand_idx, cand_e))[:k]
        cand_e, cand_idx = cand_e[order], cand_idx[order]

    def assemble(flat_idx):
        a, b = divmod(int(flat_idx), n_b)
        full = np.empty(len(map_a) + len(map_b), dtype=np.int8)
        full[map_a] = set_a.configs[a]
        full[map_b] = set_b.configs[b]
        return full

    top = [(assemble(i), float(e)) for i, e in zip(cand_idx, cand_e)]
    return top[0][0], top[0][1], n_a * n_b, top


def solve_side(sub: IsingModel, cfg: PfeConfig, window: float, side: int) -> LocalSolutionSet:
    if cfg.subsolver == "exhaustive":
        return enumerate_low_energy(sub, window)
    params = cfg.anneal or AnnealParams()
    params = replace(params, seed=cfg.seed ^ side)
    return sample_low_energy(sub, params, window)


def solve_pfe(model: IsingModel, cfg: PfeConfig = PfeConfig(),
              partition: Optional[Partition] = None) -> PfeResult:
    """Partition, solve both sides within the window, filter and merge."""
    if model.n < 2:
        raise InputError("divide-and-conquer needs at least two variables")
    clock = {}
    t = time.perf_counter()
    if partition is None:
        if not is_connected(model):
            raise InputError("model graph is disconnected")
        partition = girvan_newman_bipartition(model, cfg.seed, cfg.parts)
    clock["partition"] = time.perf_counter() - t
    window = partition.bound_a if cfg.window == "auto" else float(cfg.window)

    t = time.perf_counter()
    sets, maps = [], []
    for side in (0, 1):
        sub, members = induced_submodel(model, partition, side)
        sset = solve_side(sub, cfg, window, side)
        if cfg.refined:
            refined = filter_refined(sset, partition, side)
            if len(refined) == 0 and cfg.subsolver == "annealed":
                refined = filter_by_bound(sset, partition.bound_a)
            sset = refined
        if len(sset) == 0:
            raise DegradedError(f"side {side} has no candidates within window {window}")
        sets.append(sset)
        maps.append(members)
    clock["solve"] = time.perf_counter() - t

    t = time.perf_counter()
    config, _, pairs, top = merge(sets[0], sets[1], partition.boundary_edges, maps, cfg.top_k)
    clock["merge"] = time.perf_counter() - t
    merged = [(c, energy(model, c)) for c, _ in top] if cfg.top_k else []
    return PfeResult(config, energy(model, config), partition, (len(sets[0]), len(sets[1])),
                     pairs, window, (sets[0], sets[1]), merged, clock)


__all__ = ["PfeConfig", "PfeResult", "DegradedError", "merge", "solve_pfe", "filter_by_bound",
           "filter_refined", "refined_gaps", "solve_side"]
