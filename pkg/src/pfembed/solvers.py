"""Simulated annealing, exhaustive ground-state search and low-energy windows."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._kernels import gray_minimum, metropolis_anneal
from .errors import CapacityError, InputError
from .model import (SPECTRUM_MAX_N, IsingModel, all_energies, coupling_scale,
                    energies, energy, states_to_spins)

BRUTE_FORCE_MAX_N = 30
ENERGY_TOL = 1e-9


@dataclass(frozen=True)
class AnnealParams:
    """Geometric Metropolis schedule. Unset temperatures are filled per model."""

    sweeps: int = 1000
    restarts: int = 10
    seed: int = 0
    t_initial: Optional[float] = None
    t_final: Optional[float] = None

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise InputError("sweeps and restarts must be >= 1")
        if self.seed < 0:
            raise InputError("seed must be non-negative")
        if self.t_final is not None and self.t_final <= 0:
            raise InputError("t_final must be positive")
        if (self.t_initial is not None and self.t_final is not None
                and self.t_initial < self.t_final):
            raise InputError("t_initial must be >= t_final")

    def resolved(self, model: IsingModel, window: Optional[float] = None) -> "AnnealParams":
        t0, tf = default_temperatures(model, window)
        t0 = self.t_initial if self.t_initial is not None else t0
        tf = self.t_final if self.t_final is not None else tf
        return replace(self, t_initial=max(t0, tf), t_final=tf)

    def temperatures(self) -> np.ndarray:
        if self.t_initial is None or self.t_final is None:
            raise InputError("temperatures unresolved; call resolved(model) first")
        if self.sweeps == 1:
            return np.array([self.t_final])
        return np.geomspace(self.t_initial, self.t_final, self.sweeps)


def default_temperatures(model: IsingModel, window: Optional[float] = None) -> tuple[float, float]:
    """(t_initial, t_final): twice the largest local field scale, and
    window/10 when a window is given, else 5% of the median coupling."""
    scale = coupling_scale(model)
    t0 = 2.0 * scale if scale > 0 else 1.0
    if window is not None and window > 0:
        tf = window / 10.0
    else:
        _, _, w = model.edge_arrays
        mags = np.abs(w[w != 0]) if len(w) else np.abs(model.h[model.h != 0])
        tf = 0.05 * float(np.median(mags)) if len(mags) else 0.05
    return max(t0, tf), tf


@dataclass
class AnnealResult:
    best_config: np.ndarray
    best_energy: float
    samples: np.ndarray  # final state of each restart, shape (restarts, n)
    sample_energies: np.ndarray


@dataclass
class LocalSolutionSet:
    """Distinct configurations within ``window`` of the lowest energy, sorted.

    Entries are ordered by energy, then by configuration, so equal inputs give
    identical sets.
    """

    configs: np.ndarray  # (N, n) int8
    energies: np.ndarray  # (N,)
    window: float
    complete: bool = False

    def __post_init__(self):
        if len(self.configs) == 0:
            raise InputError("local solution set must not be empty")

    def __len__(self):
        return len(self.energies)

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def ground(self) -> np.ndarray:
        return self.configs[0]

    def entries(self):
        return [(c.copy(), float(e)) for c, e in zip(self.configs, self.energies)]


def make_solution_set(model: IsingModel, configs: np.ndarray, window: float,
                      complete: bool = False) -> LocalSolutionSet:
    """Deduplicate, re-evaluate, window-filter and sort candidate configurations."""
    configs = np.unique(np.asarray(configs, dtype=np.int8), axis=0)
    e = energies(model, configs)
    keep = e <= e.min() + window + ENERGY_TOL
    configs, e = configs[keep], e[keep]
    # np.unique already sorted rows lexicographically; stable sort keeps that as tie-break
    order = np.argsort(e, kind="stable")
    return LocalSolutionSet(configs[order], e[order], float(window), complete)


def _restart_stream(seed: int, restart: int, n: int, sweeps: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, restart]))
    init = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    order = rng.permuted(np.tile(np.arange(n, dtype=np.int64), (sweeps, 1)), axis=1)
    uniforms = rng.random((sweeps, n))
    return init, order, uniforms


def _run_restarts(model: IsingModel, params: AnnealParams, record: bool):
    h, indptr, indices, weights = model.csr
    betas = 1.0 / params.temperatures()
    for r in range(params.restarts):
        init, order, uniforms = _restart_stream(params.seed, r, model.n, params.sweeps)
        spins = init.copy()
        trace, _, best_state, _ = metropolis_anneal(h, indptr, indices, weights, betas,
                                                    spins, order, uniforms, record)
        yield spins, best_state, trace


def simulated_anneal(model: IsingModel, params: AnnealParams) -> AnnealResult:
    """Metropolis annealing with independent per-restart random streams.

    Each sweep visits every spin once, one at a time, in a fresh random order.

    Restart ``r`` draws its initial spins and acceptance uniforms from
    ``SeedSequence([seed, r])``, so results do not depend on scheduling.
    """
    if model.n < 1:
        raise InputError("model has no variables")
    params = params.resolved(model)
    finals, bests = [], []
    for spins, best_state, _ in _run_restarts(model, params, record=False):
        finals.append(spins)
        bests.append(best_state)
    finals = np.array(finals)
    bests = np.array(bests)
    best_e = energies(model, bests)
    k = int(np.argmin(best_e))
    return AnnealResult(bests[k].copy(), float(best_e[k]), finals, energies(model, finals))


def brute_force_ground(model: IsingModel) -> tuple[np.ndarray, float]:
    """Exact ground state by Gray-code enumeration (first minimum found wins)."""
    if model.n > BRUTE_FORCE_MAX_N:
        raise CapacityError(f"n={model.n} exceeds brute-force limit {BRUTE_FORCE_MAX_N}")
    if model.n == 0:
        return np.zeros(0, dtype=np.int8), model.offset
    h, indptr, indices, weights = model.csr
    state, _ = gray_minimum(h, indptr, indices, weights, model.offset, 1e-10)
    config = states_to_spins(np.array([state]), model.n)[0]
    return config, energy(model, config)


def enumerate_low_energy(model: IsingModel, window: float) -> LocalSolutionSet:
    """Every configuration with energy at most ground + window."""
    if window < 0:
        raise InputError("window must be non-negative")
    if model.n > SPECTRUM_MAX_N:
        raise CapacityError(f"n={model.n} exceeds exhaustive limit {SPECTRUM_MAX_N}")
    if model.n == 0:
        return LocalSolutionSet(np.zeros((1, 0), dtype=np.int8),
                                np.array([model.offset]), float(window), True)
    e = all_energies(model)
    states = np.flatnonzero(e <= e.min() + window + ENERGY_TOL)
    return make_solution_set(model, states_to_spins(states, model.n), window, complete=True)


def sample_low_energy(model: IsingModel, params: AnnealParams, window: float) -> LocalSolutionSet:
    """Distinct annealing states within ``window`` of the best state seen.

    States are collected after every sweep of every restart. The result is a
    heuristic subset of the true window.
    """
    if window < 0:
        raise InputError("window must be non-negative")
    if model.n < 1:
        raise InputError("model has no variables")
    params = params.resolved(model, window)
    seen = []
    for spins, best_state, trace in _run_restarts(model, params, record=True):
        seen.append(np.unique(trace, axis=0))
        seen.append(best_state[None, :])
    return make_solution_set(model, np.concatenate(seen), window)
