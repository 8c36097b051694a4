"""Compiled inner loops. Callers pass CSR adjacency arrays from ``IsingModel.csr``."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _initial_energy(h, indptr, indices, weights, offset, spins):
    e = offset
    n = h.shape[0]
    for i in range(n):
        e += h[i] * spins[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j > i:
                e += weights[k] * spins[i] * spins[j]
    return e


@njit(cache=True, nogil=True)
def _lowest_bit(k):
    i = 0
    while not (k >> i) & 1:
        i += 1
    return i


@njit(cache=True, nogil=True)
def gray_energies(h, indptr, indices, weights, offset):
    """Energy of every state, indexed by bitmask (bit i set means s_i = +1)."""
    n = h.shape[0]
    size = 1 << n
    out = np.empty(size, dtype=np.float64)
    spins = -np.ones(n, dtype=np.float64)
    e = _initial_energy(h, indptr, indices, weights, offset, spins)
    out[0] = e
    state = 0
    for k in range(1, size):
        i = _lowest_bit(k)
        field = h[i]
        for p in range(indptr[i], indptr[i + 1]):
            field += weights[p] * spins[indices[p]]
        e -= 2.0 * spins[i] * field
        spins[i] = -spins[i]
        state ^= 1 << i
        out[state] = e
    return out


@njit(cache=True, nogil=True)
def gray_minimum(h, indptr, indices, weights, offset, tol):
    """First minimum in single-bit-flip (Gray) order; returns (bitmask, energy)."""
    n = h.shape[0]
    size = 1 << n
    spins = -np.ones(n, dtype=np.float64)
    e = _initial_energy(h, indptr, indices, weights, offset, spins)
    best = e
    best_state = 0
    state = 0
    for k in range(1, size):
        i = _lowest_bit(k)
        field = h[i]
        for p in range(indptr[i], indptr[i + 1]):
            field += weights[p] * spins[indices[p]]
        e -= 2.0 * spins[i] * field
        spins[i] = -spins[i]
        state ^= 1 << i
        if e < best - tol:
            best = e
            best_state = state
    return best_state, best


@njit(cache=True, nogil=True)
def metropolis_anneal(h, indptr, indices, weights, betas, spins, order, uniforms, record):
    """Sequential-sweep Metropolis annealing of ``spins`` in place.

    ``order`` and ``uniforms`` have shape (sweeps, n); row t of ``order`` is
    the visiting order of sweep t. When ``record`` is true the state after
    every sweep is written to the returned trace, otherwise the trace is empty.
    Returns (trace, trace_energy_deltas, best_state, best_delta) where energies
    are relative to the starting state.
    """
    n = h.shape[0]
    sweeps = betas.shape[0]
    if record:
        trace = np.empty((sweeps, n), dtype=np.int8)
        deltas = np.empty(sweeps, dtype=np.float64)
    else:
        trace = np.empty((0, n), dtype=np.int8)
        deltas = np.empty(0, dtype=np.float64)
    e = 0.0
    best = 0.0
    best_state = spins.copy()
    for t in range(sweeps):
        beta = betas[t]
        for k in range(n):
            i = order[t, k]
            field = h[i]
            for p in range(indptr[i], indptr[i + 1]):
                field += weights[p] * spins[indices[p]]
            de = -2.0 * spins[i] * field
            if de <= 0.0 or uniforms[t, k] < np.exp(-de * beta):
                spins[i] = -spins[i]
                e += de
        if record:
            trace[t, :] = spins
            deltas[t] = e
        if e < best:
            best = e
            best_state[:] = spins
    return trace, deltas, best_state, best


@njit(cache=True, nogil=True)
def edge_betweenness(indptr, indices, lengths, edge_id, active, n_edges, rtol):
    """Brandes edge betweenness over the active CSR entries.

    Dijkstra uses an O(V^2) array scan, which beats a heap at the graph sizes
    exhaustive merging can handle. Path lengths within ``rtol`` count as equal.
    Each unordered pair is counted once.
    """
    n = indptr.shape[0] - 1
    score = np.zeros(n_edges)
    dist = np.empty(n)
    sigma = np.empty(n)
    delta = np.empty(n)
    done = np.empty(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        dist[:] = np.inf
        dist[s] = 0.0
        done[:] = False
        cnt = 0
        for _ in range(n):
            u = -1
            best = np.inf
            for v in range(n):
                if not done[v] and dist[v] < best:
                    best = dist[v]
                    u = v
            if u == -1:
                break
            done[u] = True
            order[cnt] = u
            cnt += 1
            for p in range(indptr[u], indptr[u + 1]):
                if active[p]:
                    w = indices[p]
                    nd = dist[u] + lengths[p]
                    if nd < dist[w]:
                        dist[w] = nd
        sigma[:] = 0.0
        sigma[s] = 1.0
        for k in range(1, cnt):
            w = order[k]
            tol = rtol * max(1.0, dist[w])
            for p in range(indptr[w], indptr[w + 1]):
                if active[p]:
                    v = indices[p]
                    if done[v] and abs(dist[v] + lengths[p] - dist[w]) <= tol and dist[v] < dist[w]:
                        sigma[w] += sigma[v]
        delta[:] = 0.0
        for k in range(cnt - 1, 0, -1):
            w = order[k]
            coeff = (1.0 + delta[w]) / sigma[w]
            tol = rtol * max(1.0, dist[w])
            for p in range(indptr[w], indptr[w + 1]):
                if active[p]:
                    v = indices[p]
                    if done[v] and abs(dist[v] + lengths[p] - dist[w]) <= tol and dist[v] < dist[w]:
                        c = sigma[v] * coeff
                        score[edge_id[p]] += c
                        delta[v] += c
    return score / 2.0
