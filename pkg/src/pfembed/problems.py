"""Instance generators: factoring QUBOs, Kagome lattices, chains and random models."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .model import IsingModel, QuboModel, as_config, spins_to_binary

log = logging.getLogger(__name__)


# -- integer factorisation -------------------------------------------------

def _smallest_factor(n: int) -> Optional[int]:
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return None


def _factor_pairs(n: int) -> list[tuple[int, int]]:
    return [(p, n // p) for p in range(3, math.isqrt(n) + 1, 2) if n % p == 0]


@dataclass(frozen=True)
class FactorEncoding:
    """QUBO whose zero-energy states encode ``target = p * q``.

    ``p_bits`` and ``q_bits`` list, least significant first, the model
    variable holding each bit, or ``None`` where the bit is fixed to 1.
    """

    target: int
    p_bits: tuple[Optional[int], ...]
    q_bits: tuple[Optional[int], ...]
    aux_bits: tuple[int, ...]
    carry_bits: tuple[int, ...]
    penalty_scale: float
    model: QuboModel
    names: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"target": self.target, "p_bits": list(self.p_bits), "q_bits": list(self.q_bits),
                "aux_bits": list(self.aux_bits), "carry_bits": list(self.carry_bits),
                "penalty_scale": self.penalty_scale, "names": list(self.names)}

    @classmethod
    def from_dict(cls, doc: dict, model: QuboModel) -> "FactorEncoding":
        return cls(int(doc["target"]), tuple(doc["p_bits"]), tuple(doc["q_bits"]),
                   tuple(doc["aux_bits"]), tuple(doc.get("carry_bits", ())),
                   float(doc["penalty_scale"]), model, tuple(doc.get("names", ())))


def _default_widths(N: int) -> tuple[int, int, bool]:
    """(p width, q width, msb fixed). Balanced widths with both end bits fixed
    when N has a factor pair of equal bit length, else the covering widths."""
    n = N.bit_length()
    m = (n + 1) // 2
    if any(p.bit_length() == m and q.bit_length() == m for p, q in _factor_pairs(N)):
        return m, m, True
    return m, n - 1, False


def factor_to_qubo(N: int, p_bits: Optional[int] = None, q_bits: Optional[int] = None,
                   penalty_scale: Optional[float] = None) -> FactorEncoding:
    """Multiplication-table QUBO for ``N``.

    Each column of the long multiplication contributes the square of
    (partial products + incoming carries - bit of N - outgoing carries).
    Products of two free bits are replaced by auxiliary bits held in place
    by the penalty ``ab - 2at - 2bt + 3t``, which vanishes iff ``t = ab``.
    Every term is non-negative, so the minimum energy is 0 and is reached
    exactly by consistent multiplications of N.

    With explicit widths both the leading and trailing bits are fixed to 1.
    """
    N = int(N)
    if N < 9 or N % 2 == 0:
        raise InputError(f"N={N} must be odd and at least 9")
    if _smallest_factor(N) is None:
        raise InputError(f"N={N} is prime")
    if p_bits is None and q_bits is None:
        pw, qw, fix_msb = _default_widths(N)
    elif p_bits is None or q_bits is None:
        raise InputError("give both p_bits and q_bits or neither")
    else:
        pw, qw, fix_msb = int(p_bits), int(q_bits), True
        if pw < 2 or qw < 2:
            raise InputError("factor widths must be at least 2 bits")

    names: list[str] = []

    def new_var(name: str) -> int:
        names.append(name)
        return len(names) - 1

    def layout(width: int, label: str) -> tuple[Optional[int], ...]:
        out = []
        for i in range(width):
            fixed = i == 0 or (fix_msb and i == width - 1)
            out.append(None if fixed else new_var(f"{label}{i}"))
        return tuple(out)

    p_layout = layout(pw, "p")
    q_layout = layout(qw, "q")

    n_bits = N.bit_length()
    n_cols = max(pw + qw - 1, n_bits)
    # column k -> (constant, {var: coefficient}) and its maximum possible value
    consts = [0] * (n_cols + 1)
    linear: list[dict[int, int]] = [dict() for _ in range(n_cols + 1)]
    aux: list[tuple[int, int, int]] = []
    for i, pv in enumerate(p_layout):
        for j, qv in enumerate(q_layout):
            k = i + j
            if pv is None and qv is None:
                consts[k] += 1
            elif pv is None or qv is None:
                v = qv if pv is None else pv
                linear[k][v] = linear[k].get(v, 0) + 1
            else:
                t = new_var(f"t_p{i}q{j}")
                aux.append((t, pv, qv))
                linear[k][t] = linear[k].get(t, 0) + 1
    carries = []
    for k in range(n_cols + 1):
        max_sum = consts[k] + sum(linear[k].values())
        m = 1
        while max_sum >= 2 ** m:
            target = k + m
            if target < n_bits:
                c = new_var(f"c{k}_{target}")
                carries.append(c)
                linear[k][c] = linear[k].get(c, 0) - 2 ** m
                linear[target][c] = linear[target].get(c, 0) + 1
            m += 1

    terms: dict[tuple[int, int], float] = {}

    def add(i: int, j: int, w: float):
        key = (i, j) if i <= j else (j, i)
        terms[key] = terms.get(key, 0.0) + w

    offset = 0.0
    for k in range(n_cols + 1):
        c0 = consts[k] - ((N >> k) & 1)
        items = sorted(linear[k].items())
        offset += c0 * c0
        for a, (u, au) in enumerate(items):
            add(u, u, au * au + 2 * c0 * au)
            for v, av in items[a + 1:]:
                add(u, v, 2 * au * av)
    scale = max((abs(w) for w in terms.values()), default=1.0)
    penalty = 2.0 * scale if penalty_scale is None else float(penalty_scale)
    if penalty <= 0:
        raise InputError("penalty_scale must be positive")
    for t, a, b in aux:
        add(a, b, penalty)
        add(a, t, -2 * penalty)
        add(b, t, -2 * penalty)
        add(t, t, 3 * penalty)
    terms = {k: w for k, w in terms.items() if w != 0.0}
    model = QuboModel(len(names), terms, offset)
    return FactorEncoding(N, p_layout, q_layout, tuple(t for t, _, _ in aux), tuple(carries),
                          penalty, model, tuple(names))


def decode_factors(encoding: FactorEncoding, config, vartype: str = "spin") -> tuple[int, int]:
    """Integers held in the factor bits of ``config`` (fixed bits count as 1)."""
    x = as_config(config, encoding.model.n, vartype)
    if vartype == "spin":
        x = spins_to_binary(x)

    def value(layout):
        return sum((1 if v is None else int(x[v])) << i for i, v in enumerate(layout))

    return value(encoding.p_bits), value(encoding.q_bits)


def is_factorisation(encoding: FactorEncoding, config, vartype: str = "spin") -> bool:
    p, q = decode_factors(encoding, config, vartype)
    return p * q == encoding.target and p > 1 and q > 1


# -- lattices --------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSpec:
    rows: int
    cols: int
    J: float = 1.0
    h: float = 0.0
    periodic: bool = True

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InputError("rows and cols must be >= 1")

    @property
    def sites(self) -> int:
        return 3 * self.rows * self.cols


def kagome_site(spec: LatticeSpec, row: int, col: int, sub: int) -> int:
    """Cell-major site index; ``sub`` 0, 1, 2 are the A, B, C sublattices."""
    return (row * spec.cols + col) * 3 + sub


def kagome_lattice(spec: LatticeSpec) -> IsingModel:
    """Kagome (trihexagonal) lattice with uniform coupling and field.

    Each unit cell holds an up-triangle A-B-C. Down-triangles join B of cell
    (r, c), A of cell (r, c+1) and C of cell (r-1, c+1). Periodic lattices
    wrap both directions; couplings that coincide on 1-wide lattices are summed.
    """
    R, C = spec.rows, spec.cols
    quad: dict[tuple[int, int], float] = {}
    merged = 0

    def bond(a, b):
        nonlocal merged
        key = (a, b) if a < b else (b, a)
        if key in quad:
            merged += 1
        quad[key] = quad.get(key, 0.0) + spec.J

    for r in range(R):
        for c in range(C):
            a, b, cc = (kagome_site(spec, r, c, s) for s in range(3))
            bond(a, b)
            bond(b, cc)
            bond(a, cc)
            r2, c2 = r - 1, c + 1
            if not spec.periodic and (r2 < 0 or c2 >= C):
                continue
            a2 = kagome_site(spec, r, c2 % C, 0)
            c3 = kagome_site(spec, r2 % R, c2 % C, 2)
            bond(b, a2)
            bond(a2, c3)
            bond(b, c3)
    if merged:
        log.warning("kagome %dx%d: %d coinciding couplings summed", R, C, merged)
    lin = {i: spec.h for i in range(spec.sites)} if spec.h != 0.0 else {}
    return IsingModel(spec.sites, lin, quad)


def kagome_min_energy(spec: LatticeSpec) -> float:
    """Exact ground energy of a periodic Kagome lattice with ``h = J > 0``.

    Every site lies in one up- and one down-triangle, so the energy splits
    into per-triangle terms ``J * (S**2 - 3) / 2 + h * S / 2`` with ``S`` the
    triangle's spin sum; the minimum ``-1.5 J`` is at ``S = -1``. It is
    attained everywhere at once by choosing the up spins as a perfect
    matching of the (bipartite, 3-regular) honeycomb lattice of triangles.
    """
    if not spec.periodic or spec.rows < 2 or spec.cols < 2 or spec.J <= 0 or spec.h != spec.J:
        raise InputError("closed form needs a periodic lattice, rows, cols >= 2 and h = J > 0")
    return -1.5 * spec.J * 2 * spec.rows * spec.cols


def chain(n: int, J: float, h: float = 0.0, periodic: bool = False) -> IsingModel:
    """Uniform open chain or ring."""
    if n < 2 or (periodic and n < 3):
        raise InputError("chain needs n >= 2 (n >= 3 when periodic)")
    quad = {(i, i + 1): J for i in range(n - 1)}
    if periodic:
        quad[(0, n - 1)] = J
    lin = {i: h for i in range(n)} if h != 0.0 else {}
    return IsingModel(n, lin, quad)


# -- random instances ------------------------------------------------------

def random_tree(n: int, seed: int, scale: float = 1.0) -> IsingModel:
    """Random recursive tree with uniform fields and couplings in [-scale, scale]."""
    rng = np.random.default_rng(seed)
    quad = {(int(rng.integers(v)), v): float(rng.uniform(-scale, scale)) for v in range(1, n)}
    lin = {i: float(rng.uniform(-scale, scale)) for i in range(n)}
    return IsingModel(n, lin, quad)


def random_ising(n: int, seed: int, edge_prob: float = 0.3, scale: float = 1.0,
                 fields: bool = True) -> IsingModel:
    """Connected random model: a random spanning tree plus extra couplings
    with probability ``edge_prob``; coefficients uniform in [-scale, scale]."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        a, b = int(perm[k]), int(perm[rng.integers(k)])
        edges.add((min(a, b), max(a, b)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < edge_prob:
                edges.add((i, j))
    quad = {}
    for e in sorted(edges):
        w = 0.0
        while w == 0.0:
            w = float(rng.uniform(-scale, scale))
        quad[e] = w
    lin = {i: float(rng.uniform(-scale, scale)) for i in range(n)} if fields else {}
    return IsingModel(n, lin, quad)
