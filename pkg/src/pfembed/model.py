"""Sparse Ising and QUBO models, energy evaluation and file I/O.

Spins take values in {-1, +1}; the binary variable of a spin is x = (1 + s) / 2.
Configurations are plain integer numpy arrays. Quadratic keys are stored in
canonical ``(i, j)`` form with ``i < j``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Union

import numpy as np

from ._kernels import gray_energies
from .errors import CapacityError, InputError

log = logging.getLogger(__name__)

SPECTRUM_MAX_N = 24

Edge = tuple[int, int]


def canonical_edge(i: int, j: int) -> Edge:
    if i == j:
        raise InputError(f"self-coupling ({i}, {j}) is not a quadratic term")
    return (i, j) if i < j else (j, i)


def _check_index(i: int, n: int) -> int:
    i = int(i)
    if not 0 <= i < n:
        raise InputError(f"variable index {i} outside [0, {n})")
    return i


@dataclass(frozen=True, eq=True)
class IsingModel:
    """Ising energy ``offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j``."""

    n: int
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[Edge, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise InputError("variable count must be non-negative")
        lin = {}
        for i, w in self.linear.items():
            lin[_check_index(i, self.n)] = float(w)
        quad = {}
        for key, w in self.quadratic.items():
            i, j = key
            e = canonical_edge(_check_index(i, self.n), _check_index(j, self.n))
            if e in quad:
                raise InputError(f"duplicate coupling {e}")
            quad[e] = float(w)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "offset", float(self.offset))

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.linear.items())),
                     tuple(sorted(self.quadratic.items())), self.offset))

    @property
    def vartype(self) -> str:
        return "spin"

    @cached_property
    def h(self) -> np.ndarray:
        out = np.zeros(self.n)
        for i, w in self.linear.items():
            out[i] = w
        return out

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rows, cols, weights) of the couplings in sorted key order."""
        keys = sorted(self.quadratic)
        rows = np.array([k[0] for k in keys], dtype=np.int64)
        cols = np.array([k[1] for k in keys], dtype=np.int64)
        w = np.array([self.quadratic[k] for k in keys], dtype=np.float64)
        return rows, cols, w

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(h, indptr, indices, weights) symmetric adjacency for the kernels."""
        rows, cols, w = self.edge_arrays
        src = np.concatenate([rows, cols])
        dst = np.concatenate([cols, rows])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, ww = src[order], dst[order], ww[order]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        return self.h, indptr, dst.astype(np.int64), ww.astype(np.float64)

    def neighbors(self, i: int) -> dict[int, float]:
        _, indptr, indices, weights = self.csr
        sl = slice(indptr[i], indptr[i + 1])
        return dict(zip(indices[sl].tolist(), weights[sl].tolist()))

    def degree(self, i: int) -> int:
        _, indptr, _, _ = self.csr
        return int(indptr[i + 1] - indptr[i])

    def edges(self) -> list[Edge]:
        return sorted(self.quadratic)

    def __add__(self, other: "IsingModel") -> "IsingModel":
        if not isinstance(other, IsingModel) or other.n != self.n:
            return NotImplemented
        lin = dict(self.linear)
        for i, w in other.linear.items():
            lin[i] = lin.get(i, 0.0) + w
        quad = dict(self.quadratic)
        for e, w in other.quadratic.items():
            quad[e] = quad.get(e, 0.0) + w
        return IsingModel(self.n, lin, quad, self.offset + other.offset)

    def energy(self, config) -> float:
        return energy(self, config)


@dataclass(frozen=True, eq=True)
class QuboModel:
    """QUBO energy ``offset + sum_{i<=j} Q_ij x_i x_j`` over x in {0, 1}."""

    n: int
    terms: Mapping[Edge, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise InputError("variable count must be non-negative")
        terms = {}
        for (i, j), w in self.terms.items():
            i, j = _check_index(i, self.n), _check_index(j, self.n)
            key = (i, j) if i <= j else (j, i)
            if key in terms:
                raise InputError(f"duplicate term {key}")
            terms[key] = float(w)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "offset", float(self.offset))

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items())), self.offset))

    @property
    def vartype(self) -> str:
        return "binary"

    @property
    def linear(self) -> dict[int, float]:
        return {i: w for (i, j), w in self.terms.items() if i == j}

    @property
    def quadratic(self) -> dict[Edge, float]:
        return {(i, j): w for (i, j), w in self.terms.items() if i != j}

    def energy(self, x) -> float:
        x = as_config(x, self.n, "binary")
        e = self.offset
        for (i, j), w in self.terms.items():
            e += w * x[i] * x[j]
        return float(e)


Model = Union[IsingModel, QuboModel]


def as_config(config, n: int, vartype: str = "spin") -> np.ndarray:
    """Validate a configuration and return it as an int8 array."""
    arr = np.asarray(config)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise InputError(f"configuration length {arr.shape} does not match n={n}")
    allowed = (-1, 1) if vartype == "spin" else (0, 1)
    if arr.size and not np.isin(arr, allowed).all():
        raise InputError(f"configuration values must lie in {allowed} for vartype {vartype}")
    return arr.astype(np.int8)


def spins_to_binary(s) -> np.ndarray:
    return ((np.asarray(s) + 1) // 2).astype(np.int8)


def binary_to_spins(x) -> np.ndarray:
    return (2 * np.asarray(x) - 1).astype(np.int8)


def states_to_spins(states: np.ndarray, n: int) -> np.ndarray:
    """Bitmask states (bit i set means s_i = +1) to a (k, n) spin array."""
    states = np.asarray(states, dtype=np.int64)
    bits = (states[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def energy(model: IsingModel, config) -> float:
    """Ising energy of one spin configuration."""
    if not isinstance(model, IsingModel):
        raise InputError("energy() expects an IsingModel; use QuboModel.energy for binary models")
    s = as_config(config, model.n, "spin").astype(np.float64)
    rows, cols, w = model.edge_arrays
    return float(model.offset + model.h @ s + w @ (s[rows] * s[cols]))


def energies(model: IsingModel, configs) -> np.ndarray:
    """Vectorized energies for a (k, n) array of spin configurations."""
    S = np.asarray(configs, dtype=np.float64)
    if S.ndim != 2 or S.shape[1] != model.n:
        raise InputError(f"expected shape (k, {model.n}), got {S.shape}")
    rows, cols, w = model.edge_arrays
    return model.offset + S @ model.h + (S[:, rows] * S[:, cols]) @ w


def ising_to_qubo(model: IsingModel) -> QuboModel:
    terms: dict[Edge, float] = {}
    offset = model.offset
    for i, hi in model.linear.items():
        terms[(i, i)] = terms.get((i, i), 0.0) + 2.0 * hi
        offset -= hi
    for (i, j), J in model.quadratic.items():
        terms[(i, j)] = 4.0 * J
        terms[(i, i)] = terms.get((i, i), 0.0) - 2.0 * J
        terms[(j, j)] = terms.get((j, j), 0.0) - 2.0 * J
        offset += J
    terms = {k: v for k, v in terms.items() if v != 0.0}
    return QuboModel(model.n, terms, offset)


def qubo_to_ising(model: QuboModel) -> IsingModel:
    lin: dict[int, float] = {}
    quad: dict[Edge, float] = {}
    offset = model.offset
    for (i, j), q in model.terms.items():
        if i == j:
            lin[i] = lin.get(i, 0.0) + q / 2.0
            offset += q / 2.0
        else:
            quad[(i, j)] = quad.get((i, j), 0.0) + q / 4.0
            lin[i] = lin.get(i, 0.0) + q / 4.0
            lin[j] = lin.get(j, 0.0) + q / 4.0
            offset += q / 4.0
    lin = {k: v for k, v in lin.items() if v != 0.0}
    return IsingModel(model.n, lin, quad, offset)


def to_ising(model: Model) -> IsingModel:
    return qubo_to_ising(model) if isinstance(model, QuboModel) else model


def all_energies(model: IsingModel) -> np.ndarray:
    """Energies of all 2**n states indexed by bitmask."""
    if model.n > SPECTRUM_MAX_N:
        raise CapacityError(f"n={model.n} exceeds exhaustive limit {SPECTRUM_MAX_N}")
    h, indptr, indices, weights = model.csr
    return gray_energies(h, indptr, indices, weights, model.offset)


def spectrum(model: IsingModel) -> np.ndarray:
    """Sorted list of all 2**n configuration energies."""
    return np.sort(all_energies(model))


def remove_edges(model: IsingModel, edges: Iterable[Edge]) -> IsingModel:
    quad = dict(model.quadratic)
    missing = 0
    for i, j in edges:
        if quad.pop(canonical_edge(int(i), int(j)), None) is None:
            missing += 1
    if missing:
        log.warning("remove_edges: %d requested edges not present in model", missing)
    return IsingModel(model.n, model.linear, quad, model.offset)


# -- file formats ----------------------------------------------------------

class ModelParseError(InputError):
    def __init__(self, path, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}: line {line_no}: {message}")


def _parse_text(text: str, path) -> Model:
    vartype = "spin"
    n_decl = None
    offset = 0.0
    entries: dict[Edge, float] = {}
    max_index = -1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].lower()
        try:
            if head == "vartype":
                if len(parts) != 2 or parts[1] not in ("spin", "binary"):
                    raise ValueError("expected 'vartype spin|binary'")
                vartype = parts[1]
            elif head == "offset":
                if len(parts) != 2:
                    raise ValueError("expected 'offset <w>'")
                offset += float(parts[1])
            elif head == "n":
                if len(parts) != 2:
                    raise ValueError("expected 'n <count>'")
                n_decl = int(parts[1])
            else:
                if len(parts) != 3:
                    raise ValueError(f"expected 'i j w', got {len(parts)} fields")
                try:
                    i = int(parts[0])
                except ValueError:
                    raise ValueError(f"field 1 {parts[0]!r} is not an integer") from None
                try:
                    j = int(parts[1])
                except ValueError:
                    raise ValueError(f"field 2 {parts[1]!r} is not an integer") from None
                try:
                    w = float(parts[2])
                except ValueError:
                    raise ValueError(f"field 3 {parts[2]!r} is not a number") from None
                if i < 0 or j < 0:
                    raise ValueError("negative variable index")
                key = (min(i, j), max(i, j))
                entries[key] = entries.get(key, 0.0) + w
                max_index = max(max_index, i, j)
        except ValueError as exc:
            raise ModelParseError(path, line_no, str(exc)) from None
    n = n_decl if n_decl is not None else max_index + 1
    if max_index >= n:
        raise InputError(f"{path}: index {max_index} exceeds declared n={n}")
    if vartype == "binary":
        return QuboModel(n, entries, offset)
    lin = {i: w for (i, j), w in entries.items() if i == j}
    quad = {(i, j): w for (i, j), w in entries.items() if i != j}
    return IsingModel(n, lin, quad, offset)


def model_to_dict(model: Model) -> dict:
    if isinstance(model, QuboModel):
        linear = [[i, w] for (i, j), w in sorted(model.terms.items()) if i == j]
        quadratic = [[i, j, w] for (i, j), w in sorted(model.terms.items()) if i != j]
    else:
        linear = [[i, w] for i, w in sorted(model.linear.items())]
        quadratic = [[i, j, w] for (i, j), w in sorted(model.quadratic.items())]
    return {"n": model.n, "vartype": model.vartype, "linear": linear,
            "quadratic": quadratic, "offset": model.offset}


def model_from_dict(doc: Mapping, path="<dict>") -> Model:
    try:
        n = int(doc["n"])
        vartype = doc.get("vartype", "spin")
        linear = [(int(i), float(w)) for i, w in doc.get("linear", [])]
        quadratic = [(int(i), int(j), float(w)) for i, j, w in doc.get("quadratic", [])]
        offset = float(doc.get("offset", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed model document ({exc})") from None
    if vartype == "binary":
        terms = {(i, i): w for i, w in linear}
        terms.update({(i, j): w for i, j, w in quadratic})
        return QuboModel(n, terms, offset)
    if vartype != "spin":
        raise InputError(f"{path}: unknown vartype {vartype!r}")
    return IsingModel(n, dict(linear), {(i, j): w for i, j, w in quadratic}, offset)


_MODEL_KEYS = ("vartype", "n", "offset", "linear", "quadratic", "terms")


def load_model_with_meta(path) -> tuple[Model, dict]:
    """Model plus any extra top-level keys of a JSON document (empty for edge lists)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelParseError(path, exc.lineno, exc.msg) from None
        if not isinstance(doc, dict):
            raise ModelParseError(path, 1, "top level must be an object")
        meta = {k: v for k, v in doc.items() if k not in _MODEL_KEYS}
        return model_from_dict(doc, path), meta
    return _parse_text(text, path), {}


def load_model(path) -> Model:
    """Load a model from ``.json`` (structured) or any other extension (edge list)."""
    return load_model_with_meta(path)[0]


def save_model(model: Model, path, extra: Mapping | None = None) -> None:
    """Write a model; ``extra`` keys are added to JSON documents only."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = model_to_dict(model)
        if extra:
            doc.update(extra)
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        return
    lines = [f"vartype {model.vartype}", f"n {model.n}"]
    if model.offset != 0.0:
        lines.append(f"offset {model.offset!r}")
    if isinstance(model, QuboModel):
        items = sorted(model.terms.items())
    else:
        items = [((i, i), w) for i, w in sorted(model.linear.items())]
        items += sorted(model.quadratic.items())
    lines += [f"{i} {j} {w!r}" for (i, j), w in items]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def is_connected(model: IsingModel) -> bool:
    if model.n == 0:
        return True
    _, indptr, indices, _ = model.csr
    seen = np.zeros(model.n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in indices[indptr[i]:indptr[i + 1]]:
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    return bool(seen.all())


def coupling_scale(model: IsingModel) -> float:
    """Largest total incident coefficient magnitude over variables."""
    if model.n == 0:
        return 0.0
    h, indptr, _, weights = model.csr
    tot = np.abs(h).copy()
    for i in range(model.n):
        tot[i] += np.abs(weights[indptr[i]:indptr[i + 1]]).sum()
    return float(tot.max())


def isclose(a: float, b: float, tol: float = 1e-9) -> bool:
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)
