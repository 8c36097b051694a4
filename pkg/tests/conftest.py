"""Independent oracles shared by the tests.

These deliberately avoid the package's compiled kernels: energies are summed
term by term in Python and configurations come from itertools.
"""

import itertools

import numpy as np
import pytest

from pfembed.model import IsingModel


def py_energy(model: IsingModel, s) -> float:
    e = model.offset
    for i, h in model.linear.items():
        e += h * s[i]
    for (i, j), w in model.quadratic.items():
        e += w * s[i] * s[j]
    return e


def all_configs(n: int):
    return [np.array(c, dtype=np.int8) for c in itertools.product((-1, 1), repeat=n)]


def oracle_table(model: IsingModel) -> tuple[np.ndarray, np.ndarray]:
    """Every configuration (itertools order) and its energy, term by term."""
    S = np.array(list(itertools.product((-1, 1), repeat=model.n)), dtype=np.int8).reshape(-1, model.n)
    E = np.full(len(S), model.offset)
    Sf = S.astype(np.float64)
    for i, h in model.linear.items():
        E += h * Sf[:, i]
    for (i, j), w in model.quadratic.items():
        E += w * Sf[:, i] * Sf[:, j]
    return S, E


def oracle_spectrum(model: IsingModel) -> np.ndarray:
    return np.sort(oracle_table(model)[1])


def oracle_ground(model: IsingModel) -> tuple[float, list]:
    """Ground energy and every configuration attaining it (within 1e-9)."""
    S, E = oracle_table(model)
    e0 = float(E.min())
    return e0, list(S[E <= e0 + 1e-9])


@pytest.fixture
def afm_triangle():
    return IsingModel(3, {}, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0})


@pytest.fixture
def two_triangles():
    """Two unit triangles joined by the bridge (2, 3)."""
    quad = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0,
            (3, 4): 1.0, (4, 5): 1.0, (3, 5): 1.0, (2, 3): 1.0}
    return IsingModel(6, {}, quad)


# -- acceptance summary ------------------------------------------------------

_CRITERIA: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA.setdefault(name, "PASS" if report.outcome == "passed" else "FAIL")
        if report.outcome != "passed":
            _CRITERIA[name] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: int(s.split("_")[2])):
        number, label = name.split("_", 3)[2:]
        terminalreporter.write_line(f"{_CRITERIA[name]} criterion {number}: {label.replace('_', ' ')}")
