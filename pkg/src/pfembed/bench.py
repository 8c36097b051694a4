"""Repeated seeded trials, Bayesian success estimates and the F metric."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InputError
from .model import IsingModel, QuboModel, energy, load_model_with_meta, to_ising
from .pfe import PfeConfig, solve_pfe
from .problems import (FactorEncoding, LatticeSpec, factor_to_qubo, is_factorisation,
                       kagome_lattice, kagome_min_energy)
from .solvers import (BRUTE_FORCE_MAX_N, ENERGY_TOL, AnnealParams, brute_force_ground,
                      default_temperatures, simulated_anneal)

METHODS = ("sa", "pfe-sa", "pfe-exhaustive", "exact")
BUDGET_MODES = ("matched-sweeps", "matched-samples")
COLUMNS = ("method", "trials", "successes", "p_bayes", "tau_us", "F", "F_rel",
           "best_energy", "ground_energy", "seed")
TIMING_FIELDS = ("tau_us", "F", "F_rel", "stages")


def p_bayes(successes: int, trials: int) -> float:
    """Posterior mean success probability under a uniform prior (Laplace's rule)."""
    if trials < 1 or not 0 <= successes <= trials:
        raise InputError(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    return (successes + 1) / (trials + 2)


def performance_metric(p: float, tau: float) -> float:
    """Orders of magnitude of failure suppression per unit time, -log10(1 - p) / tau."""
    if not 0.0 < p < 1.0:
        raise InputError(f"p={p} must lie strictly between 0 and 1")
    if not tau > 0.0:
        raise InputError(f"tau={tau} must be positive")
    return -math.log10(1.0 - p) / tau


def format_p(p: float) -> str:
    """Console form: two decimals, or one-digit scientific below 0.01 (``1.0e-3``)."""
    if p < 0.01:
        mantissa, exp = f"{p:.1e}".split("e")
        return f"{mantissa}e{int(exp)}"
    return f"{p:.2f}"


# -- problems --------------------------------------------------------------

@dataclass
class Problem:
    name: str
    model: IsingModel
    ground_energy: Optional[float]
    encoding: Optional[FactorEncoding] = None

    def is_success(self, config: np.ndarray, e: float) -> bool:
        if self.encoding is not None:
            return is_factorisation(self.encoding, config)
        return e <= self.ground_energy + ENERGY_TOL


def _ground_by_oracle(model: IsingModel, name: str) -> float:
    if model.n > BRUTE_FORCE_MAX_N:
        raise InputError(f"{name}: no ground truth for n={model.n} > {BRUTE_FORCE_MAX_N}; "
                         "supply ground_energy in the model document")
    return brute_force_ground(model)[1]


def load_problem(spec: str) -> Problem:
    """Parse ``factor:N``, ``kagome:RxC`` or ``model:path``."""
    kind, _, arg = spec.partition(":")
    if kind == "factor":
        try:
            n = int(arg)
        except ValueError:
            raise InputError(f"bad factor target {arg!r}") from None
        enc = factor_to_qubo(n)
        return Problem(spec, to_ising(enc.model), 0.0, enc)
    if kind == "kagome":
        try:
            rows, cols = (int(x) for x in arg.lower().split("x"))
        except ValueError:
            raise InputError(f"bad lattice size {arg!r}; expected RxC") from None
        lat = LatticeSpec(rows, cols, J=1.0, h=1.0)
        model = kagome_lattice(lat)
        try:
            ground = kagome_min_energy(lat)
        except InputError:
            ground = _ground_by_oracle(model, spec)
        return Problem(spec, model, ground)
    if kind == "model":
        raw, meta = load_model_with_meta(arg)
        model = to_ising(raw)
        enc = None
        if "encoding" in meta and isinstance(raw, QuboModel):
            enc = FactorEncoding.from_dict(meta["encoding"], raw)
        if enc is not None:
            ground = 0.0
        elif "ground_energy" in meta:
            ground = float(meta["ground_energy"])
        else:
            ground = _ground_by_oracle(model, spec)
        return Problem(spec, model, ground, enc)
    raise InputError(f"unknown problem kind {kind!r}; use factor:N, kagome:RxC or model:path")


# -- budgets and methods ---------------------------------------------------

@dataclass(frozen=True)
class BenchConfig:
    """Per-trial budget.

    The standard SA baseline runs ``restarts`` anneals of ``sweeps`` sweeps.
    Under ``matched-sweeps`` each PFE side runs ``side_restarts`` anneals with
    sweeps chosen so that both sides together use the baseline's total sweep
    count; under ``matched-samples`` each side repeats the baseline schedule.
    ``t_final`` defaults to 5% of the median coupling of the full model and is
    shared by every annealed run.
    """

    trials: int = 100
    seed: int = 0
    sweeps: int = 1000
    restarts: int = 1
    side_restarts: int = 20
    budget_mode: str = "matched-sweeps"
    t_final: Optional[float] = None
    window: Union[str, float] = "auto"
    refined: bool = False
    workers: Optional[int] = None

    def __post_init__(self):
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if self.budget_mode not in BUDGET_MODES:
            raise InputError(f"budget mode must be one of {', '.join(BUDGET_MODES)}")
        AnnealParams(self.sweeps, self.restarts, self.seed, t_final=self.t_final)
        if self.side_restarts < 1:
            raise InputError("side_restarts must be >= 1")

    def baseline(self) -> AnnealParams:
        return AnnealParams(self.sweeps, self.restarts, t_final=self.t_final)

    def side(self) -> AnnealParams:
        if self.budget_mode == "matched-samples":
            return self.baseline()
        total = self.sweeps * self.restarts
        restarts = min(self.side_restarts, max(1, total // 2))
        return AnnealParams(max(1, total // (2 * restarts)), restarts, t_final=self.t_final)

    def budget(self) -> dict:
        side = self.side()
        return {"mode": self.budget_mode, "sweeps": self.sweeps, "restarts": self.restarts,
                "side_sweeps": side.sweeps, "side_restarts": side.restarts,
                "t_final": self.t_final}


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


@dataclass
class TrialOutcome:
    config: np.ndarray
    energy: float
    seconds: float
    stages: dict = field(default_factory=dict)


def _run_trial(method: str, model: IsingModel, cfg: BenchConfig, seed: int) -> TrialOutcome:
    t = time.perf_counter()
    stages = {}
    if method == "sa":
        res = simulated_anneal(model, replace(cfg.baseline(), seed=seed))
        config = res.best_config
    elif method == "exact":
        config, _ = brute_force_ground(model)
    else:
        sub = "annealed" if method == "pfe-sa" else "exhaustive"
        res = solve_pfe(model, PfeConfig(subsolver=sub, anneal=cfg.side(), window=cfg.window,
                                         refined=cfg.refined, seed=seed))
        config, stages = res.config, res.stage_seconds
    return TrialOutcome(config, energy(model, config), time.perf_counter() - t, stages)


def worker_count(serial: bool = False) -> int:
    """``PFE_WORKERS`` if set, else the CPU count; 1 when ``serial``."""
    if serial:
        return 1
    env = os.environ.get("PFE_WORKERS")
    if env is None:
        return os.cpu_count() or 1
    try:
        n = int(env)
    except ValueError:
        raise InputError(f"PFE_WORKERS={env!r} is not an integer") from None
    if n < 1:
        raise InputError("PFE_WORKERS must be >= 1")
    return n


@dataclass
class RunReport:
    method: str
    trials: int
    successes: int
    p_bayes: float
    tau_us: float
    F: float
    F_rel: float
    best_energy: float
    ground_energy: Optional[float]
    seed: int
    problem: str = ""
    stages: dict = field(default_factory=dict)  # mean seconds per PFE stage
    budget: dict = field(default_factory=dict)

    def row(self) -> list:
        return [getattr(self, c) for c in COLUMNS]

    def to_dict(self, timing: bool = True) -> dict:
        doc = asdict(self)
        if not timing:
            for k in TIMING_FIELDS:
                doc.pop(k)
        return doc


def run_method(problem: Problem, method: str, cfg: BenchConfig,
               workers: int = 1) -> RunReport:
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if problem.ground_energy is None and problem.encoding is None:
        raise InputError(f"{problem.name}: missing ground truth")
    seeds = [trial_seed(cfg.seed, t) for t in range(cfg.trials)]

    def one(s):
        return _run_trial(method, problem.model, cfg, s)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, seeds))
    else:
        outcomes = [one(s) for s in seeds]
    successes = sum(problem.is_success(o.config, o.energy) for o in outcomes)
    p = p_bayes(successes, cfg.trials)
    tau = 1e6 * float(np.mean([o.seconds for o in outcomes]))
    tau = max(tau, 1e-3)  # timer resolution floor; F needs tau > 0
    stages = {}
    for o in outcomes:
        for k, v in o.stages.items():
            stages[k] = stages.get(k, 0.0) + v / cfg.trials
    return RunReport(method, cfg.trials, successes, p, tau, performance_metric(p, tau), 1.0,
                     min(o.energy for o in outcomes), problem.ground_energy, cfg.seed,
                     problem.name, stages, cfg.budget() if method != "exact" else {})


def run_benchmark(problem: Union[Problem, str], methods: Sequence[str], cfg: BenchConfig,
                  serial: bool = False) -> list[RunReport]:
    """One report per method, ``F_rel`` relative to ``sa`` (else the first method)."""
    if isinstance(problem, str):
        problem = load_problem(problem)
    if not methods:
        raise InputError("no methods given")
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    if cfg.t_final is None and any(m in ("sa", "pfe-sa") for m in methods):
        _, tf = default_temperatures(problem.model)
        cfg = replace(cfg, t_final=tf)
    workers = cfg.workers or worker_count(serial)
    reports = [run_method(problem, m, cfg, workers) for m in methods]
    base = next((r for r in reports if r.method == "sa"), reports[0])
    for r in reports:
        r.F_rel = r.F / base.F
    return reports


# -- report files ----------------------------------------------------------

def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def emit_report(reports: Sequence[RunReport], path, fmt: Optional[str] = None) -> Path:
    """Write reports as CSV (6 significant digits) or JSON (full precision)."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    if fmt not in ("json", "csv"):
        raise InputError(f"unknown report format {fmt!r}")
    try:
        if fmt == "json":
            doc = {"columns": list(COLUMNS), "reports": [r.to_dict() for r in reports]}
            path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        else:
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(COLUMNS)
                for r in reports:
                    w.writerow([_csv_cell(v) for v in r.row()])
    except OSError as exc:
        raise InputError(f"cannot write report {path}: {exc.strerror}") from None
    return path


def load_report(path) -> list[RunReport]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    names = {f.name for f in fields(RunReport)}
    return [RunReport(**{k: v for k, v in d.items() if k in names}) for d in doc["reports"]]


def summary_lines(reports: Sequence[RunReport]) -> list[str]:
    out = [f"{'method':<16}{'succ':>7}{'p_bayes':>10}{'tau_us':>12}{'F_rel':>10}"]
    for r in reports:
        out.append(f"{r.method:<16}{r.successes:>4}/{r.trials:<3}{format_p(r.p_bayes):>9}"
                   f"{r.tau_us:>12.1f}{r.F_rel:>10.3g}")
    return out


__all__ = ["p_bayes", "performance_metric", "format_p", "Problem", "load_problem", "BenchConfig",
           "RunReport", "run_method", "run_benchmark", "emit_report", "load_report", "trial_seed",
           "worker_count", "summary_lines", "METHODS", "COLUMNS", "TIMING_FIELDS"]
