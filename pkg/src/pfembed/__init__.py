"""Partition-and-merge ground-state search for Ising and QUBO models."""

from .bench import BenchConfig, p_bayes, performance_metric, run_benchmark
from .errors import CapacityError, InputError
from .model import IsingModel, QuboModel, energy, load_model, qubo_to_ising, save_model, to_ising
from .partition import Partition, girvan_newman_bipartition
from .pfe import PfeConfig, PfeResult, solve_pfe
from .problems import LatticeSpec, decode_factors, factor_to_qubo, kagome_lattice
from .reduction import reconstruct, reduce_chain
from .solvers import AnnealParams, brute_force_ground, simulated_anneal

__version__ = "0.1.0"

__all__ = ["CapacityError", "InputError", "IsingModel", "QuboModel", "energy", "load_model",
           "qubo_to_ising", "save_model", "to_ising", "Partition", "girvan_newman_bipartition",
           "PfeConfig", "PfeResult", "solve_pfe", "reconstruct", "reduce_chain", "AnnealParams",
           "brute_force_ground", "simulated_anneal", "LatticeSpec", "decode_factors",
           "factor_to_qubo", "kagome_lattice", "BenchConfig", "p_bayes", "performance_metric",
           "run_benchmark"]
