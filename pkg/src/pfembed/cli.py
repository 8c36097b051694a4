"""Command-line entry point: ``pfembed <subcommand> ...``.

Exit status is 0 on success, 2 on invalid input and 3 when a problem exceeds
an exhaustive-search capacity limit.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .errors import CapacityError, InputError
from .model import QuboModel, load_model_with_meta, save_model, to_ising
from .partition import girvan_newman_bipartition
from .pfe import PfeConfig, solve_pfe
from .problems import (FactorEncoding, LatticeSpec, decode_factors, factor_to_qubo,
                       is_factorisation, kagome_lattice)
from .reduction import reduce_chain
from .solvers import (AnnealParams, brute_force_ground, enumerate_low_energy,
                      sample_low_energy, simulated_anneal)

log = logging.getLogger("pfembed")


def _dump(doc, out) -> None:
    text = json.dumps(doc, indent=1) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror}") from None


def _window(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be 'auto' or a number, got {text!r}")


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _load_ising(path):
    raw, meta = load_model_with_meta(path)
    return raw, to_ising(raw), meta


def _encoding(raw, meta):
    if "encoding" in meta and isinstance(raw, QuboModel):
        return FactorEncoding.from_dict(meta["encoding"], raw)
    return None


# -- subcommands -----------------------------------------------------------

def cmd_partition(args) -> int:
    _, model, _ = _load_ising(args.model)
    part = girvan_newman_bipartition(model, seed=args.seed, parts=args.parts)
    _dump(part.to_dict(), args.out)
    if args.figure:
        from .plotting import plot_partition
        plot_partition(model, part, args.figure)
    return 0


def cmd_reduce(args) -> int:
    _, model, _ = _load_ising(args.model)
    red = reduce_chain(model, protected=args.protect or ())
    save_model(red.model, args.out)
    if args.records:
        _dump(red.to_dict(), args.records)
    print(f"eliminated {red.eliminated} of {red.n_original} variables; "
          f"{len(red.survivors)} remain")
    return 0


def cmd_solve(args) -> int:
    raw, model, meta = _load_ising(args.model)
    doc = {"method": args.method, "n": model.n}
    if args.method == "exact":
        config, e = brute_force_ground(model)
        if args.window is not None:
            sset = enumerate_low_energy(model, args.window)
    else:
        params = AnnealParams(args.sweeps, args.restarts, args.seed, args.t0, args.tf)
        res = simulated_anneal(model, params)
        config, e = res.best_config, res.best_energy
        doc["seed"] = args.seed
        doc["schedule"] = dict(vars(params.resolved(model)))
        doc["sample_energies"] = res.sample_energies.tolist()
        if args.window is not None:
            sset = sample_low_energy(model, params, args.window)
    doc["energy"] = e
    doc["config"] = config.tolist()
    if args.window is not None:
        doc["window"] = args.window
        doc["local_set"] = {"configs": sset.configs.tolist(), "energies": sset.energies.tolist(),
                            "complete": sset.complete}
    enc = _encoding(raw, meta)
    if enc is not None:
        doc["factors"] = list(decode_factors(enc, config))
    _dump(doc, args.out)
    return 0


def cmd_pfe(args) -> int:
    raw, model, meta = _load_ising(args.model)
    anneal = AnnealParams(args.sweeps, args.restarts, args.seed, args.t0, args.tf)
    cfg = PfeConfig(subsolver=args.subsolver, anneal=anneal, window=args.window,
                    refined=args.refined, top_k=args.top_k, seed=args.seed)
    res = solve_pfe(model, cfg)
    doc = res.to_dict(include_sets=args.include_sets)
    doc["subsolver"] = cfg.subsolver
    doc["seed"] = args.seed
    enc = _encoding(raw, meta)
    if enc is not None:
        p, q = decode_factors(enc, res.config)
        doc["factors"] = [p, q]
        doc["is_factorisation"] = is_factorisation(enc, res.config)
    _dump(doc, args.out)
    if args.figure:
        from .plotting import plot_local_energies
        plot_local_energies(res, args.figure)
    return 0


def cmd_factor(args) -> int:
    enc = factor_to_qubo(args.N, args.p_bits, args.q_bits, args.penalty)
    summary = {"target": enc.target, "n": enc.model.n, "p_bits": list(enc.p_bits),
               "q_bits": list(enc.q_bits), "aux": len(enc.aux_bits),
               "carries": len(enc.carry_bits), "penalty_scale": enc.penalty_scale}
    if args.emit:
        save_model(enc.model, args.emit, extra={"encoding": enc.to_dict()})
    _dump(summary, None)
    return 0


def cmd_kagome(args) -> int:
    spec = LatticeSpec(args.rows, args.cols, args.j, args.h, periodic=not args.open)
    model = kagome_lattice(spec)
    save_model(model, args.emit)
    print(f"kagome {args.rows}x{args.cols}: {model.n} sites, {len(model.quadratic)} couplings")
    return 0


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    cfg = bench.BenchConfig(trials=args.trials, seed=args.seed, sweeps=args.sweeps,
                            restarts=args.restarts, side_restarts=args.side_restarts,
                            budget_mode=args.budget_mode, t_final=args.tf,
                            window=args.window, refined=args.refined)
    reports = bench.run_benchmark(args.problem, methods, cfg, serial=args.serial)
    path = bench.emit_report(reports, args.out)
    if not args.no_figure:
        from .plotting import plot_benchmark
        plot_benchmark(reports, path.with_suffix(".png"))
    print("\n".join(bench.summary_lines(reports)))
    return 0


# -- parser ----------------------------------------------------------------

def _anneal_args(p, sweeps=1000, restarts=10):
    p.add_argument("--sweeps", type=int, default=sweeps)
    p.add_argument("--restarts", type=int, default=restarts)
    p.add_argument("--t0", type=float, default=None, help="initial temperature")
    p.add_argument("--tf", type=float, default=None, help="final temperature")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pfembed", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="Girvan-Newman bipartition of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--parts", type=int, default=2)
    p.add_argument("--out")
    p.add_argument("--figure", help="write a partition drawing (png/pdf/svg)")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("reduce", help="eliminate degree-1 and degree-2 variables")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="reduced model file")
    p.add_argument("--records", help="JSON file for the elimination records")
    p.add_argument("--protect", type=int, nargs="*", help="variables never eliminated")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="simulated annealing or exact ground state")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("sa", "exact"), default="sa")
    p.add_argument("--seed", type=_seed, default=0)
    _anneal_args(p)
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("pfe", help="partition, solve each side and merge")
    p.add_argument("--model", required=True)
    p.add_argument("--subsolver", choices=("exhaustive", "sa"), default="exhaustive")
    p.add_argument("--window", type=_window, default="auto")
    p.add_argument("--refined", action="store_true")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--top-k", type=int, default=None)
    _anneal_args(p)
    p.add_argument("--include-sets", action="store_true", help="write both local sets")
    p.add_argument("--out")
    p.add_argument("--figure", help="write a local-energy histogram")
    p.set_defaults(func=cmd_pfe)

    p = sub.add_parser("factor", help="multiplication-table QUBO for N")
    p.add_argument("N", type=int)
    p.add_argument("--p-bits", type=int, default=None)
    p.add_argument("--q-bits", type=int, default=None)
    p.add_argument("--penalty", type=float, default=None)
    p.add_argument("--emit", help="write the QUBO (with encoding metadata) here")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("kagome", help="Kagome lattice Ising model")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--j", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--open", action="store_true", help="open instead of periodic boundaries")
    p.add_argument("--emit", required=True)
    p.set_defaults(func=cmd_kagome)

    p = sub.add_parser("bench", help="repeated trials and success statistics")
    p.add_argument("--problem", required=True, help="factor:N | kagome:RxC | model:path")
    p.add_argument("--methods", default="sa,pfe-sa")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--budget-mode", choices=bench.BUDGET_MODES, default="matched-sweeps")
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--side-restarts", type=int, default=20)
    p.add_argument("--tf", type=float, default=None)
    p.add_argument("--window", type=_window, default="auto")
    p.add_argument("--refined", action="store_true")
    p.add_argument("--serial", action="store_true", help="single worker, for timing")
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--out", required=True, help="report.csv or report.json")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
