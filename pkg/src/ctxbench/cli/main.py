"""Command-line entry point: ``ctxbench run | verify-hlf | bounds``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .. import hlf, ksb
from ..games import ghz, magic_square
from ..grid import GridGraph
from ..noise import NoiseParams
from .config import ConfigError, config_help, parse_config
from .experiments import analytic_crossing, run

OUT_ENV = "CTXBENCH_OUT"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctxbench", description="Contextuality benchmark simulations.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment from a config file",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog="config keys (key = value, '#' comments):\n" + config_help()
                       + f"\n\noutput directory: --out, then ${OUT_ENV}, then 'out' in the config")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--out", type=Path)
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--threads", type=int, default=1)
    v = sub.add_parser("verify-hlf", help="check a candidate HLF solution")
    v.add_argument("--instance", required=True, type=Path)
    v.add_argument("--z", required=True, help="bitstring, qubit 0 first")
    b = sub.add_parser("bounds", help="print classical bounds for an experiment")
    b.add_argument("--experiment", required=True,
                   choices=["magic_square", "ksb", "ghz_game", "ghz_fidelity", "hlf"])
    return p


def cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    out = args.out or (Path(os.environ[OUT_ENV]) if os.environ.get(OUT_ENV) else None) \
        or Path(cfg.out or "results")
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        paths = run(cfg, out, args.threads)
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


def cmd_verify(args) -> int:
    try:
        inst = hlf.read_instance(args.instance)
        z = hlf.parse_bits(args.z, inst.n)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = hlf.verify_solution(inst, z)
    print("valid" if ok else "invalid")
    return 0 if ok else 1


def cmd_bounds(args) -> int:
    exp = args.experiment
    if exp == "magic_square":
        value, _, count = magic_square.optimal_classical_strategy()
        print(f"classical optimum {value} ({float(value):.6f}), {count} optimal strategy pairs")
        print("quantum value 1")
    elif exp == "ksb":
        hi, lo, count = ksb.nchv_bound_exhaustive()
        print(f"noncontextual chi range [{lo}, {hi}] over 512 tables ({count} attain {hi})")
        print("quantum value 6")
    elif exp == "ghz_game":
        print("N  exhaustive  1/2+2^-floor(N/2)  1/2+2^-ceil(N/2)  agrees")
        for N in range(2, 7):
            v, _ = ghz.classical_optimal_exhaustive(N)
            f, c = ghz.classical_bound_formula(N), ghz.classical_bound_ceil(N)
            print(f"{N}  {str(v):10s}  {f:<17.6f}  {c:<16.6f}  {'yes' if float(v) == f else 'NO'}")
    elif exp == "ghz_fidelity":
        print("genuine multipartite entanglement witness: F > 0.5")
        print(f"analytic F_total crossing at default rates: N = "
              f"{analytic_crossing(NoiseParams.paper_rates(), seed=0)}")
    elif exp == "hlf":
        print("n    E    L_classical = log2(E+V)")
        for n in (9, 16, 25, 49, 81, 105):
            g = GridGraph.centered(n)
            print(f"{n:<4d} {len(g.edges):<4d} {hlf.classical_depth_bound(g):.4f}")
        print(f"noiseless effective depth {hlf.effective_depth(1.0)}; "
              f"7/8 threshold {hlf.effective_depth(7 / 8):.4f}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": cmd_run, "verify-hlf": cmd_verify, "bounds": cmd_bounds}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
