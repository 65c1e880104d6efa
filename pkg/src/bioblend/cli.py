"""Command-line entry point.

Exit codes: 0 success, 2 usage, 3 unreadable or malformed input, 4 invalid
data or configuration, 5 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
from typing import Optional, Sequence

from .centralized import SearchFailure
from .experiments import RunConfig, ingest, run_experiment
from .io import ParseError, export_instance, site_refinery, thermal_requirement_for_demand
from .lp import ResourceLimitError, SolverError
from .model import ModelError

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INVALID, EXIT_SOLVE = 0, 2, 3, 4, 5

_MODE_OF = {"solve-centralized": "centralized", "solve-decentralized": "decentralized",
            "gap": "gap", "validate": "validate"}


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _run_flags(p: argparse.ArgumentParser) -> None:
    d = RunConfig()
    g = p.add_argument_group("instance")
    g.add_argument("--suppliers", help="supplier CSV (id,x,y,distance); synthetic instances when omitted")
    g.add_argument("--biomass", help="biomass CSV; bundled feedstock table when omitted")
    g.add_argument("--curves", help="supply-curve CSV (supplier,biomass,bracket,lower,upper,price)")
    g.add_argument("--n-suppliers", type=int, default=d.n_suppliers, help="synthetic supplier count")
    r = p.add_argument_group("refinery")
    r.add_argument("--alpha", type=float, default=d.ash_limit, help="ash limit (%%)")
    r.add_argument("--tau", type=float, default=None, help="thermal requirement (10^9 BTU); from demand if omitted")
    r.add_argument("--beta", type=float, default=d.risk_ash)
    r.add_argument("--gamma", type=float, default=d.risk_thermal)
    r.add_argument("--beta-hat", type=float, default=d.inner_risk_ash)
    r.add_argument("--gamma-hat", type=float, default=d.inner_risk_thermal)
    s = p.add_argument_group("sampling and search")
    s.add_argument("--N", type=int, default=d.N, help="scenarios per optimisation sample")
    s.add_argument("--N-check", type=int, default=d.N_check, help="scenarios in the certification sample")
    s.add_argument("--M", type=int, default=d.M, help="replications for validation")
    s.add_argument("--seed", type=int, default=d.seed)
    s.add_argument("--replications", type=int, default=d.replications)
    s.add_argument("--demands", type=_floats, default=d.demands, help="comma-separated MDT/year levels")
    s.add_argument("--sample-sizes", type=_ints, default=d.sample_sizes, help="validate: comma-separated N values")
    s.add_argument("--nu", type=int, default=d.nu, help="heuristic patience")
    s.add_argument("--search-delta", type=float, default=None, help="penalty bisection resolution")
    s.add_argument("--eps", type=float, default=d.eps, help="violation-count dead band")
    s.add_argument("--confidence-delta", type=float, default=d.confidence_delta)
    p.add_argument("--out", default=d.output_dir, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bioblend", description="Chance-constrained biomass blending.")
    sub = parser.add_subparsers(dest="command", required=True)
    for verb in _MODE_OF:
        _run_flags(sub.add_parser(verb))
    site = sub.add_parser("site", help="weighted 1-median over supplier locations")
    site.add_argument("locations", help="CSV with columns x,y,weight")
    gen = sub.add_parser("gen-synthetic", help="write a synthetic instance as CSV files")
    gen.add_argument("--demand", type=float, default=0.3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--n-suppliers", type=int, default=RunConfig().n_suppliers)
    gen.add_argument("--out", required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        mode=_MODE_OF[args.command], suppliers=args.suppliers, biomass=args.biomass, curves=args.curves,
        ash_limit=args.alpha, thermal_gbtu=args.tau, risk_ash=args.beta, risk_thermal=args.gamma,
        inner_risk_ash=args.beta_hat, inner_risk_thermal=args.gamma_hat, N=args.N, N_check=args.N_check,
        M=args.M, seed=args.seed, replications=args.replications, demands=tuple(args.demands),
        sample_sizes=tuple(args.sample_sizes), output_dir=args.out, nu=args.nu, search_delta=args.search_delta,
        eps=args.eps, confidence_delta=args.confidence_delta, n_suppliers=args.n_suppliers)


def _site(path: str) -> str:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise ParseError(path, None, None, "file not found") from None
    if not rows:
        raise ModelError(f"{path}: no locations")
    pts, w = [], []
    for n, r in enumerate(rows, start=2):
        try:
            pts.append((float(r["x"]), float(r["y"])))
            w.append(float(r["weight"]))
        except (KeyError, TypeError, ValueError):
            raise ParseError(path, n, None, "need numeric x, y and weight") from None
    idx, (x, y) = site_refinery(pts, w)
    return f"index\tx\ty\n{idx}\t{x!r}\t{y!r}\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "site":
            sys.stdout.write(_site(args.locations))
        elif args.command == "gen-synthetic":
            cfg = RunConfig(demands=(args.demand,), seed=args.seed, n_suppliers=args.n_suppliers)
            files = export_instance(ingest(cfg, args.demand), args.out)
            tau = thermal_requirement_for_demand(args.demand) / 1000.0
            sys.stdout.write(f"wrote {files.suppliers.parent}\ntau_gbtu\t{tau!r}\n")
        else:
            out = run_experiment(config_from_args(args))
            for name, path in sorted(out.tables.items()):
                sys.stdout.write(f"{name}\t{path}\n")
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (SolverError, SearchFailure, ResourceLimitError) as e:
        print(f"solve failed: {e}", file=sys.stderr)
        return EXIT_SOLVE
    except ValueError as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
