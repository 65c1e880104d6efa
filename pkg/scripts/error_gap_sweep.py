"""Centralized error gap (UB - LB) / UB over a demand sweep on synthetic instances.

    python scripts/error_gap_sweep.py --replications 10 --out runs/error_gap
"""
import argparse

from _common import floats, print_columns

from bioblend.experiments import DEFAULT_DEMANDS, RunConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--demands", type=floats, default=DEFAULT_DEMANDS)
    ap.add_argument("--replications", type=int, default=10)
    ap.add_argument("--N", type=int, default=50)
    ap.add_argument("--risk-hat", type=float, default=0.2, help="inner risk for both constraints")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/error_gap")
    a = ap.parse_args()
    out = run_experiment(RunConfig(mode="centralized", demands=a.demands, replications=a.replications, N=a.N,
                                   seed=a.seed, inner_risk_ash=a.risk_hat, inner_risk_thermal=a.risk_hat,
                                   output_dir=a.out))
    print_columns(out.tables["centralized_by_demand"],
                  ("demand", "runs", "cost_avg", "cost_per_dt_avg", "error_gap_pct_avg", "error_gap_pct_max"))


if __name__ == "__main__":
    main()
