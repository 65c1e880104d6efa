"""Replication tables: estimated risks, certified-feasible count and cost per sample size N.

    python scripts/validation_tables.py --sample-sizes 25,50,100 --M 10 --out runs/validate
"""
import argparse
import json

from _common import floats, ints, print_columns

from bioblend.experiments import RunConfig, run_experiment
from bioblend.validation import RISK_TABLE_COLUMNS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--demand", type=float, default=0.3)
    ap.add_argument("--sample-sizes", type=ints, default=(25, 50, 100))
    ap.add_argument("--M", type=int, default=10)
    ap.add_argument("--N-check", type=int, default=1000)
    ap.add_argument("--risks", type=floats, default=(0.2, 0.2), help="beta,gamma")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/validate")
    a = ap.parse_args()
    beta, gamma = a.risks
    out = run_experiment(RunConfig(mode="validate", demands=(a.demand,), sample_sizes=a.sample_sizes, M=a.M,
                                   N=max(a.sample_sizes), N_check=a.N_check, risk_ash=beta, risk_thermal=gamma,
                                   seed=a.seed, output_dir=a.out))
    print_columns(out.tables["validate"], RISK_TABLE_COLUMNS)
    lb = json.loads(out.summary.read_text()).get("lower_bound")
    if lb:
        print(f"lower bound: T={lb['T']} bound={lb['bound']}")


if __name__ == "__main__":
    main()
