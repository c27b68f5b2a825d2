"""Rejection rate and mean detection delay against the shift size.

    python scripts/power_experiment.py --model M1 --m 100 --kstar 600 --deltas 0.1,0.2,0.3,0.5
"""

import argparse

from seqcusum.simulation import ExperimentConfig, ShiftSpec, run_power_experiment

CELLS = ["R:0.001:0:0.05", "S:0.001:0:0.05", "T:0.001:0:0.05", "E:0:0:0.05", "Q:0:0:0.05"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", default="M1")
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--n", type=int, default=7100)
    ap.add_argument("--kstar", type=int, default=600)
    ap.add_argument("--deltas", default="0.1,0.2,0.3,0.5")
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    print("delta,kind,rejection_pct,mean_delay")
    for delta in (float(d) for d in a.deltas.split(",")):
        cfg = ExperimentConfig(a.model, a.m, a.n, ShiftSpec(a.kstar, delta), CELLS, a.reps, a.seed, workers=a.workers)
        for c in run_power_experiment(cfg).cells:
            print(f"{delta:g},{c.cell.kind.value},{c.rejection_pct:.1f},{c.mean_delay:.1f}", flush=True)


if __name__ == "__main__":
    main()
