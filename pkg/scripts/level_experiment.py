"""Empirical level of the monitoring schemes under the ten null models.

    python scripts/level_experiment.py --m 100 --horizon 2000 --reps 500
"""

import argparse

from seqcusum.simulation import ExperimentConfig, ModelId, run_level_experiment

CELLS = ["R:0.001:0:0.05", "R:0.001:0.25:0.05", "S:0.001:0:0.05", "S:0.001:0.85:0.05",
         "T:0.001:0:0.05", "T:0.001:0.45:0.05", "E:0:0:0.05", "Q:0:0:0.05"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--horizon", type=int, default=2000, help="monitoring steps after the learning sample")
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--models", default=",".join(m.value for m in ModelId))
    a = ap.parse_args()
    print("model," + ",".join(CELLS))
    for model in a.models.split(","):
        cfg = ExperimentConfig(model, a.m, a.m + a.horizon, None, CELLS, a.reps, a.seed, workers=a.workers)
        res = run_level_experiment(cfg)
        print(model + "," + ",".join(f"{c.rejection_pct:.1f}" for c in res.cells), flush=True)


if __name__ == "__main__":
    main()
