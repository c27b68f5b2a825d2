"""Regenerate the shipped quantile table.

The R/S/T cells at eta=0.001 are reference full-scale values; the E/Q
cells come from the unit-interval Brownian functionals (two-sided, matching
the detectors' absolute values).

    python scripts/build_table.py [--output src/seqcusum/data/quantiles.csv]
"""

import argparse
import math
from pathlib import Path

import numpy as np

from seqcusum.calibration import N_BATCHES, brownian_functional_sample, empirical_quantile
from seqcusum.detectors import DetectorKind
from seqcusum.quantiles import QuantileEntry, table_store

ALPHAS = (0.01, 0.05, 0.1)

# (kind, gamma) -> [(quantile, stderr)] at alpha = 0.01, 0.05, 0.10
REFERENCE = {
    ("R", 0.0): [(2.157, 0.006), (1.956, 0.009), (1.837, 0.008)],
    ("R", 0.25): [(2.278, 0.002), (2.054, 0.003), (1.952, 0.007)],
    ("S", 0.0): [(1.145, 0.019), (1.007, 0.015), (0.939, 0.014)],
    ("S", 0.85): [(1.199, 0.008), (1.058, 0.007), (0.987, 0.006)],
    ("T", 0.0): [(1.246, 0.006), (1.121, 0.011), (1.046, 0.010)],
    ("T", 0.45): [(1.324, 0.007), (1.164, 0.005), (1.087, 0.004)],
}

BROWNIAN_GAMMAS = (0.0, 0.25, 0.45)


def reference_entries():
    for (kind, gamma), cells in REFERENCE.items():
        for alpha, (q, se) in zip(ALPHAS, cells):
            yield QuantileEntry(DetectorKind(kind), 0.001, gamma, alpha, q, se, "shipped")


def brownian_entries(grid, paths, seed):
    for kind in ("E", "Q"):
        for i, gamma in enumerate(BROWNIAN_GAMMAS):
            vals = brownian_functional_sample(kind, gamma, grid, paths, seed + 10 * i + (kind == "E"), absolute=True)
            for alpha in ALPHAS:
                q = empirical_quantile(vals, alpha)
                batch = [empirical_quantile(b, alpha) for b in np.array_split(vals, N_BATCHES)]
                se = float(np.std(batch, ddof=1) / math.sqrt(N_BATCHES))
                print(f"{kind} gamma={gamma:g} alpha={alpha:g}: {q:.4f} ({se:.4f})", flush=True)
                yield QuantileEntry(DetectorKind(kind), 0.0, gamma, alpha, round(q, 3), round(se, 4), "simulated")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--output", default=str(Path(__file__).parents[1] / "src/seqcusum/data/quantiles.csv"))
    ap.add_argument("--grid", type=int, default=2**13)
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=7)
    a = ap.parse_args()
    entries = list(reference_entries()) + list(brownian_entries(a.grid, a.paths, a.seed))
    table_store(entries, a.output)
    print(f"wrote {len(entries)} cells to {a.output}")


if __name__ == "__main__":
    main()
