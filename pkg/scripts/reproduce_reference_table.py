"""Calibrate the R/S/T quantiles for the reference (kind, gamma) cells.

Desk scale by default (m=100, 4000 paths, p=10..14, a few minutes). Pass
--full-scale for m=500, 15000 paths, p=10..18: the settings behind the shipped
reference values, which take many CPU hours.

    python scripts/reproduce_reference_table.py --workers 4 --output reference.csv
"""

import argparse

from seqcusum.calibration import CalibrationConfig, calibrate_many
from seqcusum.detectors import ThresholdSpec
from seqcusum.quantiles import QuantileTable, shipped_table

CELLS = [("R", 0.0), ("R", 0.25), ("S", 0.0), ("S", 0.85), ("T", 0.0), ("T", 0.45)]
ALPHAS = (0.01, 0.05, 0.1)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--full-scale", action="store_true")
    ap.add_argument("--seed", type=int, default=20210611)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--eta", type=float, default=0.001)
    ap.add_argument("--output")
    a = ap.parse_args()
    if a.full_scale:
        cfg = CalibrationConfig.full_scale(seed=a.seed, workers=a.workers)
    else:
        cfg = CalibrationConfig(seed=a.seed, workers=a.workers)
    specs = [ThresholdSpec(k, a.eta, g) for k, g in CELLS]
    res = calibrate_many(specs, ALPHAS, cfg)
    ref = shipped_table()
    print(f"m={cfg.m_sim} paths={cfg.n_paths} p={cfg.p_min}..{cfg.p_max} seed={cfg.seed}")
    print(f"{'kind':>4} {'gamma':>5} {'alpha':>5} {'estimate':>9} {'stderr':>7} {'reference':>9} flag")
    for e in res.entries:
        pub = ref.find(e.kind, e.eta, e.gamma, e.alpha)
        flag = res.fits[(e.kind.value, e.eta, e.gamma, e.alpha)].flag
        print(f"{e.kind.value:>4} {e.gamma:>5g} {e.alpha:>5g} {e.quantile:>9.3f} {e.stderr:>7.3f} "
              f"{pub.quantile if pub else float('nan'):>9.3f} {flag}")
    if a.output:
        with open(a.output, "w") as fh:
            fh.write(QuantileTable(res.entries).to_csv())


if __name__ == "__main__":
    main()
