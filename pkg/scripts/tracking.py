"""Converge on a stationary mixture, then rotate it slowly and record the worst Amari index.

    python3 scripts/tracking.py --seeds 20 --rate 1e-5 --samples 50000
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from easi_smbgd import experiment
from easi_smbgd.config import MixtureConfig
from easi_smbgd.easi import Hyperparameters


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--rate", type=float, default=1e-5, help="rotation rate in rad/sample")
    ap.add_argument("--samples", type=int, default=50_000, help="samples tracked after the switch")
    ap.add_argument("--bound", type=float, default=0.2)
    ap.add_argument("--optimizer", default="smbgd", choices=["sgd", "momentum", "smbgd"])
    ap.add_argument("--out", type=Path, default=Path("results/tracking"))
    args = ap.parse_args(argv)

    hyper = Hyperparameters(optimizer=args.optimizer)
    results = [experiment.run_tracking(s, hyper, MixtureConfig(), args.rate, args.samples)
               for s in range(args.seeds)]
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "tracking.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "converged_at", "switch_at", "max_amari_after_switch", "diverged", "held"])
        for r in results:
            w.writerow([r.seed, r.converged_at, r.switch_at, r.max_amari_after_switch, r.diverged, r.held(args.bound)])
    held = sum(r.held(args.bound) for r in results)
    worst = [r.max_amari_after_switch for r in results if r.max_amari_after_switch is not None]
    print(f"{held}/{len(results)} seeds held Amari < {args.bound}")
    if worst:
        print(f"worst-case Amari after switch: median {np.median(worst):.3f}, max {max(worst):.3f}")


if __name__ == "__main__":
    main()
