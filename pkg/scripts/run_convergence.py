"""Tune SMBGD on held-out seeds, then compare against SGD on evaluation seeds.

Writes runs.csv, summary.csv, ratios.csv, sweep.csv and per-arm SVG plots.

    python3 scripts/run_convergence.py --out results/convergence --seeds 50
"""
import argparse
import csv
import dataclasses
from pathlib import Path

from easi_smbgd import experiment, output
from easi_smbgd.config import ArmConfig, ExperimentConfig, SweepGrid, dump_config
from easi_smbgd.easi import Hyperparameters


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/convergence"))
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--tuning-seeds", type=int, default=10)
    ap.add_argument("--max-samples", type=int, default=50_000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--stride", type=int, default=10, help="keep every k-th sample in runs.csv")
    args = ap.parse_args(argv)

    base = dataclasses.replace(ExperimentConfig(), max_samples=args.max_samples, jobs=args.jobs)
    tuning = dataclasses.replace(
        base,
        arms=(ArmConfig("smbgd", Hyperparameters()),),
        seeds=tuple(range(1000, 1000 + args.tuning_seeds)),
        sweep=SweepGrid(mu=(0.01,), beta=(0.5, 0.7, 0.9), gamma=(0.0, 0.5, 0.7), batch_size=(8,)),
    )
    rows, best = experiment.run_sweep(tuning)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["beta", "gamma", "mean_iters", "converged"])
        for r in rows:
            w.writerow([r.arm.hyper.beta, r.arm.hyper.gamma, r.summary.mean_iters, r.summary.converged])
    tuned = best[0].hyper
    print(f"tuned on seeds {tuning.seeds[0]}..{tuning.seeds[-1]}: beta={tuned.beta} gamma={tuned.gamma}")

    cfg = dataclasses.replace(
        base,
        arms=(ArmConfig("sgd", Hyperparameters(optimizer="sgd")), ArmConfig("smbgd", tuned)),
        seeds=tuple(range(args.seeds)),
        csv_stride=args.stride,
    )
    (args.out / "config.yaml").write_text(dump_config(cfg), encoding="utf-8")
    summary, records = experiment.run_experiment(cfg)
    output.emit_csv(records, summary, args.out, stride=args.stride)
    output.emit_plot(records, args.out)
    for a in summary.arms:
        mean = "none" if a.mean_iters is None else f"{a.mean_iters:.1f}"
        print(f"{a.arm:>6}: mean {mean}  converged {a.converged}/{len(cfg.seeds)}  diverged {a.diverged}")
    smb = summary.by_name("smbgd")
    if smb.ratio_vs_arm0 is not None:
        print(f"ratio smbgd/sgd {smb.ratio_vs_arm0:.3f}  95% CI [{smb.ratio_ci95_lo:.3f}, {smb.ratio_ci95_hi:.3f}]"
              f"  over {smb.paired_runs} paired seeds")


if __name__ == "__main__":
    main()
