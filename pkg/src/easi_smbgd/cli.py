"""``easi-bench`` command line.

Subcommands: ``run`` (seed-swept optimizer comparison), ``sweep``
(hyperparameter grid), ``table1`` (throughput model vs published values) and
``plot`` (re-render convergence plots from a ``runs.csv``).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

import yaml

from . import experiment, output
from .config import (
    ConfigError,
    ExperimentConfig,
    arm_to_dict,
    default_config_text,
    dump_config,
    load_config,
    parse_arm_override,
    parse_seeds,
)

log = logging.getLogger("easi_bench")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML experiment config (see --print-default-config)")
    p.add_argument("--seeds", help="seed count N (seeds 0..N-1) or comma-separated list")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--arm", action="append", default=[],
                   help="optimizer arm, repeatable: OPT[:key=value,...], e.g. smbgd:beta=0.9,gamma=0.5")
    p.add_argument("--max-samples", type=int, help="samples per run")
    p.add_argument("--jobs", type=int, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="easi-bench", description=__doc__.split("\n\n")[0])
    parser.add_argument("--print-default-config", action="store_true",
                        help="print the default experiment config and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="compare optimizer arms over seeds")
    _common(run)
    run.add_argument("--no-plot", action="store_true", help="skip SVG output")

    sw = sub.add_parser("sweep", help="grid search over mu, beta, gamma, P")
    _common(sw)
    sw.add_argument("--grid", action="append", default=[],
                    help="override one grid axis: KEY=v1,v2,... (mu, beta, gamma, batch_size)")

    t1 = sub.add_parser("table1", help="throughput model vs the published table")
    t1.add_argument("--clock-mhz", type=float, help="SMBGD pipeline clock (default 55.17)")
    t1.add_argument("--baseline-clock-mhz", type=float, help="multi-cycle SGD clock (default 4.81)")
    t1.add_argument("--m", type=int, default=4)
    t1.add_argument("--n", type=int, default=2)
    t1.add_argument("--out", help="also write table1.csv here")

    pl = sub.add_parser("plot", help="re-render plots from runs.csv")
    pl.add_argument("--runs", required=True, help="path to runs.csv")
    pl.add_argument("--out", required=True, help="output directory")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seeds is not None:
        changes["seeds"] = parse_seeds(args.seeds, "--seeds")
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.arm:
        arms = tuple(parse_arm_override(a, i) for i, a in enumerate(args.arm))
        names = [a.name for a in arms]
        if len(set(names)) != len(names):
            raise ConfigError(f"--arm: duplicate arm names {names}; add name=... to disambiguate")
        changes["arms"] = arms
    if args.max_samples is not None:
        if args.max_samples < cfg.convergence.window:
            raise ConfigError(f"--max-samples: must be >= convergence window ({cfg.convergence.window})")
        changes["max_samples"] = args.max_samples
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs: must be >= 1")
        changes["jobs"] = args.jobs
    return dataclasses.replace(cfg, **changes)


def _print_summary(summary) -> None:
    print(f"{'arm':<16}{'mean':>10}{'ci95':>22}{'conv':>6}{'div':>5}{'impr':>8}{'ratio [ci95]':>26}")
    for a in summary.arms:
        mean = "-" if a.mean_iters is None else f"{a.mean_iters:.1f}"
        ci = "-" if a.ci95_lo is None else f"[{a.ci95_lo:.1f}, {a.ci95_hi:.1f}]"
        imp = "-" if a.improvement_vs_arm0 is None else f"{a.improvement_vs_arm0:+.3f}"
        ratio = "-" if a.ratio_vs_arm0 is None else (
            f"{a.ratio_vs_arm0:.3f} [{a.ratio_ci95_lo:.3f}, {a.ratio_ci95_hi:.3f}]")
        print(f"{a.arm:<16}{mean:>10}{ci:>22}{a.converged:>6}{a.diverged:>5}{imp:>8}{ratio:>26}")


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    out = output.ensure_writable(cfg.output_dir)
    summary, records = experiment.run_experiment(cfg)
    (out / "config.yaml").write_text(dump_config(cfg), encoding="utf-8")
    paths = output.emit_csv(records, summary, out, stride=cfg.csv_stride)
    if not args.no_plot:
        paths += output.emit_plot(records, out)
    _print_summary(summary)
    for p in paths:
        log.info("wrote %s", p)
    return 0


def _parse_grid(items, cfg):
    axes = {}
    for item in items:
        key, eq, values = item.partition("=")
        key = key.strip()
        if not eq or key not in ("mu", "beta", "gamma", "batch_size"):
            raise ConfigError(f"--grid: expected KEY=v1,v2 with KEY in mu/beta/gamma/batch_size, got {item!r}")
        try:
            conv = int if key == "batch_size" else float
            axes[key] = tuple(conv(v) for v in values.split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"--grid {key}: bad value list {values!r}") from None
        if not axes[key]:
            raise ConfigError(f"--grid {key}: empty value list")
    return dataclasses.replace(cfg.sweep, **axes)


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    cfg = dataclasses.replace(cfg, sweep=_parse_grid(args.grid, cfg))
    out = output.ensure_writable(cfg.output_dir)
    rows, best = experiment.run_sweep(cfg)
    path = out / "sweep.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["base_arm", "optimizer", "mu", "beta", "gamma", "batch_size",
                    "mean_iters", "stddev", "converged", "diverged", "runs"])
        for r in rows:
            h, s = r.arm.hyper, r.summary
            w.writerow([r.base_arm, h.optimizer.value, repr(h.mu), repr(h.beta), repr(h.gamma), h.batch_size,
                        output._fmt(s.mean_iters), output._fmt(s.stddev), s.converged, s.diverged,
                        s.converged + s.diverged + s.not_converged])
    (out / "best_arms.yaml").write_text(
        yaml.safe_dump({"arms": [arm_to_dict(a) for a in best]}, sort_keys=False), encoding="utf-8")
    for r in rows:
        s = r.summary
        mean = "-" if s.mean_iters is None else f"{s.mean_iters:.1f}"
        print(f"{r.arm.name:<48}{mean:>10}  converged {s.converged}/{len(cfg.seeds)}")
    print("best:", ", ".join(f"{a.name} {arm_to_dict(a)}" for a in best))
    return 0


def cmd_table1(args) -> int:
    print(output.table1_report(args.clock_mhz, args.baseline_clock_mhz, args.m, args.n, args.out))
    return 0


def cmd_plot(args) -> int:
    parsed = output.read_runs_csv(args.runs)
    records = [r for r, _ in parsed]
    indices = {(r.seed, r.arm): idx for r, idx in parsed}
    for p in output.emit_plot(records, args.out, indices=indices):
        print(p)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.print_default_config:
        sys.stdout.write(default_config_text())
        return 0
    handlers = {"run": cmd_run, "sweep": cmd_sweep, "table1": cmd_table1, "plot": cmd_plot}
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
