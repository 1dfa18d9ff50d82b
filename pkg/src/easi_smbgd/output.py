"""CSV persistence, convergence plots and the throughput table report."""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .metrics import RunRecord
from .pipeline import PUBLISHED_TABLE1, PipelineMode, PipelineSpec, speedup_report, stage_count, throughput

RUNS_COLUMNS = ["seed", "arm", "sample_index", "amari_index"]
SUMMARY_COLUMNS = ["arm", "mean_iters", "stddev", "ci95_lo", "ci95_hi", "converged", "diverged",
                   "improvement_vs_arm0"]
RATIO_COLUMNS = ["arm", "ratio_vs_arm0", "ratio_ci95_lo", "ratio_ci95_hi", "paired_runs", "not_converged"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _open(path: Path, mode: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, mode, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot open {path}: {exc.strerror}") from exc


def emit_csv(records, summary, out_dir, stride: int = 1) -> list[Path]:
    """Write ``runs.csv``, ``summary.csv`` and ``ratios.csv`` into ``out_dir``.

    ``runs.csv`` keeps every ``stride``-th sample of each run.
    """
    out_dir = Path(out_dir)
    paths = [out_dir / "runs.csv", out_dir / "summary.csv", out_dir / "ratios.csv"]
    with _open(paths[0], "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUNS_COLUMNS)
        for r in records:
            for i in range(0, len(r.amari), stride):
                w.writerow([r.seed, r.arm, i, _fmt(r.amari[i])])
    arms = summary.arms if summary is not None else ()
    with _open(paths[1], "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for a in arms:
            w.writerow([_fmt(getattr(a, c)) for c in SUMMARY_COLUMNS])
    with _open(paths[2], "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RATIO_COLUMNS)
        for a in arms:
            w.writerow([_fmt(getattr(a, c)) for c in RATIO_COLUMNS])
    return paths


def _num(text: str):
    return None if text == "" else float(text)


def read_runs_csv(path) -> list[tuple[RunRecord, np.ndarray]]:
    """Parse ``runs.csv`` back into records, each paired with its sample indices."""
    runs: dict[tuple[int, str], tuple[list, list]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RUNS_COLUMNS:
            raise ValueError(f"{path}: expected columns {RUNS_COLUMNS}, got {reader.fieldnames}")
        for row in reader:
            idx, vals = runs.setdefault((int(row["seed"]), row["arm"]), ([], []))
            idx.append(int(row["sample_index"]))
            vals.append(float(row["amari_index"]))
    return [(RunRecord(seed=s, arm=a, amari=v), np.asarray(i)) for (s, a), (i, v) in runs.items()]


def read_summary_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for key in ("mean_iters", "stddev", "ci95_lo", "ci95_hi", "improvement_vs_arm0"):
            row[key] = _num(row[key])
        row["converged"] = int(row["converged"])
        row["diverged"] = int(row["diverged"])
    return rows


# ---------------------------------------------------------------- plots

AMARI_FLOOR = 1e-12


def band(series_list):
    """Median and inter-quartile band over runs of possibly unequal length."""
    longest = max(len(s) for s in series_list)
    M = np.full((len(series_list), longest), np.nan)
    for i, s in enumerate(series_list):
        M[i, : len(s)] = s
    q25, med, q75 = np.nanpercentile(M, [25, 50, 75], axis=0)
    return med, q25, q75


def emit_plot(records, out_dir, indices=None) -> list[Path]:
    """One SVG per arm: median and IQR of the Amari index vs sample, log-y.

    ``indices`` optionally maps ``(seed, arm)`` to the sample index of each
    stored value (for strided CSV input); contiguous indices are assumed
    otherwise.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    arms = list(dict.fromkeys(r.arm for r in records))
    paths = []
    for arm in arms:
        runs = [r for r in records if r.arm == arm and r.amari]
        if not runs:
            continue
        med, lo, hi = band([np.maximum(r.amari, AMARI_FLOOR) for r in runs])
        longest = max(runs, key=lambda r: len(r.amari))
        x = np.arange(len(med))
        if indices is not None:
            x = np.asarray(indices[(longest.seed, longest.arm)])
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.fill_between(x, lo, hi, alpha=0.3, label="IQR")
        ax.plot(x, med, lw=1.2, label="median")
        ax.set_yscale("log")
        ymin = float(np.nanmin(lo))
        ymax = float(np.nanmax(hi))
        ax.set_ylim(ymin / 1.2, ymax * 1.2)
        ax.set_xlim(x[0], max(x[-1], x[0] + 1))
        ax.set_xlabel("sample")
        ax.set_ylabel("Amari index")
        ax.set_title(f"{arm} ({len(runs)} runs)")
        ax.legend(loc="upper right")
        fig.tight_layout()
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in arm)
        path = out_dir / f"convergence_{safe}.svg"
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
        finally:
            plt.close(fig)
        paths.append(path)
    return paths


# ---------------------------------------------------------------- throughput table


def _flag(model: float, published: float | None, lo: float | None = None, hi: float | None = None) -> str:
    if published is None:
        return ""
    diff = abs(round(model, 2) - published)
    if diff < 0.005:
        return "ok"
    if diff <= 0.01 + 1e-9 or (lo is not None and lo <= published <= hi):
        return "rounding"
    return "MISMATCH"


def table1_rows(clock_mhz: float | None = None, baseline_clock_mhz: float | None = None,
                m: int = 4, n: int = 2) -> list[dict]:
    """Model values for the throughput rows of the published table.

    Published values are attached only where the inputs match the published
    configuration (m=4, n=2, 4.81 MHz vs 55.17 MHz).
    """
    p = PUBLISHED_TABLE1
    f_smbgd = p["smbgd_clock_mhz"] if clock_mhz is None else clock_mhz
    f_sgd = p["sgd_clock_mhz"] if baseline_clock_mhz is None else baseline_clock_mhz
    published_dims = (m, n) == (4, 2)
    smbgd_pub = published_dims and f_smbgd == p["smbgd_clock_mhz"]
    sgd_pub = f_sgd == p["sgd_clock_mhz"]

    base = PipelineSpec(m=m, n=n, clock_mhz=f_sgd, mode=PipelineMode.SGD_MULTICYCLE)
    improved = PipelineSpec(m=m, n=n, clock_mhz=f_smbgd, mode=PipelineMode.SMBGD_PIPELINED)
    stalled = PipelineSpec(m=m, n=n, clock_mhz=f_smbgd, mode=PipelineMode.SGD_PIPELINED_STALLED)
    rep = speedup_report(base, improved)
    both = smbgd_pub and sgd_pub

    # interval of clock ratios consistent with two-decimal published clocks
    c_lo = (p["smbgd_clock_mhz"] - 0.005) / (p["sgd_clock_mhz"] + 0.005)
    c_hi = (p["smbgd_clock_mhz"] + 0.005) / (p["sgd_clock_mhz"] - 0.005)

    rows = [
        ("pipeline_stages", "smbgd", float(stage_count(m, n)), 13.0 if published_dims else None, None),
        ("clock_mhz", "sgd", f_sgd, p["sgd_clock_mhz"] if sgd_pub else None, None),
        ("clock_mhz", "smbgd", f_smbgd, p["smbgd_clock_mhz"] if smbgd_pub else None, None),
        ("throughput_mips", "sgd", throughput(base).throughput_mips, p["sgd_mips"] if sgd_pub else None, None),
        ("throughput_mips", "smbgd", rep.throughput_mips, p["smbgd_mips"] if smbgd_pub else None, None),
        ("throughput_mips", "sgd_pipelined_stalled", throughput(stalled).throughput_mips, None, None),
        ("completion_msps", "smbgd", rep.completion_msps, None, None),
        ("clock_speedup", "smbgd_vs_sgd", rep.clock_speedup, p["clock_speedup"] if both else None, (c_lo, c_hi)),
        ("throughput_speedup", "smbgd_vs_sgd", rep.throughput_speedup,
         p["throughput_speedup"] if both else None, None),
    ]
    out = []
    for quantity, design, model, published, interval in rows:
        lo, hi = interval if interval else (None, None)
        out.append({
            "quantity": quantity,
            "design": design,
            "model": model,
            "published": published,
            "diff": None if published is None else round(round(model, 2) - published, 2),
            "flag": _flag(model, published, lo, hi),
        })
    return out


def table1_report(clock_mhz=None, baseline_clock_mhz=None, m=4, n=2, out_dir=None) -> str:
    rows = table1_rows(clock_mhz, baseline_clock_mhz, m, n)
    show_published = any(r["published"] is not None for r in rows)
    head = f"{'quantity':<20}{'design':<24}{'model':>10}"
    if show_published:
        head += f"{'published':>10}{'diff':>8}  flag"
    lines = [f"Pipelined EASI throughput model (m={m}, n={n})", head, "-" * len(head)]
    for r in rows:
        line = f"{r['quantity']:<20}{r['design']:<24}{r['model']:>10.2f}"
        if show_published:
            published = "" if r["published"] is None else f"{r['published']:.2f}"
            diff = "" if r["diff"] is None else f"{r['diff']:+.2f}"
            line += f"{published:>10}{diff:>8}  {r['flag']}"
        lines.append(line.rstrip())
    if any(r["flag"] == "rounding" for r in rows):
        lines.append("rounding: differs by <= 0.01, within the rounding of the published two-decimal clocks")
    if any(r["flag"] == "MISMATCH" for r in rows):
        lines.append("MISMATCH: model and published value differ by more than 0.01")
    text = "\n".join(lines)
    if out_dir is not None:
        path = Path(out_dir) / "table1.csv"
        with _open(path, "w") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["quantity", "design", "model", "published", "diff", "flag"])
            for r in rows:
                w.writerow([r["quantity"], r["design"], f"{r['model']:.2f}",
                            "" if r["published"] is None else f"{r['published']:.2f}",
                            "" if r["diff"] is None else f"{r['diff']:.2f}", r["flag"]])
    return text


def ensure_writable(out_dir) -> Path:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out_dir}: {exc.strerror}") from exc
    if not os.access(out_dir, os.W_OK):
        raise OSError(f"{out_dir} is not writable")
    return out_dir
