"""Seed-swept optimizer comparisons and hyperparameter sweeps."""

from __future__ import annotations

import dataclasses
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import easi, signals
from .config import ArmConfig, ExperimentConfig, MixtureConfig
from .easi import Hyperparameters, Optimizer
from .metrics import ConvergenceCriterion, ConvergenceTracker, RunRecord, amari_index

STREAM_BLOCK = 1024
BOOTSTRAP_RESAMPLES = 2000

# sub-seed tags: one run seed fans out into independent streams
_MIXING, _INIT, _SOURCES = 0, 1, 2


def derive_seed(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence([seed, tag]).generate_state(1)[0])


def build_model(mixture: MixtureConfig, seed: int) -> signals.MixingModel:
    mseed = mixture.mixing_seed if mixture.mixing_seed is not None else derive_seed(seed, _MIXING)
    A = signals.build_mixing(mixture.m, mixture.n, mseed)
    return signals.MixingModel(A=A, sources=mixture.sources, schedule=mixture.schedule)


def trace(state, model, hyper, t0, count, source_seed, dtype):
    """Stream samples ``t0 .. t0+count-1``; yields ``(t, state, amari)``.

    ``amari`` is None once the separator diverges, and iteration stops there.
    """
    rotating = isinstance(model.schedule, signals.Rotating) and model.schedule.rate != 0
    value = amari_index(state.B.astype(np.float64) @ signals.mixing_at(model, t0))
    for b0 in range(t0, t0 + count, STREAM_BLOCK):
        L = min(STREAM_BLOCK, t0 + count - b0)
        X, _ = signals.mix_block(model, b0, L, source_seed)
        X = X.astype(dtype)
        if not np.all(np.isfinite(X)):
            raise ValueError(f"non-finite observations in samples {b0}..{b0 + L - 1}")
        for i in range(L):
            t = b0 + i
            # block already validated; skip the per-sample checks of step_sample
            state, res = easi.step_validated(state, X[i], hyper)
            if res.updated and easi.is_diverged(state):
                yield t, state, None
                return
            if res.updated or rotating:
                value = amari_index(state.B.astype(np.float64) @ signals.mixing_at(model, t))
            yield t, state, value


def run_single(seed: int, arm: ArmConfig, cfg: ExperimentConfig) -> RunRecord:
    """One (seed, arm) run. Deterministic in its arguments."""
    model = build_model(cfg.mixture, seed)
    state = easi.init_separator(model.n, model.m, arm.hyper, derive_seed(seed, _INIT), dtype=cfg.dtype)
    record = RunRecord(seed=seed, arm=arm.name)
    tracker = ConvergenceTracker(cfg.convergence)
    src = derive_seed(seed, _SOURCES)
    for _, state, value in trace(state, model, arm.hyper, 0, cfg.max_samples, src, cfg.dtype):
        if value is None:
            record.diverged = True
            break
        record.amari.append(value)
        if tracker.push(value) and cfg.stop_on_convergence:
            break
    record.iterations_to_convergence = None if record.diverged else tracker.converged_at
    return record


def _run_task(task):
    seed, arm, cfg = task
    return run_single(seed, arm, cfg)


def run_tasks(tasks, jobs: int = 1) -> list[RunRecord]:
    """Run (seed, arm, cfg) tasks; output order follows input order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks, chunksize=1))


# ---------------------------------------------------------------- summaries


@dataclass(frozen=True)
class ArmSummary:
    arm: str
    mean_iters: float | None
    stddev: float | None
    ci95_lo: float | None
    ci95_hi: float | None
    converged: int
    diverged: int
    not_converged: int
    improvement_vs_arm0: float | None
    ratio_vs_arm0: float | None = None
    ratio_ci95_lo: float | None = None
    ratio_ci95_hi: float | None = None
    paired_runs: int = 0


@dataclass(frozen=True)
class ComparisonSummary:
    arms: tuple[ArmSummary, ...]

    def by_name(self, name: str) -> ArmSummary:
        for a in self.arms:
            if a.arm == name:
                return a
        raise KeyError(name)


def improvement(mean: float, reference: float) -> float:
    """Fractional reduction in iterations relative to ``reference``."""
    return 1.0 - mean / reference


def mean_ci95(values) -> tuple[float, float | None, float | None, float | None]:
    """Mean, sample stddev and t-based 95% CI of the mean."""
    v = np.asarray(values, dtype=np.float64)
    mean = float(v.mean())
    if v.size < 2:
        return mean, None, None, None
    sd = float(v.std(ddof=1))
    half = float(stats.t.ppf(0.975, v.size - 1)) * sd / math.sqrt(v.size)
    return mean, sd, mean - half, mean + half


def ratio_ci95(base, other, seed: int = 0) -> tuple[float, float, float]:
    """Ratio of means ``mean(other)/mean(base)`` over paired runs, percentile bootstrap CI."""
    base = np.asarray(base, dtype=np.float64)
    other = np.asarray(other, dtype=np.float64)
    ratio = float(other.mean() / base.mean())
    if base.size < 2:
        return ratio, ratio, ratio
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, base.size, size=(BOOTSTRAP_RESAMPLES, base.size))
    boots = other[idx].mean(axis=1) / base[idx].mean(axis=1)
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return ratio, float(lo), float(hi)


def summarize(records, arm_names) -> ComparisonSummary:
    """Aggregate runs per arm. Means use converged, non-diverged runs only."""
    by_arm = {name: [r for r in records if r.arm == name] for name in arm_names}
    conv = {
        name: {r.seed: r.iterations_to_convergence for r in rs if r.iterations_to_convergence is not None}
        for name, rs in by_arm.items()
    }
    base_name = arm_names[0] if arm_names else None
    base_mean = np.mean(list(conv[base_name].values())) if base_name and conv[base_name] else None
    out = []
    for name in arm_names:
        rs = by_arm[name]
        iters = [conv[name][s] for s in sorted(conv[name])]
        diverged = sum(r.diverged for r in rs)
        fields = dict(
            arm=name,
            converged=len(iters),
            diverged=diverged,
            not_converged=len(rs) - len(iters) - diverged,
        )
        if not iters:
            out.append(ArmSummary(mean_iters=None, stddev=None, ci95_lo=None, ci95_hi=None,
                                  improvement_vs_arm0=None, **fields))
            continue
        mean, sd, lo, hi = mean_ci95(iters)
        imp = improvement(mean, base_mean) if base_mean is not None else None
        paired = sorted(set(conv[name]) & set(conv[base_name]))
        ratio = (None, None, None)
        if paired:
            ratio = ratio_ci95([conv[base_name][s] for s in paired], [conv[name][s] for s in paired])
        out.append(ArmSummary(mean_iters=mean, stddev=sd, ci95_lo=lo, ci95_hi=hi, improvement_vs_arm0=imp,
                              ratio_vs_arm0=ratio[0], ratio_ci95_lo=ratio[1], ratio_ci95_hi=ratio[2],
                              paired_runs=len(paired), **fields))
    return ComparisonSummary(arms=tuple(out))


def run_experiment(cfg: ExperimentConfig) -> tuple[ComparisonSummary, list[RunRecord]]:
    tasks = [(seed, arm, cfg) for seed in cfg.seeds for arm in cfg.arms]
    records = run_tasks(tasks, cfg.jobs)
    return summarize(records, [a.name for a in cfg.arms]), records


# ---------------------------------------------------------------- sweeps


_SWEPT = {
    Optimizer.SGD: ("mu",),
    Optimizer.MOMENTUM_SGD: ("mu", "gamma"),
    Optimizer.SMBGD: ("mu", "beta", "gamma", "batch_size"),
}


@dataclass(frozen=True)
class SweepRow:
    base_arm: str
    arm: ArmConfig
    summary: ArmSummary


def sweep_arms(arm: ArmConfig, grid) -> list[ArmConfig]:
    keys = _SWEPT[arm.hyper.optimizer]
    values = [getattr(grid, k) for k in keys]
    out = []
    for combo in itertools.product(*values):
        hyper = dataclasses.replace(arm.hyper, **dict(zip(keys, combo)))
        label = ",".join(f"{k}={v}" for k, v in zip(keys, combo))
        out.append(ArmConfig(name=f"{arm.name}[{label}]", hyper=hyper))
    return out


def run_sweep(cfg: ExperimentConfig) -> tuple[list[SweepRow], list[ArmConfig]]:
    """Grid-search each arm; returns all rows and the best variant per arm.

    Best = most converged runs, ties broken by lowest mean iterations.
    """
    variants = [(arm.name, v) for arm in cfg.arms for v in sweep_arms(arm, cfg.sweep)]
    tasks = [(seed, v, cfg) for _, v in variants for seed in cfg.seeds]
    records = run_tasks(tasks, cfg.jobs)
    rows = []
    for base, v in variants:
        summ = summarize([r for r in records if r.arm == v.name], [v.name]).arms[0]
        rows.append(SweepRow(base_arm=base, arm=v, summary=summ))
    best = []
    for arm in cfg.arms:
        mine = [r for r in rows if r.base_arm == arm.name]
        top = min(mine, key=lambda r: (-r.summary.converged,
                                       r.summary.mean_iters if r.summary.mean_iters is not None else math.inf))
        best.append(ArmConfig(name=arm.name, hyper=top.arm.hyper))
    return rows, best


# ---------------------------------------------------------------- tracking


@dataclass(frozen=True)
class TrackingResult:
    seed: int
    converged_at: int | None
    switch_at: int | None
    max_amari_after_switch: float | None
    diverged: bool

    def held(self, bound: float) -> bool:
        return (not self.diverged and self.max_amari_after_switch is not None
                and self.max_amari_after_switch < bound)


def run_tracking(
    seed: int,
    hyper: Hyperparameters,
    mixture: MixtureConfig,
    rate: float,
    track_samples: int,
    criterion: ConvergenceCriterion = ConvergenceCriterion(),
    max_converge_samples: int = 50_000,
    plane: tuple[int, int] = (0, 1),
    dtype=np.float32,
) -> TrackingResult:
    """Converge on a stationary mixture, then start rotating it and follow along.

    The rotation switches on at the sample right after convergence is
    detected and runs for ``track_samples`` samples; the worst Amari index
    over that stretch is reported.
    """
    stationary = dataclasses.replace(mixture, schedule=signals.Stationary())
    model = build_model(stationary, seed)
    state = easi.init_separator(model.n, model.m, hyper, derive_seed(seed, _INIT), dtype=dtype)
    src = derive_seed(seed, _SOURCES)
    tracker = ConvergenceTracker(criterion)
    switch = None
    for t, state, value in trace(state, model, hyper, 0, max_converge_samples, src, dtype):
        if value is None:
            return TrackingResult(seed, None, None, None, True)
        if tracker.push(value):
            switch = t + 1
            break
    if switch is None:
        return TrackingResult(seed, None, None, None, False)
    moving = dataclasses.replace(model, schedule=signals.Rotating(rate=rate, plane=plane, start=switch))
    worst = 0.0
    for _, state, value in trace(state, moving, hyper, switch, track_samples, src, dtype):
        if value is None:
            return TrackingResult(seed, tracker.converged_at, switch, None, True)
        worst = max(worst, value)
    return TrackingResult(seed, tracker.converged_at, switch, worst, False)
