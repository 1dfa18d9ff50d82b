"""Experiment configuration: YAML file <-> validated dataclasses.

File format (version 1)::

    version: 1
    mixture:
      m: 4
      n: 2
      sources: [uniform, uniform]       # or mappings, e.g. {kind: sinusoid, freq: 0.01}
      schedule: {kind: stationary}      # or {kind: rotating, rate: 1e-5, plane: [0, 1], start: 0}
      mixing_seed: null                 # set to share one mixing matrix across seeds
    arms:
      - {name: sgd, optimizer: sgd, mu: 0.01}
      - {name: smbgd, optimizer: smbgd, mu: 0.01, beta: 0.5, gamma: 0.5, batch_size: 8}
    seeds: 50                           # count (0..N-1) or explicit list
    max_samples: 50000
    convergence: {threshold: 0.05, window: 100}
    stop_on_convergence: true
    precision: float32
    csv_stride: 1
    jobs: 1
    output_dir: results
    sweep: {mu: [0.01], beta: [0.5, 0.9], gamma: [0.0, 0.5], batch_size: [8]}

Unknown keys are rejected; errors name the offending field.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import yaml

from .easi import Hyperparameters, Nonlinearity, Optimizer
from .metrics import ConvergenceCriterion
from .signals import Rotating, SourceKind, SourceSpec, Stationary

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ArmConfig:
    name: str
    hyper: Hyperparameters


@dataclass(frozen=True)
class MixtureConfig:
    m: int = 4
    n: int = 2
    sources: tuple[SourceSpec, ...] = (SourceSpec(), SourceSpec())
    schedule: Stationary | Rotating = field(default_factory=Stationary)
    mixing_seed: int | None = None


@dataclass(frozen=True)
class SweepGrid:
    mu: tuple[float, ...] = (0.01,)
    beta: tuple[float, ...] = (0.5, 0.7, 0.9)
    gamma: tuple[float, ...] = (0.0, 0.5, 0.7)
    batch_size: tuple[int, ...] = (8,)


@dataclass(frozen=True)
class ExperimentConfig:
    mixture: MixtureConfig = field(default_factory=MixtureConfig)
    arms: tuple[ArmConfig, ...] = (
        ArmConfig("sgd", Hyperparameters(optimizer=Optimizer.SGD)),
        ArmConfig("smbgd", Hyperparameters(optimizer=Optimizer.SMBGD)),
    )
    seeds: tuple[int, ...] = tuple(range(50))
    max_samples: int = 50_000
    convergence: ConvergenceCriterion = field(default_factory=ConvergenceCriterion)
    stop_on_convergence: bool = True
    precision: str = "float32"
    csv_stride: int = 1
    jobs: int = 1
    output_dir: str = "results"
    sweep: SweepGrid = field(default_factory=SweepGrid)

    @property
    def dtype(self):
        return np.dtype(self.precision)


# ---------------------------------------------------------------- parsing


def _expect_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(d).__name__}")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")


def _wrap(where, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _int(value, where, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}, got {value}")
    return value


def parse_source(d, where) -> SourceSpec:
    if isinstance(d, str):
        d = {"kind": d}
    _expect_keys(d, {"kind", "half_width", "scale", "freq", "phase"}, where)
    if d.get("kind") not in {k.value for k in SourceKind}:
        raise ConfigError(f"{where}.kind: must be one of {[k.value for k in SourceKind]}, got {d.get('kind')!r}")
    return _wrap(where, SourceSpec, **d)


def parse_schedule(d, where):
    if d is None or d == "stationary":
        return Stationary()
    _expect_keys(d, {"kind", "rate", "plane", "start"}, where)
    kind = d.get("kind", "stationary")
    if kind == "stationary":
        if set(d) - {"kind"}:
            raise ConfigError(f"{where}: stationary schedule takes no parameters")
        return Stationary()
    if kind != "rotating":
        raise ConfigError(f"{where}.kind: must be 'stationary' or 'rotating', got {kind!r}")
    if "rate" not in d:
        raise ConfigError(f"{where}.rate: required for a rotating schedule")
    plane = d.get("plane", [0, 1])
    if not isinstance(plane, (list, tuple)) or len(plane) != 2:
        raise ConfigError(f"{where}.plane: expected a pair of indices, got {plane!r}")
    return Rotating(
        rate=float(d["rate"]),
        plane=(_int(plane[0], f"{where}.plane[0]", 0), _int(plane[1], f"{where}.plane[1]", 0)),
        start=_int(d.get("start", 0), f"{where}.start", 0),
    )


def parse_mixture(d, where="mixture") -> MixtureConfig:
    _expect_keys(d, {"m", "n", "sources", "schedule", "mixing_seed"}, where)
    m = _int(d.get("m", 4), f"{where}.m", 1)
    n = _int(d.get("n", 2), f"{where}.n", 1)
    if m < n:
        raise ConfigError(f"{where}: need m >= n, got m={m}, n={n}")
    raw = d.get("sources", ["uniform"] * n)
    if not isinstance(raw, list):
        raise ConfigError(f"{where}.sources: expected a list")
    if len(raw) != n:
        raise ConfigError(f"{where}.sources: need {n} entries, got {len(raw)}")
    sources = tuple(parse_source(s, f"{where}.sources[{i}]") for i, s in enumerate(raw))
    schedule = parse_schedule(d.get("schedule"), f"{where}.schedule")
    if isinstance(schedule, Rotating):
        i, j = schedule.plane
        if i == j or max(i, j) >= n:
            raise ConfigError(f"{where}.schedule.plane: invalid plane {schedule.plane} for n={n}")
    mixing_seed = d.get("mixing_seed")
    if mixing_seed is not None:
        _int(mixing_seed, f"{where}.mixing_seed", 0)
    return MixtureConfig(m=m, n=n, sources=sources, schedule=schedule, mixing_seed=mixing_seed)


_HYPER_KEYS = {"mu", "beta", "gamma", "batch_size", "optimizer", "nonlinearity"}


def parse_arm(d, where) -> ArmConfig:
    _expect_keys(d, _HYPER_KEYS | {"name"}, where)
    opt = d.get("optimizer")
    if opt not in {o.value for o in Optimizer}:
        raise ConfigError(f"{where}.optimizer: must be one of {[o.value for o in Optimizer]}, got {opt!r}")
    nl = d.get("nonlinearity", "cubic")
    if nl not in {k.value for k in Nonlinearity}:
        raise ConfigError(f"{where}.nonlinearity: must be one of {[k.value for k in Nonlinearity]}, got {nl!r}")
    kwargs = {k: v for k, v in d.items() if k in _HYPER_KEYS}
    if "batch_size" in kwargs:
        _int(kwargs["batch_size"], f"{where}.batch_size", 1)
    hyper = _wrap(where, Hyperparameters, **kwargs)
    return ArmConfig(name=str(d.get("name", opt)), hyper=hyper)


def parse_arm_override(text: str, index: int) -> ArmConfig:
    """``--arm`` syntax: ``optimizer[:key=value,...]``, e.g. ``smbgd:beta=0.9,name=tuned``."""
    opt, _, rest = text.partition(":")
    d: dict = {"optimizer": opt.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"--arm[{index}]: expected key=value, got {item!r}")
        d[key.strip()] = yaml.safe_load(value)
    return parse_arm(d, f"--arm[{index}]")


def parse_seeds(value, where="seeds") -> tuple[int, ...]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise ConfigError(f"{where}: expected a count or comma-separated integers, got {value!r}") from None
        value = nums[0] if len(nums) == 1 else nums
    if isinstance(value, list):
        seeds = tuple(_int(s, f"{where}[{i}]", 0) for i, s in enumerate(value))
        if not seeds:
            raise ConfigError(f"{where}: need at least one seed")
        if len(set(seeds)) != len(seeds):
            raise ConfigError(f"{where}: duplicate seeds")
        return seeds
    count = _int(value, where, 1)
    return tuple(range(count))


def parse_sweep(d, where="sweep") -> SweepGrid:
    if d is None:
        return SweepGrid()
    _expect_keys(d, {"mu", "beta", "gamma", "batch_size"}, where)
    out = {}
    for key, val in d.items():
        if not isinstance(val, list) or not val:
            raise ConfigError(f"{where}.{key}: expected a non-empty list")
        if key == "batch_size":
            out[key] = tuple(_int(v, f"{where}.{key}", 1) for v in val)
        else:
            out[key] = tuple(float(v) for v in val)
    return SweepGrid(**out)


def config_from_dict(d: dict) -> ExperimentConfig:
    _expect_keys(
        d,
        {
            "version", "mixture", "arms", "seeds", "max_samples", "convergence",
            "stop_on_convergence", "precision", "csv_stride", "jobs", "output_dir", "sweep",
        },
        "config",
    )
    version = d.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"version: unsupported config version {version!r} (expected {CONFIG_VERSION})")
    defaults = ExperimentConfig()
    mixture = parse_mixture(d.get("mixture", {}))
    if "arms" in d:
        if not isinstance(d["arms"], list) or not d["arms"]:
            raise ConfigError("arms: need a non-empty list")
        arms = tuple(parse_arm(a, f"arms[{i}]") for i, a in enumerate(d["arms"]))
    else:
        arms = defaults.arms
    names = [a.name for a in arms]
    if len(set(names)) != len(names):
        raise ConfigError(f"arms: duplicate arm names {names}")
    conv = d.get("convergence", {})
    _expect_keys(conv, {"threshold", "window"}, "convergence")
    criterion = _wrap("convergence", ConvergenceCriterion, **conv)
    max_samples = _int(d.get("max_samples", defaults.max_samples), "max_samples", 1)
    if max_samples < criterion.window:
        raise ConfigError(f"max_samples: must be >= convergence.window ({criterion.window})")
    precision = d.get("precision", defaults.precision)
    if precision not in ("float32", "float64"):
        raise ConfigError(f"precision: must be 'float32' or 'float64', got {precision!r}")
    stop = d.get("stop_on_convergence", defaults.stop_on_convergence)
    if not isinstance(stop, bool):
        raise ConfigError("stop_on_convergence: expected true or false")
    return ExperimentConfig(
        mixture=mixture,
        arms=arms,
        seeds=parse_seeds(d.get("seeds", len(defaults.seeds))),
        max_samples=max_samples,
        convergence=criterion,
        stop_on_convergence=stop,
        precision=precision,
        csv_stride=_int(d.get("csv_stride", defaults.csv_stride), "csv_stride", 1),
        jobs=_int(d.get("jobs", defaults.jobs), "jobs", 1),
        output_dir=str(d.get("output_dir", defaults.output_dir)),
        sweep=parse_sweep(d.get("sweep")),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return config_from_dict(data or {})


# ---------------------------------------------------------------- emitting


def _source_dict(s: SourceSpec) -> dict:
    d = {"kind": s.kind.value}
    if s.kind is SourceKind.SINUSOID:
        d.update(freq=s.freq, phase=s.phase)
    elif s.kind is SourceKind.LAPLACE:
        d["scale"] = s.scale
    else:
        d["half_width"] = s.half_width
    return d


def arm_to_dict(arm: ArmConfig) -> dict:
    h = arm.hyper
    return {
        "name": arm.name,
        "optimizer": h.optimizer.value,
        "mu": h.mu,
        "beta": h.beta,
        "gamma": h.gamma,
        "batch_size": h.batch_size,
        "nonlinearity": h.nonlinearity.value,
    }


def config_to_dict(cfg: ExperimentConfig) -> dict:
    mix = cfg.mixture
    if isinstance(mix.schedule, Rotating):
        sched = {"kind": "rotating", "rate": mix.schedule.rate,
                 "plane": list(mix.schedule.plane), "start": mix.schedule.start}
    else:
        sched = {"kind": "stationary"}
    seeds = cfg.seeds
    return {
        "version": CONFIG_VERSION,
        "mixture": {
            "m": mix.m,
            "n": mix.n,
            "sources": [_source_dict(s) for s in mix.sources],
            "schedule": sched,
            "mixing_seed": mix.mixing_seed,
        },
        "arms": [arm_to_dict(a) for a in cfg.arms],
        "seeds": len(seeds) if seeds == tuple(range(len(seeds))) else list(seeds),
        "max_samples": cfg.max_samples,
        "convergence": {"threshold": cfg.convergence.threshold, "window": cfg.convergence.window},
        "stop_on_convergence": cfg.stop_on_convergence,
        "precision": cfg.precision,
        "csv_stride": cfg.csv_stride,
        "jobs": cfg.jobs,
        "output_dir": cfg.output_dir,
        "sweep": {k: list(v) for k, v in dataclasses.asdict(cfg.sweep).items()},
    }


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def default_config_text() -> str:
    return "# easi-bench experiment config\n" + dump_config(ExperimentConfig())
