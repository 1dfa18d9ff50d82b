"""Synthetic sources, mixing matrices and non-stationary mixing schedules.

Generation runs in double precision. Stochastic sources are counter based:
sample ``t`` of a stream is a pure function of ``(seed, t)``, so streams can
be read in any order and in parallel.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

MAX_CONDITION = 100.0
BLOCK = 1024


class SourceKind(str, enum.Enum):
    UNIFORM = "uniform"
    LAPLACE = "laplace"
    SINUSOID = "sinusoid"


@dataclass(frozen=True)
class SourceSpec:
    """One source. Output is always zero-mean and unit-variance.

    ``half_width`` (uniform) and ``scale`` (Laplace) describe the raw
    distribution; normalization removes their effect on the emitted samples.
    ``freq`` is in cycles per sample, ``phase`` in radians.
    """

    kind: SourceKind = SourceKind.UNIFORM
    half_width: float = 1.0
    scale: float = 1.0
    freq: float = 0.01
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        if self.half_width <= 0 or self.scale <= 0:
            raise ValueError("half_width and scale must be positive")
        if self.kind is SourceKind.SINUSOID and not 0 < self.freq < 0.5:
            raise ValueError(f"sinusoid freq must be in (0, 0.5), got {self.freq}")


@dataclass(frozen=True)
class Stationary:
    pass


@dataclass(frozen=True)
class Rotating:
    """Right-multiply A by a rotation of angle ``rate * (t - start)`` in ``plane``.

    The rotation is off (identity) for ``t <= start``.
    """

    rate: float
    plane: tuple[int, int] = (0, 1)
    start: int = 0


@dataclass(frozen=True)
class MixingModel:
    A: np.ndarray
    sources: tuple[SourceSpec, ...]
    schedule: Stationary | Rotating = field(default_factory=Stationary)

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64)
        if A.ndim != 2:
            raise ValueError("A must be 2-D")
        m, n = A.shape
        if m < n or n < 1:
            raise ValueError(f"need m >= n >= 1, got A of shape {A.shape}")
        if len(self.sources) != n:
            raise ValueError(f"need {n} sources for A of shape {A.shape}, got {len(self.sources)}")
        if np.linalg.cond(A) > MAX_CONDITION:
            raise ValueError(f"condition number of A exceeds {MAX_CONDITION}")
        if isinstance(self.schedule, Rotating):
            i, j = self.schedule.plane
            if not (0 <= i < n and 0 <= j < n and i != j):
                raise ValueError(f"rotation plane {self.schedule.plane} invalid for n={n}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "sources", tuple(self.sources))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def build_mixing(m: int, n: int, seed) -> np.ndarray:
    """Random m x n mixing matrix with condition number <= 100.

    Entries are uniform on [-1, 1]; ill-conditioned draws are rejected.
    """
    if n < 1 or m < n:
        raise ValueError(f"need m >= n >= 1, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    while True:
        A = rng.uniform(-1.0, 1.0, size=(m, n))
        if np.linalg.cond(A) <= MAX_CONDITION:
            return A


def rotation(n: int, plane: tuple[int, int], angle: float) -> np.ndarray:
    """n x n Givens rotation; ``R[i, j] = -sin``, ``R[j, i] = +sin``."""
    i, j = plane
    R = np.eye(n)
    c, s = math.cos(angle), math.sin(angle)
    R[i, i] = c
    R[j, j] = c
    R[i, j] = -s
    R[j, i] = s
    return R


@functools.lru_cache(maxsize=64)
def _uniform_block(seed: int, block: int, width: int) -> np.ndarray:
    # open-interval uniforms in (0, 1), one column per source
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    bits = rng.integers(0, 2**53, size=(BLOCK, width), dtype=np.int64)
    u = (bits + 0.5) / 2.0**53
    u.flags.writeable = False
    return u


def _shape(spec: SourceSpec, u: np.ndarray, t: np.ndarray) -> np.ndarray:
    if spec.kind is SourceKind.UNIFORM:
        return math.sqrt(3.0) * (2.0 * u - 1.0)
    if spec.kind is SourceKind.LAPLACE:
        c = u - 0.5
        # unit variance Laplace has scale 1/sqrt(2)
        return -np.sign(c) * np.log1p(-2.0 * np.abs(c)) / math.sqrt(2.0)
    return math.sqrt(2.0) * np.sin(2.0 * math.pi * spec.freq * t + spec.phase)


def source_block(specs, t0: int, count: int, seed: int) -> np.ndarray:
    """Samples ``t0 .. t0+count-1`` of every source, shape (count, n)."""
    specs = tuple(specs)
    n = len(specs)
    if t0 < 0 or count < 0:
        raise ValueError("t0 and count must be non-negative")
    out = np.empty((count, n))
    if count == 0:
        return out
    t = np.arange(t0, t0 + count)
    b0, b1 = t0 // BLOCK, (t0 + count - 1) // BLOCK
    u = np.concatenate([_uniform_block(int(seed), b, n) for b in range(b0, b1 + 1)])
    u = u[t0 - b0 * BLOCK: t0 - b0 * BLOCK + count]
    for j, spec in enumerate(specs):
        out[:, j] = _shape(spec, u[:, j], t)
    return out


def draw_sources(specs, t: int, seed: int) -> np.ndarray:
    return source_block(specs, t, 1, seed)[0]


def mixing_at(model: MixingModel, t) -> np.ndarray:
    sched = model.schedule
    if isinstance(sched, Stationary) or sched.rate == 0:
        return model.A
    angle = sched.rate * max(0, t - sched.start)
    return model.A @ rotation(model.n, sched.plane, angle)


def _apply(A: np.ndarray, S: np.ndarray) -> np.ndarray:
    # column-ordered accumulation so single samples and blocks round identically
    X = np.multiply.outer(S[:, 0], A[:, 0])
    for j in range(1, A.shape[1]):
        X += np.multiply.outer(S[:, j], A[:, j])
    return X


def mix(model: MixingModel, t: int, seed: int):
    """One observation: returns ``(x, s, A_t)`` with ``x = A_t @ s``."""
    s = draw_sources(model.sources, t, seed)
    A_t = mixing_at(model, t)
    return _apply(A_t, s[None, :])[0], s, A_t


def mix_block(model: MixingModel, t0: int, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Observations for ``t0 .. t0+count-1``; returns ``(X, S)`` with rows x_t, s_t.

    Row ``i`` equals ``mix(model, t0 + i, seed)[0]``.
    """
    S = source_block(model.sources, t0, count, seed)
    if isinstance(model.schedule, Stationary) or model.schedule.rate == 0:
        return _apply(model.A, S), S
    X = np.empty((count, model.m))
    for i in range(count):
        X[i] = _apply(mixing_at(model, t0 + i), S[i:i + 1])[0]
    return X, S
