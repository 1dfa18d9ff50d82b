"""Separation quality and convergence detection.

All metrics run in double precision on the global system ``C = B @ A_t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CROSSTALK_FLOOR_DB = -120.0


@dataclass(frozen=True)
class ConvergenceCriterion:
    threshold: float = 0.05
    window: int = 100

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")
        if int(self.window) != self.window or self.window < 1:
            raise ValueError(f"window must be an integer >= 1, got {self.window}")


@dataclass
class RunRecord:
    """Per-run trace: Amari index after every processed sample."""

    seed: int
    arm: str
    amari: list[float] = field(default_factory=list)
    iterations_to_convergence: int | None = None
    diverged: bool = False


def _abs_rows(C):
    """|C| as nested lists plus row and column maxima.

    The global systems here are tiny (n x n with n of a few), where plain
    Python beats numpy's per-call overhead.
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"global system must be square, got shape {C.shape}")
    rows = [[abs(v) for v in r] for r in C.tolist()]
    rmax = [max(r) for r in rows]
    cmax = [max(col) for col in zip(*rows)]
    if not all(math.isfinite(v) for v in rmax):
        raise ValueError("global system contains non-finite entries")
    if min(rmax) == 0 or min(cmax) == 0:
        raise ValueError("global system has an all-zero row or column")
    return rows, rmax, cmax


def amari_index(C) -> float:
    """Amari performance index, 0 for a scaled permutation, 1 at worst.

    PI = [sum_i (sum_j |c_ij| / max_k |c_ik| - 1)
          + sum_j (sum_i |c_ij| / max_k |c_kj| - 1)] / (2 n (n - 1))
    """
    rows, rmax, cmax = _abs_rows(C)
    n = len(rows)
    if n == 1:
        return 0.0
    r = sum(sum(row) / mx - 1.0 for row, mx in zip(rows, rmax))
    c = sum(sum(col) / mx - 1.0 for col, mx in zip(zip(*rows), cmax))
    return (r + c) / (2.0 * n * (n - 1))


def crosstalk_db(C) -> float:
    """Interference energy relative to the per-row dominant entries, in dB."""
    rows, rmax, _ = _abs_rows(C)
    total = sum(v * v for row in rows for v in row)
    dominant = sum(v * v for v in rmax)
    off = total - dominant
    if off <= 0:
        return CROSSTALK_FLOOR_DB
    return max(CROSSTALK_FLOOR_DB, 10.0 * math.log10(off / dominant))


def check_convergence(series, criterion: ConvergenceCriterion) -> int | None:
    """First index t with ``series[t:t+window] < threshold`` throughout, else None."""
    run = 0
    for t, value in enumerate(series):
        if value < criterion.threshold:
            run += 1
            if run >= criterion.window:
                return t - criterion.window + 1
        else:
            run = 0
    return None


class ConvergenceTracker:
    """Incremental form of :func:`check_convergence` for streaming runs."""

    def __init__(self, criterion: ConvergenceCriterion):
        self.criterion = criterion
        self.t = 0
        self.run = 0
        self.converged_at: int | None = None

    def push(self, value: float) -> bool:
        if self.converged_at is None:
            if value < self.criterion.threshold:
                self.run += 1
                if self.run >= self.criterion.window:
                    self.converged_at = self.t - self.criterion.window + 1
            else:
                self.run = 0
        self.t += 1
        return self.converged_at is not None
