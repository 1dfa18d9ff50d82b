"""EASI adaptive separation with SGD, momentum-SGD and SMBGD updates.

The separator learns an n x m matrix ``B`` so that ``y = B x`` recovers the
independent sources. Each sample produces a relative gradient

    H = y y^T - I + g(y) y^T - y g(y)^T

and the separator is updated multiplicatively, ``B <- (I - delta) B``, where
``delta`` depends on the optimizer:

* SGD:          delta = mu * H, every sample.
* MomentumSGD:  v <- gamma * v + mu * H;  delta = v, every sample.
* SMBGD:        a running accumulator chains the P samples of a mini-batch,

      H_hat = gamma * H_prev + mu * H     (first sample of a batch)
      H_hat = beta * H_hat   + mu * H     (remaining samples)

  and ``delta = H_hat`` is applied once, when the batch completes. ``H_prev``
  is the final accumulator of the previous batch (zero for the first batch).
  All samples in a batch see the same ``B``, which is what lets hardware keep
  the pipeline full.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import numerics as nx

# |B| entries beyond this bound mark a run as diverged.
DIVERGENCE_LIMIT = 1e6


class Optimizer(str, enum.Enum):
    SGD = "sgd"
    MOMENTUM_SGD = "momentum"
    SMBGD = "smbgd"


class Nonlinearity(str, enum.Enum):
    CUBIC = "cubic"
    TANH = "tanh"


@dataclass(frozen=True)
class Hyperparameters:
    mu: float = 0.01
    beta: float = 0.5
    gamma: float = 0.5
    batch_size: int = 8
    optimizer: Optimizer = Optimizer.SMBGD
    nonlinearity: Nonlinearity = Nonlinearity.CUBIC

    def __post_init__(self):
        object.__setattr__(self, "optimizer", Optimizer(self.optimizer))
        object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError(f"batch_size must be an integer >= 1, got {self.batch_size}")


@dataclass(slots=True)
class SeparatorState:
    """Learner state for one stream.

    ``H_hat`` is the working SMBGD accumulator, ``H_momentum`` the retained
    final accumulator of the previous batch, ``velocity`` the momentum-SGD
    buffer. ``p`` is the sample index inside the current batch and ``k`` the
    number of completed batches.
    """

    B: np.ndarray
    H_hat: np.ndarray
    H_momentum: np.ndarray
    velocity: np.ndarray
    p: int = 0
    k: int = 0

    def evolve(self, **changes) -> "SeparatorState":
        """Copy with some fields replaced; states are treated as values."""
        return SeparatorState(
            changes.get("B", self.B),
            changes.get("H_hat", self.H_hat),
            changes.get("H_momentum", self.H_momentum),
            changes.get("velocity", self.velocity),
            changes.get("p", self.p),
            changes.get("k", self.k),
        )

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def dtype(self):
        return self.B.dtype


@dataclass(slots=True)
class SampleResult:
    y: np.ndarray
    H: np.ndarray
    updated: bool


def init_separator(n: int, m: int, hyper: Hyperparameters, seed, dtype=nx.DTYPE) -> SeparatorState:
    """Fresh separator with ``B`` drawn uniformly on [-0.5, 0.5]."""
    if n < 1 or n > m:
        raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    B = rng.uniform(-0.5, 0.5, size=(n, m)).astype(dtype)
    return SeparatorState(
        B=B,
        H_hat=nx.zeros(n, n, dtype),
        H_momentum=nx.zeros(n, n, dtype),
        velocity=nx.zeros(n, n, dtype),
    )


def state_from_matrix(B, dtype=None) -> SeparatorState:
    """Wrap an explicit separation matrix in a fresh state."""
    B = nx.as_mat(B, dtype=dtype or np.asarray(B).dtype)
    if B.shape[0] > B.shape[1]:
        raise ValueError(f"need n <= m, got B of shape {B.shape}")
    n = B.shape[0]
    z = nx.zeros(n, n, B.dtype)
    return SeparatorState(B=B, H_hat=z, H_momentum=z.copy(), velocity=z.copy())


def apply_nonlinearity(y: np.ndarray, kind) -> np.ndarray:
    kind = Nonlinearity(kind)
    if kind is Nonlinearity.CUBIC:
        return y * y * y
    return np.tanh(y)


def whitening_term(y: np.ndarray) -> np.ndarray:
    """Symmetric part ``y y^T - I`` of the relative gradient."""
    return nx.outer(y, y) - nx.identity(y.shape[0], y.dtype)


def separation_term(y: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Antisymmetric part ``g(y) y^T - y g(y)^T`` of the relative gradient."""
    return nx.outer(gy, y) - nx.outer(y, gy)


def relative_gradient(y: np.ndarray, gy: np.ndarray) -> np.ndarray:
    if y.ndim != 1 or y.shape != gy.shape:
        raise ValueError(f"relative_gradient length mismatch: {y.shape} vs {gy.shape}")
    return whitening_term(y) + separation_term(y, gy)


def _check_square(state: SeparatorState, H: np.ndarray) -> None:
    if H.shape != (state.n, state.n):
        raise ValueError(f"gradient must be {state.n}x{state.n}, got {H.shape}")


def _apply_delta(B: np.ndarray, delta: np.ndarray) -> np.ndarray:
    # multiplicative (serial) update: B <- (I - delta) B
    step = nx.mat_combine(1, nx.identity(B.shape[0], B.dtype), -1, delta)
    return nx.matmul(step, B)


def smbgd_accumulate(state: SeparatorState, H: np.ndarray, hyper: Hyperparameters) -> SeparatorState:
    """Fold one instantaneous gradient into the SMBGD accumulator.

    Does not advance ``p``; ``step_sample`` owns the batch counter.
    """
    if hyper.optimizer is not Optimizer.SMBGD:
        raise ValueError(f"smbgd_accumulate called with optimizer {hyper.optimizer.value}")
    _check_square(state, H)
    if state.p == 0:
        if state.k == 0:
            # first mini-batch: no momentum
            H_hat = nx.scale(hyper.mu, H)
        else:
            H_hat = nx.mat_combine(hyper.gamma, state.H_momentum, hyper.mu, H)
    else:
        H_hat = nx.mat_combine(hyper.beta, state.H_hat, hyper.mu, H)
    return state.evolve(H_hat=H_hat)


def commit_batch(state: SeparatorState) -> SeparatorState:
    """Apply the accumulated batch update and open the next batch."""
    return state.evolve(
        B=_apply_delta(state.B, state.H_hat),
        H_momentum=state.H_hat,
        H_hat=np.zeros_like(state.H_hat),
        p=0,
        k=state.k + 1,
    )


def sgd_update(state: SeparatorState, H: np.ndarray, hyper: Hyperparameters) -> SeparatorState:
    _check_square(state, H)
    return state.evolve(B=_apply_delta(state.B, nx.scale(hyper.mu, H)))


def momentum_update(state: SeparatorState, H: np.ndarray, hyper: Hyperparameters) -> SeparatorState:
    _check_square(state, H)
    velocity = nx.mat_combine(hyper.gamma, state.velocity, hyper.mu, H)
    return state.evolve(B=_apply_delta(state.B, velocity), velocity=velocity)


def step_sample(state: SeparatorState, x, hyper: Hyperparameters) -> tuple[SeparatorState, SampleResult]:
    """Process one observation ``x`` (length m) through the EASI loop."""
    x = np.asarray(x, dtype=state.dtype)
    if x.shape != (state.m,):
        raise ValueError(f"sample must have length {state.m}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite entries")
    return step_validated(state, x, hyper)


def step_validated(state: SeparatorState, x: np.ndarray, hyper: Hyperparameters) -> tuple[SeparatorState, SampleResult]:
    """:func:`step_sample` for an ``x`` already known to be finite, of length m, in the state dtype."""
    y = nx.matvec(state.B, x)
    gy = apply_nonlinearity(y, hyper.nonlinearity)
    H = relative_gradient(y, gy)
    opt = hyper.optimizer
    if opt is Optimizer.SGD:
        state, updated = sgd_update(state, H, hyper), True
    elif opt is Optimizer.MOMENTUM_SGD:
        state, updated = momentum_update(state, H, hyper), True
    else:
        state = smbgd_accumulate(state, H, hyper)
        if state.p == hyper.batch_size - 1:
            state, updated = commit_batch(state), True
        else:
            state, updated = state.evolve(p=state.p + 1), False
    return state, SampleResult(y=y, H=H, updated=updated)


def is_diverged(state: SeparatorState) -> bool:
    # NaN fails the comparison, so non-finite entries count as diverged
    return not float(np.abs(state.B).max()) <= DIVERGENCE_LIMIT


def run_stream(state: SeparatorState, X, hyper: Hyperparameters) -> SeparatorState:
    """Feed every row of ``X`` through ``step_sample``; stops early on divergence."""
    X = np.asarray(X, dtype=state.dtype)
    if X.ndim != 2 or X.shape[1] != state.m:
        raise ValueError(f"stream must be (T, {state.m}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("stream contains non-finite entries")
    for x in X:
        state, res = step_validated(state, x, hyper)
        if res.updated and is_diverged(state):
            break
    return state
