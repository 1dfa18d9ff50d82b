"""Small dense kernels for the separation datapath.

Matrices and vectors are plain numpy arrays. The datapath runs in single
precision by default; every kernel preserves the dtype of its inputs so the
same code can be driven in double precision for reference runs.
"""

from __future__ import annotations

import functools

import numpy as np

DTYPE = np.float32


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite entries")


def as_mat(data, dtype=DTYPE) -> np.ndarray:
    """Build a validated 2-D array (rows, cols >= 1, all finite)."""
    a = np.array(data, dtype=dtype, copy=True)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"matrix must be 2-D and non-empty, got shape {a.shape}")
    _check_finite(a, "matrix")
    return a


def as_vec(data, dtype=DTYPE) -> np.ndarray:
    """Build a validated 1-D array (len >= 1, all finite)."""
    a = np.array(data, dtype=dtype, copy=True)
    if a.ndim != 1 or a.shape[0] < 1:
        raise ValueError(f"vector must be 1-D and non-empty, got shape {a.shape}")
    _check_finite(a, "vector")
    return a


@functools.lru_cache(maxsize=None)
def _eye(n: int, dtype) -> np.ndarray:
    eye = np.eye(n, dtype=dtype)
    eye.flags.writeable = False
    return eye


def identity(n: int, dtype=DTYPE) -> np.ndarray:
    """Read-only n x n identity (cached)."""
    return _eye(n, np.dtype(dtype))


def zeros(rows: int, cols: int, dtype=DTYPE) -> np.ndarray:
    return np.zeros((rows, cols), dtype=dtype)


def matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    if M.ndim != 2 or v.ndim != 1 or M.shape[1] != v.shape[0]:
        raise ValueError(f"matvec shape mismatch: {M.shape} x {v.shape}")
    return M @ v


def outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.multiply.outer(u, v)


def mat_combine(alpha, M1: np.ndarray, beta, M2: np.ndarray) -> np.ndarray:
    """Return ``alpha*M1 + beta*M2`` element-wise.

    The scalars are cast to the matrices' dtype first, so in single precision
    each product and the sum are rounded to float32.
    """
    if M1.shape != M2.shape:
        raise ValueError(f"mat_combine shape mismatch: {M1.shape} vs {M2.shape}")
    dt = np.result_type(M1, M2)
    return dt.type(alpha) * M1 + dt.type(beta) * M2


def scale(alpha, M: np.ndarray) -> np.ndarray:
    return M.dtype.type(alpha) * M


def matmul(M1: np.ndarray, M2: np.ndarray) -> np.ndarray:
    if M1.ndim != 2 or M2.ndim != 2 or M1.shape[1] != M2.shape[0]:
        raise ValueError(f"matmul shape mismatch: {M1.shape} x {M2.shape}")
    return M1 @ M2
