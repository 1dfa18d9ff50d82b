import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from easi_smbgd.metrics import (
    CROSSTALK_FLOOR_DB,
    ConvergenceCriterion,
    ConvergenceTracker,
    amari_index,
    check_convergence,
    crosstalk_db,
)


def amari_oracle(C):
    """Literal double loop over the index definition."""
    C = [[abs(float(v)) for v in row] for row in np.asarray(C)]
    n = len(C)
    total = 0.0
    for i in range(n):
        total += sum(C[i][j] / max(C[i]) for j in range(n)) - 1
    for j in range(n):
        col = [C[i][j] for i in range(n)]
        total += sum(c / max(col) for c in col) - 1
    return total / (2 * n * (n - 1))


def test_amari_examples():
    assert amari_index(np.eye(3)) == 0.0
    D = np.diag([3.0, -5.0])
    for P in (np.eye(2), np.array([[0, 1], [1, 0]])):
        assert amari_index(D @ P) == 0.0
        assert amari_index(P @ D) == 0.0
    assert amari_oracle([[1, 1], [1, 1]]) == 1.0
    assert amari_index([[1, 1], [1, 1]]) == 1.0
    assert amari_index([[7.0]]) == 0.0


def test_amari_errors():
    with pytest.raises(ValueError):
        amari_index([[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        amari_index([[1, 0], [1, 0]])
    with pytest.raises(ValueError):
        amari_index(np.ones((2, 3)))
    with pytest.raises(ValueError):
        amari_index([[np.nan, 1], [1, 1]])


square = st.integers(2, 5).flatmap(
    lambda n: st.lists(st.lists(st.floats(-10, 10), min_size=n, max_size=n), min_size=n, max_size=n))


def _valid(C):
    A = np.abs(np.asarray(C))
    return A.max(axis=0).min() > 0 and A.max(axis=1).min() > 0


@given(square)
def test_amari_matches_oracle_and_is_nonnegative(C):
    assume(_valid(C))
    v = amari_index(C)
    assert v >= 0
    assert v == pytest.approx(amari_oracle(C), rel=1e-12, abs=1e-15)


@given(square, st.sampled_from([-3.0, -1.0, 0.5, 2.0, 4.0, -0.25]))
def test_amari_scale_invariance_exact(C, alpha):
    # powers of two keep the scaled matrix exact, so the index is bitwise equal
    assume(_valid(C))
    assert amari_index(alpha * np.asarray(C)) == pytest.approx(amari_index(C), rel=1e-12, abs=1e-15)
    if alpha in (2.0, 4.0, 0.5, -0.25, -1.0):
        assert amari_index(alpha * np.asarray(C)) == amari_index(C)


@given(square, st.randoms())
def test_amari_permutation_invariance(C, rnd):
    assume(_valid(C))
    C = np.asarray(C)
    n = C.shape[0]
    p1, p2 = list(range(n)), list(range(n))
    rnd.shuffle(p1)
    rnd.shuffle(p2)
    P1, P2 = np.eye(n)[p1], np.eye(n)[p2]
    assert amari_index(P1 @ C @ P2) == pytest.approx(amari_index(C), rel=1e-12, abs=1e-15)


@settings(max_examples=50)
@given(st.integers(2, 5), st.integers(0, 2**31), st.floats(1e-6, 1.0))
def test_amari_zero_iff_scaled_permutation(n, seed, eps):
    rng = np.random.default_rng(seed)
    P = np.eye(n)[rng.permutation(n)]
    D = np.diag(rng.uniform(0.5, 3, n) * rng.choice([-1, 1], n))
    C = P @ D
    assert amari_index(C) == 0
    i, j = rng.choice(n, 2, replace=False)
    E = C.copy()
    E[i, np.argmax(np.abs(C[j]))] += eps  # perturb a zero entry off the permutation
    assert amari_index(E) > 0


def test_crosstalk_examples():
    assert crosstalk_db(np.eye(2)) == CROSSTALK_FLOOR_DB
    assert crosstalk_db([[1, 1], [1, 1]]) == pytest.approx(0.0, abs=1e-12)
    # off-dominant energy 0.01 + 0.01 = 0.02, dominant 1 + 1 = 2
    assert crosstalk_db([[1, 0.1], [0.1, 1]]) == pytest.approx(10 * math.log10(0.02 / 2), abs=1e-9)
    assert crosstalk_db([[1, 0.1], [0.1, 1]]) == pytest.approx(-20.0, abs=1e-9)
    with pytest.raises(ValueError):
        crosstalk_db([[0, 0], [0, 1]])


def test_check_convergence_examples():
    c = ConvergenceCriterion(threshold=0.05, window=3)
    assert check_convergence([0.5, 0.4, 0.3], c) is None
    assert check_convergence([0.5, 0.01, 0.01, 0.01], c) == 1
    assert check_convergence([0.01, 0.01, 0.5, 0.01, 0.01], c) is None
    c1 = ConvergenceCriterion(threshold=0.05, window=1)
    assert check_convergence([0.5, 0.2, 0.04, 0.5], c1) == 2


@given(st.lists(st.floats(0, 0.1), max_size=60), st.integers(1, 6))
def test_tracker_agrees_with_batch_scan(series, window):
    c = ConvergenceCriterion(threshold=0.05, window=window)
    tr = ConvergenceTracker(c)
    for v in series:
        tr.push(v)
    assert tr.converged_at == check_convergence(series, c)
    # brute force over all start positions
    brute = next((t for t in range(len(series) - window + 1)
                  if all(v < 0.05 for v in series[t:t + window])), None)
    assert brute == tr.converged_at


@pytest.mark.parametrize("kwargs", [dict(threshold=0), dict(window=0), dict(window=1.5)])
def test_criterion_validation(kwargs):
    with pytest.raises(ValueError):
        ConvergenceCriterion(**kwargs)


def test_crosstalk_monotone_in_leakage():
    vals = [crosstalk_db([[1, e], [e, 1]]) for e in (1e-4, 1e-3, 1e-2, 1e-1)]
    assert vals == sorted(vals)
    for e, v in zip((1e-4, 1e-3, 1e-2, 1e-1), vals):
        assert v == pytest.approx(20 * math.log10(e), abs=1e-6)


def test_amari_all_permutations_of_identity_n3():
    for perm in itertools.permutations(range(3)):
        assert amari_index(np.eye(3)[list(perm)]) == 0.0
