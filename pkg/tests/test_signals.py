import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from easi_smbgd import signals
from easi_smbgd.signals import MixingModel, Rotating, SourceKind, SourceSpec, Stationary

UNIFORM, LAPLACE = SourceSpec("uniform"), SourceSpec("laplace")


def test_build_mixing_deterministic_and_conditioned():
    a = signals.build_mixing(4, 2, 11)
    assert np.array_equal(a, signals.build_mixing(4, 2, 11))
    assert a.shape == (4, 2) and np.all(np.abs(a) <= 1)
    for seed in range(50):
        sv = np.linalg.svd(signals.build_mixing(3, 3, seed), compute_uv=False)
        assert sv[0] / sv[-1] <= 100


def test_build_mixing_rejects_m_lt_n():
    with pytest.raises(ValueError):
        signals.build_mixing(1, 2, 0)


def test_sinusoid_quarter_cycle():
    spec = SourceSpec(kind="sinusoid", freq=0.25, phase=0.0)
    vals = [signals.draw_sources([spec], t, seed=0)[0] for t in range(4)]
    a = math.sqrt(2)
    for got, want in zip(vals, [0, a, 0, -a]):
        assert got == pytest.approx(want, abs=1e-12)
    # unit-variance amplitude: mean square over a whole period is 1
    assert np.mean(np.square(vals)) == pytest.approx(1.0, abs=1e-12)


def _moments(spec, n=100_000, seed=1):
    x = signals.source_block([spec], 0, n, seed)[:, 0]
    mean = x.mean()
    var = x.var()
    kurt = np.mean((x - mean) ** 4) / var**2 - 3
    return mean, var, kurt


def test_uniform_moments():
    mean, var, kurt = _moments(UNIFORM)
    assert abs(mean) < 0.01
    assert var == pytest.approx(1.0, abs=0.02)
    assert kurt == pytest.approx(-1.2, abs=0.1)


def test_laplace_moments():
    mean, var, kurt = _moments(LAPLACE)
    assert abs(mean) < 0.02
    assert var == pytest.approx(1.0, abs=0.05)
    assert kurt > 2  # super-Gaussian (theory: +3)


def test_parameters_do_not_change_normalized_output():
    a = signals.source_block([SourceSpec("uniform", half_width=5)], 0, 100, 3)
    b = signals.source_block([SourceSpec("uniform", half_width=0.1)], 0, 100, 3)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("spec", [UNIFORM, LAPLACE])
def test_sources_pairwise_uncorrelated(spec):
    x = signals.source_block([spec, spec, spec], 0, 100_000, 5)
    c = np.corrcoef(x.T)
    assert np.all(np.abs(c[np.triu_indices(3, 1)]) < 0.02)


@settings(deadline=None, max_examples=30)
@given(st.integers(0, 5000), st.integers(1, 3000), st.integers(0, 2**31))
def test_counter_based_order_independence(t0, count, seed):
    specs = [UNIFORM, LAPLACE, SourceSpec("sinusoid", freq=0.01)]
    block = signals.source_block(specs, t0, count, seed)
    for i in {0, count // 2, count - 1}:
        assert np.array_equal(block[i], signals.draw_sources(specs, t0 + i, seed))


def test_different_seeds_differ():
    assert not np.array_equal(signals.source_block([UNIFORM], 0, 10, 1), signals.source_block([UNIFORM], 0, 10, 2))


def test_mix_stationary_identity():
    model = MixingModel(A=np.eye(2), sources=[UNIFORM, UNIFORM])
    x, s, A_t = signals.mix(model, 3, 0)
    assert np.array_equal(x, s) and np.array_equal(A_t, np.eye(2))


def test_mix_identity_with_fixed_sources():
    # x = A s with A = I and known s
    assert np.array_equal(signals._apply(np.eye(2), np.array([[1.0, 2.0]]))[0], [1, 2])


def test_rotating_rate_zero_is_stationary():
    A = signals.build_mixing(4, 2, 0)
    st_model = MixingModel(A=A, sources=[UNIFORM, UNIFORM])
    rot_model = MixingModel(A=A, sources=[UNIFORM, UNIFORM], schedule=Rotating(rate=0.0))
    for t in (0, 10, 1000):
        assert np.array_equal(signals.mix(st_model, t, 4)[0], signals.mix(rot_model, t, 4)[0])


def test_quarter_turn_rotation():
    # rotation by +pi/2 in plane (0, 1) maps e0 to e1
    R = signals.rotation(2, (0, 1), math.pi / 2)
    x = np.eye(2) @ R @ np.array([1.0, 0.0])
    assert x == pytest.approx([0.0, 1.0], abs=1e-15)
    model = MixingModel(A=np.eye(2), sources=[UNIFORM, UNIFORM], schedule=Rotating(rate=math.pi / 2, start=0))
    assert signals.mixing_at(model, 1) == pytest.approx(R, abs=1e-15)


def test_rotation_switches_on_after_start():
    A = signals.build_mixing(4, 2, 0)
    model = MixingModel(A=A, sources=[UNIFORM, UNIFORM], schedule=Rotating(rate=0.1, start=100))
    assert np.array_equal(signals.mixing_at(model, 50), A)
    assert np.array_equal(signals.mixing_at(model, 100), A)
    assert not np.array_equal(signals.mixing_at(model, 101), A)


@settings(deadline=None, max_examples=20)
@given(st.integers(0, 1000), st.floats(0, 1e-2), st.integers(0, 10**6))
def test_mix_is_self_consistent(seed, rate, t):
    A = signals.build_mixing(4, 3, seed)
    model = MixingModel(A=A, sources=[UNIFORM, LAPLACE, UNIFORM], schedule=Rotating(rate=rate, plane=(0, 2)))
    x, s, A_t = signals.mix(model, t, seed)
    assert np.array_equal(x, signals._apply(A_t, s[None, :])[0])
    assert np.allclose(x, A_t @ s, rtol=0, atol=1e-12)


@settings(deadline=None, max_examples=20)
@given(st.integers(0, 1000), st.floats(0, 1e-2), st.integers(0, 10**6))
def test_rotation_preserves_condition_number(seed, rate, t):
    A = signals.build_mixing(4, 2, seed)
    model = MixingModel(A=A, sources=[UNIFORM, UNIFORM], schedule=Rotating(rate=rate))
    assert np.linalg.cond(signals.mixing_at(model, t)) == pytest.approx(np.linalg.cond(A), rel=1e-9)


def test_mix_block_matches_mix():
    A = signals.build_mixing(4, 2, 1)
    for sched in (Stationary(), Rotating(rate=1e-3, start=5)):
        model = MixingModel(A=A, sources=[UNIFORM, LAPLACE], schedule=sched)
        X, S = signals.mix_block(model, 1000, 40, 9)
        for i in (0, 7, 39):
            x, s, _ = signals.mix(model, 1000 + i, 9)
            assert np.array_equal(X[i], x) and np.array_equal(S[i], s)


@pytest.mark.parametrize("kwargs", [
    dict(A=np.ones((2, 3)), sources=[UNIFORM] * 3),
    dict(A=np.eye(2), sources=[UNIFORM]),
    dict(A=np.array([[1.0, 0.0], [0.0, 1e-4]]), sources=[UNIFORM] * 2),
    dict(A=np.eye(2), sources=[UNIFORM] * 2, schedule=Rotating(rate=1e-3, plane=(0, 2))),
])
def test_mixing_model_validation(kwargs):
    with pytest.raises(ValueError):
        MixingModel(**kwargs)


def test_source_spec_validation():
    with pytest.raises(ValueError):
        SourceSpec("gaussian")
    with pytest.raises(ValueError):
        SourceSpec("sinusoid", freq=0.7)
    assert SourceSpec("laplace").kind is SourceKind.LAPLACE
