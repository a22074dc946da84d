import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from nabla_fc import SampledSignal
from nabla_fc.errors import HistoryError, OrderError
from nabla_fc.operators import (
    Definition,
    VariableOrder,
    caputo_difference,
    caputo_series,
    difference,
    difference_series,
    fixed_memory_difference,
    fixed_memory_series,
    gl_difference,
    gl_modified_difference,
    gl_series,
    rl_difference,
    rl_from_caputo,
    rl_series,
    variable_order_difference,
    variable_order_series,
)

alphas = st.floats(0.02, 0.98)
samples = arrays(np.float64, st.integers(2, 30), elements=st.floats(-2, 2))

HAND = SampledSignal([1.0, 2.0, 3.0], base=0)


def naive_caputo(x, alpha, k, a):
    # independent double loop with Gamma-quotient weights
    total = 0.0
    for j in range(a, k + 1):
        t = k - j
        w = math.gamma(t + 1 - alpha) / (math.gamma(1 - alpha) * math.factorial(t))
        total += w * (x[j - a + 1] - x[j - a])
    return total


def test_hand_values():
    assert caputo_difference(HAND, 0.5, 0) == pytest.approx(1.0)
    assert caputo_difference(HAND, 0.5, 1) == pytest.approx(1.5)
    assert rl_difference(HAND, 0.5, 1) == pytest.approx(2.0)
    assert rl_from_caputo(HAND, 0.5, 1) == pytest.approx(2.0)
    assert gl_difference(HAND, 0.5, 1) == pytest.approx(3.0 - 0.5 * 2.0)


def test_constant_signal_caputo_is_zero():
    s = SampledSignal(np.full(10, 4.2), base=3)
    assert np.all(caputo_series(s, 0.4) == 0.0)


def test_initial_values_exact():
    rng = np.random.default_rng(11)
    for _ in range(100):
        s = SampledSignal(rng.uniform(-2, 2, int(rng.integers(2, 20))), base=int(rng.integers(-4, 4)))
        alpha = float(rng.uniform(0.05, 0.95))
        a = s.base
        assert gl_difference(s, alpha, a) == s(a)
        assert caputo_difference(s, alpha, a) == s(a) - s(a - 1)
        assert rl_difference(s, alpha, a) == s(a)


@given(samples, alphas, st.integers(-5, 5))
def test_caputo_matches_naive_loop(x, alpha, a):
    s = SampledSignal(x, base=a)
    for k in range(a, s.k_max + 1):
        assert caputo_difference(s, alpha, k) == pytest.approx(naive_caputo(x, alpha, k, a), rel=1e-10, abs=1e-12)


@given(samples, alphas, st.integers(-5, 5))
def test_series_agree_with_pointwise(x, alpha, a):
    s = SampledSignal(x, base=a)
    ks = range(a, s.k_max + 1)
    for d in Definition:
        pts = np.array([difference(s, alpha, k, d) for k in ks])
        np.testing.assert_allclose(difference_series(s, alpha, d), pts, rtol=1e-12, atol=1e-13)


@given(samples, alphas)
def test_bridge_identity(x, alpha):
    s = SampledSignal(x, base=0)
    for k in range(1, s.k_max + 1):
        rl = rl_difference(s, alpha, k)
        scale = max(1.0, float(np.max(np.abs(x))))
        assert abs(rl - rl_from_caputo(s, alpha, k)) <= 1e-11 * scale


def test_bridge_rejects_base_point():
    with pytest.raises(HistoryError):
        rl_from_caputo(HAND, 0.5, 0)


def test_vector_signals_componentwise():
    rng = np.random.default_rng(2)
    v = rng.normal(size=(12, 3))
    s = SampledSignal(v, base=1)
    for d in Definition:
        full = difference_series(s, 0.6, d)
        for i in range(3):
            np.testing.assert_allclose(full[:, i], difference_series(s.component(i), 0.6, d),
                                       rtol=1e-12, atol=1e-14)


def test_order_checks():
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(OrderError):
            caputo_difference(HAND, bad, 0)
        with pytest.raises(OrderError):
            rl_difference(HAND, bad, 0)
    # the raw GL operator accepts any real order; alpha = -1 is the plain sum
    assert gl_difference(HAND, -1.0, 1) == pytest.approx(5.0)


def test_history_checks():
    with pytest.raises(HistoryError):
        caputo_difference(HAND, 0.5, 2)
    with pytest.raises(HistoryError):
        gl_difference(HAND, 0.5, -1)
    no_hist = SampledSignal([1.0, 2.0], base=0, history=0)
    with pytest.raises(HistoryError):
        caputo_difference(no_hist, 0.5, 0)


def test_modified_gl_drops_base_sample():
    x = np.array([0.0, 7.0, 1.0, 2.0, 5.0])
    s = SampledSignal(x, base=0)
    y = s.values.copy()
    y[1] = -100.0
    t = SampledSignal(y, base=0)
    for k in range(1, 4):
        assert gl_modified_difference(s, 0.4, k) == gl_modified_difference(t, 0.4, k)
    assert gl_modified_difference(s, 0.4, 1) == 1.0
    with pytest.raises(HistoryError):
        gl_modified_difference(s, 0.4, 0)


@given(samples, alphas, st.integers(0, 6))
def test_fixed_memory_series_and_points(x, alpha, K):
    s = SampledSignal(x, base=0)
    for d in Definition:
        ser = fixed_memory_series(s, alpha, K, d)
        pts = [fixed_memory_difference(s, alpha, K, k, d) for k in range(s.k_max + 1)]
        np.testing.assert_allclose(ser, pts, rtol=1e-12, atol=1e-13)


def test_fixed_memory_large_window_is_full_history():
    x = np.random.default_rng(5).normal(size=25)
    s = SampledSignal(x, base=0)
    for d in Definition:
        np.testing.assert_allclose(fixed_memory_series(s, 0.3, 100, d), difference_series(s, 0.3, d), rtol=1e-13)


def test_fixed_memory_zero_is_first_difference_for_caputo():
    x = np.random.default_rng(6).normal(size=10)
    s = SampledSignal(x, base=0)
    np.testing.assert_allclose(fixed_memory_series(s, 0.3, 0, "caputo"), np.diff(x), rtol=1e-15)


def test_fixed_memory_rl_equals_caputo_inside_window():
    # sliding window on both sums cancels the initial-value term once k - a > K
    x = np.random.default_rng(7).normal(size=20)
    s = SampledSignal(x, base=0)
    K = 4
    rl = fixed_memory_series(s, 0.45, K, "rl")
    cap = fixed_memory_series(s, 0.45, K, "caputo")
    np.testing.assert_allclose(rl[K + 1:], cap[K + 1:], rtol=1e-12, atol=1e-14)


def test_variable_order_constant_matches_fixed():
    x = np.random.default_rng(8).normal(size=15)
    s = SampledSignal(x, base=2)
    orders = VariableOrder.constant(0.35, 14, base=2)
    for d in Definition:
        np.testing.assert_allclose(variable_order_series(s, orders, d), difference_series(s, 0.35, d), rtol=1e-13)


def test_variable_order_freezes_order_at_k():
    x = np.random.default_rng(9).normal(size=8)
    s = SampledSignal(x, base=0)
    orders = np.linspace(0.2, 0.8, 7)
    for k in range(7):
        v = variable_order_difference(s, orders, k, "caputo")
        assert v == caputo_difference(s, orders[k], k)
    with pytest.raises(HistoryError):
        VariableOrder(orders)(7)


def test_gl_series_order_one_is_difference_from_zero():
    x = np.array([9.0, 1.0, 4.0, 2.0])
    s = SampledSignal(x, base=0)
    np.testing.assert_array_equal(gl_series(s, 1.0), [1.0, 3.0, -2.0])
    np.testing.assert_allclose(rl_series(s, 0.999999), gl_series(s, 0.999999), rtol=1e-12)
