"""Nabla fractional differences on sampled signals.

Three definitions are provided for orders ``0 < alpha < 1``:

* Grünwald–Letnikov: ``sum_{j=0}^{k-a} c_j x(k-j)`` with ``c_j = (-1)^j binom(alpha, j)``.
* Caputo: the order ``alpha - 1`` sum applied to the first backward difference.
* Riemann–Liouville: the first backward difference of the order ``alpha - 1`` sum.

Each has a point evaluator (``*_difference``) and a whole-signal evaluator
(``*_series``) returning values at ``k = a .. k_max``. Vector signals are
handled componentwise. Sums whose upper limit falls below their lower limit
are zero. Orders above one are reachable by composing
:func:`~nabla_fc.kernel.backward_difference` with :func:`gl_series` of a
negative order; that path is not exposed as a definition.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache

import numpy as np

from .errors import HistoryError, OrderError
from .kernel import gl_diff_weights, gl_sum_weights, rising_factorial_ratio
from .signal import SampledSignal

__all__ = [
    "Definition",
    "VariableOrder",
    "gl_difference",
    "caputo_difference",
    "rl_difference",
    "rl_from_caputo",
    "gl_modified_difference",
    "fixed_memory_difference",
    "variable_order_difference",
    "difference",
    "gl_series",
    "caputo_series",
    "rl_series",
    "fixed_memory_series",
    "variable_order_series",
    "difference_series",
]


class Definition(str, enum.Enum):
    GL = "gl"
    RL = "rl"
    CAPUTO = "caputo"


class VariableOrder:
    """Orders ``alpha(k)`` for ``k = base, base + 1, ...``."""

    def __init__(self, orders, base: int = 0):
        self.orders = np.asarray(orders, dtype=float)
        if self.orders.ndim != 1:
            raise ValueError("orders must be a 1-d sequence")
        self.base = int(base)

    def __call__(self, k: int) -> float:
        i = k - self.base
        if i < 0 or i >= len(self.orders):
            raise HistoryError(f"order undefined at k={k}")
        return float(self.orders[i])

    def __len__(self):
        return len(self.orders)

    @classmethod
    def constant(cls, alpha: float, length: int, base: int = 0) -> VariableOrder:
        return cls(np.full(length, float(alpha)), base)


@lru_cache(maxsize=512)
def _diff_w(alpha: float, count: int) -> np.ndarray:
    return gl_diff_weights(alpha, count).values


@lru_cache(maxsize=512)
def _sum_w(alpha: float, count: int) -> np.ndarray:
    return gl_sum_weights(alpha, count).values


def _check_order(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise OrderError(f"order must lie in (0, 1), got {alpha}")
    return alpha


def _check_k(signal: SampledSignal, k: int, lo: int) -> int:
    if k < lo or k > signal.k_max:
        raise HistoryError(f"k={k} outside admissible range {lo}..{signal.k_max}")
    return int(k)


def _need_history(signal: SampledSignal):
    if signal.history < 1:
        raise HistoryError("operator needs the sample at a - 1")


def _dot(weights: np.ndarray, newest_first: np.ndarray):
    return np.tensordot(weights, newest_first, axes=(0, 0))


# -- point evaluators -------------------------------------------------------


def gl_difference(signal: SampledSignal, alpha: float, k: int):
    """Grünwald–Letnikov difference/sum of order ``alpha`` (any real) at ``k``."""
    a = signal.base
    _check_k(signal, k, a)
    x = signal.window(a, k)[::-1]
    return _dot(_diff_w(float(alpha), len(x)), x)


def caputo_difference(signal: SampledSignal, alpha: float, k: int):
    """Caputo difference ``sum_{j=a}^{k} w_{k-j} (x(j) - x(j-1))``."""
    alpha = _check_order(alpha)
    _need_history(signal)
    a = signal.base
    _check_k(signal, k, a)
    d = np.diff(signal.window(a - 1, k), axis=0)[::-1]
    return _dot(_sum_w(alpha, len(d)), d)


def _partial_sum(signal: SampledSignal, alpha: float, t: int, lo: int):
    if t < lo:
        return np.zeros(signal.values.shape[1:])
    x = signal.window(lo, t)[::-1]
    return _dot(_sum_w(alpha, len(x)), x)


def rl_difference(signal: SampledSignal, alpha: float, k: int):
    """Riemann–Liouville difference ``s(k) - s(k-1)``, ``s`` the order ``alpha - 1`` sum.

    ``s(a - 1)`` is the empty sum, so the value at ``k = a`` is ``x(a)``.
    """
    alpha = _check_order(alpha)
    a = signal.base
    _check_k(signal, k, a)
    return _partial_sum(signal, alpha, k, a) - _partial_sum(signal, alpha, k - 1, a)


def rl_from_caputo(signal: SampledSignal, alpha: float, k: int):
    """Riemann–Liouville value rebuilt from the Caputo value plus the initial-value term.

    The correction is ``Gamma(k-a+1-alpha) / (Gamma(k-a+1) Gamma(1-alpha)) * x(a-1)``,
    evaluated through Gamma functions rather than the weight recurrence.
    """
    alpha = _check_order(alpha)
    a = signal.base
    _check_k(signal, k, a + 1)
    coeff = rising_factorial_ratio(k - a + 1, -alpha) / math.gamma(1.0 - alpha)
    return caputo_difference(signal, alpha, k) + coeff * signal(a - 1)


def gl_modified_difference(signal: SampledSignal, alpha: float, k: int):
    """Grünwald–Letnikov difference whose sum stops at lag ``k - a - 1``."""
    a = signal.base
    _check_k(signal, k, a + 1)
    x = signal.window(a + 1, k)[::-1]
    return _dot(_diff_w(float(alpha), len(x)), x)


def fixed_memory_difference(signal: SampledSignal, alpha: float, memory: int, k: int,
                            definition: Definition | str = Definition.GL):
    """Difference truncated to the latest ``memory + 1`` lags.

    Windows never reach below the signal's base: when ``memory >= k - a`` the
    result equals the full-history operator. The Riemann–Liouville variant
    differences the truncated sum, so both of its terms use a sliding window.
    """
    definition = Definition(definition)
    memory = int(memory)
    if memory < 0:
        raise ValueError("memory must be nonnegative")
    a = signal.base
    _check_k(signal, k, a)
    if definition is Definition.GL:
        lo = max(k - memory, a)
        x = signal.window(lo, k)[::-1]
        return _dot(_diff_w(float(alpha), len(x)), x)
    alpha = _check_order(alpha)
    if definition is Definition.CAPUTO:
        _need_history(signal)
        lo = max(k - memory, a)
        d = np.diff(signal.window(lo - 1, k), axis=0)[::-1]
        return _dot(_sum_w(alpha, len(d)), d)
    prev = _partial_sum(signal, alpha, k - 1, max(k - 1 - memory, a))
    return _partial_sum(signal, alpha, k, max(k - memory, a)) - prev


def variable_order_difference(signal: SampledSignal, orders, k: int,
                              definition: Definition | str = Definition.GL):
    """Difference at ``k`` using the order ``alpha(k)`` for every lag."""
    definition = Definition(definition)
    if not isinstance(orders, VariableOrder):
        orders = VariableOrder(orders, signal.base)
    return difference(signal, orders(k), k, definition)


def difference(signal: SampledSignal, alpha: float, k: int, definition: Definition | str):
    definition = Definition(definition)
    if definition is Definition.GL:
        return gl_difference(signal, alpha, k)
    if definition is Definition.CAPUTO:
        return caputo_difference(signal, alpha, k)
    return rl_difference(signal, alpha, k)


# -- whole-signal evaluators --------------------------------------------------


def _lower_toeplitz(w: np.ndarray, n: int, memory: int | None = None) -> np.ndarray:
    lag = np.subtract.outer(np.arange(n), np.arange(n))
    keep = lag >= 0
    if memory is not None:
        keep &= lag <= memory
    return np.where(keep, w[np.clip(lag, 0, n - 1)], 0.0)


def _sum_matrix(alpha: float, n: int, memory: int | None = None) -> np.ndarray:
    return _lower_toeplitz(_sum_w(alpha, n), n, memory)


def gl_series(signal: SampledSignal, alpha: float, memory: int | None = None) -> np.ndarray:
    x = signal.samples
    return _lower_toeplitz(_diff_w(float(alpha), len(x)), len(x), memory) @ x


def caputo_series(signal: SampledSignal, alpha: float, memory: int | None = None) -> np.ndarray:
    alpha = _check_order(alpha)
    _need_history(signal)
    d = np.diff(signal.values[signal.history - 1:], axis=0)
    return _sum_matrix(alpha, len(d), memory) @ d


def _caputo_series_unchecked(values: np.ndarray, alpha: float) -> np.ndarray:
    # values[0] is x(a-1); alpha = 1 degenerates to the first difference
    d = np.diff(values, axis=0)
    return _sum_matrix(float(alpha), len(d)) @ d


def rl_series(signal: SampledSignal, alpha: float, memory: int | None = None) -> np.ndarray:
    alpha = _check_order(alpha)
    s = _sum_matrix(alpha, len(signal.samples), memory) @ signal.samples
    if memory is None:
        return s - np.concatenate([np.zeros_like(s[:1]), s[:-1]])
    # sliding window: s(k-1) is recomputed over its own last memory+1 lags
    lagged = np.concatenate([np.zeros_like(signal.samples[:1]), signal.samples[:-1]])
    return s - _sum_matrix(alpha, len(s), memory) @ lagged


def fixed_memory_series(signal: SampledSignal, alpha: float, memory: int,
                        definition: Definition | str = Definition.GL) -> np.ndarray:
    definition = Definition(definition)
    if int(memory) < 0:
        raise ValueError("memory must be nonnegative")
    if definition is Definition.GL:
        return gl_series(signal, alpha, int(memory))
    if definition is Definition.CAPUTO:
        return caputo_series(signal, alpha, int(memory))
    return rl_series(signal, alpha, int(memory))


def variable_order_series(signal: SampledSignal, orders,
                          definition: Definition | str = Definition.GL) -> np.ndarray:
    definition = Definition(definition)
    if not isinstance(orders, VariableOrder):
        orders = VariableOrder(orders, signal.base)
    ks = range(signal.base, signal.k_max + 1)
    return np.array([difference(signal, orders(k), k, definition) for k in ks])


def difference_series(signal: SampledSignal, alpha: float, definition: Definition | str,
                      memory: int | None = None) -> np.ndarray:
    """Selected difference at every ``k = a .. k_max``."""
    definition = Definition(definition)
    if memory is not None:
        return fixed_memory_series(signal, alpha, memory, definition)
    if definition is Definition.GL:
        return gl_series(signal, alpha)
    if definition is Definition.CAPUTO:
        return caputo_series(signal, alpha)
    return rl_series(signal, alpha)

