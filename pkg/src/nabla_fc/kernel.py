"""Low-level primitives: rising factorials, fractional weights, backward
differences and summation-by-parts checks.

Every function here is pure. Weight tables are produced by multiplicative
recurrences rather than Gamma quotients so that long tables never overflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import FractionalDomainError, HistoryError

if TYPE_CHECKING:
    from .signal import SampledSignal

__all__ = [
    "WeightKind",
    "WeightTable",
    "rising_factorial_ratio",
    "gl_diff_weights",
    "gl_sum_weights",
    "backward_difference",
    "summation_by_parts_residuals",
]


class WeightKind(str, enum.Enum):
    DIFFERENCE = "difference"
    SUM = "sum"


@dataclass(frozen=True)
class WeightTable:
    """Fractional weights ``values[j]`` for lags ``j = 0 .. count - 1``.

    ``kind=DIFFERENCE`` holds ``(-1)^j binom(alpha, j)``; ``kind=SUM`` holds the
    same coefficients for order ``alpha - 1``.
    """

    alpha: float
    kind: WeightKind
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j):
        return self.values[j]

    @property
    def provenance(self) -> str:
        shift = 1.0 if self.kind is WeightKind.DIFFERENCE else 0.0
        return f"w[0]=1, w[j]=w[j-1]*(j-{shift:g}-alpha)/j"


def _gamma_sign(x: float) -> float:
    if x > 0:
        return 1.0
    return -1.0 if math.floor(x) % 2 else 1.0


def rising_factorial_ratio(t: int, r: float) -> float:
    """Return ``Gamma(t + r) / Gamma(t)``.

    ``t = 0`` returns 0, the limit of ``Gamma(r) / Gamma(t)`` as ``t -> 0``.
    """
    if t < 0 or int(t) != t:
        raise FractionalDomainError(f"t must be a nonnegative integer, got {t!r}")
    t = int(t)
    if t == 0:
        return 0.0
    x = t + r
    if x <= 0 and x == math.floor(x):
        raise FractionalDomainError(f"Gamma({x}) is a pole")
    if r == 0:
        return 1.0
    return _gamma_sign(x) * math.exp(math.lgamma(x) - math.lgamma(t))


def _recurrence(alpha: float, count: int, shift: float) -> np.ndarray:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    j = np.arange(1, count, dtype=float)
    factors = (j - shift - alpha) / j
    out = np.empty(count)
    out[0] = 1.0
    out[1:] = np.cumprod(factors) + 0.0  # no signed zeros
    out.setflags(write=False)
    return out


def gl_diff_weights(alpha: float, count: int) -> WeightTable:
    """Grünwald–Letnikov difference weights ``c_j = (-1)^j binom(alpha, j)``."""
    return WeightTable(float(alpha), WeightKind.DIFFERENCE, _recurrence(alpha, count, 1.0))


def gl_sum_weights(alpha: float, count: int) -> WeightTable:
    """Weights of the order ``alpha - 1`` sum, ``w_j = Gamma(j+1-alpha) / (Gamma(1-alpha) j!)``.

    These are the kernel of the Caputo and Riemann–Liouville differences of
    order ``alpha``; they are positive and nonincreasing for ``0 < alpha < 1``.
    """
    return WeightTable(float(alpha), WeightKind.SUM, _recurrence(alpha, count, 0.0))


def backward_difference(signal: SampledSignal, n: int, k: int):
    """``n``-th backward difference ``sum_j (-1)^j binom(n, j) x(k - j)``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if k - n < signal.start or k > signal.k_max:
        raise HistoryError(f"need samples {k - n}..{k}, signal covers {signal.start}..{signal.k_max}")
    window = signal.window(k - n, k)[::-1]
    coeffs = np.array([(-1) ** j * math.comb(n, j) for j in range(n + 1)], dtype=float)
    return np.tensordot(coeffs, window, axes=(0, 0))


def summation_by_parts_residuals(f: SampledSignal, g: SampledSignal, k: int | None = None):
    """Residuals (LHS - RHS) of the two summation-by-parts formulas.

    With ``a`` the common base and sums over ``j = a .. k``::

        sum f(j-1) dg(j) = [f g]_{a-1}^{k} - sum df(j) g(j)
        sum f(j)   dg(j) = [f g]_{a-1}^{k} - sum df(j) g(j-1)
    """
    if f.base != g.base or f.start != g.start or len(f.values) != len(g.values):
        raise ValueError("f and g must be sampled on the same grid")
    a = f.base
    if k is None:
        k = f.k_max
    if k < a or k > f.k_max:
        raise HistoryError(f"k={k} outside {a}..{f.k_max}")
    fv = f.window(a - 1, k)
    gv = g.window(a - 1, k)
    df = np.diff(fv, axis=0)
    dg = np.diff(gv, axis=0)
    boundary = fv[-1] * gv[-1] - fv[0] * gv[0]
    r3 = np.sum(fv[:-1] * dg, axis=0) - (boundary - np.sum(df * gv[1:], axis=0))
    r4 = np.sum(fv[1:] * dg, axis=0) - (boundary - np.sum(df * gv[:-1], axis=0))
    return r3, r4
