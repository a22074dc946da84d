"""Gap evaluators for Lyapunov-type inequalities on nabla fractional differences.

For an operator ``D`` (Caputo, Riemann–Liouville or Grünwald–Letnikov of
order ``0 < alpha < 1``) each inequality bounds ``D`` of a composite function
by an expression linear in ``D`` of a simpler one, e.g. ``D x^2 <= 2 x D x``.
The functions here return ``gap = LHS - RHS``; the bound holds when the gap is
nonpositive up to rounding.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import FractionalDomainError, NotSPDError, ParameterError
from .operators import (
    Definition,
    _check_order,
    difference,
    difference_series,
    fixed_memory_series,
)
from .signal import SampledSignal

__all__ = [
    "InequalityKind",
    "Inequality",
    "CorollaryVariant",
    "GapReport",
    "rational_power",
    "inequality_gap",
    "gap_series",
    "gap_report",
    "corollary_gap",
    "young_gap",
    "spd_factor",
    "SuiteConfig",
    "PairResult",
    "SuiteReport",
    "run_property_suite",
]


class InequalityKind(str, enum.Enum):
    EVEN_POWER = "even_power"            # D x^{2m}  <= 2 x^m D x^m
    CONJUGATE_POWER = "conjugate_power"  # D x^{2m/n} <= 2m/(2m-n) x D x^{2m/n-1}
    POWER_CHAIN = "power_chain"          # D x^{2m/n} <= 2m/n x^{2m/n-1} D x
    DYADIC = "dyadic"                    # D x^{2^m}  <= 2^m x^{2^m-1} D x
    QUADRATIC_FORM = "quadratic_form"    # D y'Py    <= 2 y' P D y


def rational_power(x, r) -> np.ndarray:
    """Real power ``x^r`` for rational ``r``.

    Odd denominators use real roots, so ``(-8)^(1/3) = -2`` and
    ``(-8)^(2/3) = 4``. Even denominators require ``x >= 0``. Float
    exponents are snapped to the nearest fraction with denominator <= 10^6.
    """
    r = Fraction(r).limit_denominator(10**6) if isinstance(r, float) else Fraction(r)
    x = np.asarray(x, dtype=float)
    if r.denominator == 1:
        return x ** r.numerator
    mag = np.abs(x) ** float(r)
    if r.denominator % 2:
        return mag if r.numerator % 2 == 0 else np.sign(x) * mag
    if np.any(x < 0):
        raise FractionalDomainError(f"negative base under exponent {r}")
    return mag


@dataclass(frozen=True, eq=False)
class Inequality:
    """One inequality of the family together with its parameters.

    ``m`` and ``n`` are positive integers with ``2m >= n``; the conjugate-power
    bound needs ``2m > n`` since its coefficient is ``2m / (2m - n)``. ``P`` is
    the symmetric positive definite weight of the quadratic form.
    """

    kind: InequalityKind
    m: int = 1
    n: int = 1
    P: np.ndarray | None = None

    def __post_init__(self):
        kind = InequalityKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if int(self.m) != self.m or self.m < 1 or int(self.n) != self.n or self.n < 1:
            raise ParameterError("m and n must be positive integers")
        if kind in (InequalityKind.CONJUGATE_POWER, InequalityKind.POWER_CHAIN):
            if 2 * self.m < self.n:
                raise ParameterError(f"need 2m >= n, got m={self.m}, n={self.n}")
            if kind is InequalityKind.CONJUGATE_POWER and 2 * self.m == self.n:
                raise ParameterError("conjugate-power bound needs 2m > n")
        if kind is InequalityKind.QUADRATIC_FORM:
            if self.P is None:
                raise ParameterError("quadratic form needs a weight matrix P")
            P = np.array(self.P, dtype=float, ndmin=2)
            spd_factor(P)
            P.setflags(write=False)
            object.__setattr__(self, "P", P)

    @property
    def exponent(self) -> Fraction:
        return Fraction(2 * self.m, self.n)

    @property
    def allows_negative(self) -> bool:
        """Whether the bound holds for signed samples as well as nonnegative ones."""
        if self.kind in (InequalityKind.CONJUGATE_POWER, InequalityKind.POWER_CHAIN):
            r = self.exponent
            return r.denominator % 2 == 1 and r.numerator % 2 == 0
        return True

    def scalar_terms(self, x: np.ndarray):
        """Return ``(lyapunov, coefficient, multiplier, inner)`` sample arrays.

        The inequality reads ``D lyapunov <= coefficient * multiplier(k) * D inner``.
        """
        if self.kind is InequalityKind.QUADRATIC_FORM:
            raise ParameterError("quadratic form has no scalar terms")
        if not self.allows_negative and np.any(x < 0):
            raise FractionalDomainError(
                f"{self.kind.value} with exponent {self.exponent} needs nonnegative samples")
        m, n = self.m, self.n
        if self.kind is InequalityKind.EVEN_POWER:
            xm = x ** m
            return x ** (2 * m), 2.0, xm, xm
        if self.kind is InequalityKind.DYADIC:
            e = 2 ** m
            return x ** e, float(e), x ** (e - 1), x
        r = self.exponent
        if self.kind is InequalityKind.CONJUGATE_POWER:
            return rational_power(x, r), 2 * m / (2 * m - n), x, rational_power(x, r - 1)
        return rational_power(x, r), 2 * m / n, rational_power(x, r - 1), x


class CorollaryVariant(str, enum.Enum):
    CONJUGATE = "corollary_conjugate"  # conjugate power with n = 1
    CHAIN = "corollary_chain"          # power chain with n = 1
    SQUARE = "corollary_square"        # even power with m = 1

    def inequality(self, m: int = 1) -> Inequality:
        if self is CorollaryVariant.CONJUGATE:
            return Inequality(InequalityKind.CONJUGATE_POWER, m=m, n=1)
        if self is CorollaryVariant.CHAIN:
            return Inequality(InequalityKind.POWER_CHAIN, m=m, n=1)
        return Inequality(InequalityKind.EVEN_POWER, m=1)


SeriesOperator = Callable[[SampledSignal], np.ndarray]


def _quadratic(y: np.ndarray, P: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.einsum("...i,ij,...j->...", y, P, z)


def _as_vector(signal: SampledSignal, dim: int) -> SampledSignal:
    if signal.is_scalar and dim == 1:
        return SampledSignal(signal.values[:, None], signal.base, signal.history)
    if signal.dimension != dim:
        raise ParameterError(f"P is {dim}x{dim} but the signal has dimension {signal.dimension}")
    return signal


def gap_series(ineq: Inequality, signal: SampledSignal, operator: SeriesOperator):
    """LHS, RHS and gap at every ``k = a .. k_max`` for a whole-signal operator.

    ``operator`` maps a :class:`SampledSignal` to its difference values at
    ``k = a .. k_max``; this lets the same bounds be checked for truncated-memory
    and variable-order operators.
    """
    h = signal.history
    if ineq.kind is InequalityKind.QUADRATIC_FORM:
        y = _as_vector(signal, ineq.P.shape[0])
        lhs = operator(y.map(lambda v: _quadratic(v, ineq.P, v)))
        rhs = 2.0 * _quadratic(y.samples, ineq.P, operator(y))
    else:
        if not signal.is_scalar:
            raise ParameterError(f"{ineq.kind.value} needs a scalar signal")
        lyap, coef, mult, inner = ineq.scalar_terms(signal.values)
        lhs = operator(SampledSignal(lyap, signal.base, h))
        rhs = coef * mult[h:] * operator(SampledSignal(inner, signal.base, h))
    return lhs - rhs, lhs, rhs


def inequality_gap(ineq: Inequality, definition: Definition | str, signal: SampledSignal,
                   alpha: float, k: int) -> float:
    """Gap ``LHS - RHS`` of one inequality at a single grid point ``k``."""
    alpha = _check_order(alpha)
    definition = Definition(definition)
    h = signal.history
    if ineq.kind is InequalityKind.QUADRATIC_FORM:
        y = _as_vector(signal, ineq.P.shape[0])
        V = y.map(lambda v: _quadratic(v, ineq.P, v))
        lhs = difference(V, alpha, k, definition)
        rhs = 2.0 * _quadratic(y(k), ineq.P, difference(y, alpha, k, definition))
        return float(lhs - rhs)
    if not signal.is_scalar:
        raise ParameterError(f"{ineq.kind.value} needs a scalar signal")
    lyap, coef, mult, inner = ineq.scalar_terms(signal.values)
    lhs = difference(SampledSignal(lyap, signal.base, h), alpha, k, definition)
    inner_d = difference(SampledSignal(inner, signal.base, h), alpha, k, definition)
    return float(lhs - coef * mult[signal.index(k)] * inner_d)


def corollary_gap(variant: CorollaryVariant | str, signal: SampledSignal, alpha: float,
                  k: int, m: int = 1) -> float:
    """Caputo gap of one of the three specialised bounds."""
    return inequality_gap(CorollaryVariant(variant).inequality(m), Definition.CAPUTO,
                          signal, alpha, k)


@dataclass
class GapReport:
    """Per-``k`` gaps with a relative violation threshold.

    A grid point violates when ``gap > tolerance * max(1, |lhs|, |rhs|)``.
    """

    gaps: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    tolerance: float = 1e-9
    base: int = 0

    @property
    def scales(self) -> np.ndarray:
        return np.maximum(1.0, np.maximum(np.abs(self.lhs), np.abs(self.rhs)))

    @property
    def max_gap(self) -> float:
        return float(np.max(self.gaps))

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.gaps > self.tolerance * self.scales))

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def __len__(self) -> int:
        return len(self.gaps)


def gap_report(ineq: Inequality, definition: Definition | str, signal: SampledSignal,
               alpha: float, tolerance: float = 1e-9) -> GapReport:
    definition = Definition(definition)
    gaps, lhs, rhs = gap_series(ineq, signal, lambda s: difference_series(s, alpha, definition))
    return GapReport(gaps, lhs, rhs, tolerance, signal.base)


def young_gap(a: float, b: float, p: float, q: float) -> float:
    """``a^p / p + b^q / q - a b`` for conjugate exponents; never negative."""
    if a < 0 or b < 0:
        raise FractionalDomainError("Young's inequality needs a, b >= 0")
    if p <= 1 or q <= 1 or abs(1.0 / p + 1.0 / q - 1.0) > 1e-12:
        raise ParameterError(f"p={p}, q={q} are not conjugate exponents")
    return a ** p / p + b ** q / q - a * b


def spd_factor(P) -> np.ndarray:
    """Upper-triangular ``M`` with ``M.T @ M == P`` (Cholesky)."""
    P = np.array(P, dtype=float, ndmin=2)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise NotSPDError("P must be square")
    scale = max(1.0, float(np.max(np.abs(P))))
    if np.max(np.abs(P - P.T)) > 1e-12 * scale:
        raise NotSPDError("P is not symmetric")
    try:
        lower = np.linalg.cholesky(P)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError("P is not positive definite") from exc
    return lower.T


# -- randomized harness -----------------------------------------------------

FAMILIES = ("standard", "fixed_memory", "variable_order")


@dataclass
class SuiteConfig:
    trials: int = 200
    max_len: int = 50
    value_range: tuple[float, float] = (-2.0, 2.0)
    alpha_range: tuple[float, float] = (0.05, 0.95)
    seed: int = 42
    tolerance: float = 1e-9
    family: str = "standard"
    memories: tuple[int | None, ...] = (1, 5, None)
    order_range: tuple[float, float] = (0.1, 0.9)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_len < 2:
            raise ValueError("max_len must be >= 2")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        lo, hi = self.alpha_range
        if not 0.0 < lo <= hi < 1.0:
            raise ValueError("alpha_range must lie inside (0, 1)")


@dataclass
class PairResult:
    kind: str
    definition: str
    variant: str = "full"
    trials: int = 0
    evaluations: int = 0
    max_gap: float = -math.inf
    violations: int = 0

    def update(self, report: GapReport):
        self.trials += 1
        self.evaluations += len(report)
        self.max_gap = max(self.max_gap, report.max_gap)
        self.violations += report.violations

    def to_dict(self) -> dict:
        return {"kind": self.kind, "definition": self.definition, "variant": self.variant,
                "trials": self.trials, "evaluations": self.evaluations,
                "maxGap": self.max_gap, "violations": self.violations}


@dataclass
class SuiteReport:
    config: SuiteConfig
    pairs: list[PairResult] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(p.violations for p in self.pairs)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"config": asdict(self.config), "pairs": [p.to_dict() for p in self.pairs]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _random_signal(rng: np.random.Generator, length: int, lo: float, hi: float, dim=None):
    shape = (length,) if dim is None else (length, dim)
    pick = rng.random()
    if pick < 0.6:
        return rng.uniform(lo, hi, shape)
    if pick < 0.7:
        return np.broadcast_to(rng.uniform(lo, hi, shape[1:]), shape).copy()
    if pick < 0.8:
        amp = rng.uniform(lo, hi, shape[1:])
        sign = np.where(np.arange(length) % 2 == 0, 1.0, -1.0)
        return sign.reshape((length,) + (1,) * (len(shape) - 1)) * amp
    if pick < 0.9:
        out = np.zeros(shape)
        out[rng.integers(length)] = rng.uniform(lo, hi, shape[1:])
        return out
    start, stop = rng.uniform(lo, hi, (2,) + shape[1:])
    return np.linspace(start, stop, length)


def _random_spd(rng: np.random.Generator, dim: int) -> np.ndarray:
    A = rng.normal(size=(dim, dim))
    return A.T @ A + 0.1 * np.eye(dim)


def _variable_order_matrix(orders: np.ndarray, shift: float) -> np.ndarray:
    # row i holds the weights of order orders[i], laid out as a lower Toeplitz row
    n = len(orders)
    lags = np.arange(1, n, dtype=float)
    factors = (lags[None, :] - shift - orders[:, None]) / lags[None, :]
    w = np.ones((n, n))
    w[:, 1:] = np.cumprod(factors, axis=1)
    lag = np.subtract.outer(np.arange(n), np.arange(n))
    rows = np.arange(n)[:, None]
    return np.where(lag >= 0, w[rows, np.clip(lag, 0, None)], 0.0)


def _variable_order_operator(orders: np.ndarray, definition: Definition) -> SeriesOperator:
    if definition is Definition.GL:
        T = _variable_order_matrix(orders, 1.0)
        return lambda s: T @ s.samples
    if definition is Definition.CAPUTO:
        T = _variable_order_matrix(orders, 0.0)
        return lambda s: T @ np.diff(s.values[s.history - 1:], axis=0)
    raise ParameterError("no inequality guarantee for the variable-order Riemann–Liouville difference")


def _trial_operators(cfg: SuiteConfig, alpha: float, length: int, rng) -> list:
    if cfg.family == "standard":
        return [(d.value, "full", (lambda s, d=d: difference_series(s, alpha, d)))
                for d in (Definition.CAPUTO, Definition.RL, Definition.GL)]
    if cfg.family == "fixed_memory":
        out = []
        for K in cfg.memories:
            label = "memory=full" if K is None else f"memory={K}"
            for d in (Definition.CAPUTO, Definition.RL, Definition.GL):
                if K is None:
                    op = lambda s, d=d: difference_series(s, alpha, d)
                else:
                    op = lambda s, d=d, K=K: fixed_memory_series(s, alpha, K, d)
                out.append((d.value, label, op))
        return out
    orders = rng.uniform(*cfg.order_range, size=length)
    return [(d.value, "variable_order", _variable_order_operator(orders, d))
            for d in (Definition.CAPUTO, Definition.GL)]


def run_property_suite(config: SuiteConfig | None = None) -> SuiteReport:
    """Evaluate every inequality on randomized signals at every grid point.

    Each trial draws its own generator from ``(seed, trial)``, so results do
    not depend on evaluation order. Power bounds whose exponent is not an even
    function of the sample receive absolute values of the random signal.
    """
    cfg = config or SuiteConfig()
    lo, hi = cfg.value_range
    results: dict[tuple, PairResult] = {}

    def record(kind, definition, variant, report):
        key = (kind, definition, variant)
        if key not in results:
            results[key] = PairResult(kind, definition, variant)
        results[key].update(report)

    for trial in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, trial])
        length = int(rng.integers(2, cfg.max_len + 1))
        base = int(rng.integers(-5, 6))
        alpha = float(rng.uniform(*cfg.alpha_range))
        x = _random_signal(rng, length, lo, hi)
        dim = int(rng.integers(1, 5))
        y = SampledSignal(_random_signal(rng, length, lo, hi, dim), base)
        P = _random_spd(rng, dim)
        m_even, m_dyadic = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        m_conj = int(rng.integers(1, 4))
        n_conj = int(rng.integers(1, 2 * m_conj))
        m_chain = int(rng.integers(1, 4))
        n_chain = int(rng.integers(1, 2 * m_chain + 1))
        m_cor = int(rng.integers(1, 4))
        inequalities = [
            Inequality(InequalityKind.EVEN_POWER, m=m_even),
            Inequality(InequalityKind.CONJUGATE_POWER, m=m_conj, n=n_conj),
            Inequality(InequalityKind.POWER_CHAIN, m=m_chain, n=n_chain),
            Inequality(InequalityKind.DYADIC, m=m_dyadic),
            Inequality(InequalityKind.QUADRATIC_FORM, P=P),
        ]

        def signal_for(ineq):
            if ineq.kind is InequalityKind.QUADRATIC_FORM:
                return y
            return SampledSignal(x if ineq.allows_negative else np.abs(x), base)

        for definition, variant, op in _trial_operators(cfg, alpha, length - 1, rng):
            for ineq in inequalities:
                gaps, lhs, rhs = gap_series(ineq, signal_for(ineq), op)
                record(ineq.kind.value, definition, variant,
                       GapReport(gaps, lhs, rhs, cfg.tolerance, base))
        if cfg.family == "standard":
            caputo = lambda s: difference_series(s, alpha, Definition.CAPUTO)
            for variant in CorollaryVariant:
                ineq = variant.inequality(m_cor)
                gaps, lhs, rhs = gap_series(ineq, signal_for(ineq), caputo)
                record(variant.value, Definition.CAPUTO.value, "full",
                       GapReport(gaps, lhs, rhs, cfg.tolerance, base))

    return SuiteReport(cfg, list(results.values()))
