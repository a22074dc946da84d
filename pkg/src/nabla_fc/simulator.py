"""Simulation of nonlinear Caputo nabla fractional difference systems.

The system ``C-diff^alpha x(k) = f(x(k))`` with ``x(a-1)`` given is advanced
one grid point at a time. Splitting off the ``j = k`` term of the Caputo sum
(its weight is exactly one) gives the implicit equation::

    x(k) - x(k-1) + H(k) = f(x(k)),    H(k) = sum_{j=a}^{k-1} w_{k-j} (x(j) - x(j-1))

which is solved by Newton's method with backtracking, or optionally by damped
fixed-point iteration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DivergenceError, ParameterError
from .operators import _caputo_series_unchecked, _sum_w
from .signal import SampledSignal

__all__ = [
    "SolverConfig",
    "SystemSpec",
    "Trajectory",
    "history_sum",
    "step",
    "simulate",
    "residual",
    "signed_power",
    "builtin_system",
    "BUILTIN_SYSTEMS",
]

METHODS = ("newton", "fixed_point")


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-12
    max_iterations: int = 100
    damping: float = 1.0
    method: str = "newton"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ParameterError("damping must lie in (0, 1]")
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}")


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Right-hand side, order, base and initial state ``x(a-1)``.

    ``jacobian`` is optional; Newton falls back to central differences.
    ``alpha = 1`` is accepted and reduces the step to implicit Euler.
    """

    field: Callable[[np.ndarray], np.ndarray]
    initial_state: np.ndarray
    alpha: float = 0.8
    base: int = 0
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    solver: SolverConfig = SolverConfig()
    name: str = "custom"

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.initial_state, dtype=float))
        if x0.ndim != 1 or not np.all(np.isfinite(x0)):
            raise ParameterError("initial state must be a finite vector")
        x0.setflags(write=False)
        object.__setattr__(self, "initial_state", x0)
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def dimension(self) -> int:
        return len(self.initial_state)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.field(x), dtype=float).reshape(self.dimension)


@dataclass
class Trajectory:
    """States ``x(a-1), x(a), ...`` with per-step solver diagnostics.

    ``iterations[0]`` belongs to the initial state and is always 0.
    """

    states: np.ndarray
    base: int
    iterations: list[int] = field(default_factory=list)
    max_residual: float = math.nan

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.base - 1, self.base - 1 + len(self.states))

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    def state(self, k: int) -> np.ndarray:
        return self.states[k - self.base + 1]

    def to_signal(self) -> SampledSignal:
        return SampledSignal(self.states, base=self.base, history=1)

    def write_csv(self, path, trailer: str | None = None):
        """CSV with header ``k,x1,...,xd,iters``; floats use shortest round-trip form."""
        dim = self.states.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", *(f"x{i + 1}" for i in range(dim)), "iters"])
            for k, x, it in zip(self.grid, self.states, self.iterations):
                w.writerow([int(k), *(repr(float(v)) for v in x), int(it)])
            if trailer:
                fh.write(f"# {trailer}\n")


def history_sum(states: np.ndarray, alpha: float) -> np.ndarray:
    """Memory term ``H(k)`` for the next step given ``states = x(a-1) .. x(k-1)``."""
    d = np.diff(states, axis=0)
    if len(d) == 0:
        return np.zeros(states.shape[1])
    w = _sum_w(float(alpha), len(d) + 1)[1:]
    return w[::-1] @ d


def _fd_jacobian(func, x: np.ndarray) -> np.ndarray:
    n = len(x)
    J = np.empty((n, n))
    for i in range(n):
        # relative step so the stencil never straddles a root singularity at 0
        h = 6e-6 * abs(x[i]) if x[i] != 0 else 6e-6
        e = np.zeros(n)
        e[i] = h
        J[:, i] = (func(x + e) - func(x - e)) / (2 * h)
    return J


def _solve_newton(spec: SystemSpec, rhs_const: np.ndarray, guess: np.ndarray, k: int):
    cfg = spec.solver
    fx = spec.evaluate

    def F(x):
        return x - rhs_const - fx(x)

    x = guess.copy()
    Fx = F(x)
    eye = np.eye(spec.dimension)
    for it in range(1, cfg.max_iterations + 1):
        if not np.all(np.isfinite(Fx)):
            raise DivergenceError(f"non-finite residual at k={k}", k, x, math.inf)
        if not np.any(Fx):
            return x, it - 1
        Jf = spec.jacobian(x) if spec.jacobian is not None else _fd_jacobian(fx, x)
        try:
            dx = np.linalg.solve(eye - np.asarray(Jf, dtype=float), -Fx)
        except np.linalg.LinAlgError:
            dx = -Fx
        if np.max(np.abs(dx)) <= cfg.tolerance:
            return x + dx, it
        norm0 = np.max(np.abs(Fx))
        t = cfg.damping
        trial = x + t * dx
        Ft = F(trial)
        # backtrack on the residual norm; after 30 halvings keep the short step
        for _ in range(30):
            if np.all(np.isfinite(Ft)) and np.max(np.abs(Ft)) < norm0:
                break
            t *= 0.5
            trial = x + t * dx
            Ft = F(trial)
        x, Fx = trial, Ft
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"non-finite iterate at k={k}", k, x, math.inf)
    raise ConvergenceError(f"Newton iteration did not converge at k={k}", k, x,
                           float(np.max(np.abs(Fx))))


def _solve_fixed_point(spec: SystemSpec, rhs_const: np.ndarray, guess: np.ndarray, k: int):
    cfg = spec.solver
    damping = cfg.damping
    total = 0
    # a diverging or stalled sweep is retried once with the damping halved
    for attempt in range(2):
        x = guess.copy()
        for it in range(1, cfg.max_iterations + 1):
            target = rhs_const + spec.evaluate(x)
            new = (1.0 - damping) * x + damping * target
            if not np.all(np.isfinite(new)):
                break
            update = np.max(np.abs(new - x))
            x = new
            if update <= cfg.tolerance:
                return x, total + it
        total += it
        damping *= 0.5
    res = x - rhs_const - spec.evaluate(x)
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"fixed-point iterate overflowed at k={k}", k, x, math.inf)
    raise ConvergenceError(f"fixed-point iteration did not converge at k={k}", k, x,
                           float(np.max(np.abs(res))))


def step(history, spec: SystemSpec, k: int, return_iterations: bool = False):
    """Solve for ``x(k)`` given ``x(a-1) .. x(k-1)``.

    ``history`` is a :class:`SampledSignal` or an array whose first row is
    ``x(a-1)``. The initial guess is ``x(k-1)``.
    """
    states = history.values if isinstance(history, SampledSignal) else np.asarray(history, float)
    if states.ndim == 1:
        states = states.reshape(-1, 1)
    if len(states) != k - spec.base + 1:
        raise ParameterError(f"history must hold x({spec.base - 1})..x({k - 1})")
    prev = states[-1]
    rhs_const = prev - history_sum(states, spec.alpha)
    solve = _solve_newton if spec.solver.method == "newton" else _solve_fixed_point
    x, its = solve(spec, rhs_const, prev.astype(float), k)
    return (x, its) if return_iterations else x


def simulate(spec: SystemSpec, steps: int, on_step=None) -> Trajectory:
    """Advance ``steps`` grid points from ``x(a-1)``.

    Solver failures propagate with the failing ``k`` attached; ``on_step``
    (if given) sees each accepted state, which lets callers keep partial output.
    """
    if steps < 1:
        raise ParameterError("steps must be >= 1")
    states = np.empty((steps + 1, spec.dimension))
    states[0] = spec.initial_state
    iterations = [0]
    for i in range(1, steps + 1):
        k = spec.base + i - 1
        x, its = step(states[:i], spec, k, return_iterations=True)
        states[i] = x
        iterations.append(its)
        if on_step is not None:
            on_step(k, x, its)
    traj = Trajectory(states, spec.base, iterations)
    traj.max_residual = residual(traj, spec)
    return traj


def residual(traj: Trajectory, spec: SystemSpec) -> float:
    """Largest ``|C-diff^alpha x(k) - f(x(k))|_inf`` along a trajectory.

    The Caputo values come from the whole-signal operator, not from the
    stepper's incremental history sums.
    """
    lhs = _caputo_series_unchecked(traj.states, spec.alpha)
    rhs = np.array([spec.evaluate(x) for x in traj.states[1:]])
    return float(np.max(np.abs(lhs - rhs))) if len(rhs) else 0.0


def signed_power(v, p: float):
    """``sign(v) * |v|^p``: odd, continuous real power."""
    if not p > 0:
        raise ParameterError("p must be positive")
    v = np.asarray(v, dtype=float)
    out = np.sign(v) * np.abs(v) ** p
    return out if out.ndim else float(out)


def _example1(x):
    return np.array([-x[0] + x[1] ** 3, -x[0] - x[1]])


def _example1_jac(x):
    return np.array([[-1.0, 3.0 * x[1] ** 2], [-1.0, -1.0]])


def _example2(x):
    return np.array([-x[0] + signed_power(x[1], 1 / 3), -signed_power(x[0], 1 / 5) - x[1]])


def _root_slope(v, p):
    # derivative of signed_power; the singular slope at 0 is capped to stay finite
    return p * max(abs(v), 1e-300) ** (p - 1.0)


def _example2_jac(x):
    return np.array([[-1.0, _root_slope(x[1], 1 / 3)], [-_root_slope(x[0], 1 / 5), -1.0]])


BUILTIN_SYSTEMS = ("example1", "example2", "linear")


def builtin_system(name: str, *, matrix=None, alpha: float = 0.8, initial_state=None,
                   base: int = 0, solver: SolverConfig | None = None) -> SystemSpec:
    """Ready-made systems.

    ``example1``: ``f(x) = (-x1 + x2^3, -x1 - x2)``.
    ``example2``: ``f(x) = (-x1 + x2^(1/3), -x1^(1/5) - x2)`` with odd real roots.
    ``linear``: ``f(x) = A x`` for a square ``matrix``.
    Both examples default to ``x(a-1) = (2, -1)``.
    """
    solver = solver or SolverConfig()
    if name == "example1":
        x0 = (2.0, -1.0) if initial_state is None else initial_state
        return SystemSpec(_example1, x0, alpha, base, _example1_jac, solver, name)
    if name == "example2":
        x0 = (2.0, -1.0) if initial_state is None else initial_state
        return SystemSpec(_example2, x0, alpha, base, _example2_jac, solver, name)
    if name == "linear":
        if matrix is None:
            raise ParameterError("linear system needs a matrix")
        A = np.array(matrix, dtype=float, ndmin=2)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ParameterError("matrix must be square")
        A.setflags(write=False)
        x0 = np.zeros(len(A)) if initial_state is None else initial_state
        if len(np.atleast_1d(x0)) != len(A):
            raise ParameterError("initial state and matrix dimensions differ")
        return SystemSpec(lambda x: A @ x, x0, alpha, base, lambda x: A, solver, name)
    raise ParameterError(f"unknown system {name!r}; choose from {BUILTIN_SYSTEMS}")
