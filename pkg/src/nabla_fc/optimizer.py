"""Fractional-order gradient flow ``C-diff^alpha x(k) = -rho * grad f(x(k))``.

The gradient field is handed to the Caputo stepper unchanged, so every
iterate solves the implicit step exactly (to solver tolerance) rather than
taking an explicit gradient update.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError
from .lyapunov import GapReport
from .operators import _caputo_series_unchecked
from .simulator import SolverConfig, SystemSpec, Trajectory, simulate

__all__ = [
    "Objective",
    "OptimizerRun",
    "rosenbrock",
    "fractional_gradient_descent",
    "certificate_check",
    "descent_bound",
    "gradient_check",
]


@dataclass(frozen=True, eq=False)
class Objective:
    evaluate: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    dimension: int
    optimum: np.ndarray | None = None
    hessian: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "objective"


def rosenbrock(b: float = 2.0) -> Objective:
    """``f(x) = (x1 - 1)^2 + b (x1^2 - x2)^2`` with minimiser ``(1, 1)``."""

    def f(x):
        return float((x[0] - 1.0) ** 2 + b * (x[0] ** 2 - x[1]) ** 2)

    def grad(x):
        u = x[0] ** 2 - x[1]
        return np.array([2.0 * (x[0] - 1.0) + 4.0 * b * x[0] * u, -2.0 * b * u])

    def hess(x):
        return np.array([[2.0 + 4.0 * b * (3.0 * x[0] ** 2 - x[1]), -4.0 * b * x[0]],
                         [-4.0 * b * x[0], 2.0 * b]])

    return Objective(f, grad, 2, np.array([1.0, 1.0]), hess, f"rosenbrock(b={b:g})")


def gradient_check(obj: Objective, points, h: float = 1e-6) -> float:
    """Largest relative mismatch between the analytic and central-difference gradients."""
    worst = 0.0
    for x in np.atleast_2d(points):
        fd = np.empty(obj.dimension)
        for i in range(obj.dimension):
            e = np.zeros(obj.dimension)
            e[i] = h
            fd[i] = (obj.evaluate(x + e) - obj.evaluate(x - e)) / (2 * h)
        g = np.asarray(obj.gradient(x))
        worst = max(worst, float(np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(g)))))
    return worst


@dataclass
class OptimizerRun:
    objective: Objective
    alpha: float
    rho: float
    base: int
    initial_point: np.ndarray
    trajectory: Trajectory
    objective_values: np.ndarray

    @property
    def steps(self) -> int:
        return self.trajectory.steps

    @property
    def final_point(self) -> np.ndarray:
        return self.trajectory.states[-1]

    def write_values_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "f_value"])
            for k, v in zip(self.trajectory.grid, self.objective_values):
                w.writerow([int(k), repr(float(v))])


def fractional_gradient_descent(obj: Objective, alpha: float, rho: float, initial_point,
                                steps: int, base: int = 0,
                                solver: SolverConfig | None = None) -> OptimizerRun:
    if not rho > 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    x0 = np.asarray(initial_point, dtype=float)
    if x0.shape != (obj.dimension,):
        raise ParameterError(f"initial point must have {obj.dimension} entries")

    def field(x):
        return -rho * np.asarray(obj.gradient(x))

    jac = None if obj.hessian is None else (lambda x: -rho * np.asarray(obj.hessian(x)))
    spec = SystemSpec(field, x0, alpha, base, jac, solver or SolverConfig(), obj.name)
    traj = simulate(spec, steps)
    values = np.array([obj.evaluate(x) for x in traj.states])
    return OptimizerRun(obj, float(alpha), float(rho), base, x0, traj, values)


def _shifted(run: OptimizerRun) -> np.ndarray:
    if run.trajectory.states.shape[1] != 2:
        raise ParameterError("certificate is defined for two-dimensional runs")
    opt = run.objective.optimum
    if opt is None:
        raise ParameterError("objective has no declared optimum")
    return run.trajectory.states - opt


def certificate_check(run: OptimizerRun, tolerance: float = 1e-9) -> GapReport:
    """Caputo gap of ``V = y1^2/4 + y2^2/2`` against ``y1/2 * C y1 + y2 * C y2``.

    ``y = x - optimum``. Gaps at every ``k`` must be nonpositive up to
    ``tolerance * max(1, |lhs|, |rhs|)``.
    """
    y = _shifted(run)
    V = 0.25 * y[:, 0] ** 2 + 0.5 * y[:, 1] ** 2
    lhs = _caputo_series_unchecked(V, run.alpha)
    dy = _caputo_series_unchecked(y, run.alpha)
    rhs = 0.5 * y[1:, 0] * dy[:, 0] + y[1:, 1] * dy[:, 1]
    return GapReport(lhs - rhs, lhs, rhs, tolerance, run.base)


def descent_bound(run: OptimizerRun) -> np.ndarray:
    """Closed form of ``y1/2 * C y1 + y2 * C y2`` on exact ``b = 2`` Rosenbrock dynamics.

    Equals ``-rho * (2 y1^2 + 3 y1 - 2 y2)^2`` for ``k = a .. k_max``.
    """
    y = _shifted(run)[1:]
    return -run.rho * (2.0 * y[:, 0] ** 2 + 3.0 * y[:, 0] - 2.0 * y[:, 1]) ** 2
