"""Nabla discrete fractional calculus: weights, GL/RL/Caputo differences,
Lyapunov inequality checks, implicit Caputo simulation and fractional
gradient descent."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DivergenceError,
    FractionalDomainError,
    HistoryError,
    NotSPDError,
    OrderError,
    ParameterError,
    SolverError,
)
from .kernel import (
    WeightKind,
    WeightTable,
    backward_difference,
    gl_diff_weights,
    gl_sum_weights,
    rising_factorial_ratio,
    summation_by_parts_residuals,
)
from .lyapunov import (
    CorollaryVariant,
    GapReport,
    Inequality,
    InequalityKind,
    SuiteConfig,
    SuiteReport,
    corollary_gap,
    gap_report,
    inequality_gap,
    run_property_suite,
    spd_factor,
    young_gap,
)
from .operators import (
    Definition,
    VariableOrder,
    caputo_difference,
    caputo_series,
    difference,
    difference_series,
    fixed_memory_difference,
    gl_difference,
    gl_modified_difference,
    gl_series,
    rl_difference,
    rl_from_caputo,
    rl_series,
    variable_order_difference,
)
from .optimizer import (
    Objective,
    OptimizerRun,
    certificate_check,
    descent_bound,
    fractional_gradient_descent,
    rosenbrock,
)
from .signal import SampledSignal
from .simulator import (
    SolverConfig,
    SystemSpec,
    Trajectory,
    builtin_system,
    residual,
    simulate,
    step,
)
