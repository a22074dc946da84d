import numpy as np
import pytest

from nabla_fc.errors import ParameterError
from nabla_fc.optimizer import (
    Objective,
    certificate_check,
    descent_bound,
    fractional_gradient_descent,
    gradient_check,
    rosenbrock,
)


def square():
    return Objective(lambda x: float(x[0] ** 2), lambda x: 2 * x, 1, np.zeros(1),
                     lambda x: np.array([[2.0]]), "square")


def test_objective_values():
    obj = rosenbrock()
    x = np.array([2.0, -1.0])
    assert obj.evaluate(x) == 51.0
    np.testing.assert_array_equal(obj.gradient(x), [82.0, -20.0])
    assert obj.evaluate(np.array([1.0, 1.0])) == 0.0
    np.testing.assert_array_equal(obj.gradient(np.array([1.0, 1.0])), [0.0, 0.0])


def test_gradient_and_hessian_consistent():
    obj = rosenbrock()
    pts = np.random.default_rng(0).uniform(-2, 2, (20, 2))
    assert gradient_check(obj, pts) < 1e-7
    for x in pts:
        h = 1e-6
        fd = np.column_stack([(obj.gradient(x + e) - obj.gradient(x - e)) / (2 * h)
                              for e in np.eye(2) * h])
        np.testing.assert_allclose(obj.hessian(x), fd, rtol=1e-6, atol=1e-6)


def test_one_step_hand_value():
    run = fractional_gradient_descent(square(), 0.5, 0.25, [1.0], 1)
    assert run.final_point[0] == pytest.approx(2 / 3, abs=1e-12)


def test_start_at_optimum_stays():
    run = fractional_gradient_descent(rosenbrock(), 0.8, 2.0, [1.0, 1.0], 20)
    assert np.all(run.trajectory.states == 1.0)
    assert np.all(run.objective_values == 0.0)


def test_converges_to_optimum():
    run = fractional_gradient_descent(rosenbrock(), 0.8, 2.0, [2.0, -1.0], 500)
    dist = np.max(np.abs(run.trajectory.states[1:] - 1.0), axis=1)
    assert np.all(dist[8:] < 0.1)
    assert run.trajectory.max_residual <= 1e-10
    assert run.objective_values[-1] < 1e-5


def test_certificate_and_closed_form():
    run = fractional_gradient_descent(rosenbrock(), 0.8, 2.0, [2.0, -1.0], 200)
    cert = certificate_check(run)
    assert cert.passed
    bound = descent_bound(run)
    assert np.all(bound <= 0)
    np.testing.assert_allclose(cert.rhs, bound, rtol=1e-9, atol=1e-12)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        fractional_gradient_descent(rosenbrock(), 0.8, 0.0, [2.0, -1.0], 5)
    with pytest.raises(ParameterError):
        fractional_gradient_descent(rosenbrock(), 1.2, 1.0, [2.0, -1.0], 5)
    with pytest.raises(ParameterError):
        fractional_gradient_descent(rosenbrock(), 0.8, 1.0, [2.0], 5)
    run = fractional_gradient_descent(square(), 0.5, 1.0, [1.0], 3)
    with pytest.raises(ParameterError):
        certificate_check(run)


def test_values_csv(tmp_path):
    run = fractional_gradient_descent(rosenbrock(), 0.8, 2.0, [2.0, -1.0], 5)
    p = tmp_path / "f.csv"
    run.write_values_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "k,f_value"
    assert lines[1] == "-1,51.0"
    assert len(lines) == 7
