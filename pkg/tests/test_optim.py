import math
import numpy as np
import pytest
from core.errors import NonFiniteError
from engine.layers import Parameter
from engine.optim import Adam, adam_step


def test_first_step_moves_by_learning_rate():
    params, state = adam_step({"w": np.array([1.0])}, {"w": np.array([0.5])}, {},
                              lr=0.1, beta1=0.9, beta2=0.999, eps=1e-8, t=1)
    np.testing.assert_allclose(params["w"], [0.9], rtol=1e-7)
    m, v = state["w"]
    np.testing.assert_allclose(m, [0.05])
    np.testing.assert_allclose(v, [0.00025])


def test_inputs_untouched():
    theta = np.array([1.0, 2.0])
    adam_step({"w": theta}, {"w": np.ones(2)}, {}, 0.1, 0.9, 0.999, 1e-8, 1)
    np.testing.assert_array_equal(theta, [1.0, 2.0])


def test_non_finite_gradient_named():
    with pytest.raises(NonFiniteError, match="head.weight"):
        adam_step({"head.weight": np.ones(2)}, {"head.weight": np.array([1.0, np.inf])}, {},
                  0.1, 0.9, 0.999, 1e-8, 1)


def test_step_counter_starts_at_one():
    with pytest.raises(ValueError):
        adam_step({"w": np.ones(1)}, {"w": np.ones(1)}, {}, 0.1, 0.9, 0.999, 1e-8, 0)


def test_hundred_steps_match_scalar_reference():
    lr, b1, b2, eps = 0.05, 0.9, 0.999, 1e-8
    p = Parameter(np.array([0.0]))
    optimizer = Adam([("p", p)], lr=lr, beta1=b1, beta2=b2, eps=eps)

    theta, m, v = 0.0, 0.0, 0.0
    for t in range(1, 101):
        p.grad = 2.0 * (p.data - 3.0)
        optimizer.step()

        g = 2.0 * (theta - 3.0)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
        assert p.data[0] == pytest.approx(theta, rel=1e-12, abs=1e-12)
    assert abs(theta - 3.0) < abs(0.0 - 3.0)
