import pytest

from dirtylocus import build_problem


@pytest.fixture
def stable_loop():
    # p = s^2, k = -2 - 3s: exact design p - k = s^2 + 3s + 2 = (s+1)(s+2)
    return build_problem([0, 0, 1], [-2, -3])


@pytest.fixture
def destabilizing_loop():
    # p = s^2 - 3s, k = -1 - 5s: p - k = s^2 + 2s + 1, loses stability
    # at tau = (sqrt(60) - 6) / 6
    return build_problem([0, -3, 1], [-1, -5])


@pytest.fixture
def double_root_loop():
    # p = s^2, k = -1 - 2s: p - k = (s + 1)^2, a stationary point of H
    return build_problem([0, 0, 1], [-1, -2])


@pytest.fixture
def constant_feedback_loop():
    # k constant (m = 0): no derivative is filtered, nothing depends on tau
    return build_problem([0, 3, 1], [-2])
