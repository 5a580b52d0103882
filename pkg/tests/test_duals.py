import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superatom.duals import MultiDual

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def random_dual(rng, n):
    return MultiDual(rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n), n)


def test_single_variable_derivative():
    # f(x) = x * x + 2 x: f'(x) = 2x + 2
    x = MultiDual.variable(1.5, 0, 1)
    f = x * x + 2 * x
    assert f.value == pytest.approx(1.5**2 + 3.0)
    assert f.top() == pytest.approx(2 * 1.5 + 2)


def test_mixed_partial_of_product():
    # f(a, b) = (3 + a)(5 - 2 b): d2f/dadb = -2
    a = MultiDual.variable(3.0, 0, 2)
    b = MultiDual.variable(5.0, 1, 2)
    f = a * (5.0 - 2.0 * (b - 5.0) - 5.0 + 5.0)  # = a * (10 - 2 b)
    assert f.top() == pytest.approx(-2.0)


def test_third_mixed_partial_exponential():
    # f = exp(c1 a + c2 b + c3 c): d3f/(da db dc) at 0 = c1 c2 c3
    c = (0.7, -1.3, 2.1)
    args = [MultiDual.variable(0.0, i, 3) * ci for i, ci in enumerate(c)]
    f = (args[0] + args[1] + args[2]).exp()
    assert f.top() == pytest.approx(c[0] * c[1] * c[2], rel=1e-12)


def test_exp_matches_scalar_on_constant():
    d = MultiDual.const(0.3 - 0.2j, 2).exp()
    assert d.value == pytest.approx(np.exp(0.3 - 0.2j), rel=1e-14)
    assert np.max(np.abs(d.coeffs[1:])) == 0.0


@given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_multiplication_is_associative_and_commutative(n, seed):
    rng = np.random.default_rng(seed)
    x, y, z = (random_dual(rng, n) for _ in range(3))
    left = (x * y) * z
    right = x * (y * z)
    assert np.allclose(left.coeffs, right.coeffs, rtol=1e-12, atol=1e-12)
    assert np.allclose((x * y).coeffs, (y * x).coeffs, rtol=1e-12, atol=1e-12)


@given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_exp_of_sum_is_product_of_exps(n, seed):
    rng = np.random.default_rng(seed)
    x, y = random_dual(rng, n), random_dual(rng, n)
    lhs = (x + y).exp()
    rhs = x.exp() * y.exp()
    scale = np.max(np.abs(lhs.coeffs)) + 1.0
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-10 * scale


def test_lifted_function_rule():
    # phi(s - a): coefficient of e is -phi'(s)
    d = MultiDual.lifted(2.0, 0.7, 0, -1.0, 2)
    assert d.value == 2.0
    assert d.coeffs[1] == -0.7


def test_finite_difference_cross_check():
    # mixed second partial of f(a,b) = exp(a*b + 2a) at (0,0) is 1 (d/da db of ab term)
    a = MultiDual.variable(0.0, 0, 2)
    b = MultiDual.variable(0.0, 1, 2)
    f = (a * b + 2 * a).exp()
    h = 1e-5
    def scalar(a0, b0):
        return math.exp(a0 * b0 + 2 * a0)
    fd = (scalar(h, h) - scalar(h, -h) - scalar(-h, h) + scalar(-h, -h)) / (4 * h * h)
    assert f.top() == pytest.approx(fd, abs=1e-5)


def test_mismatched_generator_counts_rejected():
    with pytest.raises(ValueError):
        MultiDual.variable(0.0, 0, 1) + MultiDual.variable(0.0, 0, 2)
