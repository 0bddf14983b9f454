"""Hermite polynomial recurrence, orthogonality, and transforms."""

import math

import numpy as np
import pytest

from hermvar.fgn import FgnPath, Hurst, Seed
from hermvar.hermite import MAX_ORDER, check_order, hermite_eval, hermite_transform


def test_base_cases():
    assert hermite_eval(0, 1.7) == 1.0
    assert hermite_eval(0, -4.0) == 1.0
    assert hermite_eval(1, 2.5) == 2.5


def test_displayed_low_orders():
    # H_2(x) = x^2 - 1, H_3(x) = x^3 - 3x
    assert hermite_eval(2, 2.0) == pytest.approx(3.0, abs=0)
    assert hermite_eval(3, 2.0) == pytest.approx(2.0, abs=1e-14)
    x = np.linspace(-6, 6, 101)
    assert np.allclose(hermite_eval(2, x), x**2 - 1, atol=1e-12)
    assert np.allclose(hermite_eval(3, x), x**3 - 3 * x, atol=1e-11)


def test_degree_five_matches_explicit_expansion():
    # x^5 - 10 x^3 + 15 x (expansion oracle)
    x = 1.3
    assert hermite_eval(5, x) == pytest.approx(x**5 - 10 * x**3 + 15 * x, abs=1e-12)
    xs = np.linspace(-3, 3, 61)
    assert np.allclose(hermite_eval(5, xs), xs**5 - 10 * xs**3 + 15 * xs, atol=1e-11)


def test_parity():
    x = np.linspace(-10, 10, 401)
    for q in range(0, 9):
        lhs = hermite_eval(q, -x)
        rhs = (-1.0) ** q * hermite_eval(q, x)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_rejects_negative_degree_and_non_integer():
    with pytest.raises(ValueError):
        hermite_eval(-1, 0.0)
    with pytest.raises(ValueError):
        hermite_eval(2.0, 0.0)


def test_orthogonality_monte_carlo():
    # |mean(H_p H_q) - delta_pq q!| <= 4 SE for p, q <= 6, batch 1e5
    rng = Seed(123).rng()
    x = rng.standard_normal(10**5)
    H = {p: hermite_eval(p, x) for p in range(7)}
    for p in range(7):
        for q in range(p, 7):
            prod = H[p] * H[q]
            est = prod.mean()
            se = prod.std(ddof=1) / np.sqrt(prod.size)
            want = math.factorial(q) if p == q else 0.0
            assert abs(est - want) <= 4 * se, f"p={p}, q={q}"


class TestTransform:
    def test_zero_path_order_two(self):
        path = FgnPath(Hurst(0.7), 5, np.zeros(5))
        assert np.array_equal(hermite_transform(2, path), -np.ones(5))

    def test_zero_path_order_three(self):
        path = FgnPath(Hurst(0.7), 5, np.zeros(5))
        assert np.array_equal(hermite_transform(3, path), np.zeros(5))

    def test_centering_monte_carlo(self):
        rng = Seed(321).rng()
        xi = rng.standard_normal(10**5)
        path = FgnPath(Hurst(0.5), xi.size, xi)
        t = hermite_transform(4, path)
        se = t.std(ddof=1) / np.sqrt(t.size)
        assert abs(t.mean()) <= 4 * se

    def test_order_validation(self):
        path = FgnPath(Hurst(0.7), 3, np.zeros(3))
        with pytest.raises(ValueError):
            hermite_transform(1, path)
        with pytest.raises(ValueError):
            hermite_transform(MAX_ORDER + 1, path)


def test_check_order_bounds():
    assert check_order(2) == 2
    assert check_order(16) == 16
    for bad in (1, 17, 0, -3, 2.5, True):
        with pytest.raises(ValueError):
            check_order(bad)
