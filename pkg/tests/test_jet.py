"""Jets, recursive solution coefficients, and cost scaling."""

import numpy as np
import pytest

from odejet import (jet, jet_opcount, nested_jet, nested_opcount, ops,
                    ode_taylor_coefficients, total_derivative)
from odejet.mlp import dynamics_fn, init_mlp
from odejet.rng import RngState


class TestJet:
    def test_identity_passes_series_through(self):
        x0 = np.array([1.0, -2.0])
        series = [np.array([0.5, 0.5]), np.array([2.0, -1.0]),
                  np.array([0.0, 3.0])]
        y0, ys = jet(lambda b: b, x0, series)
        assert np.array_equal(y0, x0)
        for a, b in zip(ys, series):
            assert np.array_equal(a, b)

    def test_square_mixed_terms(self):
        # f(x) = x*x with x0=1, x1=1, x2=0: second derivative is 2*x1*x1
        y0, ys = jet(lambda b: ops.mul(b, b), 1.0, [1.0, 0.0])
        assert y0 == 1.0
        assert ys == [2.0, 2.0]

    def test_exp_series(self):
        y0, ys = jet(lambda b: ops.exp(b), 0.0, [1.0, 0.0, 0.0])
        assert abs(y0 - 1.0) < 1e-15
        assert np.allclose(ys, [1.0, 1.0, 1.0], atol=1e-12)

    def test_order_zero(self):
        y0, ys = jet(lambda b: ops.exp(b), 0.3, [])
        assert ys == []
        assert abs(y0 - np.exp(0.3)) < 1e-15


class TestOdeCoefficients:
    def test_zero_dynamics(self):
        xs = ode_taylor_coefficients(lambda z, t: np.zeros_like(z),
                                     np.array([4.0]), 0.0, 3)
        assert np.array_equal(xs[0], [4.0])
        for x in xs[1:]:
            assert np.array_equal(x, [0.0])

    def test_exponential_solution(self):
        xs = ode_taylor_coefficients(lambda z, t: z, 1.0, 0.0, 4)
        assert np.allclose(xs, [1.0, 1.0, 1.0, 1.0, 1.0], atol=1e-15)

    def test_blowup_solution_has_factorial_derivatives(self):
        xs = ode_taylor_coefficients(lambda z, t: ops.square(z), 1.0, 0.0, 3)
        assert np.allclose(xs, [1.0, 1.0, 2.0, 6.0], atol=1e-12)

    def test_time_dependent_dynamics(self):
        # dz/dt = 3t^2 -> z = z0 + t^3: derivatives (z0, 0, 0, 6, 0)
        def g(z, t):
            return ops.bcast_full(ops.scale(ops.square(t), 3.0),
                                  ops.shape_of(z))

        xs = ode_taylor_coefficients(g, np.array([2.0]), 0.0, 4)
        want = [2.0, 0.0, 0.0, 6.0, 0.0]
        for a, b in zip(xs, want):
            assert np.allclose(a, b, atol=1e-12)

    def test_polynomial_truncation_is_exact(self):
        # cubic solution: the degree-3 Taylor polynomial reproduces it anywhere
        z0 = np.array([2.0])
        xs = ode_taylor_coefficients(
            lambda z, t: ops.bcast_full(ops.scale(ops.square(t), 3.0),
                                        ops.shape_of(z)), z0, 0.0, 3)
        import math

        for h in (0.1, 1.0, 10.0):
            val = sum(x * h**k / math.factorial(k) for k, x in enumerate(xs))
            assert abs(val[0] - (2.0 + h**3)) < 1e-9 * max(1, h**3)


class TestTotalDerivative:
    def test_order_one_is_dynamics(self):
        rng = RngState(0)
        p = init_mlp(3, 8, rng)
        f = dynamics_fn(p)
        z = rng.normal((3,))
        got = total_derivative(f, z, 0.3, 1)
        assert np.array_equal(got, np.asarray(f(z, 0.3)))

    def test_linear_dynamics_third_derivative(self):
        assert abs(total_derivative(lambda z, t: z, 2.0, 0.0, 3) - 2.0) < 1e-12

    def test_constant_dynamics_second_derivative_zero(self):
        got = total_derivative(lambda z, t: np.full_like(z, 1.7),
                               np.array([0.3]), 0.0, 2)
        assert np.allclose(got, 0.0)


class TestOpcounts:
    def setup_method(self):
        rng = RngState(9)
        self.p = init_mlp(2, 16, rng)
        self.f = lambda z: dynamics_fn(self.p)(z, 0.5)
        self.x0 = rng.normal((2,))

    def test_order_zero_equals_plain_cost(self):
        from odejet import OpCounter

        with OpCounter() as c:
            self.f(self.x0)
        assert jet_opcount(self.f, self.x0, 0) == c.total
        assert nested_opcount(self.f, self.x0, 0) == c.total

    def test_jet_ratio_bounded_nested_ratio_geometric(self):
        jc = [jet_opcount(self.f, self.x0, k) for k in range(9)]
        nc = [nested_opcount(self.f, self.x0, k) for k in range(9)]
        for k in range(2, 9):
            assert jc[k] / jc[k - 1] <= 3.0, (k, jc)
            assert nc[k] / nc[k - 1] >= 1.8, (k, nc)

    def test_k1_within_factor_two(self):
        j1 = jet_opcount(self.f, self.x0, 1)
        n1 = nested_opcount(self.f, self.x0, 1)
        assert j1 <= 2 * n1 and n1 <= 2 * j1

    def test_quadratic_vs_geometric_envelope(self):
        jc = [jet_opcount(self.f, self.x0, k) for k in range(9)]
        nc = [nested_opcount(self.f, self.x0, k) for k in range(9)]
        # jet grows at most ~quadratically: c*K^2 envelope with one constant
        c = jc[2] / 4
        assert all(jc[k] <= 6 * c * k * k for k in range(2, 9))
        # nested at least doubles every two orders from K=2 on
        assert all(nc[k] >= 1.7 * nc[k - 1] for k in range(3, 9))

    def test_counts_are_deterministic(self):
        a = jet_opcount(self.f, self.x0, 4)
        b = jet_opcount(self.f, self.x0, 4)
        assert a == b


class TestNestedOracle:
    def test_sin_derivatives(self):
        from odejet import nested_derivatives

        ds = nested_derivatives(lambda t: ops.sin(t), 0.4, 5)
        want = [np.sin(0.4), np.cos(0.4), -np.sin(0.4), -np.cos(0.4),
                np.sin(0.4), np.cos(0.4)]
        assert np.allclose(ds, want, atol=1e-11)

    def test_constant_function(self):
        from odejet import nested_derivatives

        ds = nested_derivatives(lambda t: 3.0, 0.0, 3)
        assert ds == [3.0, 0.0, 0.0, 0.0]

    def test_matches_jet_on_mlp(self):
        rng = RngState(13)
        p = init_mlp(2, 6, rng)
        f = lambda z: dynamics_fn(p)(z, 0.1)
        x0 = rng.normal((2,))
        series = [rng.normal((2,)) for _ in range(5)]
        _, ys = jet(f, x0, series)
        o = nested_jet(f, x0, series)
        for a, b in zip(ys, o[1:]):
            scale = max(1.0, np.max(np.abs(b)))
            assert np.max(np.abs(a - b)) / scale < 1e-9
