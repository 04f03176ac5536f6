"""Series arithmetic: propagation rules, conversions, oracle agreement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odejet import (TaylorBundle, derivatives_from_taylor, nested_jet, ops,
                    taylor_add, taylor_div, taylor_exp, taylor_from_derivatives,
                    taylor_mul, taylor_sin_cos, taylor_tanh)
from odejet.errors import (OdejetError, ShapeError, SingularityError,
                           UnsupportedOperationError)
from odejet.rng import RngState


def bundle(primal, *coeffs):
    return TaylorBundle(np.asarray(primal, dtype=float),
                        [np.asarray(c, dtype=float) for c in coeffs])


def coeffs_of(b):
    return [np.asarray(b.primal)] + [np.asarray(c) for c in b.coeffs]


class TestAddScale:
    def test_add_linear(self):
        z = bundle([1.0], [1.0])
        w = bundle([2.0], [3.0])
        y = taylor_add(z, w)
        assert np.array_equal(y.primal, [3.0])
        assert np.array_equal(y.coeffs[0], [4.0])

    def test_c_zero_returns_same_object(self):
        z = bundle([1.0], [1.0])
        w = bundle([5.0], [5.0])
        assert taylor_add(z, w, c=0.0) is z

    def test_weighted(self):
        z = bundle([1.0, 1.0], [1.0, 0.0])
        w = bundle([0.0, 0.0], [0.0, 1.0])
        y = taylor_add(z, w, c=2.0)
        assert np.array_equal(y.primal, [1.0, 1.0])
        assert np.array_equal(y.coeffs[0], [1.0, 2.0])

    def test_order_mismatch(self):
        with pytest.raises(OdejetError):
            taylor_add(bundle([1.0], [1.0]), bundle([1.0], [1.0], [0.0]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            TaylorBundle(np.ones(2), [np.ones(3)])


class TestMul:
    def test_one_plus_t_squared(self):
        z = bundle([1.0], [1.0], [0.0])
        y = taylor_mul(z, z)
        # (1 + t)^2 = 1 + 2t + t^2 in normalized coefficients
        assert np.allclose([c[0] for c in coeffs_of(y)], [1.0, 2.0, 1.0])
        # derivative-coefficient view picks up the 2! factor
        derivs = derivatives_from_taylor([y.primal, *y.coeffs])
        assert np.allclose([d[0] for d in derivs], [1.0, 2.0, 2.0])

    def test_constant_one_identity(self):
        z = bundle([2.0], [3.0], [-1.0])
        one = bundle([1.0], [0.0], [0.0])
        y = taylor_mul(z, one)
        for a, b in zip(coeffs_of(y), coeffs_of(z)):
            assert np.allclose(a, b)


class TestDiv:
    def test_constant_denominator_identity(self):
        z = bundle([2.0], [3.0], [-1.0])
        w = bundle([1.0], [0.0], [0.0])
        y = taylor_div(z, w)
        for a, b in zip(coeffs_of(y), coeffs_of(z)):
            assert np.allclose(a, b)

    def test_geometric_series(self):
        one = bundle([1.0], [0.0], [0.0], [0.0])
        w = bundle([1.0], [-1.0], [0.0], [0.0])
        y = taylor_div(one, w)  # 1 / (1 - t)
        assert np.allclose([c[0] for c in coeffs_of(y)], [1.0, 1.0, 1.0, 1.0])

    def test_mul_reconstructs(self):
        rng = RngState(1)
        z = bundle(rng.normal(3), rng.normal(3), rng.normal(3))
        w = bundle(rng.normal(3) + 2.5, rng.normal(3), rng.normal(3))
        back = taylor_mul(taylor_div(z, w), w)
        for a, b in zip(coeffs_of(back), coeffs_of(z)):
            assert np.allclose(a, b, atol=1e-12)

    def test_zero_primal_denominator(self):
        with pytest.raises(SingularityError):
            taylor_div(bundle([1.0], [0.0]), bundle([0.0], [1.0]))


class TestTranscendental:
    def test_exp_of_t(self):
        z = bundle([0.0], [1.0], [0.0], [0.0], [0.0])
        y = taylor_exp(z)
        want = [1.0, 1.0, 0.5, 1 / 6, 1 / 24]
        got = [c[0] for c in coeffs_of(y)]
        assert np.allclose(got, want, atol=1e-12)

    def test_sin_cos_of_t(self):
        z = bundle([0.0], [1.0], [0.0], [0.0])
        s, c = taylor_sin_cos(z)
        assert np.allclose([x[0] for x in coeffs_of(s)],
                           [0.0, 1.0, 0.0, -1 / 6], atol=1e-12)
        assert np.allclose([x[0] for x in coeffs_of(c)],
                           [1.0, 0.0, -0.5, 0.0], atol=1e-12)

    def test_exp_of_constant_series(self):
        z = bundle([0.7], [0.0], [0.0])
        y = taylor_exp(z)
        assert np.allclose(y.primal, math.exp(0.7))
        for c in y.coeffs:
            assert np.allclose(c, 0.0)

    def test_tanh_of_zero_series(self):
        z = bundle([0.0], [0.0], [0.0])
        y = taylor_tanh(z)
        for c in coeffs_of(y):
            assert np.allclose(c, 0.0)

    def test_tanh_of_t(self):
        z = bundle([0.0], [1.0], [0.0], [0.0])
        y = taylor_tanh(z)
        assert np.allclose([x[0] for x in coeffs_of(y)],
                           [0.0, 1.0, 0.0, -1 / 3], atol=1e-12)

    def test_tanh_matches_oracle_on_random_bundles(self):
        rng = RngState(3)
        for _ in range(10):
            x0 = rng.normal(4)
            series = [rng.normal(4) for _ in range(4)]
            from odejet import jet

            y0, ys = jet(lambda b: ops.tanh(b), x0, series)
            o = nested_jet(lambda b: ops.tanh(b), x0, series)
            assert np.allclose(y0, o[0], rtol=1e-10)
            for a, b in zip(ys, o[1:]):
                scale = max(1.0, np.max(np.abs(b)))
                assert np.max(np.abs(a - b)) / scale < 1e-10

    def test_log_has_no_series_rule(self):
        with pytest.raises(UnsupportedOperationError):
            ops.log(bundle([1.0], [1.0]))


class TestConversions:
    def test_roundtrip_exact_on_factorial_divisible_lattice(self):
        # values whose mantissas carry the odd part of 12!, so dividing by
        # k! is exact in binary and the round trip is bit-perfect
        odd12 = 467775.0
        rng = np.random.default_rng(0)
        vals = (rng.integers(-2**20, 2**20, size=200).astype(float) * odd12
                * 2.0 ** rng.integers(-12, 12, size=200))
        derivs = [vals * (k + 1) for k in range(12)]
        back = derivatives_from_taylor(taylor_from_derivatives(derivs))
        for a, b in zip(back, derivs):
            assert np.array_equal(a, b)

    def test_roundtrip_one_ulp_for_general_values(self):
        rng = np.random.default_rng(1)
        derivs = [rng.standard_normal(64) for _ in range(13)]
        back = derivatives_from_taylor(taylor_from_derivatives(derivs))
        for a, b in zip(back, derivs):
            assert np.all(np.abs(a - b) <= 2 * np.spacing(np.abs(b)))

    def test_factorials_exact(self):
        from odejet import factorial

        for k in range(13):
            assert factorial(k) == float(math.factorial(k))


def random_function(rng):
    """Small random composition over the registered series primitives."""
    w = rng.normal((3, 3))
    choice = int(rng.integers(6, ()))

    def f(x):
        y = ops.matvec(w, x)
        if choice == 0:
            return ops.mul(ops.sin(y), ops.exp(ops.scale(x, 0.3)))
        if choice == 1:
            return ops.div(ops.tanh(y), ops.shift(ops.square(ops.cos(x)), 1.5))
        if choice == 2:
            return ops.add(ops.mul(x, y), ops.cos(ops.scale(y, 0.5)))
        if choice == 3:
            return ops.tanh(ops.mul(y, ops.sin(x)))
        if choice == 4:
            return ops.sub(ops.exp(ops.scale(ops.square(x), 0.2)), y)
        return ops.lincomb([0.5, -1.5], [ops.mul(x, ops.cos(y)), ops.tanh(y)])

    return f


class TestOracleEquivalence:
    def test_random_compositions_match_nested_oracle(self):
        from odejet import jet

        rng = RngState(11)
        for trial in range(20):
            f = random_function(rng)
            for order in (1, 2, 4, 6):
                x0 = rng.normal(3) * 0.7
                series = [rng.normal(3) for _ in range(order)]
                _, ys = jet(f, x0, series)
                o = nested_jet(f, x0, series)
                for a, b in zip(ys, o[1:]):
                    scale = max(1.0, np.max(np.abs(b)), np.max(np.abs(a)))
                    assert np.max(np.abs(a - b)) / scale < 1e-9

    @given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(0, 4))
    @settings(max_examples=25, deadline=None)
    def test_causality(self, seed, order, j):
        """Perturbing series coefficient j leaves outputs below j unchanged."""
        from odejet import jet

        j = min(j, order - 1)
        rng = RngState(seed)
        f = random_function(rng)
        x0 = rng.normal(3) * 0.5
        series = [rng.normal(3) for _ in range(order)]
        _, base = jet(f, x0, series)
        series[j] = series[j] + 1.0
        _, bumped = jet(f, x0, series)
        for k in range(j):
            assert np.array_equal(base[k], bumped[k])
