"""Reverse-mode tape: recording, replay, backward, vjp."""

import numpy as np
import pytest

from odejet import Tape, backward, ops, record, vjp
from odejet.errors import OdejetError, ShapeError
from odejet.rng import RngState
from odejet.mlp import dynamics_fn, init_mlp


def fd_scalar(fn, x, i, h=1e-6):
    xp = x.copy()
    xm = x.copy()
    xp[i] += h
    xm[i] -= h
    return (fn(xp) - fn(xm)) / (2 * h)


class TestRecordReplay:
    def test_identity_one_node(self):
        out, tape = record(lambda x: x, [3.0])
        assert out.value == 3.0
        assert len(tape) == 1

    def test_square(self):
        out, tape = record(lambda x: ops.mul(x, x), [3.0])
        assert out.value == 9.0
        assert tape.replay() == []

    def test_jet_replays_bit_exact(self):
        from odejet import jet

        rng = RngState(1)
        p = init_mlp(2, 5, rng)
        x0 = rng.normal((2,))
        series = [rng.normal((2,)) for _ in range(3)]

        def run(w1):
            q = type(p)(w1, p.b1, p.w2, p.b2)
            _, ys = jet(lambda z: dynamics_fn(q)(z, 0.1), x0, series)
            return ops.sum_all(ys[-1])

        out, tape = record(run, [p.w1])
        assert tape.replay() == []

    def test_mixed_tapes_rejected(self):
        t1, t2 = Tape(), Tape()
        a = t1.leaf(1.0, "a")
        b = t2.leaf(2.0, "b")
        with pytest.raises(OdejetError):
            ops.add(a, b)


class TestBackward:
    def test_dx_squared(self):
        out, tape = record(lambda x: ops.mul(x, x), [3.0])
        g = backward(tape, out)
        assert g["x0"] == 6.0

    def test_layer_gradient_matches_fd(self):
        rng = RngState(0)
        w = rng.normal((4, 3))
        b = rng.normal((4,))
        x = rng.normal((3,))

        def loss(wf):
            return float(np.sum(np.tanh(wf.reshape(4, 3) @ x + b)))

        out, tape = record(
            lambda wv: ops.sum_all(ops.tanh(ops.add(ops.matvec(wv, x), b))),
            [w], names=["w"])
        g = backward(tape, out)["w"]
        for i in range(w.size):
            fd = fd_scalar(loss, w.ravel().copy(), i)
            assert abs(g.ravel()[i] - fd) < 1e-6 * max(1.0, abs(fd))

    def test_non_scalar_output_rejected(self):
        out, tape = record(lambda x: ops.scale(x, 2.0), [np.ones(3)])
        with pytest.raises(ShapeError):
            backward(tape, out)

    def test_linearity_dyadic_exact(self):
        # power-of-two combination weights commute exactly with rounding
        rng = RngState(2)
        x = rng.normal((5,))

        def build(a, b):
            tape = Tape()
            xv = tape.leaf(x, "x")
            l1 = ops.sum_all(ops.square(xv))
            l2 = ops.sum_all(ops.tanh(xv))
            out = ops.add(ops.scale(l1, a), ops.scale(l2, b))
            return backward(tape, out)["x"]

        g1 = build(1.0, 0.0)
        g2 = build(0.0, 1.0)
        combo = build(2.0, 0.25)
        assert np.array_equal(combo, 2.0 * g1 + 0.25 * g2)

    def test_linearity_general_close(self):
        rng = RngState(3)
        x = rng.normal((4,))

        def build(a, b):
            tape = Tape()
            xv = tape.leaf(x, "x")
            out = ops.add(ops.scale(ops.sum_all(ops.square(xv)), a),
                          ops.scale(ops.sum_all(ops.exp(xv)), b))
            return backward(tape, out)["x"]

        combo = build(0.3, 1.7)
        ref = 0.3 * build(1.0, 0.0) + 1.7 * build(0.0, 1.0)
        assert np.allclose(combo, ref, rtol=1e-14)

    def test_unreachable_parameter_gets_exact_zeros(self):
        tape = Tape()
        a = tape.leaf(np.ones(3), "used")
        tape.leaf(np.ones(2), "unused")
        out = ops.sum_all(ops.square(a))
        g = backward(tape, out)
        assert np.array_equal(g["unused"], np.zeros(2))
        assert np.array_equal(g["used"], 2 * np.ones(3))


class TestVjp:
    def test_identity(self):
        v = np.array([1.0, -2.0, 3.0])
        got = vjp(lambda x: x, np.zeros(3), v)
        assert np.array_equal(got, v)

    def test_linear_map_transpose(self):
        rng = RngState(4)
        w = rng.normal((3, 4))
        x = rng.normal((4,))
        v = rng.normal((3,))
        got = vjp(lambda z: ops.matvec(w, z), x, v)
        assert np.allclose(got, w.T @ v, rtol=1e-13)

    def test_mlp_directional_derivative(self):
        rng = RngState(5)
        p = init_mlp(3, 8, rng)
        f = lambda z: dynamics_fn(p)(z, 0.4)
        x = rng.normal((3,))
        v = rng.normal((3,))
        u = rng.normal((3,))
        pull = vjp(f, x, v)
        h = 1e-6
        fd = (np.asarray(f(x + h * u)) - np.asarray(f(x - h * u))) / (2 * h)
        assert abs(float(pull @ u) - float(v @ fd)) < 1e-6

    def test_cotangent_shape_checked(self):
        with pytest.raises(ShapeError):
            vjp(lambda x: x, np.zeros(3), np.zeros(4))

    def test_constant_function_zero(self):
        got = vjp(lambda x: np.ones(2), np.zeros(2), np.ones(2))
        assert np.array_equal(got, np.zeros(2))
