"""Kernel backend parity: compiled extension vs numpy reference."""

import numpy as np
import pytest

from odejet.backend import available_backends, backend_name, get_backend
from odejet.rng import RngState

HAVE_NATIVE = "native" in available_backends()

pytestmark = pytest.mark.skipif(not HAVE_NATIVE,
                                reason="native extension not built")


def backends():
    return get_backend("python"), get_backend("native")


class TestParity:
    def test_elementwise(self):
        py, nat = backends()
        rng = RngState(0)
        a = rng.normal((47,))
        b = rng.normal((47,)) + 2.0
        for name in ("add", "sub", "mul", "div", "neg", "exp", "sin", "cos",
                     "tanh", "square"):
            fa = getattr(py, name)
            fb = getattr(nat, name)
            args = (a, b) if name in ("add", "sub", "mul", "div") else (a,)
            x, y = fa(*args), fb(*args)
            assert x.shape == y.shape
            assert np.allclose(x, y, rtol=1e-15, atol=1e-300), name

    def test_scalar_param_ops(self):
        py, nat = backends()
        x = RngState(1).normal((31,))
        for name, args in (("scale", (x, 0.731)), ("shift", (x, -1.25)),
                           ("sdiv", (x, 6.0)), ("smul_arr", (0.3, x))):
            assert np.array_equal(getattr(py, name)(*args),
                                  getattr(nat, name)(*args)), name

    def test_linear_algebra_close(self):
        py, nat = backends()
        rng = RngState(2)
        w = rng.normal((5, 7))
        x = rng.normal((7,))
        g = rng.normal((5,))
        xb = rng.normal((4, 7))
        gb = rng.normal((4, 5))
        pairs = [
            ("matvec", (w, x)), ("matvec_t", (w, g)), ("outer", (g, x)),
            ("linear", (xb, w)), ("matmul_nn", (gb, w)), ("matmul_tn", (gb, xb)),
        ]
        for name, args in pairs:
            a = getattr(py, name)(*args)
            b = getattr(nat, name)(*args)
            assert np.allclose(a, b, rtol=1e-13), name

    def test_structural_exact(self):
        py, nat = backends()
        rng = RngState(3)
        x = rng.normal((6,))
        xb = rng.normal((3, 4))
        col = rng.normal((3, 1))
        cases = [
            ("concat_scalar", (x, 2.5)),
            ("append_col_scalar", (xb, 0.7)),
            ("append_col_arr", (xb, col)),
            ("slice_cols", (xb, 1, 3)),
            ("pad_cols", (x, 2, 8, 9)),
            ("rowsum", (xb,)),
            ("colsum", (xb,)),
            ("col_to_full", (col, 5)),
        ]
        for name, args in cases:
            a = getattr(py, name)(*args)
            b = getattr(nat, name)(*args)
            assert np.array_equal(a, b), name

    def test_reductions(self):
        py, nat = backends()
        a = RngState(4).normal((33,))
        b = RngState(5).normal((33,))
        assert abs(py.sum_all(a) - nat.sum_all(a)) < 1e-12
        assert abs(py.dot(a, b) - nat.dot(a, b)) < 1e-12
        assert py.take_last(a) == nat.take_last(a)

    def test_lincomb(self):
        py, nat = backends()
        rng = RngState(6)
        xs = tuple(rng.normal((17,)) for _ in range(4))
        cs = (0.5, -1.25, 2.0, 0.125)
        assert np.array_equal(py.lincomb(cs, xs), nat.lincomb(cs, xs))

    def test_within_backend_determinism(self):
        _, nat = backends()
        rng = RngState(7)
        w = rng.normal((8, 8))
        x = rng.normal((8,))
        assert np.array_equal(nat.matvec(w, x), nat.matvec(w, x))


class TestSelection:
    def test_active_backend_reported(self):
        assert backend_name() in ("python", "native")

    def test_env_override_python(self):
        import subprocess, sys

        out = subprocess.run(
            [sys.executable, "-c",
             "import odejet; print(odejet.backend_name())"],
            env={"ODEJET_BACKEND": "python", "PATH": "/usr/bin:/bin"},
            capture_output=True, text=True)
        assert out.stdout.strip() == "python"
