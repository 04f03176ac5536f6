"""Shared helpers for the test suite."""

import numpy as np

from odejet import ops
from odejet.rng import RngState


def random_composition(rng: RngState, dim: int = 3):
    """Random small function over the registered series primitives."""
    w = rng.normal((dim, dim))
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


def rel_gap(a, b, floor: float = 1.0) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(floor, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale
