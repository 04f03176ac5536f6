"""The dynamics network: a two-layer tanh MLP with time appended.

Layout (d state dims, h hidden units):

    z1 = tanh(z)
    h1 = W1 [z1 ; t] + b1        W1: (h, d+1)
    z2 = tanh(h1)
    out = W2 [z2 ; t] + b2       W2: (d, h+1)

``[x ; t]`` appends the scalar time, so the dynamics carry explicit time
dependence.  tanh is the nonlinearity throughout: it is smooth to all
orders, which the high-order jet computations require.

``dynamics`` accepts single states ``(d,)`` or batches ``(B, d)`` of any
carrier; rows of a batch evolve independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ops
from .rng import RngState


@dataclass
class MlpParams:
    """Weights of the dynamics MLP (arrays during evaluation, Vars on tape)."""

    w1: object
    b1: object
    w2: object
    b2: object

    @property
    def hidden(self) -> int:
        return ops.shape_of(self.w1)[0]

    @property
    def dim(self) -> int:
        return ops.shape_of(self.w2)[0]

    def as_dict(self) -> dict:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpParams":
        return cls(w1=d["w1"], b1=d["b1"], w2=d["w2"], b2=d["b2"])


def init_mlp(dim: int, hidden: int, rng: RngState) -> MlpParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init for weights and biases."""
    s1 = 1.0 / np.sqrt(dim + 1)
    s2 = 1.0 / np.sqrt(hidden + 1)
    return MlpParams(
        w1=rng.uniform((hidden, dim + 1), -s1, s1),
        b1=rng.uniform((hidden,), -s1, s1),
        w2=rng.uniform((dim, hidden + 1), -s2, s2),
        b2=rng.uniform((dim,), -s2, s2),
    )


def dynamics(params: MlpParams, z, t):
    """dz/dt for a single state vector or a batch of rows."""
    z1 = ops.tanh(z)
    if len(ops.shape_of(z)) == 1:
        h1 = ops.add(ops.matvec(params.w1, ops.concat_scalar(z1, t)), params.b1)
        z2 = ops.tanh(h1)
        return ops.add(ops.matvec(params.w2, ops.concat_scalar(z2, t)), params.b2)
    h1 = ops.add_row(ops.linear(ops.append_col(z1, t), params.w1), params.b1)
    z2 = ops.tanh(h1)
    return ops.add_row(ops.linear(ops.append_col(z2, t), params.w2), params.b2)


def dynamics_fn(params: MlpParams):
    """Close over parameters; the (z, t) callable solvers expect."""
    return lambda z, t: dynamics(params, z, t)
