"""Training loop, desk-scale tasks, and post-hoc solver-cost measurement.

Tasks:

* ``toy_map`` — fit the 1-D flow map ``z(t1) = z(t0) + z(t0)**3`` from a
  uniform grid of initial states.  Small enough to sweep, rich enough that
  the unregularized fit learns needlessly expensive dynamics.
* ``spirals`` — two interleaved planar spirals, state zero-padded to four
  dimensions, linear readout of the final state, cross-entropy loss.

Training is full-batch SGD with momentum on a fixed integration grid (the
differentiable path).  Solver cost never comes from the training grid: it
is measured by re-solving each example with an adaptive method at default
tolerances and averaging the reported NFE, mirroring how the model would
actually be deployed.

Everything is a pure function of (task, spec, schedule, seed): metric
histories are bit-reproducible for equal seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .mlp import MlpParams, dynamics_fn, init_mlp
from .objective import (Batch, RegularizedObjective,
                        objective_grad_with_diagnostics)
from .regularize import solve_with_regularizer
from .rng import RngState
from .solver import SolveConfig, adaptive_solve
from .tableaus import ButcherTableau, builtin_tableaus


def toy_map_batch(n: int = 16, lo: float = -1.0, hi: float = 1.0) -> Batch:
    """Training grid for the cubic flow-map task."""
    z0 = np.linspace(lo, hi, n).reshape(-1, 1)
    return Batch(z0, z0 + z0**3, kind="regression")


def toy_map_holdout(n: int = 16, lo: float = -1.0, hi: float = 1.0) -> Batch:
    """Held-out inputs: midpoints of the training grid."""
    z0 = np.linspace(lo, hi, n).reshape(-1, 1)
    mid = ((z0[:-1] + z0[1:]) / 2.0).reshape(-1, 1)
    return Batch(mid, mid + mid**3, kind="regression")


def spirals_batch(n_per_class: int = 32, rng: RngState | None = None,
                  noise: float = 0.05) -> Batch:
    """Two interleaved spirals, lifted to 4 dims by zero padding."""
    rng = rng or RngState(0)
    pts, labels = [], []
    for cls in (0, 1):
        theta = rng.uniform((n_per_class,), 0.5 * np.pi, 2.5 * np.pi)
        r = theta / (2.5 * np.pi)
        sign = 1.0 if cls == 0 else -1.0
        x = sign * r * np.cos(theta) + noise * rng.normal((n_per_class,))
        y = sign * r * np.sin(theta) + noise * rng.normal((n_per_class,))
        pts.append(np.stack([x, y], axis=1))
        labels.append(np.full(n_per_class, cls, dtype=int))
    xy = np.concatenate(pts)
    inputs = np.concatenate([xy, np.zeros((xy.shape[0], 2))], axis=1)
    return Batch(inputs, np.concatenate(labels), kind="classification")


def make_task(name: str, **kw) -> Batch:
    if name == "toy_map":
        return toy_map_batch(**kw)
    if name == "spirals":
        return spirals_batch(**kw)
    raise ValueError(f"unknown task {name!r} (expected 'toy_map' or 'spirals')")


@dataclass
class TrainSchedule:
    """Epoch budget and a step learning-rate schedule."""

    epochs: int = 1000
    lr_steps: tuple = ((0, 0.05),)   # (starting epoch, lr), ascending
    momentum: float = 0.9
    eval_every: int = 100

    def lr_at(self, epoch: int) -> float:
        lr = self.lr_steps[0][1]
        for e, v in self.lr_steps:
            if epoch >= e:
                lr = v
        return lr


@dataclass
class TrainState:
    """Parameters, momentum buffers, and the metric history of one run."""

    params: dict
    velocity: dict
    epoch: int
    rng: RngState
    history: list = field(default_factory=list)

    def mlp(self) -> MlpParams:
        return MlpParams.from_dict(
            {k: self.params[k] for k in ("w1", "b1", "w2", "b2")})


def sgd_momentum(state: TrainState, grads, lr: float,
                 momentum: float = 0.9) -> TrainState:
    """v <- momentum * v + g;  theta <- theta - lr * v (classic heavy ball)."""
    new_p, new_v = {}, {}
    for name, p in state.params.items():
        g = grads[name]
        v = ops.add(ops.scale(state.velocity[name], momentum), g)
        new_v[name] = v
        new_p[name] = ops.sub(p, ops.scale(v, lr))
    return TrainState(params=new_p, velocity=new_v, epoch=state.epoch,
                      rng=state.rng, history=state.history)


def init_train_state(batch: Batch, seed: int, hidden: int = 32,
                     n_classes: int = 2) -> TrainState:
    rng = RngState(seed)
    d = batch.inputs.shape[1]
    params = init_mlp(d, hidden, rng).as_dict()
    if batch.kind == "classification":
        s = 1.0 / np.sqrt(d)
        params["wr"] = rng.uniform((n_classes, d), -s, s)
        params["br"] = rng.uniform((n_classes,), -s, s)
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    return TrainState(params=params, velocity=velocity, epoch=0, rng=rng)


def measure_nfe(params: dict, inputs: np.ndarray,
                tableau: ButcherTableau | None = None,
                config: SolveConfig | None = None,
                t0: float = 0.0, t1: float = 1.0,
                strict: bool = False) -> list[float]:
    """Adaptive-solve NFE for each example at default tolerances.

    Unsolvable examples (divergent or non-finite dynamics) report ``inf``
    unless ``strict``; an infinite mean marks a run whose dynamics the
    adaptive solver gave up on.
    """
    from .errors import DivergenceError, NonFiniteError

    f = dynamics_fn(MlpParams.from_dict(params))
    out = []
    for i in range(inputs.shape[0]):
        try:
            _, _, stats = adaptive_solve(f, inputs[i], t0, t1, config, tableau)
            out.append(float(stats.nfe))
        except (DivergenceError, NonFiniteError):
            if strict:
                raise
            out.append(float("inf"))
    return out


def measure_reg(params: dict, inputs: np.ndarray, order: int,
                tableau: ButcherTableau | None = None,
                config: SolveConfig | None = None,
                t0: float = 0.0, t1: float = 1.0) -> float:
    """Mean adaptive-solve regularizer value over examples."""
    f = dynamics_fn(MlpParams.from_dict(params))
    vals = []
    for i in range(inputs.shape[0]):
        _, r, _ = solve_with_regularizer(f, inputs[i], t0, t1, order,
                                         config=config, mode="adaptive",
                                         tableau=tableau)
        vals.append(float(r))
    return float(np.mean(vals))


def train(task, spec: RegularizedObjective, schedule: TrainSchedule,
          seed: int, hidden: int = 32, nfe_tableau: str = "dormand_prince54"):
    """Train on a task (name or prepared Batch); returns (TrainState, history).

    The history holds one row per evaluation epoch with the base loss, the
    regularizer value from the training solve, and the mean adaptive NFE
    at default tolerances.
    """
    batch = make_task(task) if isinstance(task, str) else task
    state = init_train_state(batch, seed, hidden=hidden)
    tab = builtin_tableaus()[nfe_tableau]
    for epoch in range(schedule.epochs):
        state.epoch = epoch
        eps = (state.rng.normal(batch.inputs.shape)
               if spec.regularizer == "jacobian" else None)
        value, grads, diag = objective_grad_with_diagnostics(
            state.params, batch, spec, eps=eps)
        state = sgd_momentum(state, grads, schedule.lr_at(epoch),
                             schedule.momentum)
        if (epoch + 1) % schedule.eval_every == 0 or epoch == schedule.epochs - 1:
            nfe = measure_nfe(state.params, batch.inputs, tableau=tab)
            state.history.append({
                "epoch": epoch + 1,
                "objective": value,
                "base_loss": diag["base"],
                "reg_value": diag["reg"] if diag["reg"] is not None else 0.0,
                "mean_nfe": float(np.mean(nfe)),
            })
    return state, state.history
