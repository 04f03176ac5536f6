"""The regularized training objective: task loss + lambda * regularizer.

``objective`` evaluates on plain arrays (for metrics), ``objective_grad``
records the identical computation on a tape and runs one reverse sweep —
gradients are exact for the fixed-grid discretization being differentiated
(discretize-then-differentiate; there is no continuous adjoint here, and
fixed grids are required for the gradient path).

Exactness contracts kept by construction:

* with ``lam == 0`` the objective *is* the base loss (no `+ 0 * reg`
  rounding term is ever added);
* the regularizer is integrated per example and normalized by state
  dimension, and the reported value satisfies
  ``objective(lam) - objective(0) == lam * reg`` on identical grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import ops
from .errors import NonFiniteError, OdejetError, TrainingError
from .losses import cross_entropy, mse
from .mlp import MlpParams, dynamics_fn
from .regularize import solve_with_regularizer
from .solver import SolveConfig, fixed_solve
from .tableaus import builtin_tableaus
from .tape import Gradients, Tape, backward


@dataclass
class Batch:
    """One batch of examples: initial states plus targets or labels."""

    inputs: np.ndarray            # (B, d) initial states
    targets: np.ndarray           # (B, d) regression targets or (B,) labels
    kind: str = "regression"      # 'regression' | 'classification'

    def __post_init__(self):
        self.inputs = ops.as_tensor(self.inputs)
        if self.inputs.ndim != 2 or self.inputs.shape[0] == 0:
            raise OdejetError("Batch.inputs must be a nonempty (B, d) array")

    @property
    def size(self) -> int:
        return self.inputs.shape[0]


@dataclass
class RegularizedObjective:
    """Configuration of base loss, regularizer, and solve discretization."""

    base_loss: str = "mse"            # 'mse' | 'cross_entropy'
    lam: float = 0.0
    reg_order: int = 2                # K for the 'taylor' regularizer
    regularizer: str = "taylor"       # 'taylor' | 'kinetic' | 'jacobian' | 'none'
    t0: float = 0.0
    t1: float = 1.0
    mode: str = "fixed"               # 'fixed' | 'adaptive'
    grid_steps: int = 16
    tableau: str = "rk4_fixed"
    solve_config: SolveConfig = field(default_factory=SolveConfig)

    def __post_init__(self):
        if self.lam < 0:
            raise OdejetError("lambda must be >= 0")
        if self.reg_order < 1:
            raise OdejetError("regularizer order must be >= 1")
        if self.base_loss not in ("mse", "cross_entropy"):
            raise OdejetError(f"unknown base loss {self.base_loss!r}")
        if self.regularizer not in ("taylor", "kinetic", "jacobian", "none"):
            raise OdejetError(f"unknown regularizer {self.regularizer!r}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.grid_steps + 1)

    def with_lambda(self, lam: float) -> "RegularizedObjective":
        return replace(self, lam=float(lam))


def _evaluate(params: dict, batch: Batch, spec: RegularizedObjective, eps,
              z0=None):
    """Shared forward pass; params values may be arrays or tape Vars."""
    mlp = MlpParams.from_dict(params)
    f = dynamics_fn(mlp)
    tab = builtin_tableaus()[spec.tableau]
    if z0 is None:
        z0 = batch.inputs
    reg = None
    try:
        if spec.regularizer != "none":
            zt, r_col, _ = solve_with_regularizer(
                f, z0, spec.t0, spec.t1, spec.reg_order,
                config=spec.solve_config, mode=spec.mode, tableau=tab,
                grid=spec.grid() if spec.mode == "fixed" else None,
                kind=spec.regularizer, eps=eps)
            reg = ops.sdiv(ops.sum_all(r_col), batch.size)
        elif spec.mode == "fixed":
            zt, _, _ = fixed_solve(f, z0, spec.grid(), tableau=tab)
        else:
            from .solver import adaptive_solve

            zt, _, _ = adaptive_solve(f, z0, spec.t0, spec.t1,
                                      spec.solve_config, tableau=tab)
    except NonFiniteError as e:
        raise TrainingError(str(e), example_index=_first_bad_row(f, batch, spec)) \
            from e
    if batch.kind == "classification":
        logits = ops.add_row(ops.linear(zt, params["wr"]), params["br"])
        base = cross_entropy(logits, batch.targets)
    else:
        base = mse(zt, batch.targets)
    if spec.lam == 0.0 or reg is None:
        total = base
    else:
        total = ops.add(base, ops.scale(reg, spec.lam))
    return total, base, reg


def _first_bad_row(f, batch, spec):
    """Identify which example diverged, for error reporting."""
    for i in range(batch.size):
        try:
            fixed_solve(f, batch.inputs[i], spec.grid(),
                        tableau=builtin_tableaus()[spec.tableau])
        except NonFiniteError:
            return i
    return None


def objective(params: dict, batch: Batch, spec: RegularizedObjective,
              rng=None, eps=None):
    """Objective value plus diagnostics {'base': .., 'reg': ..} on arrays."""
    eps = _resolve_eps(spec, batch, rng, eps)
    total, base, reg = _evaluate(params, batch, spec, eps)
    return float(total), {"base": float(base),
                          "reg": None if reg is None else float(reg)}


def objective_grad(params: dict, batch: Batch, spec: RegularizedObjective,
                   rng=None, eps=None):
    """Objective value and exact gradients for the fixed-grid discretization."""
    value, grads, _ = objective_grad_with_diagnostics(
        params, batch, spec, rng=rng, eps=eps)
    return value, grads


def objective_grad_with_diagnostics(params: dict, batch: Batch,
                                    spec: RegularizedObjective,
                                    rng=None, eps=None):
    if spec.mode != "fixed":
        raise OdejetError("objective_grad requires a fixed-grid solver mode")
    eps = _resolve_eps(spec, batch, rng, eps)
    tape = Tape()
    leaves = {name: tape.leaf(v, name=name) for name, v in params.items()}
    # inputs join the tape as a constant leaf so every downstream value,
    # including the states handed to inner vjp pullbacks, shares one tape
    z0 = tape.leaf(batch.inputs)
    total, base, reg = _evaluate(leaves, batch, spec, eps, z0=z0)
    grads = backward(tape, total)
    diag = {"base": float(ops.peek(base)),
            "reg": None if reg is None else float(ops.peek(reg))}
    return float(ops.peek(total)), grads, diag


def _resolve_eps(spec, batch, rng, eps):
    if spec.regularizer != "jacobian":
        return None
    if eps is not None:
        return ops.as_tensor(eps)
    if rng is None:
        raise OdejetError("jacobian regularizer needs rng or an explicit eps")
    return rng.normal(batch.inputs.shape)
