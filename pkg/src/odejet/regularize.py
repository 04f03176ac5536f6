"""Solver-cost regularizers as augmented-state integrals.

The regularizer value is an integral along the solution trajectory, so it
rides along with the solve: the state gains one component ``r`` with
``dr/dt = integrand(z, t)`` and ``r(t0) = 0``, and ``r(t1)`` is the
regularizer.  Every integrand is normalized by the state dimension so the
regularization weight can be chosen independently of problem size.

Integrands:

* ``taylor`` (order K): squared L2 norm of the K-th total time derivative
  of the trajectory, computed exactly by the recursive jet engine.  With
  K = 1 this reduces to the squared dynamics norm.
* ``kinetic``: squared norm of the dynamics output itself (first-order
  path-straightening comparison term).
* ``jacobian``: squared norm of ``eps^T (df/dz)`` for a fixed white-noise
  vector ``eps`` — a one-sample estimator of the squared Frobenius norm of
  the state Jacobian.  The pullback is computed by ``vjp``; on a live tape
  that expands into ordinary primitives, so the term is trainable without
  any second layer of reverse-mode machinery.

States may be single examples ``(d,)`` or batches ``(B, d)``; in a batch
each row integrates its own regularizer, and the solve returns a per-
example ``(B, 1)`` column.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .errors import OdejetError
from .jet import ode_taylor_coefficients
from .solver import SolveConfig, adaptive_solve, fixed_solve
from .tableaus import ButcherTableau, builtin_tableaus
from .tape import vjp


def _sq_norm_over_dim(v, d: int, batched: bool):
    s = ops.square(v)
    if batched:
        return ops.sdiv(ops.rowsum(s), d)
    return ops.sdiv(ops.sum_all(s), d)


def taylor_integrand(f, order: int, d: int, batched: bool):
    """|| d^K z / dt^K ||^2 / d along the trajectory, via recursive jets."""

    def g(z, t, fz):
        if order == 1:
            dk = fz
        else:
            dk = ode_taylor_coefficients(f, z, t, order, f0=fz)[order]
        return _sq_norm_over_dim(dk, d, batched)

    return g


def kinetic_integrand(f, d: int, batched: bool):
    """|| f(z, t) ||^2 / d (first total derivative of the trajectory)."""

    def g(z, t, fz):
        return _sq_norm_over_dim(fz, d, batched)

    return g


def jacobian_integrand(f, eps, d: int, batched: bool):
    """|| eps^T df/dz ||^2 / d with eps fixed along the trajectory."""

    def g(z, t, fz):
        pull = vjp(lambda s: f(s, t), z, eps)
        return _sq_norm_over_dim(pull, d, batched)

    return g


def make_integrand(kind: str, f, order: int, d: int, batched: bool, eps=None):
    if kind == "taylor":
        return taylor_integrand(f, order, d, batched)
    if kind == "kinetic":
        return kinetic_integrand(f, d, batched)
    if kind == "jacobian":
        if eps is None:
            raise OdejetError("jacobian regularizer needs a noise vector eps")
        return jacobian_integrand(f, eps, d, batched)
    raise OdejetError(f"unknown regularizer kind {kind!r}")


def augment_dynamics(f, integrand, d: int, batched: bool):
    """Dynamics of the (state, running-integral) system."""

    def f_aug(s, t):
        z = ops.slice_cols(s, 0, d)
        fz = f(z, t)
        r = integrand(z, t, fz)
        if batched:
            return ops.append_col(fz, r)
        return ops.concat_scalar(fz, r)

    return f_aug


def solve_with_regularizer(f, z0, t0: float, t1: float, order: int,
                           config: SolveConfig | None = None,
                           mode: str = "adaptive",
                           tableau: ButcherTableau | None = None,
                           grid=None, kind: str = "taylor", eps=None):
    """Integrate dynamics and regularizer together.

    Returns ``(zT, R, stats)`` where ``R`` is the integrated, dimension-
    normalized regularizer: a float for ``(d,)`` states, a ``(B, 1)``
    per-example column for batches.
    """
    if order < 1:
        raise OdejetError("regularizer order must be >= 1")
    shp = ops.shape_of(z0)
    batched = len(shp) == 2
    d = shp[-1]
    integrand = make_integrand(kind, f, order, d, batched, eps=eps)
    f_aug = augment_dynamics(f, integrand, d, batched)
    s0 = ops.append_col(z0, 0.0) if batched else ops.concat_scalar(z0, 0.0)
    if mode == "adaptive":
        sT, _, stats = adaptive_solve(f_aug, s0, t0, t1, config, tableau)
    elif mode == "fixed":
        if grid is None:
            grid = np.linspace(t0, t1, 17)
        sT, _, stats = fixed_solve(f_aug, s0, grid, tableau=tableau)
    else:
        raise OdejetError(f"unknown solve mode {mode!r}")
    zT = ops.slice_cols(sT, 0, d)
    if batched:
        r = ops.slice_cols(sT, d, d + 1)
    else:
        r = ops.take_last(sT)
    return zT, r, stats
