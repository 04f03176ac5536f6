"""Jets: higher-order total derivatives through the series engine.

``jet(f, x0, series)`` pushes a degree-K Taylor polynomial through ``f``
and returns derivative coefficients of the composition: output k equals
``d^k/dt^k f(x(t))`` at t = 0 when ``series`` holds the derivative
coefficients of ``x(t)``.  The API speaks derivative coefficients; the
k! (de)normalization happens here at the boundary.

``ode_taylor_coefficients`` turns a dynamics function into the Taylor
coefficients of its own solution trajectory: since ``dz/dt = f(z, t)``,
the k-th derivative of ``f(z(t), t)`` along the solution is the (k+1)-th
derivative of ``z``, so one jet call per order bootstraps the next
coefficient.  Explicit time dependence is handled by the autonomous-form
augmentation: ``t`` joins the state as a scalar series with unit first
derivative and zero beyond, and that augmentation is applied uniformly
even for time-independent dynamics.

Cost: one jet call at order K does O(K^2) work relative to a plain
evaluation (series convolutions), measured by ``jet_opcount``.  Contrast
with the nested first-order oracle in :mod:`odejet.nested`, which costs
O(exp(K)) because no work is shared between orders.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .opcount import OpCounter
from .taylor import TaylorBundle, factorial


def jet(f, x0, series):
    """Propagate derivative coefficients through ``f``.

    ``series`` is a sequence (x_1, ..., x_K) of derivative coefficients,
    each shaped like ``x0``.  Returns ``(y0, [y_1, ..., y_K])`` with
    ``y_k = d^k/dt^k f(x(t))`` at t = 0.
    """
    series = list(series)
    if not series:
        return f(x0), []
    bundle = TaylorBundle.from_derivatives(x0, series)
    out = f(bundle)
    if type(out) is not TaylorBundle:
        # output independent of the input series
        shp = ops.shape_of(ops.peek(out))
        return out, [np.zeros(shp) if shp else 0.0 for _ in series]
    return out.primal, out.derivative_coefficients()


def _time_bundle(t0: float, order: int) -> TaylorBundle:
    """The augmented independent variable: series (t0; 1, 0, ..., 0)."""
    return TaylorBundle(float(t0), (1.0,) + (0.0,) * (order - 1),
                        validate=False)


def ode_taylor_coefficients(f, z0, t0: float, order: int, f0=None):
    """Derivative coefficients x_0..x_K of the solution of dz/dt = f(z, t).

    ``f0`` optionally supplies a precomputed ``f(z0, t0)`` so callers that
    already evaluated the dynamics at the expansion point don't pay twice.
    Returns a list of ``order + 1`` tensors shaped like ``z0``.
    """
    if order < 1:
        raise ValueError("ode_taylor_coefficients requires order >= 1")
    xs = [z0, f0 if f0 is not None else f(z0, float(t0))]
    for k in range(1, order):
        zb = TaylorBundle.from_derivatives(z0, xs[1:k + 1])
        tb = _time_bundle(t0, k)
        y = f(zb, tb)
        if type(y) is not TaylorBundle or y.order < k:
            shp = ops.shape_of(ops.peek(z0))
            xs.append(np.zeros(shp) if shp else 0.0)
            continue
        yk = y.coefficient(k)
        xs.append(ops.scale(yk, factorial(k)) if k > 1 else yk)
    return xs


def total_derivative(f, z, t: float, order: int):
    """The order-th time derivative of the solution trajectory through (z, t)."""
    return ode_taylor_coefficients(f, z, t, order)[order]


def jet_opcount(f, x0, order: int, series=None) -> int:
    """Scalar operations executed by one jet call at the given order.

    Order 0 measures a plain evaluation.  The default probe series is all
    ones; counts do not depend on coefficient values.
    """
    x0 = ops.as_tensor(x0) if not isinstance(x0, (int, float)) else float(x0)
    if series is None:
        shp = ops.shape_of(x0)
        series = [np.ones(shp) if shp else 1.0 for _ in range(order)]
    with OpCounter() as c:
        if order == 0:
            f(x0)
        else:
            jet(f, x0, series)
    return c.total
