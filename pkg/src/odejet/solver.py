"""Explicit Runge-Kutta solvers with evaluation-count instrumentation.

Dynamics callables have signature ``f(z, t) -> dz/dt`` with ``z`` any
carrier the primitive registry accepts; the fixed-grid solver is routinely
run on tape variables so training can differentiate straight through the
unrolled steps (step sizes themselves are constants, never
differentiated).  The adaptive solver works on plain arrays only — it is
the measurement instrument, not a training path.

Cost accounting: ``SolveStats.nfe`` counts calls of the integrated
function, exactly stages × attempted steps (no hidden probe evaluations).

Step control is the elementary (non-PI) rule
``h <- h * clip(safety * norm**(-1/(q+1)), min_factor, max_factor)`` with
``q`` the embedded order; a step is accepted iff the scaled RMS error norm
is at most 1.  The starting step is the whole remaining span: the first
attempt is optimistic and the embedded estimate rejects it down to a
workable size (a handful of rejected attempts, all visible in the stats).
This start makes solves of dynamics the method integrates exactly cost a
single accepted step, so step counts cleanly expose which trajectory
degrees a method of a given order finds hard.  A trial step that produces
non-finite values counts as a rejection at maximum shrink; only when the
step size underflows is the problem declared unsolvable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .errors import DivergenceError, NonFiniteError, OdejetError
from .ops import lincomb, peek
from .tableaus import ButcherTableau, builtin_tableaus


@dataclass
class SolveConfig:
    """Adaptive-solver tolerances and controller parameters."""

    rtol: float = 1.4e-8
    atol: float = 1.4e-8
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 10.0
    max_steps: int = 100_000
    initial_step: float | None = None

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise OdejetError("rtol and atol must be positive")
        if not (0.0 < self.min_factor < 1.0 < self.max_factor):
            raise OdejetError("need 0 < min_factor < 1 < max_factor")


@dataclass
class SolveStats:
    """Evaluation and step accounting for one solve.

    ``nfe == stages * (accepted + rejected) + initial_step_evals``; the
    last term is zero (kept for completeness — the adaptive solver does
    not spend evaluations outside attempted steps).
    """

    nfe: int = 0
    accepted: int = 0
    rejected: int = 0
    final_step: float = 0.0
    initial_step_evals: int = 0


@dataclass
class Trajectory:
    """Accepted solution points (plain values, even for taped solves)."""

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)

    def append(self, t: float, z) -> None:
        self.times.append(float(t))
        self.states.append(np.array(peek(z), copy=True, ndmin=0))


def _assert_finite(v, t: float) -> None:
    arr = peek(v)
    ok = np.isfinite(arr).all() if isinstance(arr, np.ndarray) else np.isfinite(arr)
    if not ok:
        raise NonFiniteError(f"dynamics produced non-finite values near t={t}")


def rk_step(tableau: ButcherTableau, f, z, t: float, h: float):
    """One explicit step from (z, t) with size h.

    Returns ``(z_next, error_estimate, stages)``; the estimate is ``None``
    for tableaus without embedded weights.  Zero-weight terms are omitted
    from the stage combinations (fixed, documented summation order).
    """
    a, b, c = tableau.a, tableau.b, tableau.c
    ks = []
    for i in range(tableau.stages):
        if i == 0:
            zi = z
        else:
            cs, xs = [1.0], [z]
            for j in range(i):
                if a[i, j] != 0.0:
                    cs.append(h * a[i, j])
                    xs.append(ks[j])
            zi = lincomb(cs, xs) if len(xs) > 1 else z
        ks.append(f(zi, t + c[i] * h))
    cs, xs = [1.0], [z]
    for i in range(tableau.stages):
        if b[i] != 0.0:
            cs.append(h * b[i])
            xs.append(ks[i])
    z_next = lincomb(cs, xs)
    err = None
    if tableau.b_err is not None:
        d = b - tableau.b_err
        cs, xs = [], []
        for i in range(tableau.stages):
            if d[i] != 0.0:
                cs.append(h * d[i])
                xs.append(ks[i])
        err = lincomb(cs, xs) if xs else ops.scale(z_next, 0.0)
    return z_next, err, ks


def error_norm(z, z_next, err, atol: float, rtol: float) -> float:
    """RMS of err_i / (atol + rtol * max(|z_i|, |z_next_i|))."""
    z = np.asarray(peek(z), dtype=float)
    z_next = np.asarray(peek(z_next), dtype=float)
    err = np.asarray(peek(err), dtype=float)
    sc = atol + rtol * np.maximum(np.abs(z), np.abs(z_next))
    q = err / sc
    return float(np.sqrt(np.mean(q * q)))


def _finite(v) -> bool:
    arr = peek(v)
    if isinstance(arr, np.ndarray):
        return bool(np.isfinite(arr).all())
    return bool(np.isfinite(arr))


def adaptive_solve(f, z0, t0: float, t1: float, config: SolveConfig | None = None,
                   tableau: ButcherTableau | None = None):
    """Integrate with adaptive steps; returns (zT, Trajectory, SolveStats)."""
    if config is None:
        config = SolveConfig()
    if tableau is None:
        tableau = builtin_tableaus()["dormand_prince54"]
    if not tableau.adaptive:
        raise OdejetError(f"tableau {tableau.name} has no embedded error weights")
    if not t1 > t0:
        raise OdejetError("adaptive_solve requires t1 > t0")
    q = tableau.embedded_order
    stats = SolveStats()
    h = float(config.initial_step) if config.initial_step is not None \
        else (t1 - t0)
    traj = Trajectory()
    traj.append(t0, z0)
    z, t = z0, t0
    tiny = 1e-14 * (t1 - t0)
    attempts = 0
    nonfinite_steps = 0
    while t < t1 - tiny:
        h = min(h, t1 - t)
        if attempts >= config.max_steps:
            stats.final_step = h
            raise DivergenceError(
                f"maximum step attempts ({config.max_steps}) exceeded at t={t}",
                stats=stats, t_reached=t)
        if h < 1e-14 * (t1 - t0):
            stats.final_step = h
            if nonfinite_steps:
                raise NonFiniteError(
                    f"dynamics stay non-finite down to h={h:.3e} near t={t}")
            raise DivergenceError(
                f"step size underflow (h={h:.3e}) at t={t}",
                stats=stats, t_reached=t)
        z_next, err, _ = rk_step(tableau, f, z, t, h)
        attempts += 1
        stats.nfe += tableau.stages
        if not (_finite(z_next) and _finite(err)):
            # treat a blown-up trial step as a hard rejection
            stats.rejected += 1
            nonfinite_steps += 1
            h = h * config.min_factor
            continue
        nonfinite_steps = 0
        norm = error_norm(z, z_next, err, config.atol, config.rtol)
        if norm <= 1.0:
            t = t1 if (t1 - t - h) <= tiny else t + h
            z = z_next
            stats.accepted += 1
            stats.final_step = h
            traj.append(t, z)
        else:
            stats.rejected += 1
        factor = config.max_factor if norm == 0.0 else \
            config.safety * norm ** (-1.0 / (q + 1))
        h = h * min(config.max_factor, max(config.min_factor, factor))
    return z, traj, stats


def fixed_solve(f, z0, grid, tableau: ButcherTableau | None = None):
    """Integrate over an explicit time grid (one step per interval).

    Works on any carrier; this is the differentiable training path.
    """
    if tableau is None:
        tableau = builtin_tableaus()["rk4_fixed"]
    grid = [float(t) for t in grid]
    if len(grid) < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise OdejetError("fixed_solve needs a strictly increasing grid")
    stats = SolveStats()
    traj = Trajectory()
    traj.append(grid[0], z0)
    z = z0
    for t, t_next in zip(grid, grid[1:]):
        h = t_next - t
        z, _, _ = rk_step(tableau, f, z, t, h)
        stats.nfe += tableau.stages
        stats.accepted += 1
        stats.final_step = h
        _assert_finite(z, t_next)
        traj.append(t_next, z)
    return z, traj, stats
