"""Experiment drivers behind the CLI.

Each driver is a pure function from configuration to named
:class:`~odejet.results.ResultTable` objects plus a summary dict; the CLI
layer owns files, manifests, and plots.  Tests call the drivers directly.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import ops
from .backend import available_backends, get_backend
from .errors import DivergenceError, OdejetError, TrainingError
from .jet import jet_opcount, ode_taylor_coefficients
from .mlp import MlpParams, dynamics_fn, init_mlp
from .nested import nested_jet, nested_opcount
from .objective import (Batch, RegularizedObjective, objective,
                        objective_grad)
from .results import ResultTable
from .rng import RngState
from .solver import SolveConfig, adaptive_solve
from .tableaus import builtin_tableaus, tableau_by_order
from .tape import vjp
from .train import (TrainSchedule, init_train_state, make_task, measure_nfe,
                    measure_reg, toy_map_batch, toy_map_holdout, train)

SOLVER_BY_ORDER = {2: "heun21", 3: "bogacki_shampine32", 5: "dormand_prince54"}

# Reference toy_map configurations (desk-scale calibration).
TOY_EPOCHS = 6000
TOY_LR_STEPS = ((0, 0.1), (2000, 0.05), (4000, 0.02), (5000, 0.01))
SWEEP_EPOCHS = 1500
SWEEP_LR_STEPS = ((0, 0.1), (1000, 0.05))
DEFAULT_LAMBDAS = (0.02, 0.2)  # endpoints of the default sweep range


def lambda_grid(lo: float, hi: float, per_decade: int = 8) -> list[float]:
    """Logarithmic grid with a fixed point density per decade.

    A degenerate range (lo == hi) is the single-point grid.
    """
    if not (0 < lo <= hi):
        raise OdejetError("lambda grid needs 0 < lo <= hi")
    if lo == hi:
        return [float(lo)]
    decades = math.log10(hi / lo)
    n = max(2, round(per_decade * decades) + 1)
    return [float(10 ** e) for e in
            np.linspace(math.log10(lo), math.log10(hi), n)]


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties."""
    def ranks(v):
        order = np.argsort(v, kind="stable")
        r = np.empty(len(v))
        sv = np.asarray(v, dtype=float)[order]
        i = 0
        while i < len(v):
            j = i
            while j + 1 < len(v) and sv[j + 1] == sv[i]:
                j += 1
            r[order[i:j + 1]] = (i + j) / 2.0 + 1.0
            i = j + 1
        return r

    rx, ry = ranks(list(xs)), ranks(list(ys))
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        return 0.0
    return float(rx @ ry) / denom


def pareto_front(points) -> list:
    """Subset of (loss, nfe) points not strictly dominated by any other."""
    front = []
    for p in points:
        if not any(q[0] < p[0] and q[1] < p[1] for q in points if q is not p):
            front.append(p)
    return front


def frontier_weakly_dominates(front_pts, other_pts, slack: float = 0.0) -> bool:
    """True if every point of ``other_pts`` is covered by some frontier point
    (one with loss and NFE both <= the other's, up to ``slack`` relative)."""
    front = pareto_front(front_pts)
    for loss, nfe in other_pts:
        if not any(fl <= loss * (1 + slack) + 1e-300 and fn <= nfe * (1 + slack)
                   for fl, fn in front):
            return False
    return True


# --------------------------------------------------------------------------
# fit-toy (cubic flow map, regularized vs baseline)

def _toy_schedule(epochs: int, lr_steps=None, eval_every: int = 200):
    return TrainSchedule(epochs=epochs,
                         lr_steps=tuple(lr_steps or TOY_LR_STEPS),
                         eval_every=eval_every)


def _trajectory_rows(table: ResultTable, variant: str, params: dict,
                     inputs: np.ndarray) -> None:
    f = dynamics_fn(MlpParams.from_dict(params))
    for i in range(inputs.shape[0]):
        _, traj, _ = adaptive_solve(f, inputs[i], 0.0, 1.0)
        for t, z in zip(traj.times, traj.states):
            table.add(variant, i, t, float(np.asarray(z).ravel()[0]))


def fit_toy(lam: float = 0.03, reg_order: int = 3, solver: str = "dormand_prince54",
            epochs: int = TOY_EPOCHS, seed: int = 0, hidden: int = 32,
            lr_steps=None, eval_every: int = 200):
    """Train the cubic-map task with and without regularization.

    With ``lam == 0`` only the baseline is trained and emitted.
    """
    batch = toy_map_batch()
    schedule = _toy_schedule(epochs, lr_steps, eval_every)
    tab = builtin_tableaus()[solver]

    hist_table = ResultTable(
        ["variant", "epoch", "base_loss", "reg_value", "mean_nfe"])
    traj_table = ResultTable(["variant", "example", "t", "z"])
    summary: dict = {"lambda": lam, "reg_order": reg_order, "seed": seed}

    base_spec = RegularizedObjective(lam=0.0, regularizer="none")
    base_state, base_hist = train(batch, base_spec, schedule, seed,
                                  hidden=hidden, nfe_tableau=solver)
    for h in base_hist:
        hist_table.add("baseline", h["epoch"], h["base_loss"],
                       h["reg_value"], h["mean_nfe"])
    _trajectory_rows(traj_table, "baseline", base_state.params, batch.inputs)
    summary["baseline_mse"] = base_hist[-1]["base_loss"]
    summary["baseline_nfe"] = base_hist[-1]["mean_nfe"]

    if lam > 0:
        reg_spec = RegularizedObjective(lam=lam, reg_order=reg_order,
                                        regularizer="taylor")
        reg_state, reg_hist = train(batch, reg_spec, schedule, seed,
                                    hidden=hidden, nfe_tableau=solver)
        for h in reg_hist:
            hist_table.add("regularized", h["epoch"], h["base_loss"],
                           h["reg_value"], h["mean_nfe"])
        _trajectory_rows(traj_table, "regularized", reg_state.params,
                         batch.inputs)
        summary["regularized_mse"] = reg_hist[-1]["base_loss"]
        summary["regularized_nfe"] = reg_hist[-1]["mean_nfe"]
        summary["nfe_reduction"] = 1.0 - (summary["regularized_nfe"]
                                          / summary["baseline_nfe"])
        hold = toy_map_holdout()
        summary["holdout_nfe"] = float(np.mean(measure_nfe(
            reg_state.params, hold.inputs, tableau=tab)))
        summary["regularized_params"] = reg_state.params
    summary["baseline_params"] = base_state.params
    return {"trajectories": traj_table, "nfe_history": hist_table}, summary


# --------------------------------------------------------------------------
# nfe-grid (which solver order needs small steps for which trajectory degree)

def polynomial_dynamics(degree: int):
    """Time-only dynamics whose exact solution is sum_{i<=degree} t^i/i!.

    The dynamics is p'(t); all solution derivatives up to ``degree`` are
    nonzero and of order one, derivatives beyond vanish identically.
    """
    coeffs = [1.0 / math.factorial(i) for i in range(degree)]

    def f(z, t):
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * t + c
        return np.full_like(np.asarray(z, dtype=float), acc) if degree else \
            np.zeros_like(np.asarray(z, dtype=float))

    return f


def nfe_grid(max_degree: int = 7, solver_orders=(2, 3, 5),
             rtol: float = 1.4e-8, atol: float = 1.4e-8):
    """Accepted-step counts for polynomial trajectories of rising degree."""
    table = ResultTable(["solver", "order", "degree", "accepted", "rejected",
                         "nfe"])
    config = SolveConfig(rtol=rtol, atol=atol)
    for m in solver_orders:
        tab = tableau_by_order(m)
        for degree in range(0, max_degree + 1):
            f = polynomial_dynamics(degree)
            z0 = np.array([1.0])
            _, _, stats = adaptive_solve(f, z0, 0.0, 1.0, config, tab)
            table.add(tab.name, m, degree, stats.accepted, stats.rejected,
                      stats.nfe)
    summary = {}
    for m in solver_orders:
        rows = [r for r in table.rows if r[1] == m]
        accepted = {r[2]: r[3] for r in rows}
        jumps = {k: accepted[k] / max(accepted[k - 1], 1)
                 for k in range(1, max_degree + 1)}
        summary[f"largest_jump_order_{m}"] = max(jumps, key=jumps.get)
    return {"grid": table}, summary


# --------------------------------------------------------------------------
# lambda sweeps and the order study

def _final_metrics(params: dict, batch: Batch, reg_order: int,
                   solver_orders) -> dict:
    """Post-training evaluation: loss, adaptive regularizer, NFE per solver."""
    base_loss = ("cross_entropy" if batch.kind == "classification" else "mse")
    spec = RegularizedObjective(lam=0.0, regularizer="none",
                                base_loss=base_loss)
    loss, _ = objective(params, batch, spec)
    out = {"loss": loss}
    out["reg"] = measure_reg(params, batch.inputs, reg_order)
    for m in solver_orders:
        nfe = measure_nfe(params, batch.inputs,
                          tableau=builtin_tableaus()[SOLVER_BY_ORDER[m]])
        out[f"nfe_{m}"] = float(np.mean(nfe))
    return out


def sweep_lambda(reg_order: int = 2, solver_orders=(2, 3, 5),
                 lambdas=None, task: str = "toy_map", seed: int = 0,
                 epochs: int = SWEEP_EPOCHS, hidden: int = 32,
                 lr_steps=SWEEP_LR_STEPS, regularizer: str = "taylor"):
    """Train across a lambda grid; report loss / regularizer / NFE per run.

    Failed trainings are recorded (status column) and the sweep continues.
    """
    if lambdas is None:
        lambdas = lambda_grid(*DEFAULT_LAMBDAS)
    batch = make_task(task)
    base_loss = ("cross_entropy" if batch.kind == "classification" else "mse")
    schedule = TrainSchedule(epochs=epochs, lr_steps=tuple(lr_steps),
                             eval_every=epochs)
    cols = ["lambda", "status", "final_loss", "final_reg"]
    cols += [f"final_nfe_order_{m}" for m in solver_orders]
    table = ResultTable(cols)
    runs = []
    for lam in lambdas:
        # lam == 0 runs the plain-baseline code path (same as fit_toy's)
        spec = RegularizedObjective(
            lam=float(lam), reg_order=reg_order,
            regularizer=regularizer if lam > 0 else "none",
            base_loss=base_loss)
        try:
            state, _ = train(batch, spec, schedule, seed, hidden=hidden)
            m = _final_metrics(state.params, batch, reg_order, solver_orders)
            table.add(float(lam), "ok", m["loss"], m["reg"],
                      *[m[f"nfe_{s}"] for s in solver_orders])
            runs.append({"lambda": float(lam), **m, "params": state.params})
        except (TrainingError, DivergenceError, OdejetError) as e:
            table.add(float(lam), f"failed:{type(e).__name__}",
                      float("nan"), float("nan"),
                      *[float("nan")] * len(solver_orders))
    summary = {"reg_order": reg_order, "task": task, "seed": seed,
               "n_ok": len(runs)}
    for m in solver_orders:
        pairs = [(r["reg"], r[f"nfe_{m}"]) for r in runs
                 if np.isfinite(r[f"nfe_{m}"])]
        if len(pairs) >= 3:
            summary[f"spearman_reg_nfe_order_{m}"] = spearman(
                [p[0] for p in pairs], [p[1] for p in pairs])
    summary["runs"] = runs
    return {"pareto": table}, summary


def order_study(solver_orders=(2, 3, 5), reg_orders=(2, 3, 4, 5),
                lambdas=None, task: str = "toy_map", seed: int = 0,
                epochs: int = SWEEP_EPOCHS, hidden: int = 32,
                knee_factor: float = 1.25):
    """Sweep each regularization order once; compare frontiers per solver.

    Training depends only on (K, lambda); each trained model is then
    measured with every solver order.  The summary reports, per solver
    order, whether the matching-order frontier weakly dominates the
    others, and which K reaches the lowest NFE at the loss knee
    (loss <= knee_factor * best loss over all runs).
    """
    if lambdas is None:
        lambdas = lambda_grid(*DEFAULT_LAMBDAS)
    tables = {}
    sweeps = {}
    for k in reg_orders:
        t, s = sweep_lambda(reg_order=k, solver_orders=solver_orders,
                            lambdas=lambdas, task=task, seed=seed,
                            epochs=epochs, hidden=hidden)
        tables[f"pareto_k{k}"] = t["pareto"]
        sweeps[k] = s
    summary_table = ResultTable(
        ["solver_order", "best_k_at_knee", "knee_loss",
         "matching_k_weakly_dominates"])
    summary = {"per_solver": {}}
    for m in solver_orders:
        pts = {k: [(r["loss"], r[f"nfe_{m}"]) for r in sweeps[k]["runs"]]
               for k in reg_orders}
        best_loss = min(l for ps in pts.values() for l, _ in ps)
        knee = knee_factor * best_loss
        best_k, best_nfe = None, float("inf")
        for k in reg_orders:
            cand = [n for l, n in pts[k] if l <= knee]
            if cand and min(cand) < best_nfe:
                best_nfe = min(cand)
                best_k = k
        dominates = None
        if m in pts:
            others = [p for k in reg_orders if k != m for p in pts[k]]
            dominates = frontier_weakly_dominates(pts[m], others)
        summary_table.add(m, best_k if best_k is not None else -1, knee,
                          "n/a" if dominates is None else str(dominates))
        summary["per_solver"][m] = {"best_k_at_knee": best_k,
                                    "dominates": dominates,
                                    "points": pts}
    tables["frontier_summary"] = summary_table
    summary["sweeps"] = sweeps
    return tables, summary


# --------------------------------------------------------------------------
# jet cost benchmark

def bench_jet(k_max: int = 8, repetitions: int = 5, dim: int = 4,
              hidden: int = 32, seed: int = 0):
    """Opcount and wall time: series jet vs nested first-order oracle."""
    if k_max > 10:
        raise OdejetError("k_max must be <= 10")
    from .jet import jet as _jet

    rng = RngState(seed)
    params = init_mlp(dim, hidden, rng)
    f = lambda z: dynamics_fn(params)(z, 0.3)
    x0 = rng.normal((dim,))
    table = ResultTable(["k", "jet_opcount", "jet_wall_s",
                         "nested_opcount", "nested_wall_s"])
    for k in range(0, k_max + 1):
        series = [rng.normal((dim,)) for _ in range(k)]
        jc = jet_opcount(f, x0, k, series=series)
        nc = nested_opcount(f, x0, k, series=series)
        t0 = time.perf_counter()
        for _ in range(repetitions):
            if k == 0:
                f(x0)
            else:
                _jet(f, x0, series)
        jt = (time.perf_counter() - t0) / repetitions
        t0 = time.perf_counter()
        for _ in range(repetitions):
            if k == 0:
                f(x0)
            else:
                nested_jet(f, x0, series)
        nt = (time.perf_counter() - t0) / repetitions
        table.add(k, jc, jt, nc, nt)
    jc = table.column("jet_opcount")
    nc = table.column("nested_opcount")
    summary = {
        "max_jet_ratio": max(jc[k] / jc[k - 1] for k in range(2, k_max + 1)),
        "min_nested_ratio": min(nc[k] / nc[k - 1]
                                for k in range(2, k_max + 1)),
        "k1_jet_vs_nested": jc[1] / nc[1],
    }
    return {"bench": table}, summary


# --------------------------------------------------------------------------
# gradient checks

def _fd_grad(fn, params: dict, step: float = 1e-5) -> dict:
    out = {}
    for name, p in params.items():
        g = np.zeros_like(p)
        flat = p.ravel()
        gf = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            vp = fn(params)
            flat[i] = orig - step
            vm = fn(params)
            flat[i] = orig
            gf[i] = (vp - vm) / (2 * step)
        out[name] = g
    return out


def _rel_err(a: dict, b: dict) -> float:
    worst = 0.0
    for name in a:
        x, y = np.asarray(a[name]), np.asarray(b[name])
        denom = max(np.max(np.abs(x)), np.max(np.abs(y)), 1e-8)
        worst = max(worst, float(np.max(np.abs(x - y)) / denom))
    return worst


def gradcheck_suite(seeds=(0, 1), k_list=(1, 2, 3, 4), dim: int = 3,
                    hidden: int = 6, batch_size: int = 4,
                    grid_steps: int = 8, tol: float = 1e-5):
    """Reverse gradients vs central finite differences, per operation."""
    table = ResultTable(["operation", "k", "seed", "rel_err", "tol", "status"])
    all_ok = True

    def check(op_name, k, seed, ad, fd):
        nonlocal all_ok
        err = _rel_err(ad, fd)
        ok = err < tol
        all_ok = all_ok and ok
        table.add(op_name, k, seed, err, tol, "pass" if ok else "FAIL")

    for seed in seeds:
        rng = RngState(seed)
        inputs = rng.uniform((batch_size, dim), -1.0, 1.0)
        targets = inputs + 0.3 * inputs**3
        batch = Batch(inputs, targets)
        params = init_mlp(dim, hidden, rng).as_dict()

        cases = [("objective[mse]", "none", 1, 0.0, None)]
        cases += [("objective[taylor]", "taylor", k, 0.1, None) for k in k_list]
        eps = rng.normal((batch_size, dim))
        cases += [("objective[kinetic]", "kinetic", 1, 0.1, None),
                  ("objective[jacobian]", "jacobian", 1, 0.1, eps)]
        for op_name, kind, k, lam, eps_v in cases:
            spec = RegularizedObjective(lam=lam, reg_order=k,
                                        regularizer=kind,
                                        grid_steps=grid_steps)
            _, ad = objective_grad(params, batch, spec, eps=eps_v)
            fd = _fd_grad(
                lambda p: objective(p, batch, spec, eps=eps_v)[0], params)
            check(op_name, k, seed, {n: ad[n] for n in params}, fd)

        # a bare layer: sum(tanh(W x + b))
        w = rng.normal((hidden, dim))
        b = rng.normal((hidden,))
        x = rng.normal((dim,))

        def layer_loss(p):
            return float(ops.peek(ops.sum_all(ops.tanh(
                ops.add(ops.matvec(p["w"], x), p["b"])))))

        from .tape import Tape, backward

        tape = Tape()
        leaves = {"w": tape.leaf(w, "w"), "b": tape.leaf(b, "b")}
        out = ops.sum_all(ops.tanh(ops.add(ops.matvec(leaves["w"], x),
                                           leaves["b"])))
        ad = backward(tape, out)
        fd = _fd_grad(layer_loss, {"w": w, "b": b})
        check("layer[tanh]", 0, seed, {"w": ad["w"], "b": ad["b"]}, fd)

        # vjp against a finite-difference directional derivative
        mlp = init_mlp(dim, hidden, rng)
        g = lambda z: dynamics_fn(mlp)(z, 0.2)
        z = rng.normal((dim,))
        v = rng.normal((dim,))
        u = rng.normal((dim,))
        pull = vjp(g, z, v)
        h = 1e-5
        dir_fd = (np.asarray(g(z + h * u)) - np.asarray(g(z - h * u))) / (2 * h)
        check("vjp[mlp]", 0, seed, {"d": np.array([float(pull @ u)])},
              {"d": np.array([float(v @ dir_fd)])})

    return {"report": table}, {"ok": all_ok}


# --------------------------------------------------------------------------
# backend benchmark

def bench_backend(sizes=(8, 64, 512), repetitions: int = 20000, seed: int = 0):
    """Micro-benchmark: native kernels vs numpy fallback, op by op."""
    rng = RngState(seed)
    names = available_backends()
    table = ResultTable(["op", "size"] + [f"{n}_us" for n in names]
                        + ["speedup"])
    cases = []
    for n in sizes:
        a = rng.normal((n,))
        b = rng.normal((n,))
        m = rng.normal((max(2, n // 8), n))
        cases += [("add", n, ("add", (a, b))),
                  ("mul", n, ("mul", (a, b))),
                  ("tanh", n, ("tanh", (a,))),
                  ("matvec", n, ("matvec", (m, a))),
                  ("sum_all", n, ("sum_all", (a,)))]
    for op, n, (kname, args) in cases:
        times = []
        for backend in names:
            K = get_backend(backend)
            fn = getattr(K, kname)
            fn(*args)
            t0 = time.perf_counter()
            for _ in range(repetitions):
                fn(*args)
            times.append((time.perf_counter() - t0) / repetitions * 1e6)
        speedup = times[0] / times[-1] if len(times) > 1 else 1.0
        table.add(op, n, *[round(t, 4) for t in times], round(speedup, 3))
    return {"backend": table}, {"backends": names}
