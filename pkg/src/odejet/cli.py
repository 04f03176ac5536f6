"""Command-line front-end for the experiment suite.

Every command takes ``--seed``, ``--outdir``, and ``--format {csv,json}``,
writes its tables plus a ``manifest.json`` capturing the fully resolved
configuration, and can be reproduced bit-exactly with
``odejet replay <manifest.json>`` (timestamps excepted).

Exit codes: 0 success, 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__, experiments, ops
from .backend import backend_name
from .results import write_manifest, read_manifest
from .svgplot import line_chart


def _common(p: argparse.ArgumentParser, default_outdir: str) -> None:
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--outdir", type=Path, default=Path(default_outdir),
                   help="output directory (created if missing)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="table file format")


def _emit(args, command: str, tables: dict, extra_outputs=(),
          summary_rows=None) -> list[str]:
    args.outdir.mkdir(parents=True, exist_ok=True)
    outputs = list(extra_outputs)
    for name, table in tables.items():
        outputs.append(table.write(args.outdir / name, args.format))
    if summary_rows:
        outputs.append(summary_rows.write(args.outdir / "summary",
                                          args.format))
    return outputs


def _finish(args, command: str, config: dict, outputs: list[str],
            started: float) -> None:
    write_manifest(args.outdir, command, args.seed, config, outputs, started)
    print(f"[{command}] wrote {', '.join(sorted(outputs))} + manifest.json "
          f"-> {args.outdir}")


def _summary_table(pairs):
    from .results import ResultTable

    t = ResultTable(["metric", "value"])
    for k, v in pairs:
        t.add(k, v)
    return t


# --------------------------------------------------------------------------
# commands

def cmd_fit_toy(args) -> int:
    started = time.time()
    config = {"lam": args.lam, "reg_order": args.reg_order,
              "solver": args.solver, "epochs": args.epochs,
              "hidden": args.hidden, "format": args.format,
              "svg": args.svg}
    tables, summary = experiments.fit_toy(
        lam=args.lam, reg_order=args.reg_order, solver=args.solver,
        epochs=args.epochs, seed=args.seed, hidden=args.hidden)
    rows = [(k, v) for k, v in summary.items() if isinstance(v, (int, float))]
    extra = []
    if args.svg:
        traj = tables["trajectories"]
        series = []
        for variant in ("baseline", "regularized"):
            for ex in sorted({r[1] for r in traj.rows if r[0] == variant}):
                pts = [(r[2], r[3]) for r in traj.rows
                       if r[0] == variant and r[1] == ex]
                series.append(([p[0] for p in pts], [p[1] for p in pts],
                               variant if ex == 0 else ""))
        if series:
            line_chart(series, args.outdir / "trajectories.svg",
                       title="flow-map trajectories", xlabel="t", ylabel="z")
            extra.append("trajectories.svg")
    outputs = _emit(args, "fit-toy", tables, extra, _summary_table(rows))
    _finish(args, "fit-toy", config, outputs, started)
    return 0


def cmd_nfe_grid(args) -> int:
    started = time.time()
    config = {"max_degree": args.max_degree, "orders": args.orders,
              "rtol": args.rtol, "atol": args.atol, "format": args.format}
    tables, summary = experiments.nfe_grid(
        max_degree=args.max_degree, solver_orders=tuple(args.orders),
        rtol=args.rtol, atol=args.atol)
    outputs = _emit(args, "nfe-grid", tables,
                    summary_rows=_summary_table(sorted(summary.items())))
    _finish(args, "nfe-grid", config, outputs, started)
    return 0


def cmd_sweep_lambda(args) -> int:
    started = time.time()
    lambdas = experiments.lambda_grid(args.lam_lo, args.lam_hi,
                                      args.per_decade)
    config = {"reg_order": args.reg_order, "lam_lo": args.lam_lo,
              "lam_hi": args.lam_hi, "per_decade": args.per_decade,
              "task": args.task, "epochs": args.epochs,
              "orders": args.orders, "format": args.format}
    tables, summary = experiments.sweep_lambda(
        reg_order=args.reg_order, solver_orders=tuple(args.orders),
        lambdas=lambdas, task=args.task, seed=args.seed, epochs=args.epochs)
    rows = [(k, v) for k, v in sorted(summary.items())
            if isinstance(v, (int, float))]
    outputs = _emit(args, "sweep-lambda", tables,
                    summary_rows=_summary_table(rows))
    _finish(args, "sweep-lambda", config, outputs, started)
    return 0


def cmd_order_study(args) -> int:
    started = time.time()
    lambdas = experiments.lambda_grid(args.lam_lo, args.lam_hi,
                                      args.per_decade)
    config = {"orders": args.orders, "reg_orders": args.reg_orders,
              "lam_lo": args.lam_lo, "lam_hi": args.lam_hi,
              "per_decade": args.per_decade, "task": args.task,
              "epochs": args.epochs, "format": args.format}
    tables, _ = experiments.order_study(
        solver_orders=tuple(args.orders), reg_orders=tuple(args.reg_orders),
        lambdas=lambdas, task=args.task, seed=args.seed, epochs=args.epochs)
    outputs = _emit(args, "order-study", tables)
    _finish(args, "order-study", config, outputs, started)
    return 0


def cmd_bench_jet(args) -> int:
    started = time.time()
    config = {"k_max": args.k_max, "repetitions": args.repetitions,
              "dim": args.dim, "hidden": args.hidden, "format": args.format}
    tables, summary = experiments.bench_jet(
        k_max=args.k_max, repetitions=args.repetitions, dim=args.dim,
        hidden=args.hidden, seed=args.seed)
    outputs = _emit(args, "bench-jet", tables,
                    summary_rows=_summary_table(sorted(summary.items())))
    _finish(args, "bench-jet", config, outputs, started)
    return 0


def cmd_gradcheck(args) -> int:
    started = time.time()
    if args.corrupt:
        ops._corrupt_vjp = args.corrupt
    try:
        config = {"k_list": args.k_list, "tol": args.tol,
                  "format": args.format}
        tables, summary = experiments.gradcheck_suite(
            seeds=(args.seed, args.seed + 1), k_list=tuple(args.k_list),
            tol=args.tol)
    finally:
        ops._corrupt_vjp = None
    outputs = _emit(args, "gradcheck", tables)
    _finish(args, "gradcheck", config, outputs, started)
    if not summary["ok"]:
        worst = max(tables["report"].rows, key=lambda r: r[3])
        print(f"gradcheck FAILED: worst offender {worst[0]} (k={worst[1]}) "
              f"rel_err={worst[3]:.3e}", file=sys.stderr)
        return 1
    print("gradcheck passed")
    return 0


def cmd_bench_backend(args) -> int:
    started = time.time()
    config = {"sizes": args.sizes, "repetitions": args.repetitions,
              "format": args.format}
    tables, summary = experiments.bench_backend(
        sizes=tuple(args.sizes), repetitions=args.repetitions,
        seed=args.seed)
    outputs = _emit(args, "bench-backend", tables)
    _finish(args, "bench-backend", config, outputs, started)
    print(f"active backend: {backend_name()}; measured: "
          f"{', '.join(summary['backends'])}")
    return 0


def cmd_replay(args) -> int:
    doc = read_manifest(args.manifest)
    command = doc["command"]
    config = doc["config"]
    outdir = args.outdir or Path(args.manifest).parent
    argv = [command, "--seed", str(doc["seed"]), "--outdir", str(outdir)]
    for key, val in config.items():
        flag = "--" + key.replace("_", "-")
        if key in ("format",):
            argv += [flag, str(val)]
        elif isinstance(val, bool):
            if val:
                argv.append(flag)
        elif isinstance(val, (list, tuple)):
            argv.append(flag)
            argv += [str(v) for v in val]
        elif val is None:
            continue
        else:
            argv += [flag, str(val)]
    if doc.get("backend") and doc["backend"] != backend_name():
        print(f"warning: manifest was produced by the {doc['backend']!r} "
              f"backend but {backend_name()!r} is active; bit-exact replay "
              f"is only guaranteed on the original backend", file=sys.stderr)
    return main(argv)


# --------------------------------------------------------------------------
# parser wiring

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="odejet",
        description="train neural ODEs whose trajectories stay cheap for "
                    "adaptive Runge-Kutta solvers; benchmark the series-jet "
                    "engine; emit reproducible experiment tables")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("fit-toy", help="cubic flow-map task, regularized vs "
                                       "baseline")
    _common(q, "out/fit_toy")
    q.add_argument("--lam", type=float, default=0.03,
                   help="regularization weight (0 = baseline only)")
    q.add_argument("--reg-order", type=int, default=3,
                   help="order of the regularized trajectory derivative")
    q.add_argument("--solver", default="dormand_prince54",
                   help="tableau for NFE measurement")
    q.add_argument("--epochs", type=int, default=experiments.TOY_EPOCHS)
    q.add_argument("--hidden", type=int, default=32)
    q.add_argument("--svg", action="store_true",
                   help="also write trajectories.svg")
    q.set_defaults(fn=cmd_fit_toy)

    q = sub.add_parser("nfe-grid", help="accepted steps vs polynomial "
                                        "trajectory degree per solver order")
    _common(q, "out/nfe_grid")
    q.add_argument("--max-degree", type=int, default=7)
    q.add_argument("--orders", type=int, nargs="+", default=[2, 3, 5])
    q.add_argument("--rtol", type=float, default=1.4e-8)
    q.add_argument("--atol", type=float, default=1.4e-8)
    q.set_defaults(fn=cmd_nfe_grid)

    q = sub.add_parser("sweep-lambda", help="loss/regularizer/NFE across a "
                                            "lambda grid")
    _common(q, "out/sweep_lambda")
    q.add_argument("--reg-order", type=int, default=2)
    q.add_argument("--lam-lo", type=float, default=experiments.DEFAULT_LAMBDAS[0])
    q.add_argument("--lam-hi", type=float, default=experiments.DEFAULT_LAMBDAS[1])
    q.add_argument("--per-decade", type=int, default=8)
    q.add_argument("--task", default="toy_map", choices=("toy_map", "spirals"))
    q.add_argument("--epochs", type=int, default=experiments.SWEEP_EPOCHS)
    q.add_argument("--orders", type=int, nargs="+", default=[2, 3, 5],
                   help="solver orders used to measure NFE")
    q.set_defaults(fn=cmd_sweep_lambda)

    q = sub.add_parser("order-study", help="frontier comparison across "
                                           "regularization orders")
    _common(q, "out/order_study")
    q.add_argument("--orders", type=int, nargs="+", default=[2, 3, 5])
    q.add_argument("--reg-orders", type=int, nargs="+", default=[2, 3, 4, 5])
    q.add_argument("--lam-lo", type=float, default=experiments.DEFAULT_LAMBDAS[0])
    q.add_argument("--lam-hi", type=float, default=experiments.DEFAULT_LAMBDAS[1])
    q.add_argument("--per-decade", type=int, default=8)
    q.add_argument("--task", default="toy_map", choices=("toy_map", "spirals"))
    q.add_argument("--epochs", type=int, default=experiments.SWEEP_EPOCHS)
    q.set_defaults(fn=cmd_order_study)

    q = sub.add_parser("bench-jet", help="series jet vs nested-oracle cost "
                                         "scaling")
    _common(q, "out/bench_jet")
    q.add_argument("--k-max", type=int, default=8)
    q.add_argument("--repetitions", type=int, default=5)
    q.add_argument("--dim", type=int, default=4)
    q.add_argument("--hidden", type=int, default=32)
    q.set_defaults(fn=cmd_bench_jet)

    q = sub.add_parser("gradcheck", help="reverse gradients vs central "
                                         "finite differences")
    _common(q, "out/gradcheck")
    q.add_argument("--k-list", type=int, nargs="+", default=[1, 2, 3, 4])
    q.add_argument("--tol", type=float, default=1e-5)
    q.add_argument("--corrupt", help=argparse.SUPPRESS)  # negative-control hook
    q.set_defaults(fn=cmd_gradcheck)

    q = sub.add_parser("bench-backend", help="compiled kernels vs numpy "
                                             "fallback")
    _common(q, "out/bench_backend")
    q.add_argument("--sizes", type=int, nargs="+", default=[8, 64, 512])
    q.add_argument("--repetitions", type=int, default=20000)
    q.set_defaults(fn=cmd_bench_backend)

    q = sub.add_parser("replay", help="re-run a command from its manifest")
    q.add_argument("manifest", type=Path)
    q.add_argument("--outdir", type=Path, default=None)
    q.set_defaults(fn=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
