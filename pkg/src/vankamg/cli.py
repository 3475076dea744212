"""Command-line entry points: ``lfa-table``, ``solve``, ``sweep`` and ``paradiag``.

Every command writes CSV (to ``--out`` or stdout) preceded by ``#`` manifest
lines.  Exit codes: 0 finished (also for non-converged sweeps), 1 usage
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np
import scipy.sparse.linalg as spla

from . import __version__
from .errors import ConfigurationError, VankaError
from .grid import Grid2D, GridFunction, Shift, parse_step
from .lfa import LFAConfig, optimize_omega, smoothing_factor, two_grid_factors
from .multigrid import MultigridConfig, build_hierarchy, solve
from .paradiag import (
    BACKWARD_HEAT,
    HEAT_BVM,
    HELMHOLTZ,
    TimeDiscretization,
    all_at_once_apply,
    all_at_once_matrix,
    build_B,
    manufactured_problem,
    paradiag_solve,
    time_shifts,
)
from .smoothers import JACOBI, VANKA, SmootherConfig

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

DEFAULT_OMEGA = {VANKA: 24 / 25, JACOBI: 4 / 5}
SCHEMES = {"heat-bvm": HEAT_BVM, "heat": HEAT_BVM, "backward-heat": BACKWARD_HEAT, "helmholtz": HELMHOLTZ}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.15g}"
    return str(value)


def _write_csv(args, header, rows) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {"command": args.command, "parameters": params, "version": __version__}
    digest = hashlib.sha256(json.dumps(manifest, sort_keys=True, default=str).encode()).hexdigest()
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    buf = io.StringIO()
    buf.write(f"# vankamg {__version__} {args.command} manifest-sha256={digest}\n")
    buf.write(f"# timestamp={stamp} out={args.out}\n")
    buf.write(f"# parameters={json.dumps(params, sort_keys=True, default=str)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _summary(args, text: str) -> None:
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    print(text, file=stream)


def _N(step: str) -> int:
    try:
        return parse_step(step)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from exc


def _time_disc(scheme: str, tau_N: int, beta: float) -> TimeDiscretization:
    return TimeDiscretization(SCHEMES[scheme], tau_N, 1.0 / tau_N, beta)


def _smoother(kind: str, omega: float | None, omega_im: float = 0.0) -> SmootherConfig:
    re = DEFAULT_OMEGA[kind] if omega is None else omega
    return SmootherConfig(kind, complex(re, omega_im))


def _mg_config(args, smoother: SmootherConfig) -> MultigridConfig:
    return MultigridConfig(
        cycle=args.cycle,
        nu1=args.nu1,
        nu2=args.nu2,
        h0=1.0 / _N(args.h0),
        tol=args.tol,
        max_iter=args.max_iter,
        smoother=smoother,
    )


def _random_rhs(grid: Grid2D, seed: int) -> GridFunction:
    return GridFunction(grid, np.random.default_rng(seed).standard_normal(grid.shape))


def _sweep_shifts(example: str, N: int, tau_N: int, beta: float) -> list[Shift]:
    if SCHEMES[example] == HELMHOLTZ:
        return time_shifts(TimeDiscretization(HELMHOLTZ, 128, 1.0 / N), 1.0 / N)
    return time_shifts(_time_disc(example, tau_N, beta))


def cmd_lfa_table(args) -> int:
    N = _N(args.h)
    tau_N = _N(args.tau) if args.tau else N
    h = 1.0 / N
    shifts = time_shifts(_time_disc(args.scheme, tau_N, args.beta))
    if not 1 <= args.shift_index <= len(shifts):
        raise UsageError(f"--shift-index must lie in 1..{len(shifts)}")
    shift = shifts[args.shift_index - 1]
    lfa = LFAConfig(samples_per_dim=args.samples)
    rows = []
    for kind in args.smoothers:
        w_opt, _ = optimize_omega(shift, h, kind, "rho1", lfa)
        cfg = SmootherConfig(kind, w_opt)
        mu = smoothing_factor(shift, h, cfg, lfa).mu
        rhos = two_grid_factors(shift, h, cfg, range(1, args.nu_max + 1), lfa)
        rows.append([kind, w_opt, mu, *rhos])
    header = ["smoother", "omega_opt", "mu_opt", *[f"rho_{k}" for k in range(1, args.nu_max + 1)]]
    _write_csv(args, header, rows)
    _summary(args, f"lambda={shift.lam:.6g} h=1/{N}: " + "; ".join(
        f"{r[0]} omega={r[1]:.3f} mu={r[2]:.3f}" for r in rows))
    return EXIT_OK


def cmd_solve(args) -> int:
    N = _N(args.h)
    if args.shift_index is not None:
        if not args.scheme:
            raise UsageError("--shift-index needs --scheme")
        tau_N = _N(args.tau) if args.tau else N
        shifts = _sweep_shifts(args.scheme, N, tau_N, args.beta)
        if not 1 <= args.shift_index <= len(shifts):
            raise UsageError(f"--shift-index must lie in 1..{len(shifts)}")
        shift = shifts[args.shift_index - 1]
    else:
        shift = Shift(complex(args.lambda_re, args.lambda_im))
    cfg = _mg_config(args, _smoother(args.smoother, args.omega, args.omega_im))
    grid = Grid2D(N)
    rep = solve(_random_rhs(grid, args.seed), shift, cfg)
    r0 = rep.residual_history[0]
    rows = [[k, r, r / r0 if r0 else 0.0] for k, r in enumerate(rep.residual_history)]
    _write_csv(args, ["iteration", "residual", "relative_residual"], rows)
    _summary(
        args,
        f"iterations={rep.iterations} rate={rep.rate:.4f} converged={_fmt(rep.converged)} "
        f"lambda={shift.lam:.6g} wall_time={rep.wall_time:.3f}s",
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    N = _N(args.h)
    tau_N = _N(args.tau) if args.tau else N
    grid = Grid2D(N)
    shifts = _sweep_shifts(args.example, N, tau_N, args.beta)
    b = _random_rhs(grid, args.seed)
    tasks = [(s, kind) for kind in args.smoothers for s in shifts]

    def run(task):
        shift, kind = task
        cfg = _mg_config(args, _smoother(kind, None))
        return solve(b, shift, cfg, build_hierarchy(grid, shift, cfg))

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(run, tasks))
    else:
        reports = [run(t) for t in tasks]
    rows = [
        [s.index, s.lam.real, s.lam.imag, kind, rep.iterations, rep.rate, rep.converged]
        for (s, kind), rep in zip(tasks, reports)
    ]
    header = ["shift_index", "lambda_re", "lambda_im", "smoother", "iterations", "rate", "converged"]
    _write_csv(args, header, rows)
    for kind in args.smoothers:
        sel = [rep for (s, k), rep in zip(tasks, reports) if k == kind]
        rates = [r.rate for r in sel]
        _summary(
            args,
            f"{kind}: shifts={len(sel)} rate min={min(rates):.4f} max={max(rates):.4f} "
            f"iterations max={max(r.iterations for r in sel)} "
            f"converged={sum(r.converged for r in sel)}/{len(sel)}",
        )
    return EXIT_OK


def cmd_paradiag(args) -> int:
    N = _N(args.h)
    tau_N = _N(args.tau) if args.tau else N
    grid = Grid2D(N)
    td = _time_disc(args.scheme, tau_N, args.beta)
    cfg = _mg_config(args, _smoother(args.smoother, args.omega))
    _, f = manufactured_problem(td, grid)
    t0 = time.perf_counter()
    res = paradiag_solve(f, td, grid, cfg, jobs=args.jobs)
    wall = time.perf_counter() - t0
    B = build_B(td)
    u = res.stack()
    rel = float(np.linalg.norm(all_at_once_apply(B, u, grid.h) - f) / np.linalg.norm(f))
    rows = [
        [s.index, s.lam.real, s.lam.imag, rep.iterations, rep.rate, rep.converged]
        for s, rep in zip(res.diagonalization.shifts(), res.reports)
    ]
    _write_csv(args, ["shift_index", "lambda_re", "lambda_im", "iterations", "rate", "converged"], rows)
    its = [r.iterations for r in res.reports]
    text = (
        f"all_at_once_relative_residual={rel:.3e} shifts={len(its)} iterations min={min(its)} "
        f"max={max(its)} cond_V={res.diagonalization.cond_estimate:.3e} wall_time={wall:.3f}s"
    )
    if args.dense_check:
        size = td.dim * grid.size
        if size > args.dense_limit:
            raise UsageError(f"dense check limited to {args.dense_limit} unknowns, problem has {size}")
        direct = spla.spsolve(all_at_once_matrix(B, grid).tocsc(), f.ravel().astype(complex))
        err = np.linalg.norm(u.ravel() - direct) / np.linalg.norm(direct)
        text += f" dense_relative_error={err:.3e}"
    _summary(args, text)
    return EXIT_OK if res.converged and math.isfinite(rel) else EXIT_NUMERIC


def _smoother_list(text: str) -> list[str]:
    kinds = [k.strip().lower() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in (VANKA, JACOBI)]
    if bad or not kinds:
        raise argparse.ArgumentTypeError(f"smoothers must be from vanka,jacobi; got {text!r}")
    return kinds


def _add_mg_options(p) -> None:
    p.add_argument("--cycle", choices=["v", "w", "V", "W"], default="w")
    p.add_argument("--nu1", type=int, default=1)
    p.add_argument("--nu2", type=int, default=0)
    p.add_argument("--h0", default="1/8", help="coarsest mesh step")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vankamg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("lfa-table", help="LFA smoothing and two-grid factors with optimized omega")
    p.add_argument("--h", default="1/256")
    p.add_argument("--tau", default=None, help="time step (default: h)")
    p.add_argument("--scheme", choices=["heat-bvm", "backward-heat"], default="heat-bvm")
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--shift-index", type=int, default=1)
    p.add_argument("--smoothers", type=_smoother_list, default=[JACOBI, VANKA])
    p.add_argument("--nu-max", type=int, default=4)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_lfa_table)

    p = sub.add_parser("solve", help="one multigrid solve with a random right-hand side")
    p.add_argument("--h", default="1/64")
    p.add_argument("--lambda-re", type=float, default=0.0)
    p.add_argument("--lambda-im", type=float, default=0.0)
    p.add_argument("--shift-index", type=int, default=None)
    p.add_argument("--scheme", choices=sorted(SCHEMES), default=None)
    p.add_argument("--tau", default=None)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--smoother", choices=[VANKA, JACOBI], default=VANKA)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--omega-im", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_mg_options(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="one solve per shift for each smoother")
    p.add_argument("--example", choices=["heat", "backward-heat", "helmholtz"], required=True)
    p.add_argument("--h", default="1/64")
    p.add_argument("--tau", default=None)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--smoothers", type=_smoother_list, default=[VANKA, JACOBI])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    _add_mg_options(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("paradiag", help="all-at-once solve on a manufactured problem")
    p.add_argument("--scheme", choices=["heat-bvm", "backward-heat"], required=True)
    p.add_argument("--h", default="1/32")
    p.add_argument("--tau", default=None)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--smoother", choices=[VANKA, JACOBI], default=VANKA)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dense-check", action="store_true", help="compare against a sparse direct solve of the all-at-once system")
    p.add_argument("--dense-limit", type=int, default=200_000)
    _add_mg_options(p)
    p.set_defaults(func=cmd_paradiag)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"vankamg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VankaError as exc:
        print(f"vankamg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
