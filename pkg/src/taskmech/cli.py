"""Command line entry point: ``taskmech solve | verify | sweep-alpha0``.

Exit codes: 0 ok, 1 bad input, 2 solver did not converge, 3 verification failed.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import datetime as _dt
import json
import logging
import random
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import ProblemConfig, load_config
from .econ_model import TypeGrid
from .errors import MaxItersExceeded, MechanismError
from .mechanism import RewardSchedule, expected_profit
from .solver import optimize_alpha0, solve
from .verifier import utility_matrix, verify

log = logging.getLogger("taskmech")

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_VERIFY = 0, 1, 2, 3

_RNG_ENTRY_POINTS = ("default_rng", "RandomState", "Generator", "seed", "random", "rand", "randn",
                     "randint", "uniform", "normal", "choice", "shuffle", "permutation")


class InputError(Exception):
    pass


@contextlib.contextmanager
def forbid_rng():
    """Make every common RNG entry point raise, and check the global states are untouched."""
    np_state = np.random.get_state()
    py_state = random.getstate()

    def trap(name):
        def _raise(*args, **kwargs):
            raise RuntimeError(f"random number generator used ({name}) under --seedless")
        return _raise

    with contextlib.ExitStack() as stack:
        for mod, prefix in ((np.random, "numpy.random"), (random, "random")):
            for name in _RNG_ENTRY_POINTS:
                if hasattr(mod, name):
                    orig = getattr(mod, name)
                    setattr(mod, name, trap(f"{prefix}.{name}"))
                    stack.callback(setattr, mod, name, orig)
        yield
    after = np.random.get_state()
    if not all(np.array_equal(a, b) for a, b in zip(np_state, after)) or random.getstate() != py_state:
        raise RuntimeError("global RNG state changed under --seedless")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_schedule(path, cfg: ProblemConfig) -> RewardSchedule:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read schedule: {exc}") from None
    if not rows or rows[0] != ["theta", "alpha", "beta"]:
        raise InputError(f"{path}: line 1: expected header theta,alpha,beta")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 3 or len(data) < 3:
        raise InputError(f"{path}: need at least 3 rows of theta,alpha,beta")
    if not np.all(np.isfinite(data)):
        raise InputError(f"{path}: non-finite entry")
    theta = data[:, 0]
    lo, hi = cfg.dist.theta_lo, cfg.dist.theta_hi
    scale = max(1.0, abs(hi))
    if abs(theta[0] - lo) > 1e-9 * scale or abs(theta[-1] - hi) > 1e-9 * scale:
        raise InputError(f"{path}: theta must run from {lo} to {hi}")
    try:
        grid = TypeGrid(theta)
    except MechanismError as exc:
        raise InputError(f"{path}: {exc}") from None
    return RewardSchedule(grid, data[:, 1], data[:, 2])


def _write_solution(out: Path, schedule, trace):
    write_csv(out / "schedule.csv", ("theta", "alpha", "beta"),
              zip(schedule.theta, schedule.alpha, schedule.beta))
    write_csv(out / "trace.csv", ("iter", "objective", "du_sup"),
              zip(range(trace.iterations), trace.objective, trace.du_sup))
    write_csv(out / "snapshots.csv", ("iter", "theta", "alpha"),
              ((it, t, a) for it in sorted(trace.snapshots)
               for t, a in zip(schedule.theta, trace.snapshots[it])))


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _run_solver(cfg: ProblemConfig, out: Path, write_sweep: bool):
    started = _now()
    search = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MaxItersExceeded)
        if cfg.search_alpha0:
            log.info("searching alpha0 over [%g, %g]", *cfg.search_interval)
            search = optimize_alpha0(cfg.solver, cfg.models, cfg.dist, cfg.search_interval)
            schedule, trace, alpha0 = search.schedule, search.trace, search.alpha0
        else:
            schedule, trace = solve(cfg.solver, cfg.models, cfg.dist, engine=cfg.engine)
            alpha0 = cfg.solver.alpha0

    out.mkdir(parents=True, exist_ok=True)
    _write_solution(out, schedule, trace)
    if write_sweep:
        write_csv(out / "sweep.csv", ("alpha0", "profit", "converged"), search.evaluations)
    profit = expected_profit(schedule, cfg.models, cfg.dist)
    report = verify(schedule, cfg.models, cfg.dist, cfg.thresholds)
    manifest = {
        "tool": "taskmech",
        "version": __version__,
        "started": started,
        "finished": _now(),
        "config": cfg.raw,
        "alpha0": alpha0,
        "converged": bool(trace.converged),
        "iterations": trace.iterations,
        "u_bar": trace.u_bar,
        "profit_direct": profit.direct,
        "profit_virtual": profit.virtual,
        "verification": report.to_dict(),
    }
    if search is not None:
        manifest["alpha0_evaluations"] = len(search.evaluations)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    log.info("alpha0=%s iterations=%d converged=%s profit=%.6f",
             repr(alpha0), trace.iterations, trace.converged, profit.direct)
    if not trace.converged:
        print(f"solver did not converge within {cfg.solver.max_iters} iterations", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    return _run_solver(cfg, _out_dir(args, cfg), write_sweep=False)


def cmd_sweep_alpha0(args) -> int:
    cfg = load_config(args.config)
    if not cfg.search_alpha0:
        raise InputError('sweep-alpha0 needs "solver": {"alpha0": "search"} in the config')
    return _run_solver(cfg, _out_dir(args, cfg), write_sweep=True)


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    schedule = read_schedule(args.schedule, cfg)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    matrix = utility_matrix(schedule, cfg.models)
    theta = schedule.theta
    write_csv(out / "utility_matrix.csv", ("theta", "theta_hat", "utility"),
              ((theta[i], theta[j], matrix.values[i, j])
               for i in range(len(theta)) for j in range(len(theta))))
    report = verify(schedule, cfg.models, cfg.dist, cfg.thresholds)
    (out / "verification.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    if report.passed:
        log.info("verification passed")
        return EXIT_OK
    print("verification failed: " + ", ".join(report.failures), file=sys.stderr)
    return EXIT_VERIFY


def _out_dir(args, cfg: ProblemConfig) -> Path:
    return Path(args.out if args.out is not None else cfg.output_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taskmech", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")
    common.add_argument("--seedless", action="store_true",
                        help="fail if any random number generator is touched")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common], help="compute the optimal schedule")
    p.add_argument("config")
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("verify", parents=[common], help="check IR/IC of a schedule")
    p.add_argument("config")
    p.add_argument("schedule")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("sweep-alpha0", parents=[common], help="search alpha0 and log every candidate")
    p.add_argument("config")
    p.set_defaults(func=cmd_sweep_alpha0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    guard = forbid_rng() if args.seedless else contextlib.nullcontext()
    try:
        with guard:
            return args.func(args)
    except (InputError, MechanismError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
