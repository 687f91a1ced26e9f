"""Problem configuration: a strict JSON document describing one instance.

Example (the shipped default)::

    {
      "distribution": {"kind": "uniform", "lo": 4, "hi": 6},
      "satisfaction": {"z1": 0.5, "z2": 3},
      "revenue": {"q1": 0.5},
      "market": {"p": 10},
      "solver": {"alpha0": "search", "u_bar": "auto", "u_init": 0.5, ...},
      "verify": {"ir_tol": 1e-6, ...},
      "output_dir": "out",
      "snapshot_iters": [0, 1, 10, 50, 100, 300, 1000, 10000]
    }

Unknown keys are errors.  Error messages carry the line of the offending key.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .econ_model import (MarketParams, Models, RevenueModel, SatisfactionModel, TypeDistribution,
                         make_custom, make_grid, make_uniform, validate_assumptions)
from .errors import ConfigError, MechanismError
from .solver import GammaSchedule, SolverConfig
from .verifier import VerifyThresholds

SEARCH = "search"
AUTO = "auto"


@dataclass(frozen=True)
class ProblemConfig:
    dist: TypeDistribution
    models: Models
    solver: SolverConfig
    search_alpha0: bool
    search_interval: tuple[float, float]
    thresholds: VerifyThresholds
    output_dir: str = "out"
    engine: str = AUTO
    raw: dict = field(default_factory=dict, repr=False, compare=False)


def default_document() -> dict:
    """The worked example: uniform types on [4, 6], p = 10, z1 = q1 = 0.5, z2 = 3."""
    return {
        "distribution": {"kind": "uniform", "lo": 4.0, "hi": 6.0},
        "satisfaction": {"z1": 0.5, "z2": 3.0},
        "revenue": {"q1": 0.5},
        "market": {"p": 10.0},
        "solver": {
            "alpha0": SEARCH,
            "search_interval": [0.0, 9.0],
            "u_bar": AUTO,
            "u_init": 0.5,
            "gamma0": 0.01,
            "gamma_schedule": "constant",
            "max_iters": 200000,
            "tol_u": 1e-5,
            "n_grid": 201,
            "engine": AUTO,
        },
        "verify": {
            "ir_tol": 1e-6,
            "binding_tol": 1e-3,
            "ic_steps": 1,
            "envelope_tol": 1e-3,
            "profit_rel_tol": 1e-3,
        },
        "output_dir": "out",
        "snapshot_iters": [0, 1, 10, 50, 100, 300, 1000, 10000],
    }


class _Reader:
    """Strict accessor for one JSON object, reporting source lines on error."""

    def __init__(self, obj, path: tuple[str, ...], text: str):
        self.path, self.text = path, text
        if not isinstance(obj, dict):
            raise ConfigError(self._where(path) + f"'{'.'.join(path) or '<root>'}' must be an object")
        self.obj = obj
        self.seen = set()

    def _where(self, path) -> str:
        line = _line_of(self.text, path)
        return f"line {line}: " if line else ""

    def fail(self, key, msg):
        raise ConfigError(self._where(self.path + (key,)) + f"{'.'.join(self.path + (key,))}: {msg}")

    def get(self, key, default=None, required=False):
        self.seen.add(key)
        if key not in self.obj:
            if required:
                self.fail(key, "missing required key")
            return default
        return self.obj[key]

    def number(self, key, default=None, required=False, integer=False):
        val = self.get(key, default, required)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.fail(key, f"expected a number, got {val!r}")
        if integer:
            if int(val) != val:
                self.fail(key, f"expected an integer, got {val!r}")
            return int(val)
        if not math.isfinite(val):
            self.fail(key, "must be finite")
        return float(val)

    def child(self, key, required=True):
        return _Reader(self.get(key, {}, required), self.path + (key,), self.text)

    def finish(self):
        extra = sorted(set(self.obj) - self.seen)
        if extra:
            self.fail(extra[0], "unknown key")


def _line_of(text: str, path) -> int | None:
    """Best-effort line number of the last key in ``path`` (searched in order)."""
    pos = 0
    for key in path:
        hit = text.find(f'"{key}"', pos)
        if hit < 0:
            return None
        pos = hit + 1
    return text.count("\n", 0, pos) + 1


def parse_config(doc: dict, text: str = "") -> ProblemConfig:
    root = _Reader(doc, (), text)

    d = root.child("distribution")
    kind = d.get("kind", required=True)
    try:
        if kind == "uniform":
            dist = make_uniform(d.number("lo", required=True), d.number("hi", required=True))
        elif kind == "custom":
            theta = d.get("theta", required=True)
            density = d.get("density", required=True)
            cdf = d.get("cdf")
            dist = make_custom(theta, density, cdf)
        else:
            d.fail("kind", f"expected 'uniform' or 'custom', got {kind!r}")
    except (MechanismError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        d.fail("kind", str(exc))
    d.finish()

    s = root.child("satisfaction")
    r = root.child("revenue")
    m = root.child("market")
    try:
        models = Models(SatisfactionModel(s.number("z1", required=True), s.number("z2", required=True)),
                        RevenueModel(r.number("q1", required=True)),
                        MarketParams(m.number("p", required=True)))
    except MechanismError as exc:
        if isinstance(exc, ConfigError):
            raise
        root.fail("satisfaction", str(exc))
    s.finish()
    r.finish()
    m.finish()
    p = models.p

    sv = root.child("solver")
    alpha0 = sv.get("alpha0", SEARCH)
    search = alpha0 == SEARCH
    if not search:
        alpha0 = sv.number("alpha0")
        if not 0 <= alpha0 < p:
            sv.fail("alpha0", f"must satisfy 0 <= alpha0 < p = {p}, got {alpha0}")
    interval = sv.get("search_interval", [0.0, 0.9 * p])
    if (not isinstance(interval, list) or len(interval) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in interval)
            or not 0 <= interval[0] <= interval[1] < p):
        sv.fail("search_interval", f"expected [lo, hi] with 0 <= lo <= hi < p = {p}")
    u_bar = sv.get("u_bar", AUTO)
    if u_bar != AUTO:
        u_bar = sv.number("u_bar")
        if not u_bar > 0:
            sv.fail("u_bar", "must be positive or 'auto'")
    else:
        u_bar = None
    n_grid = sv.number("n_grid", 201, integer=True)
    if n_grid < 3:
        sv.fail("n_grid", "must be at least 3")
    u_init = sv.get("u_init", 0.5)
    if isinstance(u_init, list):
        if len(u_init) != n_grid or not all(isinstance(v, (int, float)) for v in u_init):
            sv.fail("u_init", f"per-node initial control needs {n_grid} numbers")
        if min(u_init) < 0:
            sv.fail("u_init", "initial control must be nonnegative")
        u_init = tuple(float(v) for v in u_init)
    else:
        u_init = sv.number("u_init", 0.5)
        if u_init < 0:
            sv.fail("u_init", "initial control must be nonnegative")
    gamma0 = sv.number("gamma0", 0.01)
    if not gamma0 > 0:
        sv.fail("gamma0", "must be positive")
    sched_name = sv.get("gamma_schedule", "constant")
    try:
        gamma_schedule = GammaSchedule(sched_name)
    except ValueError:
        sv.fail("gamma_schedule", f"expected 'constant' or 'diminishing', got {sched_name!r}")
    max_iters = sv.number("max_iters", 200000, integer=True)
    if max_iters < 1:
        sv.fail("max_iters", "must be at least 1")
    tol_u = sv.number("tol_u", 1e-5)
    if not tol_u > 0:
        sv.fail("tol_u", "must be positive")
    engine = sv.get("engine", AUTO)
    if engine not in (AUTO, "numpy", "compiled"):
        sv.fail("engine", f"expected 'auto', 'numpy' or 'compiled', got {engine!r}")
    sv.finish()

    snaps = root.get("snapshot_iters", [0, 1, 10, 50, 100, 300, 1000, 10000])
    if not isinstance(snaps, list) or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0
                                              for v in snaps):
        root.fail("snapshot_iters", "expected a list of nonnegative integers")

    vr = root.child("verify", required=False)
    defaults = VerifyThresholds()
    thresholds = VerifyThresholds(**{
        f.name: vr.number(f.name, getattr(defaults, f.name), integer=f.name == "ic_steps")
        for f in fields(VerifyThresholds)})
    vr.finish()

    output_dir = root.get("output_dir", "out")
    if not isinstance(output_dir, str):
        root.fail("output_dir", "expected a string")
    root.finish()

    solver = SolverConfig(
        alpha0=0.0 if search else alpha0, u_bar=u_bar, u_init=u_init, gamma0=gamma0,
        gamma_schedule=gamma_schedule, max_iters=max_iters, tol_u=tol_u, n_grid=n_grid,
        snapshot_iters=tuple(snaps))

    problems = validate_assumptions(dist, models.satisfaction, models.revenue, make_grid(dist, n_grid))
    if problems:
        raise ConfigError("model assumptions violated: " + "; ".join(problems))
    return ProblemConfig(dist, models, solver, search, (float(interval[0]), float(interval[1])),
                         thresholds, output_dir, engine, raw=doc)


def load_config(path) -> ProblemConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    return parse_config(doc, text)


def default_config() -> ProblemConfig:
    doc = default_document()
    return parse_config(doc, json.dumps(doc, indent=2))
