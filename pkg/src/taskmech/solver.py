"""Gradient projection on the optimal control form of the publisher's problem.

The state is the reward slope ``alpha`` over announced types, the control is
its derivative ``u`` restricted to ``[0, u_bar]``, and the running payoff is
the virtual surplus.  Each iteration integrates the state forward, the
costate backward from ``lam(theta_hi) = 0``, and moves ``u`` against the
costate before clipping it back into the box.

With ``d(lam)/dtheta = +dV/dalpha`` and a zero terminal value, ``lam`` is
minus the functional gradient of the objective with respect to ``u``, so
``u - gamma * lam`` is an ascent step.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .agent import best_participation, participation_slope
from .econ_model import Models, TypeDistribution, TypeGrid, inverse_hazard, make_grid
from .errors import AlphaExceedsCost, MaxItersExceeded, MechanismError
from .mechanism import RewardSchedule, build_schedule, expected_profit

try:
    from . import _fastloop
except ImportError:  # numba missing: fall back to the numpy loop
    _fastloop = None

ALPHA_MARGIN = 1e-6


class GammaSchedule(enum.Enum):
    CONSTANT = "constant"
    DIMINISHING = "diminishing"


@dataclass(frozen=True)
class SolverConfig:
    alpha0: float = 0.0
    u_bar: float | None = None  # None: 10 * (p - alpha0) / (theta_hi - theta_lo)
    u_init: float | tuple = 0.5
    gamma0: float = 0.01
    gamma_schedule: GammaSchedule = GammaSchedule.CONSTANT
    max_iters: int = 200_000
    tol_u: float = 1e-5
    n_grid: int = 201
    snapshot_iters: tuple[int, ...] = (0, 1, 10, 50, 100, 300, 1000, 10_000)

    def gamma(self, i: int) -> float:
        if self.gamma_schedule is GammaSchedule.DIMINISHING:
            return self.gamma0 / (1.0 + i / 100.0)
        return self.gamma0

    def resolved_u_bar(self, p: float, dist: TypeDistribution) -> float:
        if self.u_bar is not None:
            return float(self.u_bar)
        return 10.0 * (p - self.alpha0) / (dist.theta_hi - dist.theta_lo)

    def check(self, p: float):
        if not 0 <= self.alpha0 < p:
            raise MechanismError(f"alpha0 must satisfy 0 <= alpha0 < p={p}, got {self.alpha0}")
        if self.u_bar is not None and not self.u_bar > 0:
            raise MechanismError(f"u_bar must be positive, got {self.u_bar}")
        if not self.gamma0 > 0:
            raise MechanismError(f"gamma0 must be positive, got {self.gamma0}")
        if not self.tol_u > 0:
            raise MechanismError(f"tol_u must be positive, got {self.tol_u}")
        if self.max_iters < 1:
            raise MechanismError("max_iters must be at least 1")
        if self.n_grid < 3:
            raise MechanismError("n_grid must be at least 3")


@dataclass
class SolverState:
    u: np.ndarray
    alpha: np.ndarray
    lam: np.ndarray
    objective: float
    iter: int


@dataclass
class SolveTrace:
    """Per-iteration record; entry ``i`` describes the iterate before update ``i``."""

    objective: np.ndarray
    du_sup: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    converged: bool = False
    u_bar: float = math.nan
    final: SolverState | None = None

    @property
    def iterations(self) -> int:
        return len(self.objective)


def integrate_state(u, alpha0, grid: TypeGrid, p=None, margin=ALPHA_MARGIN):
    """Forward trapezoid integration of d(alpha)/dtheta = u from alpha(theta_lo) = alpha0."""
    u = np.asarray(u, dtype=float)
    steps = 0.5 * grid.spacing * (u[1:] + u[:-1])
    alpha = np.concatenate(([float(alpha0)], alpha0 + np.cumsum(steps)))
    if p is not None and alpha[-1] >= p - margin * p:
        # alpha is nondecreasing, so the top node is the worst case
        k = int(np.argmax(alpha >= p - margin * p))
        raise AlphaExceedsCost(
            f"alpha reaches {alpha[-1]:.6g} >= p={p} (first at theta={grid.nodes[k]:.6g})")
    return alpha


def _dvsp(theta, alpha, f, inv_h, models: Models):
    pi, g = models.satisfaction, models.revenue
    chi = best_participation(pi, models.p, theta, alpha)
    # theta * pi'(chi) - p = -alpha at the agent's optimum
    return f * (g.d1(chi) - pi.d1(chi) * inv_h - alpha) * participation_slope(pi, theta, chi)


def dVsp_dalpha(theta_hat, alpha, models: Models, dist: TypeDistribution):
    """Partial derivative of the virtual surplus with respect to the reward slope."""
    return _dvsp(np.asarray(theta_hat, dtype=float), np.asarray(alpha, dtype=float),
                 dist.density(theta_hat), inverse_hazard(dist, theta_hat), models)


def _backward_costate(rate, grid: TypeGrid):
    steps = 0.5 * grid.spacing * (rate[1:] + rate[:-1])
    lam = np.zeros_like(rate)
    lam[:-1] = -np.cumsum(steps[::-1])[::-1]
    return lam


def integrate_costate(alpha, grid: TypeGrid, models: Models, dist: TypeDistribution):
    """Backward trapezoid integration of d(lam)/dtheta = dV/dalpha with lam(theta_hi) = 0."""
    return _backward_costate(dVsp_dalpha(grid.nodes, alpha, models, dist), grid)


def gradient_projection_step(u, lam, gamma, u_bar):
    return np.clip(np.asarray(u, dtype=float) - gamma * np.asarray(lam, dtype=float), 0.0, u_bar)


class _Problem:
    """Per-grid constants shared by every sweep of one solve."""

    def __init__(self, models: Models, dist: TypeDistribution, grid: TypeGrid):
        self.models, self.grid = models, grid
        self.theta = grid.nodes
        self.f = dist.density(self.theta)
        self.inv_h = inverse_hazard(dist, self.theta)
        # trapezoid weights; a fixed dot product keeps the summation order reproducible
        self.weights = np.full(len(grid), grid.spacing)
        self.weights[[0, -1]] *= 0.5

    def sweep(self, alpha):
        """Objective value and costate for one state trajectory.

        Uses power-family identities so only two powers are evaluated:
        pi'(chi) = (p - alpha) / theta at the agent's optimum,
        pi(x) = x pi'(x) / (1 - z1), g(x) = x g'(x) / (1 - q1) and
        -1 / (theta pi''(chi)) = chi / (z1 (p - alpha)).
        """
        pi, g, p = self.models.satisfaction, self.models.revenue, self.models.p
        theta, f, inv_h = self.theta, self.f, self.inv_h
        gap = p - alpha
        marginal = gap / theta
        chi = pi.inverse_marginal(marginal)
        pi_chi = chi * marginal / (1.0 - pi.z1)
        g1 = g.d1(chi)
        v = (chi * g1 / (1.0 - g.q1) - pi_chi * inv_h + theta * pi_chi - p * chi) * f
        rate = f * (g1 - marginal * inv_h - alpha) * chi / (pi.z1 * gap)
        return float(self.weights @ v), _backward_costate(rate, self.grid)


def objective_of_control(u, alpha0, models: Models, dist: TypeDistribution, grid: TypeGrid) -> float:
    """Trapezoid value of the virtual-surplus objective for a control vector."""
    prob = _Problem(models, dist, grid)
    return prob.sweep(integrate_state(u, alpha0, grid, p=models.p))[0]


def _solve_numpy(prob: _Problem, config: SolverConfig, u, u_bar):
    grid, p = prob.grid, prob.models.p
    snap_at = set(config.snapshot_iters)
    objective, du_sup, u_min, u_max, snaps = [], [], [], [], {}
    best_u, best_obj = u, -math.inf
    converged = False
    for i in range(config.max_iters):
        alpha = integrate_state(u, config.alpha0, grid, p=p)
        obj, lam = prob.sweep(alpha)
        u_next = gradient_projection_step(u, lam, config.gamma(i), u_bar)
        du = float(np.max(np.abs(u_next - u)))

        objective.append(obj)
        du_sup.append(du)
        u_min.append(float(u.min()))
        u_max.append(float(u.max()))
        if i in snap_at:
            snaps[i] = alpha
        if obj > best_obj:
            best_u, best_obj = u, obj
        u = u_next
        if du <= config.tol_u:
            converged = True
            break
    trace = SolveTrace(np.array(objective), np.array(du_sup), np.array(u_min),
                       np.array(u_max), snaps, converged, u_bar)
    return trace, u, best_u, best_obj


def _solve_compiled(prob: _Problem, config: SolverConfig, u, u_bar):
    pi, g = prob.models.satisfaction, prob.models.revenue
    snap_iters = np.array(sorted(i for i in set(config.snapshot_iters) if i >= 0), dtype=np.int64)
    (status, n_iter, objective, du_sup, u_min, u_max, snaps, u, best_u, best_obj) = _fastloop.run(
        prob.theta, prob.f, prob.inv_h, np.array(u, dtype=float), float(config.alpha0),
        float(prob.models.p), float(pi.z1), float(pi.z2), float(g.q1), float(u_bar),
        float(config.gamma0), config.gamma_schedule is GammaSchedule.DIMINISHING,
        int(config.max_iters), float(config.tol_u), ALPHA_MARGIN, snap_iters)
    if status == _fastloop.ALPHA_TOO_LARGE:
        # replay the failing state integration for the error message
        integrate_state(u, config.alpha0, prob.grid, p=prob.models.p)
    trace = SolveTrace(objective, du_sup, u_min, u_max,
                       {int(i): a for i, a in zip(snap_iters, snaps)},
                       status == _fastloop.CONVERGED, u_bar)
    return trace, u, best_u, best_obj


def solve(config: SolverConfig, models: Models, dist: TypeDistribution,
          grid: TypeGrid | None = None, engine: str = "auto") -> tuple[RewardSchedule, SolveTrace]:
    """Run the gradient projection iteration until the control settles.

    Stops when the sup-norm change of ``u`` is at most ``tol_u``.  If the
    iteration budget runs out, the best iterate seen is returned, the trace
    is marked unconverged and a :class:`MaxItersExceeded` warning is issued.

    ``engine`` is ``"numpy"``, ``"compiled"`` (numba) or ``"auto"``, which
    picks the compiled loop when numba is importable.
    """
    p = models.p
    config.check(p)
    grid = make_grid(dist, config.n_grid) if grid is None else grid
    prob = _Problem(models, dist, grid)
    u_bar = config.resolved_u_bar(p, dist)
    u = np.clip(np.broadcast_to(np.asarray(config.u_init, dtype=float), (len(grid),)), 0.0, u_bar)

    if engine == "auto":
        engine = "numpy" if _fastloop is None else "compiled"
    if engine == "compiled":
        if _fastloop is None:
            raise MechanismError("compiled engine requested but numba is not installed")
        trace, u, best_u, best_obj = _solve_compiled(prob, config, u, u_bar)
    elif engine == "numpy":
        trace, u, best_u, best_obj = _solve_numpy(prob, config, u, u_bar)
    else:
        raise MechanismError(f"unknown solver engine {engine!r}")

    alpha = integrate_state(u, config.alpha0, grid, p=p)
    obj, lam = prob.sweep(alpha)
    if not trace.converged and best_obj > obj:
        u = best_u
        alpha = integrate_state(u, config.alpha0, grid, p=p)
        obj, lam = prob.sweep(alpha)
    trace.snapshots[trace.iterations] = alpha
    trace.final = SolverState(u=u, alpha=alpha, lam=lam, objective=obj, iter=trace.iterations)
    if not trace.converged:
        warnings.warn(
            f"no convergence after {config.max_iters} iterations "
            f"(last control change {trace.du_sup[-1]:.3g} > tol_u={config.tol_u})",
            MaxItersExceeded, stacklevel=2)
    return build_schedule(alpha, grid, models), trace


@dataclass
class Alpha0Search:
    alpha0: float
    profit: float
    schedule: RewardSchedule
    trace: SolveTrace
    evaluations: list[tuple[float, float, bool]]  # (alpha0, direct profit, converged)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_alpha0(config: SolverConfig, models: Models, dist: TypeDistribution,
                    search_interval=None, max_evals: int = 40) -> Alpha0Search:
    """Golden-section search for the initial reward slope.

    Every candidate is solved to convergence and scored by its direct
    expected profit.  Candidates whose solve raises are skipped.  The best
    candidate evaluated (endpoints included) is returned.
    """
    p = models.p
    lo, hi = (0.0, 0.9 * p) if search_interval is None else map(float, search_interval)
    if not 0 <= lo <= hi < p:
        raise MechanismError(f"alpha0 search interval must lie in [0, p={p}), got [{lo}, {hi}]")
    tol = 1e-3 * p
    results = {}

    def score(a0):
        if a0 not in results:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", MaxItersExceeded)
                    sched, tr = solve(replace(config, alpha0=a0), models, dist)
                results[a0] = (expected_profit(sched, models, dist).direct, sched, tr)
            except MechanismError:
                results[a0] = (-math.inf, None, None)
        return results[a0][0]

    a, b = lo, hi
    score(a)
    if b > a:
        score(b)
        c, d = b - _INV_PHI * (b - a), a + _INV_PHI * (b - a)
        fc, fd = score(c), score(d)
        while b - a > tol and len(results) + 1 <= max_evals:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - _INV_PHI * (b - a)
                fc = score(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INV_PHI * (b - a)
                fd = score(d)

    ok = {a0: r for a0, r in results.items() if r[1] is not None}
    if not ok:
        raise MechanismError("every alpha0 candidate failed to solve")
    best = min(ok, key=lambda a0: (-ok[a0][0], a0))
    profit, sched, tr = ok[best]
    evals = [(a0, r[0], r[2].converged) for a0, r in sorted(ok.items())]
    return Alpha0Search(best, profit, sched, tr, evals)
