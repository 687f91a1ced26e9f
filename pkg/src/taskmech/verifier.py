"""Certify IR, IC and the structural identities of a reward schedule on a grid."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .agent import agent_utility, best_participation
from .econ_model import Models, TypeDistribution, TypeGrid
from .mechanism import RewardSchedule, expected_profit


@dataclass(frozen=True, eq=False)
class UtilityMatrix:
    """``values[i, j]``: utility of true type ``theta_i`` announcing ``theta_j``.

    The misreporting agent still picks its best participation level for the
    slope attached to the announced type.
    """

    grid: TypeGrid
    values: np.ndarray


@dataclass(frozen=True)
class IcSummary:
    max_deviation_steps: int
    max_gain: float
    argmax: np.ndarray = field(repr=False)
    worst_row: int = 0


@dataclass(frozen=True)
class IrSummary:
    min_diag: float
    binding_residual: float


@dataclass(frozen=True)
class VerifyThresholds:
    ir_tol: float = 1e-6
    binding_tol: float = 1e-3
    ic_steps: int = 1
    envelope_tol: float = 1e-3
    profit_rel_tol: float = 1e-3


@dataclass(frozen=True)
class VerificationReport:
    ir_min_diag: float
    ir_binding_residual: float
    ic_max_deviation_steps: int
    ic_max_gain: float
    alpha_monotone: bool
    alpha_below_cost: bool
    envelope_max_residual: float
    profit_residual: float
    profit_direct: float
    profit_virtual: float
    passed: bool
    failures: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = asdict(self)
        out["failures"] = list(self.failures)
        return out


def utility_matrix(schedule: RewardSchedule, models: Models, grid: TypeGrid | None = None) -> UtilityMatrix:
    """Utilities of every true type (rows, on ``grid``) against every announced schedule node."""
    grid = schedule.grid if grid is None else grid
    pi, p = models.satisfaction, models.p
    theta = grid.nodes[:, None]
    alpha, beta = schedule.alpha[None, :], schedule.beta[None, :]
    chi = best_participation(pi, p, theta, alpha)
    return UtilityMatrix(grid, agent_utility(pi, p, theta, chi, alpha, beta))


def check_ic(matrix: UtilityMatrix, tie_tol: float = 1e-9) -> IcSummary:
    """How far from truth-telling each row's maximum sits.

    Entries within ``tie_tol * max(1, |row max|)`` of the row maximum all
    count as maximisers, so pooled types whose contracts coincide are not
    flagged.  The deviation of a row is the distance from the diagonal to its
    nearest maximiser; ``argmax`` reports the smallest maximiser per row.
    """
    u = matrix.values
    n = u.shape[0]
    row_max = u.max(axis=1)
    near = u >= (row_max - tie_tol * np.maximum(1.0, np.abs(row_max)))[:, None]
    cols = np.arange(u.shape[1])
    dist = np.where(near, np.abs(cols[None, :] - np.arange(n)[:, None]), n + u.shape[1])
    deviation = dist.min(axis=1)
    gain = row_max - np.diagonal(u)
    worst = int(np.argmax(deviation))
    return IcSummary(int(deviation.max()), float(gain.max()), near.argmax(axis=1), worst)


def check_ir(matrix: UtilityMatrix) -> IrSummary:
    diag = np.diagonal(matrix.values)
    return IrSummary(float(diag.min()), float(abs(diag[0])))


def truthful_utility(schedule: RewardSchedule, models: Models) -> np.ndarray:
    pi, p = models.satisfaction, models.p
    theta, alpha = schedule.theta, schedule.alpha
    chi = best_participation(pi, p, theta, alpha)
    return agent_utility(pi, p, theta, chi, alpha, schedule.beta)


def envelope_integral(schedule: RewardSchedule, models: Models, refine: int = 8) -> np.ndarray:
    """Integral of pi(chi(y, alpha(y))) from the lowest type up to each node.

    Computed by cumulative trapezoid on a grid ``refine`` times finer than the
    schedule's, with alpha linearly interpolated.  ``refine=1`` reproduces the
    quadrature used to build beta, for which the identity holds exactly.
    """
    theta = schedule.theta
    fine = np.linspace(theta[0], theta[-1], (len(theta) - 1) * refine + 1)
    integrand = models.satisfaction.value(
        best_participation(models.satisfaction, models.p, fine, schedule.alpha_at(fine)))
    return cumulative_trapezoid(integrand, fine, initial=0.0)[::refine]


def check_envelope(schedule: RewardSchedule, models: Models, refine: int = 8) -> float:
    """Sup-norm gap between truthful utility and the integrated envelope."""
    gap = truthful_utility(schedule, models) - envelope_integral(schedule, models, refine)
    return float(np.max(np.abs(gap)))


def verify(schedule: RewardSchedule, models: Models, dist: TypeDistribution,
           thresholds: VerifyThresholds = VerifyThresholds()) -> VerificationReport:
    monotone = schedule.alpha_is_monotone()
    below_cost = bool(np.all(schedule.alpha < models.p))
    if not below_cost:
        nan = float("nan")
        return VerificationReport(nan, nan, -1, nan, monotone, False, nan, nan, nan, nan,
                                  False, ("alpha_below_cost",))

    matrix = utility_matrix(schedule, models)
    ir = check_ir(matrix)
    ic = check_ic(matrix)
    envelope = check_envelope(schedule, models)
    profit = expected_profit(schedule, models, dist)

    failures = []
    if ir.min_diag < -thresholds.ir_tol:
        failures.append("ir_min_diag")
    if ir.binding_residual > thresholds.binding_tol:
        failures.append("ir_binding_residual")
    if ic.max_deviation_steps > thresholds.ic_steps:
        failures.append("ic_max_deviation_steps")
    if not monotone:
        failures.append("alpha_monotone")
    if envelope > thresholds.envelope_tol:
        failures.append("envelope_max_residual")
    if profit.relative_residual > thresholds.profit_rel_tol:
        failures.append("profit_residual")
    return VerificationReport(
        ir_min_diag=ir.min_diag,
        ir_binding_residual=ir.binding_residual,
        ic_max_deviation_steps=ic.max_deviation_steps,
        ic_max_gain=ic.max_gain,
        alpha_monotone=monotone,
        alpha_below_cost=True,
        envelope_max_residual=envelope,
        profit_residual=profit.residual,
        profit_direct=profit.direct,
        profit_virtual=profit.virtual,
        passed=not failures,
        failures=tuple(failures),
    )
