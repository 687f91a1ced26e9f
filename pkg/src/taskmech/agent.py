"""The agent's side: utility, closed-form participation, brute-force oracle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .econ_model import SatisfactionModel, TypeGrid
from .errors import EmptyGrid, NegativeParticipation, UnboundedResponse

if TYPE_CHECKING:
    from .mechanism import RewardSchedule


@dataclass(frozen=True)
class AgentDecision:
    x_star: float
    theta_hat_star: float
    utility: float
    # every announcement whose best utility ties the optimum (pooled contracts)
    theta_hat_ties: tuple[float, ...] = ()


def agent_utility(pi: SatisfactionModel, p, theta, x, alpha, beta):
    """theta * pi(x) - p * x + alpha * x + beta."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise NegativeParticipation("participation level must be nonnegative")
    return theta * pi.value(x) - p * x + alpha * x + beta


def best_participation(pi: SatisfactionModel, p, theta, alpha):
    """Participation level solving theta * pi'(x) = p - alpha."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha >= p):
        raise UnboundedResponse(
            f"reward slope {np.max(alpha):.6g} is not below the marginal cost p={p}")
    return pi.inverse_marginal((p - alpha) / np.asarray(theta, dtype=float))


def participation_slope(pi: SatisfactionModel, theta, chi):
    """d(chi)/d(alpha) = -1 / (theta * pi''(chi)); positive under strict concavity."""
    return -1.0 / (np.asarray(theta, dtype=float) * pi.d2(chi))


def brute_force_best_response(pi: SatisfactionModel, p, theta, schedule: RewardSchedule,
                              x_grid=None, theta_hat_grid: TypeGrid | None = None,
                              n_x: int = 10001, tie_tol: float = 1e-9) -> AgentDecision:
    """Exhaustive search over participation levels and announcements.

    Announcements whose best utility is within ``tie_tol * max(1, |U*|)`` of
    the optimum count as ties; the smallest such announcement wins, then the
    smallest participation level.  By default the participation grid spans
    twice the largest closed-form response to the schedule.
    """
    theta_hats = schedule.grid.nodes if theta_hat_grid is None else theta_hat_grid.nodes
    if len(theta_hats) == 0:
        raise EmptyGrid("announcement grid is empty")
    alphas = schedule.alpha_at(theta_hats)
    betas = schedule.beta_at(theta_hats)
    if x_grid is None:
        x_max = 2.0 * float(np.max(best_participation(pi, p, theta, alphas)))
        x_grid = np.linspace(0.0, x_max, n_x)
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.size == 0:
        raise EmptyGrid("participation grid is empty")

    base = agent_utility(pi, p, theta, x_grid, 0.0, 0.0)
    table = base[None, :] + alphas[:, None] * x_grid[None, :] + betas[:, None]
    best_x = np.argmax(table, axis=1)
    row_best = table[np.arange(len(theta_hats)), best_x]
    top = row_best.max()
    tied = np.flatnonzero(row_best >= top - tie_tol * max(1.0, abs(top)))
    j = tied[0]
    return AgentDecision(
        x_star=float(x_grid[best_x[j]]),
        theta_hat_star=float(theta_hats[j]),
        utility=float(row_best[j]),
        theta_hat_ties=tuple(float(t) for t in theta_hats[tied]),
    )
