"""Reward schedules: information rent, bias reward, publisher profit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .agent import best_participation
from .econ_model import Models, RevenueModel, SatisfactionModel, TypeDistribution, TypeGrid, inverse_hazard
from .errors import MechanismError, NegativeParticipation, NonMonotoneAlpha


@dataclass(frozen=True, eq=False)
class RewardSchedule:
    """Reward ``alpha(t) * x + beta(t)`` for announced type ``t``, tabulated on a grid.

    Values between nodes are linearly interpolated.  Monotonicity of alpha
    is not enforced here so that deliberately broken schedules can still be
    verified.
    """

    grid: TypeGrid
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        beta = np.array(self.beta, dtype=float)
        if alpha.shape != (len(self.grid),) or beta.shape != (len(self.grid),):
            raise MechanismError("alpha and beta must have one value per grid node")
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def theta(self):
        return self.grid.nodes

    def alpha_at(self, theta_hat):
        return np.interp(theta_hat, self.grid.nodes, self.alpha)

    def beta_at(self, theta_hat):
        return np.interp(theta_hat, self.grid.nodes, self.beta)

    def alpha_is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.alpha) >= 0))

    def shifted(self, beta_shift) -> RewardSchedule:
        return RewardSchedule(self.grid, self.alpha, self.beta + beta_shift)


@dataclass(frozen=True)
class ProfitBreakdown:
    direct: float
    virtual: float

    @property
    def residual(self) -> float:
        return abs(self.direct - self.virtual)

    @property
    def relative_residual(self) -> float:
        return self.residual / max(1.0, abs(self.direct))


def information_rent_K(pi: SatisfactionModel, p, theta, alpha):
    """K = alpha * chi + theta * pi(chi) - p * chi at the agent's best response."""
    chi = best_participation(pi, p, theta, alpha)
    return alpha * chi + theta * pi.value(chi) - p * chi


def k_theta(pi: SatisfactionModel, p, theta, alpha):
    """dK/dtheta, which by the envelope argument is pi(chi)."""
    return pi.value(best_participation(pi, p, theta, alpha))


def _beta_by_quadrature(alpha, grid: TypeGrid, pi, p):
    theta = grid.nodes
    integral = cumulative_trapezoid(k_theta(pi, p, theta, alpha), theta, initial=0.0)
    return integral - information_rent_K(pi, p, theta, alpha)


def compute_beta(alpha, grid: TypeGrid, pi: SatisfactionModel, p) -> np.ndarray:
    """Bias reward that makes truthful announcement optimal for a monotone alpha.

    beta(t_j) is the cumulative trapezoid of pi(chi(t, alpha(t))) from the
    lowest type up to t_j, minus K(t_j, alpha(t_j)).  The lowest type is
    left with exactly zero utility.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(np.diff(alpha) < 0):
        k = int(np.argmax(np.diff(alpha) < 0))
        raise NonMonotoneAlpha(f"alpha decreases between nodes {k} and {k + 1}")
    return _beta_by_quadrature(alpha, grid, pi, p)


def build_schedule(alpha, grid: TypeGrid, models: Models) -> RewardSchedule:
    return RewardSchedule(grid, alpha, compute_beta(alpha, grid, models.satisfaction, models.p))


def publisher_utility(g: RevenueModel, x, reward_paid):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise NegativeParticipation("participation level must be nonnegative")
    return g.value(x) - reward_paid


def _virtual_surplus(theta, alpha, f, inv_h, models: Models):
    pi, g, p = models.satisfaction, models.revenue, models.p
    chi = best_participation(pi, p, theta, alpha)
    pi_chi = pi.value(chi)
    return (g.value(chi) - pi_chi * inv_h + theta * pi_chi - p * chi) * f


def virtual_surplus_integrand(theta_hat, alpha, models: Models, dist: TypeDistribution):
    """Publisher's pointwise objective once beta has been integrated out.

    [g(chi) - pi(chi) * (1 - F) / f + theta * pi(chi) - p * chi] * f
    """
    return _virtual_surplus(theta_hat, alpha, dist.density(theta_hat),
                            inverse_hazard(dist, theta_hat), models)


def expected_profit(schedule: RewardSchedule, models: Models, dist: TypeDistribution) -> ProfitBreakdown:
    theta = schedule.theta
    alpha, beta = schedule.alpha, schedule.beta
    chi = best_participation(models.satisfaction, models.p, theta, alpha)
    f = dist.density(theta)
    direct = trapezoid(publisher_utility(models.revenue, chi, alpha * chi + beta) * f, theta)
    virtual = trapezoid(virtual_surplus_integrand(theta, alpha, models, dist), theta)
    return ProfitBreakdown(float(direct), float(virtual))
