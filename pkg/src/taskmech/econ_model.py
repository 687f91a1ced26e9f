"""Primitives of the task-allocation market.

Agent types are drawn from a distribution on ``[theta_lo, theta_hi]``.  An
agent of type ``theta`` that participates at level ``x`` earns
``theta * pi(x) - p * x`` plus whatever reward the publisher pays, and the
publisher collects ``g(x)`` minus that reward.  Both ``pi`` and ``g`` are
power functions here.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySupport, MechanismError, NonPositiveSupport, UnboundedResponse, ZeroDensity


class DistributionKind(enum.Enum):
    UNIFORM = "uniform"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class TypeDistribution:
    """Density and CDF of the agent type.

    Custom distributions are tabulated: ``table_theta`` holds the nodes and
    ``table_density`` the (renormalised) density values, interpolated
    linearly.  When ``table_cdf`` is absent the CDF is the exact integral of
    that piecewise-linear density.
    """

    theta_lo: float
    theta_hi: float
    kind: DistributionKind = DistributionKind.UNIFORM
    table_theta: np.ndarray | None = field(default=None, repr=False)
    table_density: np.ndarray | None = field(default=None, repr=False)
    table_cdf: np.ndarray | None = field(default=None, repr=False)

    def density(self, theta):
        theta = np.asarray(theta, dtype=float)
        inside = (theta >= self.theta_lo) & (theta <= self.theta_hi)
        if self.kind is DistributionKind.UNIFORM:
            return np.where(inside, 1.0 / (self.theta_hi - self.theta_lo), 0.0)
        return np.where(inside, np.interp(theta, self.table_theta, self.table_density), 0.0)

    def cdf(self, theta):
        theta = np.clip(np.asarray(theta, dtype=float), self.theta_lo, self.theta_hi)
        if self.kind is DistributionKind.UNIFORM:
            return (theta - self.theta_lo) / (self.theta_hi - self.theta_lo)
        if self.table_cdf is not None:
            return np.interp(theta, self.table_theta, self.table_cdf)
        nodes, dens = self.table_theta, self.table_density
        k = np.clip(np.searchsorted(nodes, theta, side="right") - 1, 0, len(nodes) - 2)
        width = nodes[k + 1] - nodes[k]
        t = theta - nodes[k]
        cum = _cumulative_trapezoid(dens, nodes)
        out = cum[k] + dens[k] * t + (dens[k + 1] - dens[k]) * t * t / (2.0 * width)
        return np.clip(out, 0.0, 1.0)

    def hazard(self, theta):
        """f / (1 - F); infinite at the top of the support."""
        with np.errstate(divide="ignore"):
            return 1.0 / inverse_hazard(self, theta)


def _cumulative_trapezoid(values, nodes):
    steps = 0.5 * np.diff(nodes) * (values[1:] + values[:-1])
    return np.concatenate(([0.0], np.cumsum(steps)))


def _check_support(lo, hi):
    if not lo > 0:
        raise NonPositiveSupport(f"type support must start above zero, got lo={lo}")
    if not hi > lo:
        raise EmptySupport(f"type support is empty: lo={lo}, hi={hi}")


def make_uniform(lo: float, hi: float) -> TypeDistribution:
    _check_support(lo, hi)
    return TypeDistribution(float(lo), float(hi), DistributionKind.UNIFORM)


def make_custom(theta, density, cdf=None) -> TypeDistribution:
    """Tabulated distribution; density (and cdf, if given) are renormalised."""
    theta = np.asarray(theta, dtype=float)
    density = np.asarray(density, dtype=float)
    if theta.ndim != 1 or theta.shape != density.shape or len(theta) < 2:
        raise MechanismError("custom distribution needs matching 1-D theta and density tables")
    if np.any(np.diff(theta) <= 0):
        raise MechanismError("custom distribution nodes must be strictly increasing")
    if np.any(density < 0):
        raise MechanismError("custom density must be nonnegative")
    _check_support(theta[0], theta[-1])
    mass = _cumulative_trapezoid(density, theta)[-1]
    if not mass > 0:
        raise ZeroDensity("custom density integrates to zero")
    density = density / mass
    if cdf is not None:
        cdf = np.asarray(cdf, dtype=float)
        if cdf.shape != theta.shape or np.any(np.diff(cdf) < 0) or cdf[-1] <= cdf[0]:
            raise MechanismError("custom cdf must be nondecreasing and match the theta table")
        cdf = (cdf - cdf[0]) / (cdf[-1] - cdf[0])
    for arr in (theta, density, cdf):
        if arr is not None:
            arr.setflags(write=False)
    return TypeDistribution(float(theta[0]), float(theta[-1]), DistributionKind.CUSTOM,
                            theta, density, cdf)


def inverse_hazard(dist: TypeDistribution, theta):
    """Return ``(1 - F(theta)) / f(theta)``, which is exactly zero at the top type."""
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < dist.theta_lo) | (theta > dist.theta_hi)):
        raise MechanismError("inverse hazard requested outside the type support")
    if dist.kind is DistributionKind.UNIFORM:
        return dist.theta_hi - theta
    f = dist.density(theta)
    if np.any(f <= 0):
        raise ZeroDensity("density vanishes where the inverse hazard is needed")
    return (1.0 - dist.cdf(theta)) / f


@dataclass(frozen=True)
class SatisfactionModel:
    """Agent revenue ``pi(x) = z2 / (1 - z1) * x**(1 - z1)``.

    ``z1 = 0`` is accepted so that the linear case can be reported as an
    assumption violation; it has no inverse marginal.
    """

    z1: float
    z2: float

    def __post_init__(self):
        if not 0 <= self.z1 < 1:
            raise MechanismError(f"z1 must lie in [0, 1), got {self.z1}")
        if not self.z2 > 0:
            raise MechanismError(f"z2 must be positive, got {self.z2}")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.z2 / (1.0 - self.z1) * x ** (1.0 - self.z1)

    def d1(self, x):
        return self.z2 * np.asarray(x, dtype=float) ** (-self.z1)

    def d2(self, x):
        return -self.z1 * self.z2 * np.asarray(x, dtype=float) ** (-self.z1 - 1.0)

    def inverse_marginal(self, y):
        """Gamma: the x at which pi'(x) = y."""
        if self.z1 == 0:
            raise UnboundedResponse("linear satisfaction has no inverse marginal")
        return (np.asarray(y, dtype=float) / self.z2) ** (-1.0 / self.z1)


@dataclass(frozen=True)
class RevenueModel:
    """Publisher revenue ``g(x) = x**(1 - q1) / (1 - q1)``."""

    q1: float

    def __post_init__(self):
        if not 0 <= self.q1 < 1:
            raise MechanismError(f"q1 must lie in [0, 1), got {self.q1}")

    def value(self, x):
        return np.asarray(x, dtype=float) ** (1.0 - self.q1) / (1.0 - self.q1)

    def d1(self, x):
        return np.asarray(x, dtype=float) ** (-self.q1)

    def d2(self, x):
        return -self.q1 * np.asarray(x, dtype=float) ** (-self.q1 - 1.0)


@dataclass(frozen=True)
class MarketParams:
    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise MechanismError(f"marginal cost p must be positive, got {self.p}")


@dataclass(frozen=True)
class Models:
    satisfaction: SatisfactionModel
    revenue: RevenueModel
    market: MarketParams

    @property
    def p(self) -> float:
        return self.market.p


@dataclass(frozen=True, eq=False)
class TypeGrid:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 1:
            raise MechanismError("type grid needs at least one node")
        if len(nodes) > 1:
            steps = np.diff(nodes)
            if np.any(steps <= 0):
                raise MechanismError("type grid must be strictly increasing")
            if np.ptp(steps) > 1e-12 * max(1.0, abs(nodes[-1])):
                raise MechanismError("type grid must be uniformly spaced")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_points(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> float:
        if len(self.nodes) < 2:
            return 0.0
        return (self.nodes[-1] - self.nodes[0]) / (len(self.nodes) - 1)

    def __len__(self):
        return len(self.nodes)


def make_grid(dist: TypeDistribution, n_points: int) -> TypeGrid:
    if n_points < 3:
        raise MechanismError(f"type grid needs at least 3 points, got {n_points}")
    return TypeGrid(np.linspace(dist.theta_lo, dist.theta_hi, int(n_points)))


def validate_assumptions(dist: TypeDistribution, pi: SatisfactionModel, g: RevenueModel,
                         grid: TypeGrid, tol: float = 1e-12) -> list[str]:
    """List every violated modelling assumption; an empty list means all hold.

    Curvature is sampled on a log-spaced grid in [1e-3, 1e3]; the hazard is
    checked on the type grid without its top node.
    """
    violations = []
    xs = np.logspace(-3, 3, 241)
    for name, model in (("pi", pi), ("g", g)):
        if np.any(model.d1(xs) <= 0):
            violations.append(f"{name} is not increasing on [1e-3, 1e3]")
        if np.any(model.d2(xs) >= 0):
            violations.append(f"{name} is not strictly concave on [1e-3, 1e3]")

    if abs(grid.nodes[0] - dist.theta_lo) > 1e-12 or abs(grid.nodes[-1] - dist.theta_hi) > 1e-12:
        violations.append("type grid endpoints do not match the distribution support")
    nodes = grid.nodes[:-1]
    f = dist.density(nodes)
    if np.any(f <= 0):
        violations.append("type density vanishes inside the support")
    else:
        # h nondecreasing <=> (1 - F) / f nonincreasing
        inv_h = inverse_hazard(dist, nodes)
        rises = np.diff(inv_h) > tol * np.maximum(1.0, np.abs(inv_h[:-1]))
        if np.any(rises):
            where = nodes[1:][rises]
            violations.append(
                f"hazard rate decreases on [{where.min():.6g}, {where.max():.6g}]")
    return violations
