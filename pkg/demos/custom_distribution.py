# Same market, but types follow a tabulated triangular density peaking at theta = 5.
import numpy as np

from taskmech import (MarketParams, Models, RevenueModel, SatisfactionModel, SolverConfig,
                      expected_profit, make_custom, make_grid, make_uniform, solve,
                      validate_assumptions, verify)

theta = np.linspace(4.0, 6.0, 81)
dens = 1.0 - 0.6 * np.abs(theta - 5.0)
dist = make_custom(theta, dens)
models = Models(SatisfactionModel(0.5, 3.0), RevenueModel(0.5), MarketParams(10.0))
print("assumption problems:", validate_assumptions(dist, models.satisfaction, models.revenue,
                                                   make_grid(dist, 201)) or "none")

tri, _ = solve(SolverConfig(alpha0=0.0), models, dist)
uni, _ = solve(SolverConfig(alpha0=0.0), models, make_uniform(4.0, 6.0))
for t in (5.0, 5.5, 5.8, 6.0):
    print(f"theta={t}: alpha triangular {tri.alpha_at(t):.4f}, uniform {uni.alpha_at(t):.4f}")
print(f"profit {expected_profit(tri, models, dist).direct:.5f}, verified: {verify(tri, models, dist).passed}")

# a density whose inverse hazard rises somewhere is rejected up front
bad = make_custom(np.linspace(1, 4, 301), 1 / np.linspace(1, 4, 301) ** 2)
print(validate_assumptions(bad, models.satisfaction, models.revenue, make_grid(bad, 301))[0])
