# Utility of five agent types against every announcement.  Truth-telling should sit at the top
# of each curve (ties are possible where types are pooled).
import numpy as np

from taskmech import (MarketParams, Models, RevenueModel, SatisfactionModel, SolverConfig,
                      make_uniform, solve, utility_matrix)

dist = make_uniform(4.0, 6.0)
models = Models(SatisfactionModel(0.5, 3.0), RevenueModel(0.5), MarketParams(10.0))
schedule, _ = solve(SolverConfig(alpha0=0.0), models, dist)

u = utility_matrix(schedule, models).values
theta = schedule.theta
rows = [int(np.argmin(np.abs(theta - t))) for t in (4.0, 4.5, 5.0, 5.5, 6.0)]
for i in rows:
    best = theta[np.flatnonzero(u[i] >= u[i].max() - 1e-9)]
    print(f"type {theta[i]:.2f}: truthful utility {u[i, i]:.4f}, best announcements "
          f"{best.min():.2f}..{best.max():.2f}")

# a decreasing slope breaks incentive compatibility
from taskmech.mechanism import RewardSchedule, _beta_by_quadrature
alpha = 2.0 - 0.5 * (theta - 4.0)
bad = RewardSchedule(schedule.grid, alpha, _beta_by_quadrature(alpha, schedule.grid, models.satisfaction, 10.0))
ub = utility_matrix(bad, models).values
print("decreasing alpha: type 6 prefers to announce", theta[np.argmax(ub[-1])])

try:
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit(0)

for i in rows:
    plt.plot(theta, u[i], label=f"theta = {theta[i]:.1f}")
    plt.plot(theta[i], u[i, i], "k*")
plt.xlabel("announced type")
plt.ylabel("agent utility")
plt.legend()
plt.show()
