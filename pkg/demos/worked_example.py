# Optimal reward slope for uniform types on [4, 6], p = 10, pi(x) = 6 sqrt(x), g(x) = 2 sqrt(x).
# Prints the schedule at a few types and, if matplotlib is around, draws alpha across iterations.
import numpy as np

from taskmech import (MarketParams, Models, RevenueModel, SatisfactionModel, SolverConfig,
                     expected_profit, make_uniform, solve, verify)

dist = make_uniform(4.0, 6.0)
models = Models(SatisfactionModel(z1=0.5, z2=3.0), RevenueModel(q1=0.5), MarketParams(p=10.0))

schedule, trace = solve(SolverConfig(alpha0=0.0), models, dist)
print(f"converged={trace.converged} after {trace.iterations} iterations")

# low types are pooled at alpha = 0; the slope only starts rising near theta = 5.67
for t in (4.0, 4.5, 5.0, 5.5, 5.7, 5.85, 6.0):
    print(f"theta={t:4.2f}  alpha={schedule.alpha_at(t):.4f}  beta={schedule.beta_at(t):9.4f}")

profit = expected_profit(schedule, models, dist)
print(f"expected profit {profit.direct:.5f} (virtual form {profit.virtual:.5f})")
print("verification passed:", verify(schedule, models, dist).passed)

try:
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit(0)

for it in sorted(trace.snapshots):
    plt.plot(schedule.theta, trace.snapshots[it], label=f"iter {it}")
plt.xlabel("announced type")
plt.ylabel("alpha")
plt.legend()
plt.show()
