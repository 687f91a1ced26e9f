# The solver leaves alpha(theta_lo) free.  Scan it on a coarse grid, then let the golden search refine.
import math
import warnings

import numpy as np

from taskmech import (MarketParams, Models, RevenueModel, SatisfactionModel, SolverConfig,
                      expected_profit, make_uniform, optimize_alpha0, solve)
from taskmech.errors import AlphaExceedsCost, MaxItersExceeded

dist = make_uniform(4.0, 6.0)
models = Models(SatisfactionModel(0.5, 3.0), RevenueModel(0.5), MarketParams(10.0))

for a0 in np.linspace(0, 9, 10):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MaxItersExceeded)
            sched, tr = solve(SolverConfig(alpha0=float(a0)), models, dist)
        print(f"alpha0={a0:3.1f}  profit={expected_profit(sched, models, dist).direct:9.4f}  "
              f"iters={tr.iterations}")
    except AlphaExceedsCost:
        print(f"alpha0={a0:3.1f}  infeasible (alpha would reach p)")

best = optimize_alpha0(SolverConfig(), models, dist, (0.0, 9.0))
print(f"golden search: alpha0={best.alpha0:g}, profit={best.profit:.5f}, {len(best.evaluations)} solves")
assert math.isfinite(best.profit)
