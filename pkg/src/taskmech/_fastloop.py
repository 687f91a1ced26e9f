"""Compiled gradient projection loop for the power-function market.

Mirrors ``solver._solve_numpy`` step for step; the two are cross-checked in
the test suite.
"""
import numpy as np
from numba import njit

CONVERGED = 1
EXHAUSTED = 0
ALPHA_TOO_LARGE = -1


@njit(cache=True)
def run(theta, f, inv_h, u0, alpha0, p, z1, z2, q1, u_bar, gamma0, diminishing,
        max_iters, tol, margin, snap_iters):
    n = theta.size
    h = (theta[n - 1] - theta[0]) / (n - 1)
    objective = np.empty(max_iters)
    du_sup = np.empty(max_iters)
    u_lo = np.empty(max_iters)
    u_hi = np.empty(max_iters)
    snaps = np.empty((snap_iters.size, n))
    n_snaps = 0

    u = u0.copy()
    u_next = np.empty(n)
    alpha = np.empty(n)
    rate = np.empty(n)
    lam = np.empty(n)
    best_u = u.copy()
    best_obj = -np.inf
    status = EXHAUSTED
    it = 0
    while it < max_iters:
        acc = 0.0
        alpha[0] = alpha0
        for k in range(n - 1):
            acc += 0.5 * h * (u[k] + u[k + 1])
            alpha[k + 1] = alpha0 + acc
        if alpha[n - 1] >= p - margin * p:
            status = ALPHA_TOO_LARGE
            break

        obj = 0.0
        for k in range(n):
            gap = p - alpha[k]
            marginal = gap / theta[k]
            chi = (marginal / z2) ** (-1.0 / z1)
            pi_chi = chi * marginal / (1.0 - z1)
            g1 = chi ** (-q1)
            v = (chi * g1 / (1.0 - q1) - pi_chi * inv_h[k] + theta[k] * pi_chi - p * chi) * f[k]
            w = 0.5 * h if (k == 0 or k == n - 1) else h
            obj += w * v
            rate[k] = f[k] * (g1 - marginal * inv_h[k] - alpha[k]) * chi / (z1 * gap)
        acc = 0.0
        lam[n - 1] = 0.0
        for k in range(n - 2, -1, -1):
            acc += 0.5 * h * (rate[k] + rate[k + 1])
            lam[k] = -acc

        gamma = gamma0 / (1.0 + it / 100.0) if diminishing else gamma0
        change = 0.0
        lo = np.inf
        hi = -np.inf
        for k in range(n):
            val = u[k] - gamma * lam[k]
            val = min(max(val, 0.0), u_bar)
            u_next[k] = val
            change = max(change, abs(val - u[k]))
            lo = min(lo, u[k])
            hi = max(hi, u[k])

        objective[it] = obj
        du_sup[it] = change
        u_lo[it] = lo
        u_hi[it] = hi
        if n_snaps < snap_iters.size and snap_iters[n_snaps] == it:
            snaps[n_snaps, :] = alpha
            n_snaps += 1
        if obj > best_obj:
            best_obj = obj
            best_u[:] = u
        u[:] = u_next
        it += 1
        if change <= tol:
            status = CONVERGED
            break

    return (status, it, objective[:it].copy(), du_sup[:it].copy(), u_lo[:it].copy(),
            u_hi[:it].copy(), snaps[:n_snaps].copy(), u, best_u, best_obj)
