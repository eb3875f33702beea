"""Primal active-set method for small strictly convex quadratic programs.

    minimize 1/2 x'Qx + c'x  subject to  G x >= h

starting from a feasible point. Sizes here are a handful of variables and a
few dozen constraints, so every subproblem is solved densely.
"""

from __future__ import annotations

import numpy as np


class QPError(RuntimeError):
    pass


def _eq_qp_step(Q, g, W):
    """Step p minimizing 1/2 p'Qp + g'p with W p = 0, plus multipliers."""
    n = Q.shape[0]
    m = W.shape[0]
    K = np.zeros((n + m, n + m))
    K[:n, :n] = Q
    K[:n, n:] = -W.T
    K[n:, :n] = W
    rhs = np.concatenate([-g, np.zeros(m)])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:n], sol[n:]


def solve_qp(Q, c, G, h, x0, tol: float = 1e-12, max_iter: int = 500):
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float).reshape(-1, Q.shape[0])
    h = np.asarray(h, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    scale = max(1.0, float(np.abs(x).max(initial=0)), float(np.abs(h).max(initial=0)))
    feas = 1e-9 * scale
    if G.size and np.any(G @ x - h < -feas):
        raise QPError("starting point is infeasible")
    active = [k for k in range(len(h)) if abs(G[k] @ x - h[k]) <= feas]
    # keep a linearly independent working set
    work = []
    for k in active:
        trial = G[work + [k]]
        if np.linalg.matrix_rank(trial) == len(work) + 1:
            work.append(k)
    for _ in range(max_iter):
        g = Q @ x + c
        W = G[work] if work else np.zeros((0, len(x)))
        p, lam = _eq_qp_step(Q, g, W)
        if np.linalg.norm(p) <= tol * max(1.0, np.linalg.norm(x)):
            if not work or lam.min() >= -tol:
                return x
            work.pop(int(np.argmin(lam)))
            continue
        alpha, block = 1.0, None
        for k in range(len(h)):
            if k in work:
                continue
            gp = G[k] @ p
            if gp < -1e-15:
                step = (h[k] - G[k] @ x) / gp
                if step < alpha:
                    alpha, block = max(step, 0.0), k
        x = x + alpha * p
        if block is not None:
            work.append(block)
    raise QPError("active-set iteration limit reached")
