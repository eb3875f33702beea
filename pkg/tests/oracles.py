"""Independent reference computations used by the tests.

None of these share code with the package: upper hulls come from Qhull,
envelopes from linear programming, Birch points from iterative scaling and
distances from explicit loops.
"""

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull


def qhull_upper_cells(points, lift, tol=1e-9):
    """Label-index sets of the upper facets of the lifted point set, via Qhull."""
    P = np.asarray(points, dtype=float)
    lam = np.asarray(lift, dtype=float)
    L = np.column_stack([P, lam])
    hull = ConvexHull(L)
    cells = set()
    scale = max(1.0, np.abs(L).max())
    for eq in hull.equations:
        normal, off = eq[:-1], eq[-1]
        if normal[-1] <= 1e-12:
            continue
        # every lifted point on this supporting hyperplane
        on = np.abs(L @ normal + off) <= tol * scale
        cells.add(tuple(np.flatnonzero(on)))
    return cells


def lp_envelope(points, lift, x):
    """max sum c_a lift(a) over convex combinations of the points equal to x."""
    P = np.asarray(points, dtype=float)
    n = len(P)
    A_eq = np.vstack([P.T, np.ones(n)])
    b_eq = np.concatenate([np.asarray(x, dtype=float), [1.0]])
    res = linprog(-np.asarray(lift, dtype=float), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    assert res.status == 0
    return -res.fun


def iterative_scaling(points, weight, p, iters=20000, tol=1e-13):
    """Generalized iterative scaling for z proportional to w_a x^a with sum z_a a = p.

    The points are shifted to the standard simplex coordinates first so that
    all sufficient statistics are nonnegative and sum to one.
    """
    P = np.asarray(points, dtype=float)
    lo = P.min(axis=0)
    Q = P - lo
    total = Q.sum(axis=1).max() + 1.0
    stats = np.column_stack([Q / total, 1.0 - Q.sum(axis=1) / total])
    target = np.concatenate([(np.asarray(p) - lo) / total, [1.0 - (np.asarray(p) - lo).sum() / total]])
    z = np.asarray(weight, dtype=float) / np.sum(weight)
    for _ in range(iters):
        m = stats.T @ z
        ratio = np.where(target > 0, target / m, 1.0)
        z = z * np.prod(ratio[None, :] ** stats, axis=1)
        z /= z.sum()
        if np.abs(z @ P - np.asarray(p)).sum() < tol:
            break
    return z


def naive_hausdorff(X, Y):
    def directed(U, V):
        best = 0.0
        for u in U:
            near = min(sum(abs(a - b) for a, b in zip(u, v)) for v in V)
            best = max(best, near)
        return best

    return max(directed(X, Y), directed(Y, X))
