"""The l1 metric on the simplex and Hausdorff distances between finite clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .toric import PointCloud

BLOCK = 2048


class CloudError(ValueError):
    pass


def l1(y, z) -> float:
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape != z.shape:
        raise CloudError(f"label mismatch: shapes {y.shape} and {z.shape}")
    return float(np.abs(y - z).sum())


@dataclass(frozen=True)
class DistanceReport:
    d_forward: float
    d_backward: float
    d_H: float
    forward_witness: tuple
    backward_witness: tuple
    eta_x: float | None = None
    eta_y: float | None = None

    def to_dict(self) -> dict:
        return {"d_forward": self.d_forward, "d_backward": self.d_backward, "d_H": self.d_H,
                "forward_witness": list(self.forward_witness), "backward_witness": list(self.backward_witness),
                "eta_x": self.eta_x, "eta_y": self.eta_y}


def _points(X):
    if isinstance(X, PointCloud):
        return X.labels, np.asarray(X.points, dtype=float)
    return None, np.atleast_2d(np.asarray(X, dtype=float))


def directed(X: np.ndarray, Y: np.ndarray) -> tuple[float, int, int]:
    """sup over x of inf over y of |x - y|_1, with the attaining pair (ix, iy)."""
    best, bx, by = -1.0, 0, 0
    for start in range(0, len(X), BLOCK):
        D = cdist(X[start:start + BLOCK], Y, metric="cityblock")
        near = D.argmin(axis=1)
        dist = D[np.arange(len(near)), near]
        k = int(dist.argmax())
        if dist[k] > best:
            best, bx, by = float(dist[k]), start + k, int(near[k])
    return best, bx, by


def hausdorff(X, Y, with_eta: bool = False) -> DistanceReport:
    """Exact Hausdorff distance between two finite clouds (brute force).

    Witnesses are (source index, target index) pairs: (x, y) forward and
    (y, x) backward.
    """
    lx, PX = _points(X)
    ly, PY = _points(Y)
    if len(PX) == 0 or len(PY) == 0:
        raise CloudError("clouds must be nonempty")
    if lx is not None and ly is not None and tuple(lx) != tuple(ly):
        raise CloudError("clouds are indexed by different labels")
    if PX.shape[1] != PY.shape[1]:
        raise CloudError("clouds have different dimensions")
    f, fx, fy = directed(PX, PY)
    b, by_, bx_ = directed(PY, PX)
    ex = net_radius(PX) if with_eta else None
    ey = net_radius(PY) if with_eta else None
    return DistanceReport(f, b, max(f, b), (fx, fy), (by_, bx_), ex, ey)


def net_radius(X) -> float:
    """Largest l1 distance from a cloud point to its nearest other point."""
    _, P = _points(X)
    if len(P) < 2:
        return 0.0
    tree = cKDTree(P)
    d, _ = tree.query(P, k=2, p=1)
    return float(d[:, 1].max())


def within_budget(d: float, tol: float, eta_x: float, eta_y: float) -> bool:
    """The verdict rule used throughout: d <= tol + eta_x + eta_y."""
    return d <= tol + eta_x + eta_y
