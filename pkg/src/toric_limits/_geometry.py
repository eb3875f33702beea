"""Convex-hull combinatorics of small point sets, exact or with a tolerance.

Points are sequences of equal length. A tolerance of 0 means exact rational
arithmetic; any positive tolerance switches to floats and treats values below
``tol * scale`` as zero. Everything here is brute force over subsets, which is
fine for the few dozen points this package is meant for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import _linalg as la


def _zero(tol):
    return 0.0 if tol else Fraction(0)


def _one(tol):
    return 1.0 if tol else Fraction(1)


def _coerce(points, tol):
    if tol:
        return [[float(x) for x in p] for p in points]
    return [[la.to_fraction(x) for x in p] for p in points]


def _scale(points) -> float:
    return max([1.0] + [abs(float(x)) for p in points for x in p])


@dataclass(frozen=True)
class AffineFrame:
    """An affine coordinate system on the affine span of a point set.

    ``local[j]`` holds the coordinates of point j with respect to
    ``origin`` and the rows of ``basis``; ``lift`` is the k x d matrix that
    maps a difference ``x - origin`` to local coordinates.
    """

    origin: list
    basis: list
    lift: list
    local: list
    tol: float

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_local(self, x):
        diff = [xi - oi for xi, oi in zip(_coerce([x], self.tol)[0], self.origin)]
        y = [la.dot(row, diff) for row in self.lift]
        back = [oi + sum(y[k] * self.basis[k][j] for k in range(self.dim))
                for j, oi in enumerate(self.origin)]
        resid = max((abs(float(b - xi)) for b, xi in zip(back, _coerce([x], self.tol)[0])),
                    default=0.0)
        return y, resid

    def pullback(self, h, c):
        """Turn the local inequality <h, y> <= c into <psi, x> <= c' in ambient space."""
        d = len(self.origin)
        psi = [sum(h[k] * self.lift[k][j] for k in range(self.dim)) for j in range(d)]
        return psi, c + la.dot(psi, self.origin)


def affine_frame(points, tol: float = 0) -> AffineFrame:
    pts = _coerce(points, tol)
    origin = pts[0]
    diffs = [[x - o for x, o in zip(p, origin)] for p in pts]
    idx = la.independent_rows(diffs, tol)
    basis = [diffs[i] for i in idx]
    k = len(basis)
    if k == 0:
        return AffineFrame(origin, [], [], [[] for _ in pts], tol)
    gram = [[la.dot(basis[i], basis[j]) for j in range(k)] for i in range(k)]
    # lift = gram^{-1} basis, a left inverse of basis^T on span(basis)
    lift_cols = []
    d = len(origin)
    for j in range(d):
        lift_cols.append(la.solve(gram, [basis[i][j] for i in range(k)], tol))
    lift = [[lift_cols[j][i] for j in range(d)] for i in range(k)]
    local = [[la.dot(row, diff) for row in lift] for diff in diffs]
    return AffineFrame(origin, basis, lift, local, tol)


def affine_rank(points, tol: float = 0) -> int:
    """Dimension of the affine span."""
    return affine_frame(points, tol).dim if len(points) else -1


@dataclass(frozen=True)
class Facet:
    """Supporting hyperplane <normal, y> <= offset in frame coordinates."""

    members: tuple
    normal: list
    offset: object


def hull_facets(local, tol: float = 0) -> list[Facet]:
    """Facets of conv(local) for points that affinely span their coordinate space."""
    n = len(local)
    k = len(local[0]) if n else 0
    if k == 0:
        return []
    eps = tol * _scale(local) if tol else 0
    found: dict[tuple, Facet] = {}
    for combo in combinations(range(n), k):
        rows = [list(local[i]) + [_one(tol)] for i in combo]
        null = la.nullspace(rows, k + 1, tol)
        if len(null) != 1:
            continue
        vec = null[0]
        h, c = vec[:k], -vec[k]
        if tol:
            nrm = math.sqrt(sum(x * x for x in h))
            if nrm <= eps:
                continue
            h = [x / nrm for x in h]
            c = c / nrm
        slack = [la.dot(h, y) - c for y in local]
        if all(s <= eps for s in slack):
            pass
        elif all(s >= -eps for s in slack):
            h = [-x for x in h]
            c = -c
            slack = [-s for s in slack]
        else:
            continue
        members = tuple(j for j in range(n) if abs(slack[j]) <= eps)
        if members not in found:
            found[members] = Facet(members, h, c)
    return sorted(found.values(), key=lambda f: f.members)


@dataclass(frozen=True)
class Face:
    members: tuple
    dim: int
    normal: list
    offset: object


def hull_faces(points, tol: float = 0) -> tuple[AffineFrame, list[Facet], list[Face]]:
    """All faces of conv(points), each with a supporting inequality in ambient coordinates.

    The empty face is not listed. Faces are sorted by dimension, then members.
    """
    frame = affine_frame(points, tol)
    facets = hull_facets(frame.local, tol)
    n = len(points)
    full = tuple(range(n))
    sets = {full}
    frontier = {f.members for f in facets}
    while frontier:
        sets |= frontier
        new = set()
        for a in frontier:
            for f in facets:
                inter = tuple(sorted(set(a) & set(f.members)))
                if inter and inter not in sets:
                    new.add(inter)
        frontier = new
    faces = []
    d = len(points[0])
    for members in sets:
        containing = [f for f in facets if set(members) <= set(f.members)]
        if members == full:
            psi, c = [_zero(tol)] * d, _zero(tol)
        else:
            h = [sum(f.normal[j] for f in containing) for j in range(frame.dim)]
            off = sum((f.offset for f in containing), _zero(tol))
            psi, c = frame.pullback(h, off)
        dim = affine_rank([frame.local[i] for i in members], tol)
        faces.append(Face(members, dim, psi, c))
    faces.sort(key=lambda f: (f.dim, f.members))
    return frame, facets, faces


def triangulate(points, tol: float = 0, indices=None) -> list[tuple]:
    """A pulling triangulation of conv(points) using only the given points.

    Returns index tuples of affinely independent subsets of size dim+1.
    """
    if indices is None:
        indices = tuple(range(len(points)))
    sub = [points[i] for i in indices]
    frame = affine_frame(sub, tol)
    k = frame.dim
    if len(indices) == k + 1:
        return [tuple(indices)]
    if k == 0:
        return [(indices[0],)]
    facets = hull_facets(frame.local, tol)
    simplices = []
    apex = 0
    for f in facets:
        if apex in f.members:
            continue
        for s in triangulate(points, tol, tuple(indices[j] for j in f.members)):
            simplices.append((indices[apex],) + s)
    return simplices


def simplex_volume(points) -> object:
    """|det| / d! for d+1 points spanning R^d; exact for rational input."""
    d = len(points[0])
    exact = la.all_exact(points)
    mat = [[x - y for x, y in zip(p, points[0])] for p in points[1:]]
    if exact:
        red = [list(r) for r in mat]
        det = Fraction(1)
        for c in range(d):
            piv = next((r for r in range(c, d) if red[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                red[c], red[piv] = red[piv], red[c]
                det = -det
            det *= red[c][c]
            for r in range(c + 1, d):
                f = red[r][c] / red[c][c]
                red[r] = [a - f * b for a, b in zip(red[r], red[c])]
        return abs(det) / math.factorial(d)
    import numpy as np

    return abs(float(np.linalg.det(np.asarray(mat, dtype=float)))) / math.factorial(d)


def hull_volume(points, tol: float = 0):
    """d-dimensional volume of conv(points), points spanning R^d."""
    pts = _coerce(points, tol)
    total = _zero(tol)
    for s in triangulate(pts, tol):
        total += simplex_volume([pts[i] for i in s])
    return total


def locate(frame: AffineFrame, facets: list[Facet], x, tol: float = 0):
    """Members of the smallest face of conv containing x, or None if x is outside."""
    y, resid = frame.to_local(x)
    eps = tol * _scale(frame.local + [y]) if tol else 0
    if resid > (eps if tol else 0):
        return None
    n = len(frame.local)
    members = set(range(n))
    for f in facets:
        s = la.dot(f.normal, y) - f.offset
        if s > eps:
            return None
        if abs(s) <= eps:
            members &= set(f.members)
    return tuple(sorted(members))


def convex_coefficients(points, x, tol: float = 0):
    """Convex weights (list, one per point) expressing x, supported on an independent subset.

    Scans affinely independent subsets of size rank+1 in lexicographic order
    and returns the first with nonnegative barycentric coordinates, or None.
    """
    pts = _coerce(points, tol)
    xs = _coerce([x], tol)[0]
    k = affine_rank(pts, tol)
    for combo in combinations(range(len(pts)), k + 1):
        coeffs = barycentric([pts[i] for i in combo], xs, tol)
        if coeffs is None:
            continue
        if all(c >= (-tol if tol else 0) for c in coeffs):
            out = [_zero(tol)] * len(pts)
            for i, c in zip(combo, coeffs):
                out[i] = max(c, _zero(tol)) if tol else c
            if tol:
                s = sum(out)
                out = [c / s for c in out]
            return out
    return None


def barycentric(simplex, x, tol: float = 0):
    """Affine coordinates of x over affinely independent points, or None."""
    pts = _coerce(simplex, tol)
    xs = _coerce([x], tol)[0]
    m = len(pts)
    d = len(xs)
    rows = [[_one(tol)] * m] + [[pts[i][j] for i in range(m)] for j in range(d)]
    rhs = [_one(tol)] + list(xs)
    if la.rank(rows, tol) < m:
        return None
    sol = la.solve_consistent(rows, rhs, tol)
    if sol is None:
        return None
    if tol:
        back = [la.dot(r, sol) for r in rows]
        if max(abs(b - r) for b, r in zip(back, rhs)) > max(tol, 1e-9) * _scale([xs]):
            return None
    return sol
