"""Small dense linear algebra over exact rationals or floats.

Every routine works on plain lists of rows. When all entries are ``Fraction``
(or ``int``) and ``tol == 0`` the arithmetic is exact; otherwise entries are
treated as floats and pivots smaller than ``tol`` (relative to the largest
entry) count as zero.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

FLOAT_TOL = 1e-9


def is_exact_value(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def all_exact(values) -> bool:
    return all(is_exact_value(x) for x in np.ravel(np.asarray(values, dtype=object)))


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions, "p/q" strings and decimal floats to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        # shortest decimal repr, so 0.1 becomes 1/10 rather than a binary fraction
        return Fraction(repr(float(x)))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def exact_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = to_fraction(x)
    return out


def float_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    if arr.dtype == object:
        return np.vectorize(float, otypes=[float])(arr) if arr.size else arr.astype(float)
    return np.asarray(values, dtype=float)


def _zero_tol(rows, tol: float) -> float:
    if tol == 0:
        return 0
    scale = max((abs(float(x)) for r in rows for x in r), default=0.0)
    return tol * max(scale, 1.0)


def rref(matrix: Sequence[Sequence], tol: float = 0):
    """Reduced row echelon form. Returns (rows, pivot_columns)."""
    rows = [list(r) for r in matrix]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    eps = _zero_tol(rows, tol)
    if tol:
        rows = [[float(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= len(rows):
            break
        if tol:
            best = max(range(r, len(rows)), key=lambda k: abs(rows[k][c]))
            if abs(rows[best][c]) <= eps:
                continue
        else:
            best = next((k for k in range(r, len(rows)) if rows[k][c] != 0), None)
            if best is None:
                continue
        rows[r], rows[best] = rows[best], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][c] != 0:
                f = rows[k][c]
                rows[k] = [a - f * b for a, b in zip(rows[k], rows[r])]
        pivots.append(c)
        r += 1
    if tol:
        for row in rows:
            for j, x in enumerate(row):
                if abs(x) <= eps:
                    row[j] = 0.0
    return rows, pivots


def rank(matrix, tol: float = 0) -> int:
    if tol and len(matrix):
        m = np.asarray(matrix, dtype=float)
        if m.size == 0:
            return 0
        s = np.linalg.svd(m, compute_uv=False)
        return int(np.sum(s > tol * max(1.0, float(np.abs(m).max()))))
    return len(rref(matrix, tol)[1])


def nullspace(matrix, ncols: int | None = None, tol: float = 0) -> list[list]:
    """Basis of {x : M x = 0}, one vector per free column (free entry = 1)."""
    rows = [list(r) for r in matrix]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        one = 1.0 if tol else Fraction(1)
        zero = 0.0 if tol else Fraction(0)
        return [[one if j == k else zero for j in range(ncols)] for k in range(ncols)]
    red, pivots = rref(rows, tol)
    free = [c for c in range(ncols) if c not in pivots]
    one = 1.0 if tol else Fraction(1)
    zero = 0.0 if tol else Fraction(0)
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for r, p in enumerate(pivots):
            v[p] = -red[r][f]
        basis.append(v)
    return basis


def solve(matrix, rhs, tol: float = 0):
    """Solve a square nonsingular system M x = rhs; raise if singular."""
    n = len(matrix)
    aug = [list(r) + [b] for r, b in zip(matrix, rhs)]
    red, pivots = rref(aug, tol)
    if pivots != list(range(n)):
        raise np.linalg.LinAlgError("singular system")
    return [red[i][n] for i in range(n)]


def solve_consistent(matrix, rhs, tol: float = 0):
    """Some solution of a (possibly non-square) consistent system, else None."""
    if not matrix:
        return None
    ncols = len(matrix[0])
    aug = [list(r) + [b] for r, b in zip(matrix, rhs)]
    red, pivots = rref(aug, tol)
    if ncols in pivots:
        return None
    zero = 0.0 if tol else Fraction(0)
    x = [zero] * ncols
    for r, p in enumerate(pivots):
        x[p] = red[r][ncols]
    return x


def independent_rows(matrix, tol: float = 0) -> list[int]:
    """Indices of a greedily chosen maximal independent subset of rows."""
    chosen: list[int] = []
    basis: list[list] = []
    for i, row in enumerate(matrix):
        trial = basis + [list(row)]
        if rank(trial, tol) == len(trial):
            basis = trial
            chosen.append(i)
    return chosen


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def normalize_direction(v):
    """Scale a nonzero vector so its largest-magnitude entry (first one) is +-1."""
    k = max(range(len(v)), key=lambda j: abs(v[j]))
    m = abs(v[k])
    if m == 0:
        return list(v)
    return [x / m for x in v]
