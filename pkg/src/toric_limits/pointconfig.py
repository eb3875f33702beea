"""Finite labeled point configurations and the functions living on them.

A function on A (a lift, a log-weight, ...) is a 1-d numpy array in label
order. Arrays of dtype ``object`` holding ``Fraction`` values are treated as
exact; anything else is float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _geometry as geo
from . import _linalg as la

RATIONAL = "rational"
FLOAT = "float"
HULL_TOL = 1e-9


class ConfigurationError(ValueError):
    """Invalid point configuration or function on it."""


def format_coord(coord) -> str:
    """Canonical label for a coordinate vector, e.g. ``(1/2,3/2)``."""
    parts = []
    for x in coord:
        if la.is_exact_value(x):
            parts.append(str(Fraction(x)))
        else:
            parts.append(repr(float(x)))
    return "(" + ",".join(parts) + ")"


@dataclass(frozen=True)
class ConfigFace:
    """A face of conv(A), given by its labels and a supporting inequality.

    Every point a of A satisfies ``<normal, a> <= offset`` with equality
    exactly on the face.
    """

    labels: tuple
    dim: int
    normal: tuple
    offset: object

    def check(self, A: "PointConfiguration") -> bool:
        eps = A.tol * geo._scale(A.coords) if A.tol else 0
        for lab, a in zip(A.labels, A.coords):
            s = la.dot(self.normal, a) - self.offset
            if s > eps:
                return False
            if (abs(s) <= eps) != (lab in self.labels):
                return False
        return True


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    dim: int
    labels: tuple
    coords: tuple
    mode: str = RATIONAL
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._index.update({lab: i for i, lab in enumerate(self.labels)})

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def exact(self) -> bool:
        return self.mode == RATIONAL

    @property
    def tol(self) -> float:
        return 0 if self.exact else HULL_TOL

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ConfigurationError(f"unknown label {label!r}") from None

    def indices(self, labels: Iterable) -> tuple:
        return tuple(sorted(self.index(lab) for lab in labels))

    def labels_of(self, indices: Iterable[int]) -> tuple:
        return tuple(self.labels[i] for i in sorted(indices))

    @cached_property
    def points(self) -> np.ndarray:
        """Coordinates as an n x d float array."""
        return np.array([[float(x) for x in c] for c in self.coords], dtype=float).reshape(self.n, self.dim)

    @cached_property
    def frame(self) -> geo.AffineFrame:
        return geo.affine_frame(list(self.coords), self.tol)

    @property
    def aff_rank(self) -> int:
        """Dimension of the affine span of A."""
        return self.frame.dim

    @property
    def spanning(self) -> bool:
        return self.aff_rank == self.dim

    @cached_property
    def local_points(self) -> np.ndarray:
        """Float coordinates in an affine frame of the span (n x aff_rank)."""
        return np.array([[float(x) for x in y] for y in self.frame.local], dtype=float).reshape(self.n, self.aff_rank)

    @cached_property
    def homogeneous(self) -> np.ndarray:
        """The (d+1) x n matrix whose columns are (1, a)."""
        out = np.empty((self.dim + 1, self.n), dtype=object if self.exact else float)
        for j, c in enumerate(self.coords):
            out[0, j] = Fraction(1) if self.exact else 1.0
            for k, x in enumerate(c):
                out[k + 1, j] = x
        return out

    @cached_property
    def _hull(self):
        return geo.hull_faces(list(self.coords), self.tol)

    @property
    def facets_local(self) -> list:
        return self._hull[1]

    @cached_property
    def faces(self) -> list[ConfigFace]:
        out = []
        for f in self._hull[2]:
            out.append(ConfigFace(self.labels_of(f.members), f.dim, tuple(f.normal), f.offset))
        return out

    @cached_property
    def volume(self):
        """Volume of conv(A) in its own affine span (exact for rational mode)."""
        if self.aff_rank == 0:
            return Fraction(1) if self.exact else 1.0
        if self.spanning:
            return geo.hull_volume(list(self.coords), self.tol)
        return geo.hull_volume(self.frame.local, self.tol)

    def restrict(self, labels: Iterable) -> "PointConfiguration":
        """The sub-configuration on the given labels, kept in label order of A."""
        idx = self.indices(labels)
        return PointConfiguration(self.dim, tuple(self.labels[i] for i in idx),
                                  tuple(self.coords[i] for i in idx), self.mode)

    def require_spanning(self):
        if not self.spanning:
            raise ConfigurationError(
                f"configuration spans an affine space of dimension {self.aff_rank}, not {self.dim}")

    def function(self, values) -> np.ndarray:
        """Coerce a mapping label -> value or a sequence in label order to an array."""
        if isinstance(values, Mapping):
            missing = set(self.labels) - set(values)
            extra = set(values) - set(self.labels)
            if missing or extra:
                raise ConfigurationError(
                    f"function labels mismatch: missing {sorted(missing)}, unknown {sorted(extra)}")
            seq = [values[lab] for lab in self.labels]
        else:
            seq = list(values)
            if len(seq) != self.n:
                raise ConfigurationError(f"expected {self.n} values, got {len(seq)}")
        if all(la.is_exact_value(x) for x in seq):
            return la.exact_array(seq)
        return np.asarray([float(x) for x in seq], dtype=float)

    def as_mapping(self, f) -> dict:
        return {lab: f[i] for i, lab in enumerate(self.labels)}

    def __repr__(self) -> str:
        return f"PointConfiguration(dim={self.dim}, labels={list(self.labels)}, mode={self.mode!r})"


def new_configuration(dim: int, labeled_points, scalar_mode: str | None = None) -> PointConfiguration:
    """Validate and build a configuration.

    ``labeled_points`` is a sequence of (label, coord) pairs or of bare coords
    (then labels are generated from coordinates). ``scalar_mode`` defaults to
    rational when every coordinate is an int, Fraction or "p/q" string.
    """
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ConfigurationError(f"dimension must be a positive integer, got {dim!r}")
    items = []
    for item in labeled_points:
        if isinstance(item, tuple) and len(item) == 2 and not isinstance(item[1], (int, float, Fraction, str)):
            items.append((item[0], list(item[1])))
        else:
            items.append((None, list(item)))
    if not items:
        raise ConfigurationError("configuration must contain at least one point")
    for lab, c in items:
        if len(c) != dim:
            raise ConfigurationError(f"point {lab if lab is not None else c} has {len(c)} coordinates, expected {dim}")
    raw = [x for _, c in items for x in c]
    if scalar_mode is None:
        scalar_mode = RATIONAL if all(la.is_exact_value(x) or isinstance(x, str) for x in raw) else FLOAT
    if scalar_mode not in (RATIONAL, FLOAT):
        raise ConfigurationError(f"scalar mode must be 'rational' or 'float', got {scalar_mode!r}")
    if scalar_mode == RATIONAL:
        coords = tuple(tuple(la.to_fraction(x) for x in c) for _, c in items)
    else:
        coords = tuple(tuple(float(la.to_fraction(x)) if isinstance(x, str) else float(x) for x in c)
                       for _, c in items)
    labels = tuple(lab if lab is not None else format_coord(c) for (lab, _), c in zip(items, coords))
    if len(set(labels)) != len(labels):
        dup = sorted({lab for lab in labels if labels.count(lab) > 1})
        raise ConfigurationError(f"duplicate label(s): {dup}")
    if len(set(coords)) != len(coords):
        raise ConfigurationError("duplicate point in configuration")
    A = PointConfiguration(int(dim), labels, coords, scalar_mode)
    _ = A.frame  # computes and caches the spanning rank
    return A


@dataclass(frozen=True)
class AffineFunctionSpace:
    """The functions 1, x_1, ..., x_d restricted to A, plus the rank of their span."""

    functions: tuple
    rank: int
    spanning: bool

    def __iter__(self):
        return iter(self.functions)

    def __len__(self) -> int:
        return len(self.functions)

    def __getitem__(self, k):
        return self.functions[k]


def affine_function_space(A: PointConfiguration) -> AffineFunctionSpace:
    rows = [A.homogeneous[k].copy() for k in range(A.dim + 1)]
    r = A.aff_rank + 1
    return AffineFunctionSpace(tuple(rows), r, r == A.dim + 1)


def _independent_aff_rows(A: PointConfiguration) -> list:
    H = [list(row) for row in A.homogeneous]
    keep = la.independent_rows(H, A.tol)
    return [H[i] for i in keep]


def reduce_mod_aff(A: PointConfiguration, f, gauge="orthogonal") -> np.ndarray:
    """Return f minus the affine function selected by the gauge.

    ``orthogonal`` makes the result orthogonal to Aff(A). A list of labels
    whose points form an affine basis of the span makes the result vanish on
    those labels.
    """
    f = A.function(f) if not isinstance(f, np.ndarray) else f
    exact = A.exact and f.dtype == object
    tol = 0 if exact else la.FLOAT_TOL
    if isinstance(gauge, str):
        if gauge != "orthogonal":
            raise ConfigurationError(f"unknown gauge {gauge!r}")
        rows = _independent_aff_rows(A)
        if exact:
            gram = [[la.dot(r, s) for s in rows] for r in rows]
            coef = la.solve(gram, [la.dot(r, list(f)) for r in rows])
            aff = [sum(c * r[j] for c, r in zip(coef, rows)) for j in range(A.n)]
            return la.exact_array([f[j] - aff[j] for j in range(A.n)])
        M = np.asarray(rows, dtype=float).T
        ff = np.asarray(f, dtype=float)
        coef, *_ = np.linalg.lstsq(M, ff, rcond=None)
        return ff - M @ coef
    labels = list(gauge)
    if len(set(labels)) != len(labels):
        raise ConfigurationError("gauge labels must be distinct")
    idx = [A.index(lab) for lab in labels]
    pts = [A.coords[i] for i in idx]
    if len(idx) != A.aff_rank + 1 or geo.affine_rank(pts, A.tol) != A.aff_rank:
        raise ConfigurationError(f"gauge labels {labels} are not an affine basis of the configuration")
    # affine function on span: xi(a) = sum_k bary_k(a) * f(g_k)
    out = []
    for j in range(A.n):
        bary = geo.barycentric(pts, A.coords[j], A.tol)
        val = sum(b * (f[i] if exact else float(f[i])) for b, i in zip(bary, idx))
        out.append(f[j] - val if exact else float(f[j]) - float(val))
    if exact:
        return la.exact_array(out)
    arr = np.asarray(out, dtype=float)
    arr[idx] = 0.0
    return arr


def aff_residual(A: PointConfiguration, f) -> float:
    """Euclidean norm of the component of f orthogonal to Aff(A)."""
    return float(np.linalg.norm(np.asarray(reduce_mod_aff(A, np.asarray(f, dtype=float)), dtype=float)))


def in_aff(A: PointConfiguration, f, tol: float = 1e-9) -> bool:
    f = np.asarray(f)
    if A.exact and f.dtype == object:
        return all(x == 0 for x in reduce_mod_aff(A, f))
    return aff_residual(A, f) <= tol * max(1.0, float(np.abs(np.asarray(f, dtype=float)).max(initial=0)))


def taut(A: PointConfiguration, z) -> np.ndarray:
    """The tautological map z -> sum_a z_a a."""
    z = np.asarray(z)
    if z.dtype == object and A.exact:
        return la.exact_array([sum(z[j] * A.coords[j][k] for j in range(A.n)) for k in range(A.dim)])
    return np.asarray(z, dtype=float) @ A.points


def faces_of_configuration(A: PointConfiguration) -> list[ConfigFace]:
    """All nonempty faces of A, smallest first, including A itself."""
    return list(A.faces)


def weight_vector(A: PointConfiguration, values) -> np.ndarray:
    """A strictly positive float function on A."""
    w = np.asarray(A.function(values), dtype=float)
    if not np.all(w > 0) or not np.all(np.isfinite(w)):
        raise ConfigurationError("weights must be finite and strictly positive")
    return w


def affine_function(A: PointConfiguration, const, linear: Sequence) -> np.ndarray:
    """The function a -> const + <linear, a> on A."""
    vals = [const + sum(l * x for l, x in zip(linear, c)) for c in A.coords]
    return A.function(vals)
