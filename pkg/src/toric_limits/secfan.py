"""Secondary cones, sampled secondary fans, and sequences inside cones.

The sequence tools (boundedness relative to a face, the minimum face of
boundedness, and the split v_i = u_i + vbar_i) live in ``sequences`` and are
re-exported here.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import _geometry as geo
from . import _linalg as la
from .cone import Cone, ConeError, ConeFace, Membership, make_cone, membership
from .pointconfig import PointConfiguration, reduce_mod_aff
from .subdivision import Subdivision, _affine_basis, induced_subdivision, refines


class NotRegularError(ValueError):
    pass


def _secondary_rows(A: PointConfiguration, S: Subdivision):
    """Equation and inequality forms on R^A cutting out the secondary cone of S."""
    tol = A.tol
    eqs, ineqs = [], []
    zero = Fraction(0) if A.exact else 0.0
    for F, idx in zip(S.facets, S.facet_indices):
        basis = _affine_basis(A, list(idx))
        pts = [A.coords[i] for i in basis]
        fset = set(idx)
        for j in range(A.n):
            if j in basis:
                continue
            coeffs = geo.barycentric(pts, A.coords[j], tol)
            row = [zero] * A.n
            for c, b in zip(coeffs, basis):
                row[b] += c
            row[j] -= 1
            (eqs if j in fset else ineqs).append(row)
    return eqs, ineqs


def secondary_cone(A: PointConfiguration, S: Subdivision, check: bool = True) -> Cone:
    """Closure of the set of lifts inducing S, in H-representation on R^A.

    Raises ``NotRegularError`` when no lift induces S.
    """
    A.require_spanning()
    eqs, ineqs = _secondary_rows(A, S)
    C = make_cone(A.n, ineqs, eqs, A.exact, {"subdivision": S})
    if check:
        if C.meta.get("implicit_equalities"):
            raise NotRegularError("the secondary cone has empty relative interior; S is not regular")
        pt = C.relative_interior_point()
        if induced_subdivision(A, A.function(pt)) != S:
            raise NotRegularError("lifts from the cone do not induce S; S is not regular")
    return C


def gauge_coordinates(A: PointConfiguration, f, gauge) -> np.ndarray:
    """Values of f on the labels outside the gauge, after the label gauge is applied."""
    red = reduce_mod_aff(A, f, gauge)
    keep = [j for j, lab in enumerate(A.labels) if lab not in set(gauge)]
    return red[keep]


def form_in_gauge(A: PointConfiguration, form, gauge) -> list:
    """A form vanishing on Aff(A), restricted to the non-gauge coordinates."""
    return [form[j] for j, lab in enumerate(A.labels) if lab not in set(gauge)]


def subdivision_of_face(A: PointConfiguration, face) -> Subdivision:
    """The subdivision induced by a relative-interior point of a cone or face."""
    return induced_subdivision(A, A.function(face.relative_interior_point()))


@dataclass
class FanCone:
    subdivision: Subdivision
    cone: Cone
    dim: int
    hits: int = 0


@dataclass
class SecondaryFan:
    config: PointConfiguration
    cones: list
    edges: list
    n_samples: int
    complete: bool
    meta: dict = field(default_factory=dict)

    def by_dim(self, k: int) -> list:
        return [c for c in self.cones if c.dim == k]

    @property
    def lineality_dim(self) -> int:
        return min(c.dim for c in self.cones)

    def maximal(self) -> list:
        top = max(c.dim for c in self.cones)
        return self.by_dim(top)

    def rays(self) -> list:
        return self.by_dim(self.lineality_dim + 1)

    def minimal(self) -> list:
        return self.by_dim(self.lineality_dim)

    def find(self, S: Subdivision):
        for c in self.cones:
            if c.subdivision == S:
                return c
        return None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TORIC_LIMITS_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    items = list(items)
    n = _threads()
    if n <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _random_lift(A: PointConfiguration, seed: int, index: int) -> np.ndarray:
    rng = np.random.default_rng([seed, index])
    return rng.standard_normal(A.n)


def sample_secondary_fan(A: PointConfiguration, n_samples: int, seed: int = 0) -> SecondaryFan:
    """Chambers found by inducing random lifts, together with all their faces.

    Every face of a discovered chamber is included with its subdivision, so
    when all chambers are hit the result is the whole fan. ``complete`` is
    True when each wall is shared by exactly two chambers.
    """
    A.require_spanning()
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    subs = parallel_map(lambda k: induced_subdivision(A, _random_lift(A, seed, k)), range(n_samples))
    counts = Counter(subs)
    chambers = sorted(counts, key=lambda S: (S.facets, S.nonparticipating))
    found: dict = {}
    for S in chambers:
        C = secondary_cone(A, S)
        S = subdivision_of_face(A, C)
        found.setdefault(S, FanCone(S, C, C.dim, counts.get(S, 0)))
    top = max(fc.dim for fc in found.values())
    full = [fc for fc in found.values() if fc.dim == top]
    for fc in full:
        for face in fc.cone.faces():
            if face.dim == top:
                continue
            T = subdivision_of_face(A, face)
            if T not in found:
                found[T] = FanCone(T, face.as_cone, face.dim, 0)
    cones = sorted(found.values(), key=lambda c: (c.dim, c.subdivision.facets))
    # covering relations: S refined by T and dims differ by one
    edges = []
    for i, a in enumerate(cones):
        for j, b in enumerate(cones):
            if b.dim == a.dim + 1 and refines(a.subdivision, b.subdivision):
                edges.append((i, j))
    walls = Counter()
    for fc in full:
        for face in fc.cone.faces():
            if face.dim == top - 1:
                walls[subdivision_of_face(A, face)] += 1
    complete = all(v == 2 for v in walls.values()) if top > cones[0].dim else True
    return SecondaryFan(A, cones, edges, n_samples, complete,
                        {"seed": seed, "chamber_hits": [counts.get(fc.subdivision, 0) for fc in full]})


from .sequences import (  # noqa: E402
    BoundednessResult,
    DecompositionResult,
    MinimumFaceResult,
    SequenceSpec,
    is_sigma_bounded,
    minimal_recurring_cone,
    minimum_face_of_boundedness,
    recurring_cones,
    sigma_decomposition,
)

cone_membership = membership

__all__ = [
    "BoundednessResult", "Cone", "ConeError", "ConeFace", "DecompositionResult", "FanCone",
    "Membership", "MinimumFaceResult", "membership", "parallel_map", "NotRegularError", "SecondaryFan", "SequenceSpec",
    "cone_membership", "form_in_gauge", "gauge_coordinates", "is_sigma_bounded",
    "minimal_recurring_cone", "minimum_face_of_boundedness", "recurring_cones", "sample_secondary_fan",
    "secondary_cone", "sigma_decomposition", "subdivision_of_face",
]
