"""Polyhedral cones {x : E x = 0, psi(x) >= 0} with lineality, rays and faces.

Forms are kept exact when they are built from rational data. Redundancy is
screened with a small LP and then confirmed exactly against the enumerated
rays, so the stored description is irredundant even though the LP is float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from . import _linalg as la

EPS_CONE = 1e-9


class ConeError(ValueError):
    pass


def _tol(exact):
    return 0 if exact else EPS_CONE


def _reduce_by_rows(vec, red_rows, pivots):
    """Reduce vec modulo the row space given in RREF form."""
    v = list(vec)
    for row, p in zip(red_rows, pivots):
        if v[p] != 0:
            f = v[p]
            v = [a - f * b for a, b in zip(v, row)]
    return v


def _is_zero(v, tol):
    return all((abs(x) <= tol) if tol else x == 0 for x in v)


def _lp_min(obj, ineq, eq, n):
    """min obj.x over {eq x = 0, ineq x >= 0, -1 <= x <= 1}."""
    A_ub = -np.asarray(ineq, dtype=float) if ineq else None
    b_ub = np.zeros(len(ineq)) if ineq else None
    A_eq = np.asarray(eq, dtype=float) if eq else None
    b_eq = np.zeros(len(eq)) if eq else None
    res = linprog(np.asarray(obj, dtype=float), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(-1, 1)] * n, method="highs")
    if res.status != 0:
        raise ConeError(f"linear program failed: {res.message}")
    return float(res.fun)


@dataclass(frozen=True, eq=False)
class Cone:
    """A cone in R^n: equations E x = 0 and inequalities psi_k(x) >= 0.

    ``lineality_basis`` spans the largest subspace inside the cone and
    ``rays`` generate the cone modulo lineality; rays are chosen orthogonal
    to the lineality space and scaled so the largest entry has magnitude 1.
    """

    ambient_dim: int
    forms: tuple
    equations: tuple
    lineality_basis: tuple
    rays: tuple
    exact: bool = True
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def tol(self):
        return _tol(self.exact)

    @property
    def dim(self) -> int:
        """Dimension of the linear span of the cone."""
        return len(self.lineality_basis) + len(self.rays_basis)

    @cached_property
    def rays_basis(self) -> list:
        idx = la.independent_rows([list(r) for r in self.rays], self.tol)
        return [self.rays[i] for i in idx]

    @property
    def lineality_dim(self) -> int:
        return len(self.lineality_basis)

    def form_values(self, x) -> list:
        return [la.dot(f, x) for f in self.forms]

    def equation_values(self, x) -> list:
        return [la.dot(e, x) for e in self.equations]

    def contains(self, x, tol=None) -> bool:
        return membership(self, x, tol).status != "outside"

    def span_basis(self) -> list:
        """Basis of the linear span <cone>."""
        return [list(v) for v in self.lineality_basis] + [list(r) for r in self.rays_basis]

    def annihilator(self) -> list:
        """Basis of linear forms vanishing on the span of the cone."""
        span = self.span_basis()
        if not span:
            one = Fraction(1) if self.exact else 1.0
            zero = Fraction(0) if self.exact else 0.0
            return [[one if j == k else zero for j in range(self.ambient_dim)] for k in range(self.ambient_dim)]
        return la.nullspace(span, self.ambient_dim, self.tol)

    def relative_interior_point(self) -> list:
        zero = Fraction(0) if self.exact else 0.0
        out = [zero] * self.ambient_dim
        for r in self.rays:
            out = [a + b for a, b in zip(out, r)]
        return out

    def ray_tight_sets(self) -> list[frozenset]:
        return [frozenset(k for k, f in enumerate(self.forms) if _is_zero([la.dot(f, r)], self.tol))
                for r in self.rays]

    def closure(self, tight) -> frozenset:
        """Smallest closed tight set containing the given form indices."""
        tight = frozenset(tight)
        rays = [r for r, T in zip(self.rays, self.ray_tight_sets()) if tight <= T]
        return frozenset(k for k, f in enumerate(self.forms)
                         if all(_is_zero([la.dot(f, r)], self.tol) for r in rays))

    def face(self, tight) -> "ConeFace":
        return ConeFace(self, self.closure(tight))

    @cached_property
    def _faces(self) -> list:
        tsets = self.ray_tight_sets()
        nrays = len(self.rays)
        full = frozenset(range(nrays))
        facet_raysets = []
        for k in range(len(self.forms)):
            facet_raysets.append(frozenset(j for j in range(nrays) if k in tsets[j]))
        sets = {full, frozenset()}
        frontier = set(facet_raysets)
        while frontier:
            sets |= frontier
            new = set()
            for a in frontier:
                for b in facet_raysets:
                    c = a & b
                    if c not in sets:
                        new.add(c)
            frontier = new
        faces = {}
        for rs in sets:
            tight = frozenset(k for k in range(len(self.forms)) if rs <= facet_raysets[k])
            faces[tight] = ConeFace(self, tight)
        return sorted(faces.values(), key=lambda f: (f.dim, sorted(f.ray_indices)))

    def faces(self) -> list["ConeFace"]:
        """Face lattice, smallest (the lineality space) first."""
        return list(self._faces)

    def minimal_face(self) -> "ConeFace":
        return self._faces[0]


@dataclass(frozen=True, eq=False)
class ConeFace:
    parent: Cone
    tight: frozenset

    def __eq__(self, other):
        return isinstance(other, ConeFace) and other.parent is self.parent and other.tight == self.tight

    def __hash__(self):
        return hash((id(self.parent), self.tight))

    @cached_property
    def ray_indices(self) -> tuple:
        tsets = self.parent.ray_tight_sets()
        return tuple(j for j, T in enumerate(tsets) if self.tight <= T)

    @property
    def rays(self) -> list:
        return [self.parent.rays[j] for j in self.ray_indices]

    @cached_property
    def as_cone(self) -> Cone:
        P = self.parent
        eqs = list(P.equations) + [P.forms[k] for k in sorted(self.tight)]
        forms = [P.forms[k] for k in range(len(P.forms)) if k not in self.tight]
        return make_cone(P.ambient_dim, forms, eqs, P.exact, dict(P.meta))

    @property
    def dim(self) -> int:
        return self.parent.lineality_dim + len(la.independent_rows([list(r) for r in self.rays], self.parent.tol))

    def span_basis(self) -> list:
        return self.as_cone.span_basis()

    def annihilator(self) -> list:
        return self.as_cone.annihilator()

    def relative_interior_point(self) -> list:
        return self.as_cone.relative_interior_point()

    def contains_in_span(self, x, tol: float = 1e-9) -> bool:
        ann = self.annihilator()
        scale = max(1.0, max((abs(float(v)) for v in x), default=0.0))
        return all(abs(float(la.dot(p, x))) <= tol * scale for p in ann)

    def __repr__(self) -> str:
        return f"ConeFace(dim={self.dim}, tight={sorted(self.tight)})"


def _independent(rows, tol):
    rows = [list(r) for r in rows]
    idx = la.independent_rows(rows, tol)
    return tuple(tuple(rows[i]) for i in idx)


def _dedupe_forms(forms, equations, tol):
    if equations:
        red, piv = la.rref([list(e) for e in equations], tol)
    else:
        red, piv = [], []
    out, seen = [], set()
    for f in forms:
        g = _reduce_by_rows(f, red, piv)
        if _is_zero(g, tol):
            continue
        g = la.normalize_direction(g)
        key = tuple(g) if not tol else tuple(round(float(x), 9) for x in g)
        if key in seen:
            continue
        seen.add(key)
        out.append(tuple(g))
    return out


def _enumerate_rays(n, forms, constraints, tol):
    """Extreme rays of the pointed cone {constraints x = 0, forms x >= 0}."""
    base_rank = la.rank(constraints, tol) if constraints else 0
    k = n - base_rank
    if k <= 0:
        return []
    found, seen = [], set()
    for T in combinations(range(len(forms)), k - 1):
        rows = [list(r) for r in constraints] + [list(forms[j]) for j in T]
        null = la.nullspace(rows, n, tol) if rows else la.nullspace([], n, tol)
        if len(null) != 1:
            continue
        r = null[0]
        vals = [la.dot(f, r) for f in forms]
        if tol:
            sc = max(1.0, max(abs(float(x)) for x in r))
            vals = [0.0 if abs(v) <= tol * sc else v for v in vals]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            r = [-x for x in r]
        else:
            continue
        if not forms and k == 1:
            raise ConeError("cone contains a line outside its lineality")
        r = la.normalize_direction(r)
        key = tuple(r) if not tol else tuple(round(float(x), 9) for x in r)
        if key not in seen:
            seen.add(key)
            found.append(tuple(r))
    return found


def make_cone(n: int, forms, equations=(), exact: bool | None = None, meta=None) -> Cone:
    """Build a Cone from possibly redundant inequalities psi(x) >= 0 and equations."""
    forms = [list(f) for f in forms]
    equations = [list(e) for e in equations]
    if exact is None:
        exact = la.all_exact(forms + equations) if (forms or equations) else True
    if exact:
        forms = [[la.to_fraction(x) for x in f] for f in forms]
        equations = [[la.to_fraction(x) for x in e] for e in equations]
    else:
        forms = [[float(x) for x in f] for f in forms]
        equations = [[float(x) for x in e] for e in equations]
    tol = _tol(exact)
    equations = [list(e) for e in _independent(equations, tol)]
    forms = [list(f) for f in _dedupe_forms(forms, equations, tol)]

    # implicit equalities: forms forced to zero on the whole cone
    implicit = False
    changed = True
    while changed and forms:
        changed = False
        for idx, f in enumerate(forms):
            top = -_lp_min([-x for x in f], forms, equations, n)
            if top <= 1e-10:
                equations = [list(e) for e in _independent(equations + [f], tol)]
                forms = [list(g) for g in _dedupe_forms(forms[:idx] + forms[idx + 1:], equations, tol)]
                changed = implicit = True
                break

    # LP screening for redundancy
    kept = list(forms)
    j = 0
    while j < len(kept):
        others = kept[:j] + kept[j + 1:]
        low = _lp_min(kept[j], others, equations, n)
        if low >= -1e-10:
            kept.pop(j)
        else:
            j += 1

    lin = la.nullspace(equations + kept, n, tol) if (equations or kept) else la.nullspace([], n, tol)
    while True:
        constraints = equations + [list(v) for v in lin]
        rays = _enumerate_rays(n, kept, constraints, tol)
        bad = [f for f in forms if f not in kept and any(
            (la.dot(f, r) < -tol * max(1.0, max(abs(float(x)) for x in r))) for r in rays)]
        if not bad:
            break
        kept.append(bad[0])
        lin = la.nullspace(equations + kept, n, tol)
    # drop anything that is not a facet, exact check by tight rays
    k = n - (la.rank(constraints, tol) if constraints else 0)
    facets = []
    for f in kept:
        tight = [list(r) for r in rays if _is_zero([la.dot(f, r)], tol * 10 if tol else 0)]
        r_t = la.rank(tight, tol) if tight else 0
        if r_t == k - 1:
            facets.append(tuple(f))
    m = dict(meta or {})
    m["implicit_equalities"] = implicit
    return Cone(n, tuple(facets), tuple(tuple(e) for e in equations),
                tuple(tuple(v) for v in lin), tuple(rays), exact, m)


@dataclass(frozen=True)
class Membership:
    status: str
    tight: frozenset
    face: ConeFace | None
    values: tuple


def membership(C: Cone, x, tol=None) -> Membership:
    """Classify x as in the relative interior, on the boundary, or outside C."""
    exact = C.exact and la.all_exact(x) and tol is None
    if tol is None:
        tol = 0 if exact else EPS_CONE
    if exact:
        x = [la.to_fraction(v) for v in x]
    else:
        x = [float(v) for v in x]
    scale = max(1.0, max((abs(float(v)) for v in x), default=0.0))
    eps = tol * scale
    eq = C.equation_values(x)
    vals = tuple(C.form_values(x))
    if any(abs(v) > eps for v in eq) or any(v < -eps for v in vals):
        return Membership("outside", frozenset(), None, vals)
    tight = frozenset(k for k, v in enumerate(vals) if abs(v) <= eps)
    if not tight:
        return Membership("interior", tight, ConeFace(C, frozenset()), vals)
    return Membership("boundary", C.closure(tight), C.face(tight), vals)


cone_membership = membership
