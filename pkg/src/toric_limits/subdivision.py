"""Regular subdivisions induced by lifting functions, and their certificates.

The subdivision S_lambda is read off the upper hull of the lifted points
(a, lambda(a)): every upper facet is the graph of an affine function xi with
xi >= lambda on A, and the facet of S is the set where equality holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np

from . import _geometry as geo
from . import _linalg as la
from .pointconfig import ConfigurationError, PointConfiguration, taut

EPS_HULL = 1e-9


class SubdivisionError(ValueError):
    pass


def _lift_mode(A: PointConfiguration, lam) -> tuple[list, float]:
    lam = np.asarray(lam)
    if lam.shape != (A.n,):
        raise ConfigurationError(f"lift must have {A.n} entries")
    if A.exact and lam.dtype == object and la.all_exact(lam):
        return [la.to_fraction(x) for x in lam], 0
    return [float(x) for x in lam], EPS_HULL


def _affine_fit(points, values, tol):
    """(c0, c) with c0 + <c, p> = value on affinely independent points, or None."""
    rows = [[1.0 if tol else Fraction(1)] + list(p) for p in points]
    try:
        sol = la.solve(rows, list(values), tol)
    except np.linalg.LinAlgError:
        return None
    return sol[0], sol[1:]


def _eval_affine(ext, x):
    c0, c = ext
    return c0 + la.dot(c, x)


def _upper_facets_exact(A: PointConfiguration, lam: list):
    d = A.dim
    coords = [list(c) for c in A.coords]
    seen = {}
    for combo in combinations(range(A.n), d + 1):
        ext = _affine_fit([coords[i] for i in combo], [lam[i] for i in combo], 0)
        if ext is None:
            continue
        slack = [_eval_affine(ext, coords[j]) - lam[j] for j in range(A.n)]
        if any(s < 0 for s in slack):
            continue
        members = tuple(j for j in range(A.n) if slack[j] == 0)
        seen.setdefault(members, ext)
    return seen


def _upper_facets_float(A: PointConfiguration, lam: list):
    d = A.dim
    pts = A.points
    lam_arr = np.asarray(lam, dtype=float)
    combos = np.array(list(combinations(range(A.n), d + 1)), dtype=int)
    if combos.size == 0:
        return {}
    M = np.concatenate([np.ones((len(combos), d + 1, 1)), pts[combos]], axis=2)
    scale = max(1.0, float(np.abs(pts).max(initial=0)), float(np.abs(lam_arr).max(initial=0)))
    sv = np.linalg.svd(M, compute_uv=False)
    ok = sv[:, -1] > 1e-9 * max(1.0, float(np.abs(pts).max(initial=0)))
    combos, M = combos[ok], M[ok]
    if not len(combos):
        return {}
    coef = np.linalg.solve(M, lam_arr[combos][..., None])[..., 0]
    H = np.concatenate([np.ones((A.n, 1)), pts], axis=1)
    slack = coef @ H.T - lam_arr[None, :]
    eps = EPS_HULL * scale
    seen = {}
    for k in np.nonzero(slack.min(axis=1) >= -eps)[0]:
        members = tuple(int(j) for j in np.nonzero(np.abs(slack[k]) <= eps)[0])
        if members not in seen:
            seen[members] = (float(coef[k, 0]), [float(x) for x in coef[k, 1:]])
    return seen


def _merge_tolerance_duplicates(found: dict) -> dict:
    # within tolerance, a facet's equality set may pick up extra near-incident
    # points from one basis and not another; keep only maximal sets
    keys = sorted(found, key=len, reverse=True)
    kept = {}
    for k in keys:
        if not any(set(k) <= set(m) for m in kept):
            kept[k] = found[k]
    return kept


@dataclass(frozen=True, eq=False)
class Subdivision:
    """A polyhedral subdivision of A stored by its facets (label tuples in A order)."""

    config: PointConfiguration
    facets: tuple
    nonparticipating: tuple = ()
    lift: object = field(default=None, repr=False)
    extensions: dict = field(default_factory=dict, repr=False)

    @property
    def key(self):
        return (self.facets, self.nonparticipating)

    def __eq__(self, other):
        if not isinstance(other, Subdivision):
            return NotImplemented
        return self.config.labels == other.config.labels and self.key == other.key

    def __hash__(self):
        return hash((self.config.labels, self.key))

    @cached_property
    def facet_indices(self) -> tuple:
        return tuple(self.config.indices(F) for F in self.facets)

    @property
    def is_trivial(self) -> bool:
        return len(self.facets) == 1 and len(self.facets[0]) == self.config.n

    @property
    def is_triangulation(self) -> bool:
        return all(len(F) == self.config.dim + 1 for F in self.facets)

    @cached_property
    def participating(self) -> tuple:
        used = set().union(*[set(F) for F in self.facets]) if self.facets else set()
        return tuple(lab for lab in self.config.labels if lab in used)

    def facet_config(self, F) -> PointConfiguration:
        return self.config.restrict(F)

    @cached_property
    def _halfspaces(self) -> dict:
        # ambient inequalities <psi, x> <= c describing conv(F), per facet
        out = {}
        A = self.config
        for F, idx in zip(self.facets, self.facet_indices):
            frame, facets, _ = geo.hull_faces([A.coords[i] for i in idx], A.tol)
            out[F] = [frame.pullback(f.normal, f.offset) for f in facets]
        return out

    def halfspaces(self, F) -> list:
        return self._halfspaces[tuple(F)]

    def faces(self) -> list[tuple]:
        """All faces of S (faces of its facets), as label tuples."""
        out = set()
        for F in self.facets:
            sub = self.config.restrict(F)
            for face in sub.faces:
                out.add(face.labels)
        return sorted(out, key=lambda f: (len(f), self.config.indices(f)))

    def extension(self, F, lam=None):
        """(c0, c) of the affine function agreeing with lam on the facet F."""
        F = tuple(F)
        if lam is None and F in self.extensions:
            return self.extensions[F]
        lam = self.lift if lam is None else lam
        if lam is None:
            raise SubdivisionError("no lifting function attached to this subdivision")
        A = self.config
        vals, tol = _lift_mode(A, lam)
        idx = A.indices(F)
        basis = _affine_basis(A, idx)
        return _affine_fit([A.coords[i] for i in basis], [vals[i] for i in basis], tol)

    def validate(self) -> None:
        """Check spanning facets, the volume partition, and pairwise face intersections."""
        A = self.config
        total = 0
        for F, idx in zip(self.facets, self.facet_indices):
            pts = [A.coords[i] for i in idx]
            if geo.affine_rank(pts, A.tol) != A.dim:
                raise SubdivisionError(f"facet {F} does not span")
            total += geo.hull_volume(pts, A.tol)
        vol = A.volume
        if A.exact:
            if total != vol:
                raise SubdivisionError(f"facet volumes sum to {total}, expected {vol}")
        elif abs(float(total) - float(vol)) > 1e-9 * float(vol):
            raise SubdivisionError(f"facet volumes sum to {total}, expected {vol}")
        for F, G in combinations(self.facets, 2):
            common = tuple(lab for lab in F if lab in G)
            if not common:
                continue
            for H in (F, G):
                sub = A.restrict(H)
                if common not in {f.labels for f in sub.faces}:
                    raise SubdivisionError(f"{common} is not a face of facet {H}")

    def to_dict(self) -> dict:
        return {"facets": [list(F) for F in self.facets], "nonparticipating": list(self.nonparticipating)}


def _affine_basis(A: PointConfiguration, idx) -> list:
    """Lexicographically first affinely independent (rank+1)-subset of the indices."""
    pts = [A.coords[i] for i in idx]
    k = geo.affine_rank(pts, A.tol)
    for combo in combinations(range(len(idx)), k + 1):
        if geo.affine_rank([pts[j] for j in combo], A.tol) == k:
            return [idx[j] for j in combo]
    raise SubdivisionError("no affine basis found")


def subdivision_from_facets(A: PointConfiguration, facets, nonparticipating=None, lift=None) -> Subdivision:
    """Build a Subdivision from label subsets, normalizing order."""
    norm = []
    for F in facets:
        labels = set(F)
        for lab in labels:
            A.index(lab)
        norm.append(tuple(lab for lab in A.labels if lab in labels))
    norm = tuple(sorted(set(norm), key=lambda F: A.indices(F)))
    used = set().union(*[set(F) for F in norm]) if norm else set()
    if nonparticipating is None:
        nonparticipating = tuple(lab for lab in A.labels if lab not in used)
    else:
        nonparticipating = tuple(lab for lab in A.labels if lab in set(nonparticipating))
    return Subdivision(A, norm, nonparticipating, lift)


def induced_subdivision(A: PointConfiguration, lam) -> Subdivision:
    """The regular subdivision S_lambda of a spanning configuration."""
    A.require_spanning()
    vals, tol = _lift_mode(A, lam)
    found = _upper_facets_exact(A, vals) if tol == 0 else _merge_tolerance_duplicates(_upper_facets_float(A, vals))
    facets = tuple(sorted(found))
    labels = tuple(A.labels_of(F) for F in facets)
    used = set().union(*[set(F) for F in facets])
    nonpart = tuple(A.labels[j] for j in range(A.n) if j not in used)
    ext = {A.labels_of(F): found[F] for F in facets}
    lift = la.exact_array(vals) if tol == 0 else np.asarray(vals, dtype=float)
    return Subdivision(A, labels, nonpart, lift, ext)


def upper_envelope(A: PointConfiguration, lam, x, subdivision: Subdivision | None = None):
    """Value at x of the smallest concave function on conv(A) that is >= lam on A."""
    S = subdivision if subdivision is not None else induced_subdivision(A, lam)
    if geo.locate(A.frame, A.facets_local, x, A.tol) is None:
        raise ConfigurationError(f"point {list(x)} lies outside conv(A)")
    _, tol = _lift_mode(A, lam)
    xs = [la.to_fraction(v) for v in x] if tol == 0 else [float(v) for v in x]
    return min(_eval_affine(S.extension(F) if subdivision is None else S.extension(F, lam), xs)
               for F in S.facets)


@dataclass(frozen=True)
class NonfaceSet:
    pairs: tuple
    singletons: tuple

    def monomials(self) -> list[tuple]:
        return [tuple(p) for p in self.pairs] + [(c,) for c in self.singletons]


def minimal_nonfaces(S: Subdivision) -> NonfaceSet:
    """Participating pairs lying in no common face, and the nonparticipating points."""
    facet_sets = [set(F) for F in S.facets]
    pairs = []
    part = S.participating
    for a, b in combinations(part, 2):
        if not any(a in F and b in F for F in facet_sets):
            pairs.append((a, b))
    return NonfaceSet(tuple(pairs), tuple(S.nonparticipating))


def refines(S: Subdivision, T: Subdivision) -> bool:
    """True when S is refined by T: every face of T lies in a face of S."""
    if S.config.labels != T.config.labels:
        raise SubdivisionError("subdivisions of different configurations")
    return all(any(set(G) <= set(F) for F in S.facets) for G in T.facets)


@dataclass(frozen=True)
class Certificate:
    """Witness that a set is not a face of S_lambda.

    ``alpha`` maps the labels of ``facet`` to coefficients (convex for pair
    and singleton certificates, affine for external ones) and ``point`` is
    the combination sum alpha_g g. ``margin`` is the strict gap between the
    affine extension of lambda over the facet and the relevant lift value.
    """

    kind: str
    nonface: tuple
    facet: tuple
    alpha: dict
    point: tuple
    margin: object
    beta: tuple | None = None

    def check(self, A: PointConfiguration, lam, tol: float = 1e-10) -> bool:
        vals = [float(x) for x in lam]
        s_alpha = sum(float(v) for v in self.alpha.values())
        if abs(s_alpha - 1) > tol:
            return False
        comb = np.zeros(A.dim)
        for lab, c in self.alpha.items():
            comb += float(c) * A.points[A.index(lab)]
        if np.abs(comb - np.asarray(self.point, dtype=float)).max() > tol:
            return False
        if self.kind in ("pair", "singleton") and any(float(c) < -tol for c in self.alpha.values()):
            return False
        ext = sum(float(c) * vals[A.index(lab)] for lab, c in self.alpha.items())
        if self.kind == "pair":
            a, b = self.nonface
            ba, bb = (float(x) for x in self.beta)
            if abs(ba + bb - 1) > tol or ba <= 0 or bb <= 0:
                return False
            seg = ba * A.points[A.index(a)] + bb * A.points[A.index(b)]
            if np.abs(seg - comb).max() > tol:
                return False
            chord = ba * vals[A.index(a)] + bb * vals[A.index(b)]
        else:
            target = self.nonface[0]
            if self.kind == "external" and np.abs(comb - A.points[A.index(target)]).max() > tol:
                return False
            chord = vals[A.index(target)]
        return abs((ext - chord) - float(self.margin)) <= tol * max(1.0, abs(ext)) and float(self.margin) > 0


def _segment_interval(halfspaces, a, b, tol):
    """Parameter interval {t in [0,1] : (1-t)a + tb satisfies all halfspaces}, or None."""
    zero = 0.0 if tol else Fraction(0)
    one = 1.0 if tol else Fraction(1)
    lo, hi = zero, one
    for psi, c in halfspaces:
        pa = la.dot(psi, a) - c
        slope = la.dot(psi, b) - la.dot(psi, a)
        # pa + t * slope <= 0
        if (abs(slope) <= tol) if tol else (slope == 0):
            if pa > (tol if tol else 0):
                return None
            continue
        t = -pa / slope
        if slope > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
    if lo > hi + (tol if tol else 0):
        return None
    return lo, hi


def convex_certificate(S: Subdivision, nonface, lam=None) -> Certificate:
    """Certificate for a minimal non-face of S_lambda: a pair {a,b} or a singleton c."""
    A = S.config
    lam = S.lift if lam is None else lam
    if lam is None:
        raise SubdivisionError("a lifting function is required")
    vals, tol = _lift_mode(A, lam)
    crd = [list(c) for c in A.coords] if tol == 0 else [list(p) for p in A.points]
    nonface = tuple(nonface) if not isinstance(nonface, str) else (nonface,)
    nf = minimal_nonfaces(S)
    if len(nonface) == 1:
        c = nonface[0]
        if c not in nf.singletons:
            raise SubdivisionError(f"{c} participates in S, so it is not a non-face")
        x = crd[A.index(c)]
        for F in S.facets:
            if geo.locate(*_facet_frame(A, F), x, A.tol) is not None:
                return _certificate_at(S, "singleton", nonface, F, x, vals, tol, vals[A.index(c)], None)
        raise SubdivisionError("no facet contains the point")
    if len(nonface) != 2:
        raise SubdivisionError("non-faces are pairs or singletons")
    a, b = nonface
    if tuple(sorted(nonface, key=A.index)) not in {tuple(sorted(p, key=A.index)) for p in nf.pairs}:
        raise SubdivisionError(f"{nonface} is not a minimal non-face of S")
    pa, pb = crd[A.index(a)], crd[A.index(b)]
    la_, lb_ = vals[A.index(a)], vals[A.index(b)]
    intervals = []
    for F in S.facets:
        iv = _segment_interval(S.halfspaces(F), pa, pb, tol)
        if iv is not None:
            intervals.append((F, iv))
    breaks = sorted({t for _, iv in intervals for t in iv if 0 < t < 1})

    def margin_at(t):
        x = [(1 - t) * u + t * v for u, v in zip(pa, pb)]
        g = min(_eval_affine(S.extension(F, lam), x) for F, (lo, hi) in intervals
                if lo - (tol or 0) <= t <= hi + (tol or 0))
        return g - ((1 - t) * la_ + t * lb_)

    best_t, best_m = None, None
    for t in breaks:
        m = margin_at(t)
        if best_m is None or m > best_m + (tol or 0):
            best_t, best_m = t, m
    if best_t is None or best_m <= 0:
        raise SubdivisionError("segment does not leave the upper hull; check the lift")
    # the facet the segment enters at best_t, ties broken by facet order
    ahead = [F for F, (lo, hi) in intervals if lo - (tol or 0) <= best_t < hi - (tol or 0)]
    G = ahead[0] if ahead else next(F for F, (lo, hi) in intervals if lo - (tol or 0) <= best_t <= hi + (tol or 0))
    x = [(1 - best_t) * u + best_t * v for u, v in zip(pa, pb)]
    chord = (1 - best_t) * la_ + best_t * lb_
    return _certificate_at(S, "pair", (a, b), G, x, vals, tol, chord, (1 - best_t, best_t))


def _facet_frame(A: PointConfiguration, F):
    idx = A.indices(F)
    frame, facets, _ = geo.hull_faces([A.coords[i] for i in idx], A.tol)
    return frame, facets


def _certificate_at(S, kind, nonface, G, x, vals, tol, base, beta):
    A = S.config
    idx = A.indices(G)
    pts = [A.coords[i] for i in idx] if tol == 0 else [list(A.points[i]) for i in idx]
    alpha = geo.convex_coefficients(pts, x, tol)
    if alpha is None:
        raise SubdivisionError("point not in the chosen facet")
    ext = sum(c * vals[i] for c, i in zip(alpha, idx))
    margin = ext - base
    return Certificate(kind, tuple(nonface), tuple(G), {A.labels[i]: c for c, i in zip(alpha, idx)},
                       tuple(x), margin, beta)


def affine_certificate(S: Subdivision, G, d, lam=None) -> Certificate:
    """Write an outside label d as an affine combination of an affine basis of the facet G."""
    A = S.config
    lam = S.lift if lam is None else lam
    if lam is None:
        raise SubdivisionError("a lifting function is required")
    vals, tol = _lift_mode(A, lam)
    G = tuple(lab for lab in A.labels if lab in set(G))
    if G not in S.facets:
        raise SubdivisionError(f"{G} is not a facet of S")
    if d in G:
        raise SubdivisionError(f"{d} belongs to the facet")
    idx = A.indices(G)
    if geo.affine_rank([A.coords[i] for i in idx], A.tol) != A.dim:
        raise SubdivisionError("facet does not span")
    basis = _affine_basis(A, idx)
    pts = [A.coords[i] for i in basis] if tol == 0 else [list(A.points[i]) for i in basis]
    target = A.coords[A.index(d)] if tol == 0 else list(A.points[A.index(d)])
    coeffs = geo.barycentric(pts, target, tol)
    ext = sum(c * vals[i] for c, i in zip(coeffs, basis))
    margin = ext - vals[A.index(d)]
    if margin <= 0:
        raise SubdivisionError("lift does not separate the point from the facet")
    alpha = {lab: (Fraction(0) if tol == 0 else 0.0) for lab in G}
    for c, i in zip(coeffs, basis):
        alpha[A.labels[i]] = c
    return Certificate("external", (d,), G, alpha, tuple(target), margin)
