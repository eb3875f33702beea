"""Sequences of functions on A inside secondary cones.

A structured sequence is a finite sum of power terms c * i**e per label,
optionally plus a bounded callable. Terms with e > 0 are the growth part; the
rest is bounded for i >= 1. Raw sequences are plain lists of values and every
conclusion drawn from them is a finite-data heuristic.
"""

from __future__ import annotations

import ast
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import linprog

from . import _linalg as la
from ._qp import solve_qp
from .cone import Cone, ConeFace, membership
from .pointconfig import PointConfiguration
from .subdivision import induced_subdivision

STRUCTURED = "structured"
RAW = "raw"
DEFAULT_SAMPLES = tuple(2 ** k for k in range(9))
RAW_GROWTH_EXPONENT = 0.25
MIN_RAW_LENGTH = 8


class SequenceError(ValueError):
    pass


# ---------------------------------------------------------------- expressions

Terms = dict  # Fraction exponent -> coefficient (Fraction or float)


def _const(x) -> Terms:
    return {Fraction(0): x} if x != 0 else {}


def _add(p: Terms, q: Terms, sign=1) -> Terms:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + sign * c
        if out[e] == 0:
            del out[e]
    return out


def _mul(p: Terms, q: Terms) -> Terms:
    out: Terms = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = e1 + e2
            out[e] = out.get(e, 0) + c1 * c2
            if out[e] == 0:
                del out[e]
    return out


def _single(p: Terms, what: str):
    if len(p) != 1:
        raise SequenceError(f"{what} must be a single term c*i**e")
    return next(iter(p.items()))


def _pow(p: Terms, r: Fraction) -> Terms:
    if r == int(r) and r >= 0:
        out = {Fraction(0): 1}
        for _ in range(int(r)):
            out = _mul(out, p)
        return out
    e, c = _single(p, "base of a fractional or negative power")
    if r != int(r) and c < 0:
        raise SequenceError("fractional power of a negative coefficient")
    if r == int(r):
        coef = Fraction(c) ** int(r) if la.is_exact_value(c) else float(c) ** int(r)
    else:
        coef = float(c) ** float(r)
        if coef == int(coef) and la.is_exact_value(c):
            coef = Fraction(int(coef))
    return {e * r: coef}


def _number(node) -> Fraction | float:
    v = node.value
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SequenceError(f"unsupported constant {v!r}")
    return Fraction(v) if isinstance(v, int) else la.to_fraction(v)


def parse_terms(expr) -> Terms:
    """Parse an expression in i into {exponent: coefficient}.

    Supported: numbers, i, sqrt(...), +, -, *, / by a single term, and
    ``**`` with a rational exponent. Numbers stay exact.
    """
    if isinstance(expr, (int, Fraction)):
        return _const(Fraction(expr))
    if isinstance(expr, float):
        return _const(la.to_fraction(expr))
    try:
        tree = ast.parse(str(expr), mode="eval")
    except SyntaxError as exc:
        raise SequenceError(f"cannot parse expression {expr!r}: {exc.msg}") from None

    def walk(node) -> Terms:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant):
            return _const(_number(node))
        if isinstance(node, ast.Name):
            if node.id != "i":
                raise SequenceError(f"unknown name {node.id!r}; only 'i' is allowed")
            return {Fraction(1): Fraction(1)}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = walk(node.operand)
            return {e: -c for e, c in inner.items()} if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp):
            left = walk(node.left)
            if isinstance(node.op, ast.Pow):
                right = walk(node.right)
                if any(e != 0 for e in right):
                    raise SequenceError("exponents must be constants")
                r = right.get(Fraction(0), 0)
                return _pow(left, la.to_fraction(r))
            right = walk(node.right)
            if isinstance(node.op, ast.Add):
                return _add(left, right)
            if isinstance(node.op, ast.Sub):
                return _add(left, right, -1)
            if isinstance(node.op, ast.Mult):
                return _mul(left, right)
            if isinstance(node.op, ast.Div):
                if not right:
                    raise SequenceError("division by zero")
                return _mul(left, _pow(right, Fraction(-1)))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt" \
                and len(node.args) == 1 and not node.keywords:
            return _pow(walk(node.args[0]), Fraction(1, 2))
        raise SequenceError(f"unsupported syntax in {expr!r}")

    return walk(tree)


def eval_terms(terms: Terms, i) -> float:
    return float(sum(float(c) * float(i) ** float(e) for e, c in terms.items()))


def eval_terms_exact(terms: Terms, i: int):
    """Exact value at integer i when all exponents are integers and coefficients rational."""
    total = Fraction(0)
    for e, c in terms.items():
        if e.denominator != 1 or not la.is_exact_value(c):
            return None
        total += Fraction(c) * Fraction(i) ** int(e)
    return total


# ---------------------------------------------------------------- sequence type

@dataclass(frozen=True, eq=False)
class SequenceSpec:
    config: PointConfiguration
    mode: str
    terms: tuple | None = None
    bounded_fn: Callable | None = None
    bound: float | None = None
    samples: tuple = DEFAULT_SAMPLES
    values: tuple | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def structured(cls, A: PointConfiguration, drift=None, bounded=None, terms=None, bound=None,
                   samples=None, bounded_fn=None) -> "SequenceSpec":
        per = [dict() for _ in range(A.n)]
        if terms is not None:
            for j, expr in enumerate(_per_label(A, terms)):
                per[j] = _add(per[j], parse_terms(expr))
        if drift is not None:
            for j, x in enumerate(_per_label(A, drift)):
                per[j] = _add(per[j], {Fraction(1): la.to_fraction(x)} if x != 0 else {})
        if bounded is not None:
            for j, expr in enumerate(_per_label(A, bounded)):
                t = parse_terms(expr)
                if any(e > 0 for e in t):
                    raise SequenceError(f"bounded part for {A.labels[j]} grows with i: {expr!r}")
                per[j] = _add(per[j], t)
        samples = tuple(int(s) for s in (samples if samples is not None else DEFAULT_SAMPLES))
        if not samples:
            raise SequenceError("empty sample list")
        if any(s < 1 for s in samples) or list(samples) != sorted(set(samples)):
            raise SequenceError("samples must be increasing positive integers")
        spec = cls(A, STRUCTURED, tuple(per), bounded_fn, None if bound is None else float(bound), samples)
        if bound is not None:
            worst = max(float(np.abs(spec.bounded_value(i)).max(initial=0)) for i in samples)
            if worst > float(bound) * (1 + 1e-12):
                raise SequenceError(f"bounded part reaches {worst:.6g}, above the declared bound {bound}")
        return spec

    @classmethod
    def raw(cls, A: PointConfiguration, values) -> "SequenceSpec":
        vals = tuple(np.asarray(A.function(v), dtype=float) for v in values)
        if not vals:
            raise SequenceError("empty sequence")
        if len(vals) < MIN_RAW_LENGTH:
            raise SequenceError(f"raw sequences need at least {MIN_RAW_LENGTH} terms, got {len(vals)}")
        return cls(A, RAW, samples=tuple(range(1, len(vals) + 1)), values=vals)

    @property
    def heuristic(self) -> bool:
        return self.mode == RAW or self.bounded_fn is not None

    @property
    def indices(self) -> tuple:
        return self.samples

    def value(self, i) -> np.ndarray:
        if self.mode == RAW:
            return self.values[int(i) - 1]
        out = np.array([eval_terms(t, i) for t in self.terms], dtype=float)
        if self.bounded_fn is not None:
            out = out + np.asarray(self.bounded_fn(i), dtype=float)
        return out

    def exact_value(self, i):
        if self.mode == RAW or self.bounded_fn is not None or not self.config.exact:
            return None
        vals = [eval_terms_exact(t, int(i)) for t in self.terms]
        if any(v is None for v in vals):
            return None
        return la.exact_array(vals)

    def lift_at(self, i):
        ex = self.exact_value(i)
        return ex if ex is not None else self.value(i)

    def subsequence(self, indices) -> "SequenceSpec":
        """The same sequence sampled only at the given indices."""
        idx = tuple(int(i) for i in indices)
        if not idx or any(i not in set(self.samples) for i in idx):
            raise SequenceError("subsequence indices must be a nonempty subset of the samples")
        return replace(self, samples=idx)

    def bounded_value(self, i) -> np.ndarray:
        out = np.array([eval_terms({e: c for e, c in t.items() if e <= 0}, i) for t in self.terms])
        if self.bounded_fn is not None:
            out = out + np.asarray(self.bounded_fn(i), dtype=float)
        return out

    def growth_vectors(self) -> list:
        """(exponent, vector) for every exponent > 0, largest first."""
        if self.mode == RAW:
            raise SequenceError("raw sequences have no declared growth terms")
        exps = sorted({e for t in self.terms for e in t if e > 0}, reverse=True)
        out = []
        for e in exps:
            vec = [t.get(e, 0) for t in self.terms]
            out.append((e, la.exact_array(vec) if la.all_exact(vec) else np.asarray(vec, dtype=float)))
        return out

    def constant_vector(self) -> np.ndarray:
        vec = [t.get(Fraction(0), 0) for t in self.terms]
        return la.exact_array(vec) if la.all_exact(vec) else np.asarray(vec, dtype=float)

    def describe(self) -> dict:
        if self.mode == RAW:
            return {"mode": RAW, "length": len(self.values)}
        return {"mode": STRUCTURED, "samples": list(self.samples),
                "terms": {lab: {str(e): str(c) for e, c in sorted(t.items())}
                          for lab, t in zip(self.config.labels, self.terms)}}


def _per_label(A: PointConfiguration, data) -> list:
    if isinstance(data, Mapping):
        unknown = set(data) - set(A.labels)
        if unknown:
            raise SequenceError(f"unknown labels {sorted(unknown)}")
        return [data.get(lab, 0) for lab in A.labels]
    seq = list(data)
    if len(seq) != A.n:
        raise SequenceError(f"expected {A.n} entries, got {len(seq)}")
    return seq


# ---------------------------------------------------------------- cones and faces

def recurring_cones(seq: SequenceSpec, secondary_cone_fn=None) -> list:
    """Every subdivision recurring among S_{v_i} over the tail half, coarsest first.

    Each entry is (cone, subdivision, selector), where the selector lists the
    sample indices whose v_i lie in the closed cone. A subdivision seen only
    once counts when nothing recurs.
    """
    from .secfan import secondary_cone

    A = seq.config
    idx = seq.indices
    tail = idx[len(idx) // 2:]
    subs = {i: induced_subdivision(A, seq.lift_at(i)) for i in tail}
    counts = Counter(subs.values())
    recurring = [S for S, c in counts.items() if c >= 2] or list(counts)
    cones = {S: (secondary_cone_fn or secondary_cone)(A, S) for S in recurring}
    recurring.sort(key=lambda S: (cones[S].dim, -counts[S], S.facets))
    out = []
    for S in recurring:
        tau = cones[S]
        selector = tuple(i for i in idx if membership(tau, seq.lift_at(i), tol=1e-9).status != "outside")
        out.append((tau, S, selector))
    return out


def minimal_recurring_cone(seq: SequenceSpec, secondary_cone_fn=None):
    """The coarsest recurring subdivision: (cone, subdivision, selector)."""
    return recurring_cones(seq, secondary_cone_fn)[0]


def _face_leq(f: ConeFace, g: ConeFace) -> bool:
    return g.tight <= f.tight


@dataclass
class BoundednessResult:
    bounded: bool
    witness: list | None
    bound: float
    heuristic: bool
    violations: tuple = ()

    def __bool__(self):
        return self.bounded


def _as_face(x) -> ConeFace:
    if isinstance(x, ConeFace):
        return x
    if isinstance(x, Cone):
        return ConeFace(x, frozenset())
    raise TypeError("expected a Cone or ConeFace")


def _violations(seq: SequenceSpec, tau: Cone) -> tuple:
    return tuple(i for i in seq.indices if membership(tau, seq.value(i), tol=1e-9).status == "outside")


def is_sigma_bounded(seq: SequenceSpec, tau: Cone, sigma) -> BoundednessResult:
    """Are all forms vanishing on sigma bounded along the sequence?"""
    sigma = _as_face(sigma)
    ann = sigma.annihilator()
    viol = _violations(seq, tau)
    values = [seq.value(i) for i in seq.indices]
    if not values:
        raise SequenceError("empty sequence")
    if not ann:
        return BoundednessResult(True, None, 0.0, seq.heuristic, viol)
    achieved = max(abs(float(la.dot(p, v))) for p in ann for v in values)
    if seq.mode == STRUCTURED:
        growth = seq.growth_vectors()
        for p in ann:
            pn = max(abs(float(x)) for x in p)
            for _, g in growth:
                val = la.dot(p, g)
                gn = max(1.0, float(np.abs(np.asarray(g, dtype=float)).max()))
                if (val != 0) if (la.all_exact(p) and la.all_exact(g)) else abs(float(val)) > 1e-9 * pn * gn:
                    return BoundednessResult(False, list(p), math.inf, seq.heuristic, viol)
        return BoundednessResult(True, None, achieved, seq.heuristic, viol)
    # raw data: fit log(1 + |<p, v_i>|) against log i over the tail half
    N = len(values)
    ii = np.asarray(seq.indices, dtype=float)[N // 2:]
    for p in ann:
        mags = np.array([abs(float(la.dot(p, v))) for v in values[N // 2:]])
        slope = np.polyfit(np.log(ii), np.log1p(mags), 1)[0]
        if slope > RAW_GROWTH_EXPONENT and mags[-1] > 1.0:
            return BoundednessResult(False, list(p), float(mags[-1]), True, viol)
    return BoundednessResult(True, None, achieved, True, viol)


@dataclass
class MinimumFaceResult:
    face: ConeFace
    selector: tuple
    ambiguous: bool
    candidates: list
    heuristic: bool


def minimum_face_of_boundedness(seq: SequenceSpec, tau: Cone, selector=None) -> MinimumFaceResult:
    """Smallest face sigma of tau along which the sequence is sigma-bounded."""
    faces = tau.faces()
    ok = [f for f in faces if is_sigma_bounded(seq, tau, f).bounded]
    if not ok:
        # tau itself is always a candidate for sequences in tau
        ok = [faces[-1]]
    minimal = [f for f in ok if not any(g is not f and _face_leq(g, f) and g.tight != f.tight for g in ok)]
    minimal.sort(key=lambda f: (f.dim, sorted(f.tight)))
    if selector is None:
        selector = tuple(i for i in seq.indices if membership(tau, seq.value(i), tol=1e-9).status != "outside")
    return MinimumFaceResult(minimal[0], tuple(selector), len(minimal) > 1, minimal, seq.heuristic)


# ---------------------------------------------------------------- decomposition

@dataclass
class DecompositionResult:
    indices: tuple
    u: list
    vbar: list
    limit: np.ndarray
    weight: np.ndarray
    bound: float
    multiple: bool = False
    cluster: tuple = ()
    method: str = "structured"


def _projector(lineality, n) -> np.ndarray:
    if not lineality:
        return np.eye(n)
    L = np.asarray(lineality, dtype=float).T
    Qb, _ = np.linalg.qr(L)
    return np.eye(n) - Qb @ Qb.T


def _tau_forms(tau: Cone) -> np.ndarray:
    return np.asarray(tau.forms, dtype=float).reshape(len(tau.forms), tau.ambient_dim)


def _split(v, P, B, Psi):
    """u in sigma, vbar in tau, vbar orthogonal to lineality, |vbar| minimal."""
    n = len(v)
    if B.shape[1] == 0:
        vbar = P @ v
        return v - vbar, vbar
    PB = P @ B
    Q = PB.T @ PB
    c = -PB.T @ (P @ v)
    psi_v = Psi @ v
    # u = B y must satisfy Psi B y >= 0 and Psi (v - B y) >= min(0, Psi v)
    G = np.vstack([Psi @ B, -(Psi @ B)])
    h = np.concatenate([np.zeros(len(Psi)), np.minimum(0.0, psi_v) - psi_v])
    y = solve_qp(Q, c, G, h, np.zeros(B.shape[1]))
    vbar = P @ (v - B @ y)
    return v - vbar, vbar


def _structured_limit(seq, P, B, Psi):
    c0 = np.asarray(seq.constant_vector(), dtype=float)
    if B.shape[1] == 0:
        return P @ c0
    PB = P @ B
    Q = PB.T @ PB
    c = PB.T @ (P @ c0)
    G = Psi @ B
    h = -(Psi @ c0)
    if np.all(h <= 1e-12):
        y0 = np.zeros(B.shape[1])
    else:
        res = linprog(np.zeros(B.shape[1]), A_ub=-G, b_ub=-h, bounds=[(None, None)] * B.shape[1], method="highs")
        if res.status != 0:
            raise SequenceError("constant part cannot be moved into tau along sigma")
        y0 = res.x
    y = solve_qp(Q, c, G, h - 1e-12, y0)
    return P @ (c0 + B @ y)


def _clusters(points, radius):
    groups = []
    for k, p in enumerate(points):
        for g in groups:
            if np.abs(points[g[0]] - p).max() <= radius:
                g.append(k)
                break
        else:
            groups.append([k])
    return groups


def sigma_decomposition(seq: SequenceSpec, sigma, tau: Cone | None = None, indices=None,
                        cluster_radius: float | None = None) -> DecompositionResult:
    """Split v_i = u_i + vbar_i with u_i in sigma and vbar_i bounded in tau.

    u_i is the point of sigma closest to v_i subject to v_i - u_i staying in
    tau; vbar_i is taken orthogonal to the lineality space. The limit v of
    vbar_i is computed exactly from the growth terms for structured input and
    by clustering the tail otherwise.
    """
    sigma = _as_face(sigma)
    tau = tau if tau is not None else sigma.parent
    A = seq.config
    n = A.n
    P = _projector([list(v) for v in tau.lineality_basis], n)
    rb = [list(r) for r in sigma.as_cone.rays_basis]
    B = np.asarray(rb, dtype=float).T if rb else np.zeros((n, 0))
    Psi = _tau_forms(tau)
    idx = tuple(indices if indices is not None else seq.indices)
    us, vbars = [], []
    for i in idx:
        u, vb = _split(seq.value(i), P, B, Psi)
        us.append(u)
        vbars.append(vb)
    bound = max(float(np.linalg.norm(vb)) for vb in vbars) if vbars else 0.0
    if seq.mode == STRUCTURED and seq.bounded_fn is None:
        v = _structured_limit(seq, P, B, Psi)
        return DecompositionResult(idx, us, vbars, v, np.exp(v), bound, False, idx, "structured")
    radius = cluster_radius if cluster_radius is not None else (1e-6 if seq.mode == STRUCTURED else 1e-2)
    tail = list(range(len(idx) // 2, len(idx)))
    pts = [vbars[k] for k in tail]
    groups = _clusters(pts[::-1], radius)
    first = [tail[len(tail) - 1 - k] for k in groups[0]]
    first.sort()
    v = np.mean([vbars[k] for k in first], axis=0)
    return DecompositionResult(idx, us, vbars, v, np.exp(v), bound, len(groups) > 1,
                               tuple(idx[k] for k in first), "cluster")
