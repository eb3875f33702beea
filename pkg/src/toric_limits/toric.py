"""Translated toric varieties X_{A,w} inside the simplex Delta^A.

Points of Delta^A are float arrays in label order summing to 1. The variety
is realized through the moment map: for each p in conv(A) the unique z in
X_{A,w} with taut(z) = p is found by Newton's method on the dual of the
entropy-maximization problem, z_a proportional to w_a exp(<theta, a>).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
from scipy.special import logsumexp

from . import _geometry as geo
from . import _linalg as la
from .pointconfig import ConfigurationError, PointConfiguration, in_aff, weight_vector

EPS_VAR = 1e-9
STOP_TOL = 1e-11
MAX_NEWTON = 200
BOUNDARY_TOL = 1e-9


class BirchError(RuntimeError):
    pass


# ---------------------------------------------------------------- basic maps

def _log_weight(A: PointConfiguration, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (A.n,):
        raise ConfigurationError(f"weight must have {A.n} entries")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ConfigurationError("weights must be finite and strictly positive")
    return np.log(w)


def parametrize(A: PointConfiguration, w, x, log_weight=None) -> np.ndarray:
    """phi(x) = [w_a x^a] normalized, for x in the positive orthant."""
    x = np.asarray(x, dtype=float)
    if x.shape != (A.dim,):
        raise ConfigurationError(f"x must have {A.dim} entries")
    if np.any(x <= 0):
        raise ConfigurationError("x must be strictly positive")
    lw = _log_weight(A, w) if log_weight is None else np.asarray(log_weight, dtype=float)
    logs = lw + A.points @ np.log(x)
    return np.exp(logs - logsumexp(logs))


def translate(z, w) -> np.ndarray:
    """The torus action w.z = [w_a z_a], renormalized."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ConfigurationError("weights must be strictly positive")
    out = z * w
    return out / out.sum()


def project_to_face(A: PointConfiguration, z, F) -> np.ndarray:
    """Restrict z to the labels of F and renormalize; the result lives in Delta^A."""
    z = np.asarray(z, dtype=float)
    idx = list(A.indices(F))
    mass = z[idx].sum()
    if mass <= 0:
        raise ConfigurationError("projection undefined: z has no mass on the face")
    out = np.zeros_like(z)
    out[idx] = z[idx] / mass
    return out


def same_translate(A: PointConfiguration, w, w2, tol: float = 1e-9) -> bool:
    """X_{A,w} = X_{A,w2} exactly when log w - log w2 is affine on A."""
    return in_aff(A, _log_weight(A, w) - _log_weight(A, w2), tol)


# ---------------------------------------------------------------- relations

@dataclass(frozen=True)
class AffineRelation:
    """sum alpha_a a = sum beta_a a with sum alpha = sum beta, disjoint supports."""

    alpha: dict
    beta: dict

    def vector(self, A: PointConfiguration) -> list:
        out = [0] * A.n
        for lab, c in self.alpha.items():
            out[A.index(lab)] += c
        for lab, c in self.beta.items():
            out[A.index(lab)] -= c
        return out

    def check(self, A: PointConfiguration, tol: float = 1e-10) -> bool:
        sa = sum(float(c) for c in self.alpha.values())
        sb = sum(float(c) for c in self.beta.values())
        if abs(sa - sb) > tol or set(self.alpha) & set(self.beta):
            return False
        pa = sum(float(c) * A.points[A.index(lab)] for lab, c in self.alpha.items())
        pb = sum(float(c) * A.points[A.index(lab)] for lab, c in self.beta.items())
        return bool(np.abs(np.asarray(pa) - np.asarray(pb)).max(initial=0) <= tol)


def relation_from_vector(A: PointConfiguration, vec) -> AffineRelation:
    alpha = {A.labels[j]: c for j, c in enumerate(vec) if c > 0}
    beta = {A.labels[j]: -c for j, c in enumerate(vec) if c < 0}
    return AffineRelation(alpha, beta)


def affine_relations_basis(A: PointConfiguration) -> list[AffineRelation]:
    """Relations from a kernel basis of the matrix with columns (1, a)."""
    H = [list(r) for r in A.homogeneous]
    ker = la.nullspace(H, A.n, A.tol)
    out = []
    for v in ker:
        nz = [abs(x) for x in v if (x != 0 if A.exact else abs(x) > 1e-12)]
        m = min(nz)
        v = [x / m for x in v]
        if not A.exact:
            v = [0.0 if abs(x) < 1e-12 else x for x in v]
        out.append(relation_from_vector(A, v))
    return out


def _relation_arrays(A: PointConfiguration, rels):
    al = np.zeros((len(rels), A.n))
    be = np.zeros((len(rels), A.n))
    for k, r in enumerate(rels):
        for lab, c in r.alpha.items():
            al[k, A.index(lab)] = float(c)
        for lab, c in r.beta.items():
            be[k, A.index(lab)] = float(c)
    return al, be


def _log_monomial(logz, expo):
    # sum_a e_a log z_a with 0 * log 0 treated as 0
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(expo > 0, expo * logz, 0.0)
    return terms.sum(axis=-1)


def binomial_residuals(A: PointConfiguration, Z, w, rels=None) -> np.ndarray:
    """Residuals of the relation binomials for each row of Z (shape m x |rels|)."""
    rels = affine_relations_basis(A) if rels is None else rels
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if not rels:
        return np.zeros((Z.shape[0], 0))
    al, be = _relation_arrays(A, rels)
    lw = _log_weight(A, w)
    la_w = al @ lw
    lb_w = be @ lw
    M = np.maximum(la_w, lb_w)
    with np.errstate(divide="ignore"):
        logz = np.log(np.clip(Z, 0.0, None))
    t1 = _log_monomial(logz[:, None, :], al[None]) + (lb_w - M)[None]
    t2 = _log_monomial(logz[:, None, :], be[None]) + (la_w - M)[None]
    return np.abs(np.exp(t1) - np.exp(t2))


def binomial_residual(A: PointConfiguration, z, w, rel: AffineRelation) -> float:
    """|z^alpha w^beta - z^beta w^alpha| / max(w^alpha, w^beta)."""
    return float(binomial_residuals(A, z, w, [rel])[0, 0])


# ---------------------------------------------------------------- Birch inverse

@dataclass
class BirchStats:
    iterations: list = field(default_factory=list)

    @property
    def max_iterations(self) -> int:
        return max(self.iterations, default=0)


def _locate_face(A: PointConfiguration, p):
    """Smallest face of conv(A) containing p up to the boundary tolerance."""
    frame = A.frame
    diff = np.asarray(p, dtype=float) - np.asarray([float(x) for x in frame.origin])
    lift = np.asarray([[float(x) for x in r] for r in frame.lift], dtype=float).reshape(frame.dim, A.dim)
    basis = np.asarray([[float(x) for x in r] for r in frame.basis], dtype=float).reshape(frame.dim, A.dim)
    yl = lift @ diff
    resid = np.abs(basis.T @ yl - diff).max(initial=0)
    scale = max(1.0, float(np.abs(A.points).max(initial=0)))
    if resid > 1e-9 * scale:
        return None
    members = set(range(A.n))
    for f in A.facets_local:
        h = np.asarray([float(x) for x in f.normal])
        s = float(h @ yl - float(f.offset))
        nrm = float(np.linalg.norm(h))
        if s > BOUNDARY_TOL * scale * nrm:
            return None
        if abs(s) <= BOUNDARY_TOL * scale * nrm:
            members &= set(f.members)
    return tuple(sorted(members))


def _newton_batch(Y, lw, Q, max_iter=MAX_NEWTON, tol=STOP_TOL, theta0=None):
    """Solve E_z[y] = q for each row of Q, z = softmax(lw + Y theta).

    Y: n x k local coordinates, Q: m x k targets. Returns (Z, iterations).
    """
    n, k = Y.shape
    m = Q.shape[0]
    theta = np.zeros((m, k)) if theta0 is None else np.array(theta0, dtype=float)
    iters = np.zeros(m, dtype=int)
    active = np.ones(m, dtype=bool)

    def evaluate(th):
        logits = lw[None, :] + th @ Y.T
        lse = logsumexp(logits, axis=1)
        Z = np.exp(logits - lse[:, None])
        return Z, lse

    Z, lse = evaluate(theta)
    scale = max(1.0, float(np.abs(Y).max(initial=0)))
    for it in range(max_iter + 1):
        mean = Z @ Y
        grad = mean - Q
        err = np.abs(grad).max(axis=1)
        done = err <= tol * scale
        active &= ~done
        if not active.any():
            break
        if it == max_iter:
            break
        idx = np.nonzero(active)[0]
        Za = Z[idx]
        Yc = Y[None, :, :] - mean[idx][:, None, :]
        H = np.einsum("mn,mni,mnj->mij", Za, Yc, Yc)
        g = grad[idx]
        # eigen-solve with a floor on the spectrum; never raises on singular H
        lam, U = np.linalg.eigh(H)
        floor = 1e-14 * lam.max(axis=1, keepdims=True) + 1e-300
        lam = np.maximum(lam, floor)
        step = -np.einsum("mij,mj->mi", U, np.einsum("mji,mj->mi", U, g) / lam)
        f0 = lse[idx] - np.einsum("mi,mi->m", theta[idx], Q[idx])
        slope = np.einsum("mi,mi->m", g, step)
        t = np.ones(len(idx))
        accepted = np.zeros(len(idx), dtype=bool)
        new_theta = theta[idx].copy()
        noise = 1e-13 * (1 + np.abs(f0))
        for ls in range(60):
            trial = theta[idx] + t[:, None] * step
            logits = lw[None, :] + trial @ Y.T
            lse_t = logsumexp(logits, axis=1)
            f1 = lse_t - np.einsum("mi,mi->m", trial, Q[idx])
            armijo = f1 <= f0 + 1e-4 * t * slope
            if ls == 0:
                # near the solution the decrease drowns in rounding: take the full step
                armijo |= f1 <= f0 + noise
            ok = armijo & ~accepted
            new_theta[ok] = trial[ok]
            accepted |= ok
            if accepted.all():
                break
            t = np.where(accepted, t, t * 0.5)
        # stalled line search: fall back to a Levenberg-Marquardt step
        for r in np.nonzero(~accepted)[0]:
            th0 = theta[idx[r]]
            mu = max(float(np.linalg.norm(g[r])), 1e-12)
            for _ in range(60):
                st = -np.linalg.solve(H[r] + mu * np.eye(k), g[r])
                cand = th0 + st
                fc = float(logsumexp(lw + Y @ cand) - cand @ Q[idx[r]])
                if fc < f0[r]:
                    new_theta[r] = cand
                    break
                mu *= 10.0
        theta[idx] = new_theta
        iters[idx] += 1
        Zi, lsei = evaluate(theta[idx])
        Z[idx] = Zi
        lse[idx] = lsei
    return Z, iters, theta, ~active


def _tropical_start(Y, lw, Q):
    """Initial duals from the upper hull of the lifted points (y_a, lw_a).

    For a cell of the induced subdivision with affine function c0 + <c, y>,
    theta = -c makes the logits maximal, and equal, on that cell. Each target
    uses the cell that attains the upper envelope at it.
    """
    from itertools import combinations

    n, k = Y.shape
    combos = np.array(list(combinations(range(n), k + 1)), dtype=int)
    M = np.concatenate([np.ones((len(combos), k + 1, 1)), Y[combos]], axis=2)
    sv = np.linalg.svd(M, compute_uv=False)
    good = sv[:, -1] > 1e-9 * max(1.0, float(np.abs(Y).max()))
    combos, M = combos[good], M[good]
    coef = np.linalg.solve(M, lw[combos][..., None])[..., 0]
    H1 = np.concatenate([np.ones((n, 1)), Y], axis=1)
    slack = coef @ H1.T - lw[None, :]
    upper = slack.min(axis=1) >= -1e-9 * max(1.0, float(np.abs(lw).max()))
    coef = coef[upper]
    vals = coef[:, :1].T + Q @ coef[:, 1:].T
    best = np.argmin(vals, axis=1)
    return -coef[best, 1:]


def _orthonormal_frame(C: PointConfiguration):
    pts = C.points
    origin = pts[0]
    if C.aff_rank == 0:
        return origin, np.zeros((0, C.dim))
    diffs = pts - origin
    U, s, Vt = np.linalg.svd(diffs, full_matrices=False)
    return origin, Vt[: C.aff_rank]


def birch_inverse_batch(A: PointConfiguration, w, P, stats: BirchStats | None = None,
                        log_weight=None) -> np.ndarray:
    """The points of X_{A,w} over each row of P (an m x d array in conv(A))."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    lw = _log_weight(A, w) if log_weight is None else np.asarray(log_weight, dtype=float)
    out = np.zeros((P.shape[0], A.n))
    groups: dict = {}
    for r, p in enumerate(P):
        face = _locate_face(A, p)
        if face is None:
            raise ConfigurationError(f"point {p.tolist()} lies outside conv(A)")
        groups.setdefault(face, []).append(r)
    for face, rows in groups.items():
        if len(face) == A.n:
            out[rows] = _solve_full(A, lw, P[rows], stats)
        else:
            sub = A.restrict(A.labels_of(face))
            Zs = birch_inverse_batch(sub, None, P[rows], stats, lw[list(face)])
            out[np.ix_(rows, list(face))] = Zs
    return out


def _solve_full(A: PointConfiguration, lw, P, stats):
    k = A.aff_rank
    if A.n == k + 1:
        # a simplex: the torus orbit fills the face, so z is barycentric
        pts = [list(c) for c in A.points]
        Z = np.array([geo.barycentric(pts, list(p), 1e-9) for p in P], dtype=float)
        Z = np.clip(Z, 0.0, None)
        Z /= Z.sum(axis=1, keepdims=True)
        if stats is not None:
            stats.iterations.extend([0] * len(P))
        return Z
    origin, V = _orthonormal_frame(A)
    Y = (A.points - origin) @ V.T
    Q = (P - origin) @ V.T
    lw = lw - lw.mean()
    theta0 = _tropical_start(Y, lw, Q) if np.ptp(lw) > 1.0 else None
    Z, iters, _, conv = _newton_batch(Y, lw, Q, theta0=theta0)
    if not conv.all():
        bad = np.nonzero(~conv)[0][0]
        raise BirchError(f"Newton iteration did not converge for p = {P[bad].tolist()}")
    if stats is not None:
        stats.iterations.extend(int(x) for x in iters)
    return Z


def birch_inverse(A: PointConfiguration, w, p, stats: BirchStats | None = None) -> np.ndarray:
    """The unique z in X_{A,w} with taut(z) = p."""
    return birch_inverse_batch(A, w, np.asarray(p, dtype=float)[None, :], stats)[0]


# ---------------------------------------------------------------- sampling

@dataclass
class PointCloud:
    labels: tuple
    points: np.ndarray
    mesh: float
    provenance: str = ""
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        return {"mesh": self.mesh, "provenance": self.provenance,
                "points": [{lab: float(x) for lab, x in zip(self.labels, row)} for row in self.points]}


def _grid_in_polytope(C: PointConfiguration, h: float) -> np.ndarray:
    """Points of an h-spaced grid in the relative interior of conv(C), in ambient coordinates."""
    k = C.aff_rank
    if k == 0:
        return C.points[:1].copy()
    origin, V = _orthonormal_frame(C)
    if C.spanning:
        origin, V = np.zeros(C.dim), np.eye(C.dim)
    Y = (C.points - origin) @ V.T
    lo = np.floor(Y.min(axis=0) / h - 1e-9).astype(int)
    hi = np.ceil(Y.max(axis=0) / h + 1e-9).astype(int)
    axes = [np.arange(a, b + 1) * h for a, b in zip(lo, hi)]
    G = np.array(list(product(*axes)), dtype=float).reshape(-1, k)
    # strict interior test against the facet inequalities in this frame
    hull_pts = [list(y) for y in Y]
    facets = geo.hull_facets(hull_pts, 1e-9)
    keep = np.ones(len(G), dtype=bool)
    for f in facets:
        nrm = np.asarray(f.normal, dtype=float)
        keep &= G @ nrm - float(f.offset) < -1e-9 * max(1.0, np.abs(Y).max())
    return origin + G[keep] @ V


def variety_grid(A: PointConfiguration, h: float) -> np.ndarray:
    """h-grids of the relative interiors of all faces of conv(A), vertices included."""
    if h <= 0:
        raise ConfigurationError("mesh must be positive")
    parts = []
    for face in A.faces:
        sub = A.restrict(face.labels)
        parts.append(_grid_in_polytope(sub, h))
    return np.concatenate(parts, axis=0)


def dedupe_rows(Z: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    if len(Z) == 0:
        return Z
    key = np.round(Z / max(tol, 1e-15)).astype(np.int64) if tol >= 1e-12 else Z
    _, first = np.unique(key, axis=0, return_index=True)
    return Z[np.sort(first)]


def sample_variety(A: PointConfiguration, w, h: float, stats: BirchStats | None = None,
                   log_weight=None) -> PointCloud:
    """A finite net of X_{A,w}: Birch points over h-grids of every face of conv(A)."""
    P = variety_grid(A, h)
    lw = _log_weight(A, w) if log_weight is None else np.asarray(log_weight, dtype=float)
    Z = birch_inverse_batch(A, None, P, stats, lw)
    Z = dedupe_rows(Z)
    return PointCloud(A.labels, Z, float(h), "X_{A,w}")


def weight_from_log(v) -> np.ndarray:
    return np.exp(np.asarray(v, dtype=float))
