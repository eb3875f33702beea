"""Complexes X(S,w), one-parameter degenerations, and limits of translate sequences."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hausdorff import directed, hausdorff, net_radius
from .pointconfig import PointConfiguration, reduce_mod_aff
from .secfan import (
    SequenceSpec,
    minimum_face_of_boundedness,
    parallel_map,
    recurring_cones,
    sigma_decomposition,
    subdivision_of_face,
)
from .subdivision import Subdivision, induced_subdivision, minimal_nonfaces
from .toric import (
    BirchStats,
    PointCloud,
    _log_weight,
    affine_relations_basis,
    binomial_residuals,
    dedupe_rows,
    project_to_face,
    sample_variety,
)

CONVERGED = "converged"
INCONCLUSIVE = "inconclusive"
DEFAULT_T_SCHEDULE = tuple(float(t) for t in range(0, 41, 2))


@dataclass
class ToricComplex:
    subdivision: Subdivision
    log_weight: np.ndarray

    @classmethod
    def from_weight(cls, S: Subdivision, w) -> "ToricComplex":
        return cls(S, _log_weight(S.config, w))

    @property
    def weight(self) -> np.ndarray:
        return np.exp(self.log_weight)

    @property
    def config(self) -> PointConfiguration:
        return self.subdivision.config

    def reported_log_weight(self) -> np.ndarray:
        """log w in the orthogonal gauge, the form used for display."""
        return np.asarray(reduce_mod_aff(self.config, self.log_weight, "orthogonal"), dtype=float)

    def sample(self, h: float, stats: BirchStats | None = None) -> PointCloud:
        return complex_sample(self.subdivision, None, h, stats, log_weight=self.log_weight)

    def to_dict(self) -> dict:
        return {"subdivision": self.subdivision.to_dict(),
                "log_weight_orthogonal": [float(x) for x in self.reported_log_weight()]}


def complex_sample(S: Subdivision, w, h: float, stats: BirchStats | None = None,
                   log_weight=None) -> PointCloud:
    """Union of the facet varieties X_{F,w}, embedded in Delta^A by zero padding."""
    A = S.config
    lw = _log_weight(A, w) if log_weight is None else np.asarray(log_weight, dtype=float)
    parts = []
    for F, idx in zip(S.facets, S.facet_indices):
        sub = sample_variety(S.facet_config(F), None, h, stats, log_weight=lw[list(idx)])
        Z = np.zeros((len(sub.points), A.n))
        Z[:, list(idx)] = sub.points
        parts.append(Z)
    Z = dedupe_rows(np.concatenate(parts, axis=0), 1e-12)
    return PointCloud(A.labels, Z, float(h), "X(S,w)", {"facets": len(S.facets)})


def one_param_weight(lam, w, t: float, log_weight=None) -> np.ndarray:
    """log of w_lambda(t) = exp(t lambda) w; callers exponentiate when safe."""
    lam = np.asarray(lam, dtype=float)
    lw = np.log(np.asarray(w, dtype=float)) if log_weight is None else np.asarray(log_weight, dtype=float)
    return t * lam + lw


@dataclass
class DegenerationReport:
    t_schedule: list
    distances: list
    verdict: str
    predicted: ToricComplex
    diagnostics: dict = field(default_factory=dict)

    @property
    def final(self) -> tuple:
        return self.distances[-1]

    def csv(self) -> str:
        rows = ["t,d_H,eta"]
        rows += [f"{t:.12g},{d:.12g},{e:.12g}" for t, d, e in self.distances]
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "t_schedule": list(self.t_schedule),
                "distances": [{"t": t, "d_H": d, "eta": e} for t, d, e in self.distances],
                "predicted": self.predicted.to_dict(), "diagnostics": self.diagnostics}


def _verdict(distances, tol: float) -> str:
    """Final distance within tol + eta, and the tail half nonincreasing within eta."""
    t, d, eta = distances[-1]
    if not d <= tol + eta:
        return INCONCLUSIVE
    tail = distances[len(distances) // 2:]
    for (_, d0, _), (_, d1, e1) in zip(tail, tail[1:]):
        if d1 > d0 + e1:
            return INCONCLUSIVE
    return CONVERGED


def _distance_curve(A, target: PointCloud, targets_eta: float, log_weights, h, params, stats):
    def one(k):
        X = sample_variety(A, None, h, stats, log_weight=log_weights[k])
        rep = hausdorff(X, target)
        return params[k], rep.d_H, net_radius(X) + targets_eta, X

    return parallel_map(one, range(len(params)))


def verify_toric_degeneration(A: PointConfiguration, lam, w=None, t_schedule=None, h: float = 0.05,
                              tol: float = 0.05, log_weight=None) -> DegenerationReport:
    """Compare samples of lambda(t).X_{A,w} with X(S_lambda, w) along a schedule of t."""
    lam = np.asarray(lam, dtype=float)
    lw = _log_weight(A, w if w is not None else np.ones(A.n)) if log_weight is None else np.asarray(log_weight, float)
    ts = [float(t) for t in (t_schedule if t_schedule is not None else DEFAULT_T_SCHEDULE)]
    if not ts or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_schedule must be a nonempty increasing list")
    if h <= 0 or tol <= 0:
        raise ValueError("mesh and tol must be positive")
    S = induced_subdivision(A, A.function(lam) if A.exact else lam)
    predicted = ToricComplex(S, lw)
    stats = BirchStats()
    target = predicted.sample(h, stats)
    eta_t = net_radius(target)
    curve = _distance_curve(A, target, eta_t, [one_param_weight(lam, None, t, lw) for t in ts], h, ts, stats)
    distances = [(t, d, e) for t, d, e, _ in curve]
    diag = {"target_points": len(target), "eta_target": eta_t, "newton_max": stats.max_iterations}
    return DegenerationReport(ts, distances, _verdict(distances, tol), predicted, diag)


# ---------------------------------------------------------------- sequences

def _monomial_values(Z: np.ndarray, A: PointConfiguration, monomials) -> np.ndarray:
    if not monomials:
        return np.zeros(len(Z))
    cols = [np.prod(Z[:, list(A.indices(m))], axis=1) for m in monomials]
    return np.max(np.vstack(cols), axis=0)


def _candidate(A, seq, tau, S_tau, selector):
    """Minimum face and split along the subsequence lying in one recurring cone."""
    sub = seq.subsequence(selector) if len(selector) >= 2 else seq
    mf = minimum_face_of_boundedness(sub, tau, sub.indices)
    S = subdivision_of_face(A, mf.face)
    dec = sigma_decomposition(sub, mf.face, tau, indices=sub.indices)
    return tau, S_tau, mf, S, dec


def sequence_limit(A: PointConfiguration, seq: SequenceSpec, h: float = 0.05, tol: float = 0.05):
    """Predict and check the Hausdorff limit of X_{A,w_i} for w_i = Exp(v_i).

    Returns (predicted complex, diagnostics dict, DegenerationReport over the
    selected indices).
    """
    if seq.config is not A:
        raise ValueError("sequence is defined on a different configuration")
    candidates = [_candidate(A, seq, *entry) for entry in recurring_cones(seq)]
    tau, S_tau, mf, S, dec = candidates[0]
    sigma = mf.face
    distinct = []
    for c in candidates:
        key = (c[3], tuple(np.round(reduce_mod_aff(A, c[4].limit, "orthogonal"), 6)))
        if key not in distinct:
            distinct.append(key)
    predicted = ToricComplex(S, np.asarray(dec.limit, dtype=float))
    stats = BirchStats()
    target = predicted.sample(h, stats)
    eta_t = net_radius(target)
    idx = list(dec.indices)
    logs = [np.asarray(seq.value(i), dtype=float) for i in idx]
    curve = _distance_curve(A, target, eta_t, logs, h, [float(i) for i in idx], stats)
    distances = [(t, d, e) for t, d, e, _ in curve]
    clouds = [X for *_, X in curve]

    nonfaces = minimal_nonfaces(S).monomials()
    support = [float(_monomial_values(X.points, A, nonfaces).max(initial=0.0)) for X in clouds]

    # X(S, w_i) against X(S, w): the facet pieces only see v_i restricted to each facet
    complex_curve = []
    for i, lv in zip(idx[-3:], logs[-3:]):
        Y = complex_sample(S, None, h, stats, log_weight=lv)
        complex_curve.append((float(i), hausdorff(Y, target).d_H))

    # tail cloud projected onto each facet against the facet variety
    last = clouds[-1].points
    per_facet = []
    for F, fidx in zip(S.facets, S.facet_indices):
        mass = last[:, list(fidx)].sum(axis=1)
        rows = last[mass > 1e-12]
        proj = np.array([project_to_face(A, z, F) for z in rows])
        sub = sample_variety(S.facet_config(F), None, h, stats, log_weight=predicted.log_weight[list(fidx)])
        ZF = np.zeros((len(sub.points), A.n))
        ZF[:, list(fidx)] = sub.points
        d = directed(proj, ZF)[0] if len(proj) else 0.0
        per_facet.append({"facet": list(F), "d_forward": d, "eta": net_radius(ZF) + net_radius(proj)})

    verdict = _verdict(distances, tol)
    ambiguous = mf.ambiguous or dec.multiple or len(distinct) > 1
    if ambiguous:
        verdict = INCONCLUSIVE
    diag = {
        "tau": S_tau.to_dict(),
        "sigma_dim": sigma.dim,
        "subdivision": S.to_dict(),
        "log_weight_orthogonal": [float(x) for x in predicted.reported_log_weight()],
        "heuristic": bool(seq.heuristic or mf.heuristic),
        "ambiguous": bool(ambiguous),
        "candidates": [{"subdivision": c[3].to_dict(), "indices": list(c[4].indices),
                        "log_weight_orthogonal": [float(x) for x in reduce_mod_aff(A, c[4].limit, "orthogonal")]}
                       for c in candidates],
        "face_candidates": [subdivision_of_face(A, f).to_dict() for f in mf.candidates],
        "selected_indices": idx,
        "decomposition": dec.method,
        "vbar_bound": dec.bound,
        "nonface_mass": support,
        "complex_limit": complex_curve,
        "per_facet": per_facet,
        "newton_max": stats.max_iterations,
    }
    report = DegenerationReport([float(i) for i in idx], distances, verdict, predicted, diag)
    return predicted, diag, report


# ---------------------------------------------------------------- equations

@dataclass
class Binomial:
    facet: tuple
    alpha: dict
    beta: dict
    coefficients: tuple

    def ratio(self) -> float:
        """Coefficient of the alpha monomial divided by that of the beta monomial."""
        return self.coefficients[0] / self.coefficients[1]

    def to_dict(self) -> dict:
        return {"facet": list(self.facet), "alpha": {k: str(v) for k, v in self.alpha.items()},
                "beta": {k: str(v) for k, v in self.beta.items()},
                "coefficients": [float(c) for c in self.coefficients]}


@dataclass
class LimitEquations:
    monomials: list
    binomials: list

    def residuals(self, A: PointConfiguration, Z, log_weight) -> tuple[float, float]:
        """Largest monomial value and largest binomial residual over the rows of Z."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        mono = float(_monomial_values(Z, A, self.monomials).max(initial=0.0))
        worst = 0.0
        for b in self.binomials:
            ia = [(A.index(k), float(v)) for k, v in b.alpha.items()]
            ib = [(A.index(k), float(v)) for k, v in b.beta.items()]
            ca, cb = b.coefficients
            left = ca * np.prod([Z[:, j] ** e for j, e in ia], axis=0)
            right = cb * np.prod([Z[:, j] ** e for j, e in ib], axis=0)
            worst = max(worst, float(np.abs(left - right).max(initial=0.0)))
        return mono, worst

    def to_dict(self) -> dict:
        return {"monomials": [list(m) for m in self.monomials],
                "binomials": [b.to_dict() for b in self.binomials]}


def limit_equations(A: PointConfiguration, S: Subdivision, w=None, log_weight=None) -> LimitEquations:
    """Nonface monomials of |S| and, per facet, the weighted binomials of X_{F,w}.

    For the relation sum alpha_a a = sum beta_a a the binomial is
    w^beta z^alpha - w^alpha z^beta, scaled so the larger coefficient is 1.
    """
    lw = _log_weight(A, w if w is not None else np.ones(A.n)) if log_weight is None else np.asarray(log_weight, float)
    monomials = minimal_nonfaces(S).monomials()
    binomials = []
    for F in S.facets:
        C = S.facet_config(F)
        for rel in affine_relations_basis(C):
            alpha, beta = rel.alpha, rel.beta
            if F[0] in beta:
                alpha, beta = beta, alpha
            la_ = sum(float(c) * lw[A.index(k)] for k, c in alpha.items())
            lb_ = sum(float(c) * lw[A.index(k)] for k, c in beta.items())
            m = max(la_, lb_)
            binomials.append(Binomial(tuple(F), dict(alpha), dict(beta), (float(np.exp(lb_ - m)), float(np.exp(la_ - m)))))
    return LimitEquations(monomials, binomials)


def limit_binomial_residuals(A: PointConfiguration, S: Subdivision, Z, log_weight) -> float:
    """Largest relation residual of each facet projection, over rows of Z supported on that facet."""
    worst = 0.0
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    for F, fidx in zip(S.facets, S.facet_indices):
        outside = np.delete(np.arange(A.n), list(fidx))
        rows = Z[np.abs(Z[:, outside]).sum(axis=1) <= 1e-15] if len(outside) else Z
        if not len(rows):
            continue
        C = S.facet_config(F)
        r = binomial_residuals(C, rows[:, list(fidx)], np.exp(np.asarray(log_weight)[list(fidx)]))
        worst = max(worst, float(np.abs(r).max(initial=0.0)))
    return worst
