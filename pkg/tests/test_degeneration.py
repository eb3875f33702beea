from fractions import Fraction as F

import numpy as np
import pytest

from toric_limits.configurations import pentagon
from toric_limits.degeneration import (
    CONVERGED,
    INCONCLUSIVE,
    ToricComplex,
    complex_sample,
    limit_binomial_residuals,
    limit_equations,
    one_param_weight,
    sequence_limit,
    verify_toric_degeneration,
)
from toric_limits.hausdorff import directed, hausdorff, net_radius
from toric_limits.pointconfig import affine_function, reduce_mod_aff, taut
from toric_limits.secfan import SequenceSpec
from toric_limits.subdivision import induced_subdivision
from toric_limits.toric import sample_variety

E = np.exp(-1.0)
W42 = np.array([1, E, 1, 1, 1])
RHO4 = [-1, -1, 0, 0, 0]
TAU3 = [-2, -3, 0, 0, 0]
SQUARE = ("(0,0)", "(1,0)", "(1,1)", "(0,1)")
TRIANGLE = ("(1,1)", "(1/2,3/2)", "(0,1)")


def support(Z, A, labels):
    out = [j for j, lab in enumerate(A.labels) if lab not in labels]
    return np.abs(Z[:, out]).sum(axis=1) == 0


def test_trivial_complex_is_the_variety(pent):
    S = induced_subdivision(pent, [0] * 5)
    a = complex_sample(S, W42, 0.1).points
    b = sample_variety(pent, W42, 0.1).points
    assert a.shape == b.shape and np.abs(a - b).max() < 1e-12


def test_rho4_complex_pieces(pent):
    S = induced_subdivision(pent, RHO4)
    Z = complex_sample(S, W42, 0.1).points
    on_sq = support(Z, pent, SQUARE)
    on_tri = support(Z, pent, TRIANGLE)
    assert np.all(on_sq | on_tri)
    z00, z10, z11, _, z01 = Z[on_sq].T
    # e^{-1} z00 z11 - z10 z01 on the square facet
    assert np.abs(E * z00 * z11 - z10 * z01).max() < 1e-12
    # the triangle piece is the whole simplex face: its moment points are barycentric
    T = Z[on_tri]
    assert len(T) > 10


def test_tau3_complex_fills_simplices(pent, rng):
    S = induced_subdivision(pent, TAU3)
    cloud = complex_sample(S, np.exp(rng.uniform(-2, 2, 5)), 0.05)
    eta = net_radius(cloud)
    for Fc, idx in zip(S.facets, S.facet_indices):
        dense = np.zeros((400, 5))
        dense[:, list(idx)] = rng.dirichlet(np.ones(3), size=400)
        assert directed(dense, cloud.points)[0] <= eta
        # independent of the weight
    other = complex_sample(S, np.ones(5), 0.05)
    assert hausdorff(cloud, other).d_H < 1e-12


def test_nonparticipating_coordinates_vanish(grid3):
    lam = [0] * 9
    lam[4] = -1
    S = induced_subdivision(grid3, lam)
    Z = complex_sample(S, np.ones(9), 0.25).points
    assert np.all(Z[:, 4] == 0)


def test_one_param_weight():
    w = np.array([1.0, 2.0, 3.0])
    assert np.allclose(one_param_weight(np.zeros(3), w, 7.0), np.log(w))
    assert np.allclose(one_param_weight([1, -2, 5], w, 0.0), np.log(w))
    lw = one_param_weight([-1, -1, 0, 0, 0], np.ones(5), 12.0)
    assert np.allclose(lw, [-12, -12, 0, 0, 0])


def test_affine_lambda_does_not_move(pent):
    lam = np.asarray(affine_function(pent, F(1), [F(2), F(-1)]), dtype=float)
    rep = verify_toric_degeneration(pent, lam, W42, [0, 5, 10], h=0.1)
    assert rep.predicted.subdivision.is_trivial
    assert max(d for _, d, _ in rep.distances) < 1e-9
    assert rep.verdict == CONVERGED


def test_rho4_degeneration(pent):
    rep = verify_toric_degeneration(pent, RHO4, W42, list(range(0, 21, 2)), h=0.05)
    assert rep.predicted.subdivision.facets == (SQUARE, TRIANGLE)
    assert rep.verdict == CONVERGED
    ds = [d for _, d, _ in rep.distances]
    assert ds[-1] < ds[0]


def test_tau3_degeneration_any_weight(pent, rng):
    for _ in range(2):
        w = np.exp(rng.uniform(-2, 2, 5))
        rep = verify_toric_degeneration(pent, TAU3, w, list(range(0, 21, 2)), h=0.05)
        assert rep.predicted.subdivision.is_triangulation
        assert rep.verdict == CONVERGED


def test_affine_shift_gives_same_curve(pent):
    shift = np.asarray(affine_function(pent, F(-2), [F(3), F(1)]), dtype=float)
    a = verify_toric_degeneration(pent, RHO4, W42, [0, 4, 8], h=0.1)
    b = verify_toric_degeneration(pent, np.asarray(RHO4) + shift, W42, [0, 4, 8], h=0.1)
    assert a.predicted.subdivision == b.predicted.subdivision
    for (_, d1, e1), (_, d2, e2) in zip(a.distances, b.distances):
        assert abs(d1 - d2) < 1e-9 and abs(e1 - e2) < 1e-9


def test_verdict_inconclusive_when_schedule_too_short(pent):
    rep = verify_toric_degeneration(pent, RHO4, W42, [0, 0.05], h=0.05, tol=1e-4)
    assert rep.verdict == INCONCLUSIVE


def test_bad_schedule(pent):
    with pytest.raises(ValueError):
        verify_toric_degeneration(pent, RHO4, W42, [2, 1])


def test_limit_equations_rho4(pent):
    S = induced_subdivision(pent, RHO4)
    eq = limit_equations(pent, S, W42)
    assert {frozenset(m) for m in eq.monomials} == {frozenset({"(1,0)", "(1/2,3/2)"}), frozenset({"(0,0)", "(1/2,3/2)"})}
    assert len(eq.binomials) == 1
    b = eq.binomials[0]
    assert b.facet == SQUARE
    assert b.alpha == {"(0,0)": 1, "(1,1)": 1} and b.beta == {"(1,0)": 1, "(0,1)": 1}
    assert abs(b.ratio() / E - 1) < 1e-12


def test_limit_equations_tau3_and_trivial(pent):
    eq = limit_equations(pent, induced_subdivision(pent, TAU3), np.ones(5))
    assert {frozenset(m) for m in eq.monomials} == {
        frozenset({"(1,0)", "(0,1)"}), frozenset({"(1,0)", "(1/2,3/2)"}), frozenset({"(0,0)", "(1/2,3/2)"})}
    assert eq.binomials == []
    eq = limit_equations(pent, induced_subdivision(pent, [0] * 5), np.ones(5))
    assert eq.monomials == [] and len(eq.binomials) == 2
    assert all(b.coefficients == (1.0, 1.0) for b in eq.binomials)


def test_translate_binomial_coefficient_tends_to_limit(pent):
    # for w_i = Exp((-i-1/i, -i-1, 0, 0, 0)) the square binomial has ratio e^{-1+1/i}
    for i in (1, 3, 10, 100):
        lw = np.array([-i - 1 / i, -i - 1, 0, 0, 0])
        eq = limit_equations(pent, induced_subdivision(pent, [0] * 5), log_weight=lw)
        sq = [b for b in eq.binomials if set(b.alpha) | set(b.beta) == set(SQUARE)][0]
        assert abs(sq.ratio() - np.exp(-1 + 1 / i)) < 1e-12 * np.exp(-1 + 1 / i)


def test_equations_hold_on_complex_samples(pent):
    for lam, w in ((RHO4, W42), (TAU3, np.ones(5)), ([0] * 5, W42)):
        S = induced_subdivision(pent, lam)
        cloud = complex_sample(S, w, 0.05)
        eq = limit_equations(pent, S, w)
        mono, bino = eq.residuals(pent, cloud.points, np.log(w))
        assert mono <= 1e-9 and bino <= 1e-9
        assert limit_binomial_residuals(pent, S, cloud.points, np.log(w)) <= 1e-9


def test_sequence_limit_bounded_case(pent):
    c = {"(0,0)": "1/i", "(1,0)": "2", "(1,1)": "-1+1/i", "(1/2,3/2)": "0", "(0,1)": "1/2"}
    terms = {lab: f"i*({2 * x - y + 3}) + {c[lab]}" for lab, (x, y) in zip(pent.labels, pent.coords)}
    seq = SequenceSpec.structured(pent, terms=terms)
    predicted, diag, rep = sequence_limit(pent, seq, h=0.1)
    assert predicted.subdivision.is_trivial
    gap = reduce_mod_aff(pent, predicted.log_weight - np.array([0, 2, -1, 0, 0.5]))
    assert np.abs(gap).max() < 1e-9
    assert rep.verdict == CONVERGED
    assert diag["sigma_dim"] == 3


def test_sequence_limit_diagnostics_square(pent):
    seq = SequenceSpec.structured(pent, terms={"(0,0)": "-i-1/i", "(1,0)": "i-1", "(1,1)": "i",
                                               "(1/2,3/2)": "-i/2", "(0,1)": "-i"})
    predicted, diag, rep = sequence_limit(pent, seq, h=0.1)
    mass = diag["nonface_mass"]
    assert mass[-1] < 1e-12 and all(b <= a + 1e-15 for a, b in zip(mass[3:], mass[4:]))
    for entry in diag["per_facet"]:
        assert entry["d_forward"] <= 0.05 + entry["eta"]
    cl = [d for _, d in diag["complex_limit"]]
    assert cl == sorted(cl, reverse=True)
    assert not diag["ambiguous"]
    assert len(diag["candidates"]) == 1


def test_oscillating_raw_sequence_reports_candidates(pent):
    vals = [[-i, -i + 1, 0, 0, 0] if i % 2 else [0, -i, 0, 0, 0] for i in range(1, 41)]
    predicted, diag, rep = sequence_limit(pent, SequenceSpec.raw(pent, vals), h=0.1)
    assert diag["heuristic"] and diag["ambiguous"]
    subs = {tuple(map(tuple, c["subdivision"]["facets"])) for c in diag["candidates"]}
    assert len(subs) == 2
    assert rep.verdict == INCONCLUSIVE


def test_toric_complex_reporting_gauge(pent):
    shift = np.asarray(affine_function(pent, F(4), [F(-1), F(2)]), dtype=float)
    S = induced_subdivision(pent, RHO4)
    a = ToricComplex(S, np.log(W42)).reported_log_weight()
    b = ToricComplex(S, np.log(W42) + shift).reported_log_weight()
    assert np.allclose(a, b, atol=1e-12)
    assert np.allclose(taut(pent, np.eye(5)), pent.points)
