from fractions import Fraction as F

import numpy as np
import pytest
from scipy.optimize import linprog

from toric_limits.cone import make_cone, membership
from toric_limits.configurations import pentagon, segment
from toric_limits.pointconfig import reduce_mod_aff
from toric_limits.secfan import (
    NotRegularError,
    SequenceSpec,
    form_in_gauge,
    gauge_coordinates,
    is_sigma_bounded,
    minimal_recurring_cone,
    minimum_face_of_boundedness,
    sample_secondary_fan,
    secondary_cone,
    sigma_decomposition,
    subdivision_of_face,
)
from toric_limits.sequences import SequenceError, parse_terms
from toric_limits.subdivision import induced_subdivision, subdivision_from_facets

GAUGE = ["(1,1)", "(1/2,3/2)", "(0,1)"]
SQ_SEQ = {"(0,0)": "-i-1/i", "(1,0)": "i-1", "(1,1)": "i", "(1/2,3/2)": "-i/2", "(0,1)": "-i"}


def proportional(u, v):
    u, v = np.asarray(u, float), np.asarray(v, float)
    return np.linalg.matrix_rank(np.vstack([u, v]), tol=1e-9) == 1 and u @ v > 0


# ---------------------------------------------------------------- cones

def test_make_cone_quadrant_with_redundant_form():
    C = make_cone(2, [[1, 0], [0, 1], [1, 1]], exact=True)
    assert C.dim == 2
    assert len(C.forms) == 2
    assert sorted(map(tuple, C.rays)) == [(0, 1), (1, 0)]
    assert len(C.faces()) == 4


def test_membership_status():
    C = make_cone(2, [[1, 0], [0, 1]], exact=True)
    assert membership(C, [1, 1]).status == "interior"
    assert membership(C, [1, 0]).status == "boundary"
    assert membership(C, [-1, 0]).status == "outside"


def test_cone_membership_agrees_with_lp(rng):
    # forms positive on a common direction, so the cone is full-dimensional
    e = np.ones(3) / np.sqrt(3)
    g = rng.standard_normal((6, 3))
    forms = g + (np.abs(g @ e) + 0.1)[:, None] * e
    C = make_cone(3, forms.tolist(), exact=False)
    assert C.dim == 3
    for _ in range(50):
        x = rng.standard_normal(3)
        assert C.contains(x) == bool(np.all(forms @ x >= -1e-9))
    # every kept form is irredundant: an LP can push it negative while the others hold
    for f in C.forms:
        others = [h for h in forms if not np.allclose(h / np.abs(h).max(), np.asarray(f) / np.abs(f).max())]
        res = linprog(np.asarray(f, float), A_ub=-np.asarray(others), b_ub=np.zeros(len(others)),
                      bounds=[(-1, 1)] * 3, method="highs")
        assert res.status == 0 and res.fun < -1e-9
    p = np.asarray(C.relative_interior_point(), float)
    assert np.all(forms @ p > 0)


def test_tau3_cone_in_gauge(pent):
    S = induced_subdivision(pent, [F(-2), F(-3), 0, 0, 0])
    C = secondary_cone(pent, S)
    assert C.dim == 5 and C.lineality_dim == 3
    forms = [form_in_gauge(pent, f, GAUGE) for f in C.forms]
    # t < s and s < 0 in the coordinates (s, t) = (lambda(0,0), lambda(1,0))
    expected = [[1, -1], [-1, 0]]
    assert len(forms) == 2
    for e in expected:
        assert any(proportional(f, e) for f in forms)
    rays = [gauge_coordinates(pent, pent.function(list(r)), GAUGE) for r in C.rays]
    assert any(proportional(r, [-1, -1]) for r in rays)
    assert any(proportional(r, [0, -1]) for r in rays)


def test_secondary_cone_contains_its_lift(pent, rng):
    for _ in range(10):
        lam = rng.standard_normal(5)
        C = secondary_cone(pent, induced_subdivision(pent, lam))
        assert C.contains(lam)


def test_overlapping_cells_have_no_secondary_cone(pent):
    # these triangles overlap, so no lift induces them
    S = subdivision_from_facets(pent, [("(0,0)", "(1,0)", "(0,1)"), ("(1,0)", "(1,1)", "(0,1)"),
                                       ("(0,0)", "(1,1)", "(1/2,3/2)")])
    with pytest.raises(NotRegularError):
        secondary_cone(pent, S)


def test_face_of_cone_gives_coarsening(pent):
    S = induced_subdivision(pent, [F(-2), F(-3), 0, 0, 0])
    C = secondary_cone(pent, S)
    dims = sorted(f.dim for f in C.faces())
    assert dims == [3, 4, 4, 5]
    for f in C.faces():
        T = subdivision_of_face(pent, f)
        assert secondary_cone(pent, T).dim == f.dim


# ---------------------------------------------------------------- fan

def test_pentagon_fan_counts():
    fan = sample_secondary_fan(pentagon(), 2000, seed=0)
    assert len(fan.maximal()) == 5 and len(fan.rays()) == 5 and len(fan.minimal()) == 1
    assert fan.complete
    assert len(fan.edges) == 15


def test_fan_is_seed_deterministic():
    a = sample_secondary_fan(pentagon(), 300, seed=4)
    b = sample_secondary_fan(pentagon(), 300, seed=4)
    assert [c.subdivision for c in a.cones] == [c.subdivision for c in b.cones]


def test_segment_fans():
    fan = sample_secondary_fan(segment(0, F(1, 2), 1), 200)
    assert len(fan.minimal()) == 1 and len(fan.maximal()) == 2
    fan = sample_secondary_fan(segment(), 50)
    assert len(fan.cones) == 1 and fan.cones[0].dim == 2


# ---------------------------------------------------------------- sequences

def test_parse_terms():
    t = parse_terms("sqrt(i) - i + 3 - 1/i")
    assert t == {F(1, 2): 1, F(1): -1, F(0): 3, F(-1): -1}
    with pytest.raises(SequenceError):
        parse_terms("exp(i)")


def test_bounded_part_must_not_grow(pent):
    with pytest.raises(SequenceError):
        SequenceSpec.structured(pent, bounded={"(0,0)": "sqrt(i)"})


def test_square_sequence_cone_face_and_split(pent):
    seq = SequenceSpec.structured(pent, terms=SQ_SEQ)
    tau, S_tau, sel = minimal_recurring_cone(seq)
    assert S_tau == induced_subdivision(pent, [F(-2), F(-3), 0, 0, 0])
    assert is_sigma_bounded(seq, tau, tau).bounded
    mf = minimum_face_of_boundedness(seq, tau)
    assert mf.face.dim == 4 and not mf.ambiguous
    S = subdivision_of_face(pent, mf.face)
    assert S == induced_subdivision(pent, [F(-1), F(-1), 0, 0, 0])
    dec = sigma_decomposition(seq, mf.face, tau)
    for i, u, vb in zip(dec.indices, dec.u, dec.vbar):
        u_g = reduce_mod_aff(pent, u, GAUGE)
        vb_g = reduce_mod_aff(pent, vb, GAUGE)
        assert np.allclose(u_g, [-(i + 1 / i), -(i + 1 / i), 0, 0, 0], atol=1e-9)
        assert np.allclose(vb_g, [0, -1 + 1 / i, 0, 0, 0], atol=1e-9)
    assert np.allclose(reduce_mod_aff(pent, dec.limit, GAUGE), [0, -1, 0, 0, 0], atol=1e-12)


def test_rho3_direction_is_unbounded(pent):
    seq = SequenceSpec.structured(pent, terms=SQ_SEQ)
    tau, _, _ = minimal_recurring_cone(seq)
    faces = {f.dim: f for f in tau.faces()}
    rays = [f for f in tau.faces() if f.dim == 4]
    verdicts = sorted(is_sigma_bounded(seq, tau, f).bounded for f in rays)
    assert verdicts == [False, True]
    assert not is_sigma_bounded(seq, tau, faces[3]).bounded


def test_sqrt_sequence_minimum_face_is_tau(pent):
    seq = SequenceSpec.structured(pent, terms={"(0,0)": "sqrt(i)-i", "(1,0)": "-i"})
    tau, S_tau, _ = minimal_recurring_cone(seq)
    assert S_tau.is_triangulation
    mf = minimum_face_of_boundedness(seq, tau)
    assert mf.face.dim == 5
    dec = sigma_decomposition(seq, mf.face, tau)
    assert np.allclose(reduce_mod_aff(pent, dec.limit), 0, atol=1e-12)


def test_bounded_sequence_minimal_face(pent):
    seq = SequenceSpec.structured(pent, terms={"(0,0)": "1/i", "(1,0)": "2 - 1/i", "(0,1)": "1/2"})
    tau, S_tau, _ = minimal_recurring_cone(seq)
    mf = minimum_face_of_boundedness(seq, tau)
    assert mf.face.dim == 3
    assert subdivision_of_face(pent, mf.face).is_trivial


def test_raw_sequence_is_flagged(pent):
    values = [[-i - 1 / i, i - 1, i, -i / 2, -i] for i in range(1, 41)]
    seq = SequenceSpec.raw(pent, values)
    assert seq.heuristic
    tau, S_tau, _ = minimal_recurring_cone(seq)
    mf = minimum_face_of_boundedness(seq, tau)
    assert mf.heuristic
    assert subdivision_of_face(pent, mf.face) == induced_subdivision(pent, [F(-1), F(-1), 0, 0, 0])
    dec = sigma_decomposition(seq, mf.face, tau)
    assert np.allclose(reduce_mod_aff(pent, dec.limit, GAUGE), [0, -1, 0, 0, 0], atol=0.05)


def test_raw_sequence_too_short(pent):
    with pytest.raises(SequenceError):
        SequenceSpec.raw(pent, [[0] * 5] * 3)
