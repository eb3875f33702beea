import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import naive_hausdorff

from toric_limits.hausdorff import CloudError, hausdorff, l1, net_radius, within_budget
from toric_limits.toric import PointCloud


def simplex_points(rng, m, n):
    return rng.dirichlet(np.ones(n), size=m)


def test_l1_examples():
    z = np.array([0.25, 0.25, 0.25, 0.25, 0])
    assert l1(z, z) == 0
    assert l1([1, 0, 0], [0, 1, 0]) == 2
    # one coordinate differs by 1/4 and three by 1/12
    assert abs(l1(z, [1 / 3, 1 / 3, 1 / 3, 0, 0]) - 0.5) < 1e-15


def test_l1_shape_mismatch():
    with pytest.raises(CloudError):
        l1([1, 0], [1, 0, 0])


def test_hausdorff_basic():
    X = np.eye(3)[:1]
    Y = np.eye(3)[1:2]
    assert hausdorff(X, X).d_H == 0
    assert hausdorff(X, Y).d_H == 2


def test_subset_gives_zero_forward(rng):
    Y = simplex_points(rng, 40, 4)
    X = Y[::3]
    rep = hausdorff(X, Y)
    assert rep.d_forward == 0
    assert rep.d_H == rep.d_backward > 0


def test_matches_naive_loops(rng):
    for _ in range(5):
        X = simplex_points(rng, 25, 5)
        Y = simplex_points(rng, 31, 5)
        assert abs(hausdorff(X, Y).d_H - naive_hausdorff(X.tolist(), Y.tolist())) < 1e-14


def test_witnesses_attain_distances(rng):
    X = simplex_points(rng, 50, 3)
    Y = simplex_points(rng, 20, 3)
    rep = hausdorff(X, Y)
    i, j = rep.forward_witness
    assert abs(l1(X[i], Y[j]) - rep.d_forward) < 1e-15
    j, i = rep.backward_witness
    assert abs(l1(Y[j], X[i]) - rep.d_backward) < 1e-15


def test_blocks_do_not_change_result(rng, monkeypatch):
    import importlib

    hd = importlib.import_module("toric_limits.hausdorff")

    X = simplex_points(rng, 300, 4)
    Y = simplex_points(rng, 200, 4)
    full = hausdorff(X, Y).d_H
    monkeypatch.setattr(hd, "BLOCK", 7)
    assert hausdorff(X, Y).d_H == full


def test_label_mismatch_and_empty():
    a = PointCloud(("x", "y"), np.array([[1.0, 0.0]]), 0.1)
    b = PointCloud(("y", "x"), np.array([[1.0, 0.0]]), 0.1)
    with pytest.raises(CloudError):
        hausdorff(a, b)
    with pytest.raises(CloudError):
        hausdorff(np.zeros((0, 2)), np.ones((1, 2)))


def test_net_radius():
    X = np.array([[0, 0], [0.1, 0], [0.1, 0.3]])
    assert abs(net_radius(X) - 0.3) < 1e-15
    assert net_radius(X[:1]) == 0.0
    assert within_budget(0.4, 0.05, 0.2, 0.15)
    assert not within_budget(0.41, 0.05, 0.2, 0.15)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (simplex_points(rng, rng.integers(1, 12), 4) for _ in range(3))
    xy = hausdorff(X, Y).d_H
    assert xy == hausdorff(Y, X).d_H
    assert hausdorff(X, Z).d_H <= xy + hausdorff(Y, Z).d_H + 1e-12
    assert 0 <= xy <= 2
