import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pluripot import build_cone, build_lattice, classify_nodes, make_domain
from pluripot.exceptions import InvalidBox, IsolatedNode, NodeBudgetExceeded
from pluripot.lattice import BOUNDARY, EXTERIOR, INTERIOR, interp_weights, make_kernel


def test_build_lattice_counts():
    assert build_lattice([(-1, 1), (-1, 1)], 1.0, 1).size == 9
    assert build_lattice([(0, 1)] * 4, 0.5, 2).size == 81


def test_build_lattice_budget_and_validation(monkeypatch):
    with pytest.raises(NodeBudgetExceeded):
        build_lattice([(-1, 1), (-1, 1)], 1e-6, 1)
    with pytest.raises(InvalidBox):
        build_lattice([(-1, 1), (-1, 1)], -0.1, 1)
    with pytest.raises(InvalidBox):
        build_lattice([(1, 1), (-1, 1)], 0.1, 1)
    with pytest.raises(InvalidBox):
        build_lattice([(-1, 1)], 0.1, 1)
    monkeypatch.setenv("PLURIPOT_NODE_CAP", "100")
    with pytest.raises(NodeBudgetExceeded):
        build_lattice([(-1, 1), (-1, 1)], 0.1, 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 440))
def test_index_coordinate_roundtrip(flat):
    lat = build_lattice([(-1, 1), (-0.5, 0.5)], 0.1, 1)
    flat = flat % lat.size
    k = lat.multi_index(flat)
    assert lat.flat_index(k) == flat
    p = lat.coords(flat)
    assert lat.nearest_node(p) == flat
    # corner plus an integer multiple of h on every axis
    steps = (p - np.asarray(lat.corner)) / lat.h
    assert np.allclose(steps, np.rint(steps), atol=1e-9)


def test_classify_disk_examples():
    dom = make_domain("unit_disk")
    lat = build_lattice([(-1.5, 1.5), (-1.5, 1.5)], 0.5, 1)
    mask = classify_nodes(lat, dom)
    assert mask.class_of(lat.nearest_node((0, 0))) == INTERIOR
    assert mask.class_of(lat.nearest_node((1, 0))) == BOUNDARY
    assert mask.class_of(lat.nearest_node((1, 1))) == EXTERIOR


def test_classification_invariants(disk005):
    dom, lat, mask, _ = disk005
    assert not np.any(mask.is_interior & mask.is_boundary)
    pts = mask.closure_points()
    assert np.all(dom.closure_predicate(pts))
    # interior nodes are in the open domain and away from the boundary band
    inner = pts[mask.interior_positions]
    assert np.all(dom.interior_predicate(inner))
    assert np.all(np.abs(dom.defining_function(inner)) > 0.5 * lat.h * dom.lipschitz)


def test_interp_weights_cases():
    lat = build_lattice([(0, 2), (0, 2)], 1.0, 1)
    w = interp_weights(lat, (1.0, 1.0))
    assert list(w.weights) == [1.0]
    w = interp_weights(lat, (0.5, 0.5))
    assert np.allclose(sorted(w.weights), [0.25] * 4)
    w = interp_weights(lat, (0.5, 1.0))
    assert np.allclose(sorted(w.weights), [0.5, 0.5])


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_interp_reproduces_affine(x, y, a, b, c):
    lat = build_lattice([(-1, 1), (-1, 1)], 0.1, 1)
    w = interp_weights(lat, (x, y))
    vals = a + b * lat.coords()[:, 0] + c * lat.coords()[:, 1]
    assert abs(w.apply(vals) - (a + b * x + c * y)) <= 1e-12 * (1 + abs(a) + abs(b) + abs(c))
    assert abs(w.total() - 1) <= 1e-15


def test_kernel_weights_are_probability():
    kern = make_kernel(np.array([1.0 + 0j]), 2.0, 16, 0.1)
    assert kern.weights.min() >= 0
    assert kern.weights.sum() == 1.0


def test_cone_rows_sum_to_zero_exactly(disk005):
    _, _, mask, cone = disk005
    A = cone.matrix()
    sums = np.asarray(A.sum(axis=1)).ravel()
    assert np.all(sums == 0.0)
    # dyadic weights make constants exact whenever the constant is a power of two
    assert np.all(cone.apply(np.full(mask.n_closure, 2.0)) == 0.0)
    assert np.max(np.abs(cone.apply(np.full(mask.n_closure, 3.7)))) <= 1e-14


def test_cone_stencils_stay_in_closure(disk005):
    _, lat, mask, cone = disk005
    rows = np.arange(0, cone.n_rows, 97)
    for r in rows:
        avg = cone.stencil(int(r)).averaged()
        assert abs(avg.total() - 1) < 1e-12
        assert np.all(mask.classes.ravel()[avg.nodes] != EXTERIOR)


def test_cone_affine_and_quadratic_rows(disk005):
    _, lat, mask, cone = disk005
    pts = mask.closure_points()
    for vals in (pts[:, 0], 2 * pts[:, 1] - 0.3, pts[:, 0] ** 2 - pts[:, 1] ** 2):
        assert np.max(np.abs(cone.apply(vals))) <= 1e-12
    r2 = np.sum(pts**2, axis=1)
    rv = cone.apply(r2)
    radius = np.array([cone.kernels[k].radius for k in cone.row_kernel])
    # circle average of |z|^2 at radius r is |z|^2 + r^2; bilinear interpolation adds at most h^2/2
    assert np.all(rv < 0)
    assert np.max(np.abs(rv + radius**2)) <= 0.5 * lat.h**2 + 1e-12
    assert np.max(cone.apply(-r2)) > 0


def test_cone_closure_properties(disk005, rng):
    _, _, mask, cone = disk005
    pts = mask.closure_points()
    z = pts[:, 0] + 1j * pts[:, 1]
    members = [
        np.sum(pts**2, axis=1),
        np.abs(z - 0.3),
        np.maximum(pts[:, 0], -pts[:, 1]),
        (z**2).real,
    ]
    for u in members:
        assert np.max(cone.apply(u)) <= 1e-12
    for _ in range(20):
        i, j = rng.integers(0, len(members), 2)
        s, t = rng.uniform(0, 3, 2)
        u, v = members[i], members[j]
        assert np.max(cone.apply(s * u + t * v)) <= 1e-11
        assert np.max(cone.apply(np.maximum(u, v))) <= 1e-11
    # decreasing sequence of members
    base = members[0]
    for k in range(1, 6):
        assert np.max(cone.apply(base + 1.0 / k)) <= 1e-12


def test_cone_n2_small_ball():
    dom = make_domain("unit_ball2")
    from pluripot import lattice_for_domain

    lat = lattice_for_domain(dom, 0.25)
    mask = classify_nodes(lat, dom)
    cone = build_cone(lat, mask)
    pts = mask.closure_points()
    assert cone.n_rows > 0
    assert np.max(np.abs(cone.apply(pts[:, 0] + 2 * pts[:, 3]))) <= 1e-12
    assert np.max(cone.apply(np.sum(pts**2, axis=1))) < 0


def test_isolated_node_raises():
    dom = make_domain("unit_disk")
    lat = build_lattice([(-1.5, 1.5), (-1.5, 1.5)], 0.25, 1)
    mask = classify_nodes(lat, dom)
    with pytest.raises(IsolatedNode):
        build_cone(lat, mask, radii=[3.0], max_halvings=0)
