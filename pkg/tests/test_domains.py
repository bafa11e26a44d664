import math

import numpy as np
import pytest

from pluripot import combine, domain_from_config, domain_names, make_domain, make_worm_profile
from pluripot.domains import as_complex, as_real
from pluripot.exceptions import BadParams, DimensionMismatch, EmptyIntersection


def _samples(dom, count=10_000, seed=0):
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in dom.bbox]) - 0.1
    hi = np.array([b[1] for b in dom.bbox]) + 0.1
    return lo + (hi - lo) * rng.random((count, len(lo)))


@pytest.mark.parametrize(
    "name, params",
    [
        ("unit_disk", {}),
        ("annulus", {"r1": 0.5, "r2": 1.0}),
        ("slit_disk", {}),
        ("unit_ball2", {}),
        ("polydisk", {}),
        ("hartogs_triangle", {}),
    ],
)
def test_predicate_consistency(name, params):
    dom = make_domain(name, **params)
    pts = _samples(dom)
    inside = dom.interior_predicate(pts)
    closed = dom.closure_predicate(pts)
    assert np.all(closed[inside])
    if dom.rho is not None:
        rho = dom.defining_function(pts)
        assert np.all(inside[rho < -1e-9])
        assert not np.any(closed[rho > 1e-9])


def test_zoo_examples():
    h = make_domain("hartogs_triangle")
    assert h.interior_predicate(np.array([[0.25, 0, 0.5, 0]]))[0]
    p = np.array([[0.0, 0, 0, 0]])
    assert h.closure_predicate(p)[0] and not h.interior_predicate(p)[0]
    s = make_domain("slit_disk")
    q = np.array([[0.25, 0.0]])
    assert s.closure_predicate(q)[0] and not s.interior_predicate(q)[0]
    assert s.interior_predicate(np.array([[0.25, 0.1]]))[0]
    assert "worm" in domain_names()


def test_worm_profile_values():
    eta = make_worm_profile(math.pi**-4)
    assert eta(0.0) == 0 and eta(2 * math.pi) == 0 and eta(-2 * math.pi) == 0
    assert eta(3 * math.pi) == pytest.approx(1.0, abs=1e-12)
    assert eta.a == pytest.approx(3 * math.pi)
    with pytest.raises(BadParams):
        make_worm_profile(0.0)


def test_worm_membership_formula():
    dom = make_domain("worm")
    eta = make_worm_profile(math.pi**-4)
    rng = np.random.default_rng(3)
    L = rng.uniform(-eta.a - 0.5, eta.a + 0.5, 10_000)
    w = np.exp(L / 2) * np.exp(2j * np.pi * rng.random(10_000))
    z = np.exp(1j * L) + rng.uniform(0, 1.3, 10_000) * np.exp(2j * np.pi * rng.random(10_000))
    pts = as_real(np.stack([z, w], axis=-1))
    expected = np.abs(z - np.exp(1j * np.log(np.abs(w) ** 2))) ** 2 < 1 - eta(np.log(np.abs(w) ** 2))
    margin = np.abs(np.abs(z - np.exp(1j * L)) ** 2 - 1 + eta(L)) > 1e-9
    assert np.array_equal(dom.interior_predicate(pts)[margin], expected[margin])


def test_complex_real_roundtrip():
    zs = np.array([[1 + 2j, -0.5j], [3, 1j]])
    assert np.array_equal(as_complex(as_real(zs)), zs)


def test_combine():
    d1 = make_domain("disk", center=0.0)
    d2 = make_domain("disk", center=0.5, radius=1.0)
    both = combine("intersect", d1, d2)
    assert both.interior_predicate(np.array([[0.25, 0.0]]))[0]
    assert not both.closure_predicate(np.array([[-0.9, 0.0]]))[0]
    poly = combine("product", make_domain("unit_disk"), make_domain("unit_disk"))
    assert poly.interior_predicate(np.array([[0.5, 0, 0, 0.5]]))[0]
    with pytest.raises(EmptyIntersection):
        combine("intersect", d1, make_domain("disk", center=5.0))
    with pytest.raises(DimensionMismatch):
        combine("intersect", d1, make_domain("unit_ball2"))


def test_domain_from_config_nested():
    cfg = {
        "name": "intersect",
        "params": {"parts": [{"name": "disk", "params": {"center": 0.0}}, {"name": "disk", "params": {"center": 0.8}}]},
    }
    dom = domain_from_config(cfg)
    assert dom.n == 1
    assert dom.interior_predicate(np.array([[0.4, 0.0]]))[0]


def test_bad_params():
    with pytest.raises(BadParams):
        make_domain("annulus", r1=2.0, r2=1.0)
    with pytest.raises(BadParams):
        make_domain("disk", radius=-1.0)
    with pytest.raises(BadParams):
        make_domain("no_such_domain")
