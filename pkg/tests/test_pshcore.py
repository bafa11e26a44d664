import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pluripot import GridFunction, cone_violation, levi_profile, monotone_limit_check, usc_regularize
from pluripot.exceptions import MaskMismatch, PreconditionError

from conftest import grid


def gf(mask, func):
    return GridFunction.from_callable(mask, func)


def test_violation_examples(disk005):
    _, lat, mask, cone = disk005
    assert cone_violation(GridFunction.constant(mask, 3.0), cone).worst <= 1e-14
    assert abs(cone_violation(gf(mask, lambda p: p[:, 0]), cone).worst) <= 1e-12
    rep = cone_violation(gf(mask, lambda p: -np.sum(p**2, 1)), cone)
    rmax = max(k.radius for k in cone.kernels)
    # circle average of |z|^2 at radius r is |z|^2 + r^2; bilinear interpolation overestimates by <= h^2/2
    assert rmax**2 - 1e-12 <= rep.worst <= rmax**2 + 0.5 * lat.h**2 + 1e-12
    assert not rep.in_cone
    assert rep.coords is not None and len(rep.coords) == 2
    assert sum(rep.histogram.values()) == cone.n_rows


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 5), st.floats(0, 5), st.integers(0, 2**31))
def test_violation_sublinear(s, t, seed):
    _, _, mask, cone = grid("unit_disk", 0.1)
    rng = np.random.default_rng(seed)
    u = GridFunction(mask, rng.normal(size=mask.n_closure))
    v = GridFunction(mask, rng.normal(size=mask.n_closure))
    w = GridFunction(mask, s * u.values + t * v.values)
    bound = s * cone_violation(u, cone).worst + t * cone_violation(v, cone).worst
    assert cone_violation(w, cone).worst <= bound + 1e-12


def test_max_of_members_in_cone(disk005):
    _, _, mask, cone = disk005
    u = gf(mask, lambda p: np.sum(p**2, 1))
    v = gf(mask, lambda p: 0.5 + p[:, 0])
    w = GridFunction(mask, np.maximum(u.values, v.values))
    assert cone_violation(w, cone).in_cone


def test_mask_mismatch(disk01, disk005):
    with pytest.raises(MaskMismatch):
        cone_violation(GridFunction.constant(disk01[2], 0.0), disk005[3])


@pytest.fixture(scope="module")
def ball():
    return grid("unit_ball2", 0.2)


def test_levi_identity_and_indefinite(ball):
    _, _, mask, _ = ball
    lv = levi_profile(gf(mask, lambda p: np.sum(p**2, 1)))
    ok = ~lv.absent
    assert ok.sum() > 0
    assert np.allclose(lv.values[ok], 1.0, atol=1e-9)
    lv = levi_profile(gf(mask, lambda p: p[:, 0] ** 2 + p[:, 1] ** 2 - p[:, 2] ** 2 - p[:, 3] ** 2))
    assert np.allclose(lv.values[~lv.absent], -1.0, atol=1e-9)


def test_levi_tangential_on_ball(ball):
    _, _, mask, _ = ball
    rho = gf(mask, lambda p: np.sum(p**2, 1) - 1)
    lv = levi_profile(rho, tangential=True)
    ok = ~lv.absent & (np.linalg.norm(mask.closure_points(), axis=1) > 0.3)
    # Hessian is the identity, so the form on any unit vector is 1
    assert np.allclose(lv.values[ok], 1.0, atol=1e-9)


def test_laplacian_of_neg_sqrt_matches_radial_formula():
    _, lat, mask, _ = grid("unit_disk", 0.025)
    u = gf(mask, lambda p: -np.sqrt(np.maximum(0, 1 - np.sum(p**2, 1))))
    lap = levi_profile(u)
    pts = mask.closure_points()
    r2 = np.sum(pts**2, 1)
    s = np.maximum(1 - r2, 1e-12)
    exact = s**-1.5 + s**-0.5
    sel = (r2 <= 0.8**2) & ~lap.absent
    assert lap.at_point((0, 0)) == pytest.approx(2.0, abs=1e-3)
    assert np.max(np.abs(lap.values[sel] - exact[sel]) / exact[sel]) < 1e-2
    axis = np.flatnonzero((np.abs(pts[:, 1]) < 1e-12) & (pts[:, 0] >= 0) & mask.is_interior & ~lap.absent)
    axis = axis[np.argsort(pts[axis, 0])]
    assert np.all(np.diff(lap.values[axis]) > 0)


def test_usc_regularize_properties(disk01):
    _, lat, mask, _ = disk01
    c = GridFunction.constant(mask, 2.5)
    assert np.array_equal(usc_regularize(c, lat.h).values, c.values)
    u = gf(mask, lambda p: p[:, 0] + 0.5 * p[:, 1])
    us = usc_regularize(u, lat.h)
    assert np.all(us.values >= u.values)
    assert np.max(us.values - u.values) <= np.hypot(1, 0.5) * lat.h + 1e-12
    dipped = u.values.copy()
    k = mask.position_of_point((0, 0))
    dipped[k] -= 1
    fixed = usc_regularize(GridFunction(mask, dipped), lat.h)
    assert fixed.values[k] >= u.values[k]
    v = GridFunction(mask, u.values + 0.1)
    assert np.all(usc_regularize(v, lat.h).values >= us.values)
    with pytest.raises(PreconditionError):
        usc_regularize(u, 0.5 * lat.h)


def test_monotone_examples(disk01):
    _, _, mask, cone = disk01
    const = [GridFunction.constant(mask, 1.0) for _ in range(3)]
    rep = monotone_limit_check(const, cone)
    assert rep.nonincreasing and rep.all_in_cone
    rep = monotone_limit_check([GridFunction.constant(mask, 0.0), GridFunction.constant(mask, 1.0)], cone)
    assert not rep.nonincreasing and rep.first_increase[0] == 0
    with pytest.raises(PreconditionError):
        monotone_limit_check(const[:1], cone)


def test_radial_dilation_sequence_increases(disk01):
    _, _, mask, cone = disk01
    seq = [
        gf(mask, lambda p, j=j: -np.sqrt(np.maximum(0, 1 - (1 - 1 / j) ** 2 * np.sum(p**2, 1))))
        for j in range(1, 11)
    ]
    rep = monotone_limit_check(seq, cone)
    # u((1 - 1/j) z) grows with j for this radially decreasing u
    assert rep.nondecreasing and not rep.nonincreasing
    assert rep.all_in_cone
