import numpy as np
import pytest

from pluripot import GridFunction, bounded_extension, build_exhaustion, cone_violation, cutoff_extension, max_glue, relative_extremal
from pluripot.exceptions import BoundViolated, EmptyE, NoFeasibleC, UnboundedU


def gf(mask, func):
    return GridFunction.from_callable(mask, func)


@pytest.fixture(scope="module")
def setup(disk005):
    _, _, mask, cone = disk005
    psi = build_exhaustion(mask, cone, tol=1e-12)
    pts = mask.closure_points()
    E = np.flatnonzero((np.hypot(pts[:, 0], pts[:, 1]) <= 0.25) & mask.is_interior)
    K = np.hypot(pts[:, 0], pts[:, 1]) <= 0.25
    collar_psi = relative_extremal(K & mask.is_interior, mask, cone, tol=1e-12)
    return mask, cone, psi, E, collar_psi


def test_max_glue_contract(setup):
    mask, cone, psi, E, _ = setup
    u = gf(mask, lambda p: p[:, 0])
    ut, params = max_glue(u, psi, E, cone)
    assert params.eps > 0 and params.K > 0
    assert np.all(psi.values[E] < -params.eps)
    assert np.all(ut.values[E] == u.values[E] - params.M)
    b = ut.values[mask.boundary_positions]
    assert np.all(b == params.K * params.eps)
    rep = cone_violation(ut, cone)
    assert rep.worst <= 10 * rep.tol
    assert np.all(params.K * (psi.values[E] + params.eps) < u.values[E] - params.M)


def test_max_glue_locality(setup, rng):
    mask, cone, psi, E, _ = setup
    u = gf(mask, lambda p: p[:, 0] + p[:, 1] ** 2)
    a, pa = max_glue(u, psi, E, M_rule="sublevel")
    outside = psi.values > -pa.eps
    v = u.values.copy()
    v[outside] += rng.uniform(-5, 5, outside.sum())
    b, pb = max_glue(GridFunction(mask, v), psi, E, M_rule="sublevel")
    assert pa.M == pb.M and pa.K == pb.K
    assert np.array_equal(a.values, b.values)


def test_max_glue_errors(setup):
    mask, cone, psi, E, _ = setup
    u = gf(mask, lambda p: p[:, 0])
    with pytest.raises(EmptyE):
        max_glue(u, psi, [])
    bad = u.values.copy()
    bad[E[0]] = -np.inf
    absent = np.zeros(mask.n_closure, dtype=bool)
    absent[E[0]] = True
    with pytest.raises(UnboundedU):
        max_glue(GridFunction(mask, bad, absent=absent), psi, E)


def test_bounded_extension(disk005):
    _, _, mask, cone = disk005
    u = gf(mask, lambda p: p[:, 0])
    out = bounded_extension(u, 1.0, mask, cone)
    assert np.all(out.values[mask.boundary_positions] == 1.0)
    assert np.array_equal(out.values[mask.interior_positions], u.values[mask.interior_positions])
    assert out.violation.in_cone
    zero = bounded_extension(GridFunction.constant(mask, 0.0), 0.0, mask)
    assert np.all(zero.values == 0)
    with pytest.raises(BoundViolated):
        bounded_extension(GridFunction.constant(mask, 2.0), 1.0, mask)


def test_bounded_extension_preserves_cone(disk005, rng):
    _, _, mask, cone = disk005
    pts = mask.closure_points()
    for _ in range(5):
        c = rng.uniform(-0.5, 0.5, 2)
        u = GridFunction(mask, rng.uniform(0.5, 2) * np.sum((pts - c) ** 2, 1))
        M = u.values.max() + rng.uniform(0, 1)
        assert bounded_extension(u, M, mask, cone).violation.in_cone


def test_cutoff_reproduces_boundary_data(setup):
    mask, cone, _, _, psi = setup
    for func in (lambda p: p[:, 0], lambda p: p[:, 0] ** 2 - p[:, 1] ** 2, lambda p: np.hypot(p[:, 0] - 0.3, p[:, 1])):
        f = gf(mask, func)
        res = cutoff_extension(f, psi, cone)
        F, C = res
        b = mask.boundary_positions
        assert np.max(np.abs(F.values[b] - f.values[b])) <= 1e-6
        assert cone_violation(F, cone).in_cone
        assert np.isfinite(C) and C >= 1
        assert C <= 10 * max(res.predicted_C, 1.0)


def test_cutoff_zero_data(setup):
    mask, cone, _, _, psi = setup
    res = cutoff_extension(GridFunction.constant(mask, 0.0), psi, cone)
    assert res.C == 1.0
    assert np.array_equal(res.F.values, res.C * res.psi_tilde.values)
    assert np.all(res.F.values[mask.boundary_positions] == 0)


def test_cutoff_no_feasible_c(setup):
    mask, cone, _, _, psi = setup
    f = gf(mask, lambda p: -10 * np.sum(p**2, 1))
    with pytest.raises(NoFeasibleC) as info:
        cutoff_extension(f, psi, cone, max_doublings=0)
    assert info.value.best_violation > 0
