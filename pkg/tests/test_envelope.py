import numpy as np
import pytest

from pluripot import GridFunction, cone_violation, dirichlet_psh_extension, harmonic_extension, psh_envelope, relative_extremal
from pluripot.envelope import sweep_once
from pluripot.exceptions import NonConvergence, PreconditionError

from conftest import grid


def gf(mask, func):
    return GridFunction.from_callable(mask, func)


def dense_harmonic(mask, boundary_values):
    """Independent 5-point Dirichlet solve with a dense matrix."""
    lat = mask.lattice
    nc = mask.n_closure
    M = np.eye(nc)
    rhs = np.zeros(nc)
    pos_of = {int(n): i for i, n in enumerate(mask.closure_nodes)}
    for i in range(nc):
        if mask.is_interior[i]:
            k = lat.multi_index(int(mask.closure_nodes[i]))
            M[i, i] = 4.0
            for axis in range(2):
                for step in (-1, 1):
                    kk = np.array(k)
                    kk[axis] += step
                    M[i, pos_of[int(lat.flat_index(kk))]] -= 1.0
        else:
            rhs[i] = boundary_values[i]
    return np.linalg.solve(M, rhs)


def test_harmonic_extension_examples(disk01):
    _, _, mask, _ = disk01
    f = gf(mask, lambda p: p[:, 0])
    assert np.max(np.abs(harmonic_extension(f, mask).values - f.values)) <= 1e-8
    one = GridFunction.constant(mask, 1.0)
    assert np.max(np.abs(harmonic_extension(one, mask).values - 1)) <= 1e-10
    spike = np.zeros(mask.n_closure)
    spike[mask.boundary_positions[3]] = 1.0
    H = harmonic_extension(GridFunction(mask, spike), mask)
    ref = dense_harmonic(mask, spike)
    c = mask.position_of_point((0, 0))
    assert H.values[c] == pytest.approx(ref[c], abs=1e-8)
    assert np.max(np.abs(H.values - ref)) <= 1e-8


def test_envelope_trivial_cases(disk01):
    _, _, mask, cone = disk01
    res = psh_envelope(GridFunction.constant(mask, 0.7), cone)
    assert res.iterations == 1 and np.all(res.envelope.values == 0.7)
    f = gf(mask, lambda p: p[:, 0])
    res = psh_envelope(f, cone)
    assert np.max(np.abs(res.envelope.values - f.values)) <= 1e-12
    assert res.contact_set.size == mask.n_closure


def test_envelope_fixed_point_and_monotone(disk01, rng):
    _, _, mask, cone = disk01
    obs = GridFunction(mask, rng.normal(size=mask.n_closure))
    res = psh_envelope(obs, cone, tol=1e-12)
    again = sweep_once(res.envelope, obs, cone)
    assert np.max(np.abs(again.values - res.envelope.values)) <= res.tol
    assert np.all(res.envelope.values <= obs.values + 1e-15)
    u = obs
    for _ in range(30):
        nxt = sweep_once(u, obs, cone)
        assert np.all(nxt.values <= u.values)
        u = nxt
    # interior rows hold; boundary nodes keep the obstacle in fixed mode
    vals = cone.apply(res.envelope.values)
    assert np.max(vals[~cone.row_is_boundary]) <= 1e-9 * (1 + obs.value_range)


def test_envelope_dominates_cone_members(disk01, rng):
    _, _, mask, cone = disk01
    pts = mask.closure_points()
    obs = GridFunction(mask, np.cos(3 * pts[:, 0]) + np.sin(2 * pts[:, 1]) - np.sum(pts**2, 1))
    env = psh_envelope(obs, cone, tol=1e-12)
    for _ in range(20):
        c = rng.uniform(-1, 1, 2)
        a, b, th = rng.uniform(0, 2), rng.uniform(-2, 2), rng.uniform(0, 2 * np.pi)
        v = a * np.sum((pts - c) ** 2, 1) + b * (np.cos(th) * pts[:, 0] + np.sin(th) * pts[:, 1])
        assert cone_violation(GridFunction(mask, v), cone).in_cone
        v = v - np.max(v - obs.values)
        assert np.all(v <= env.envelope.values + env.tol)


def test_envelope_maximum_principle(disk01, rng):
    _, _, mask, cone = disk01
    vals = -rng.uniform(0, 1, mask.n_closure)
    vals[mask.boundary_positions] = 0.0
    env = psh_envelope(GridFunction(mask, vals), cone).envelope.values
    assert env[mask.interior_positions].max() <= env[mask.boundary_positions].max() + 1e-12


def test_envelope_sweep_modes_agree(disk01, rng):
    _, _, mask, cone = disk01
    obs = GridFunction(mask, rng.normal(size=mask.n_closure))
    a = psh_envelope(obs, cone, tol=1e-12).envelope.values
    b = psh_envelope(obs, cone, tol=1e-12, sweep="gauss-seidel", polish=False).envelope.values
    assert np.max(np.abs(a - b)) <= 1e-9
    with pytest.raises(PreconditionError):
        psh_envelope(obs, cone, sweep="sideways")


def test_envelope_nonconvergence(disk01):
    _, _, mask, cone = disk01
    obs = gf(mask, lambda p: -np.sum(p**2, 1))
    with pytest.raises(NonConvergence) as info:
        psh_envelope(obs, cone, max_iter=2, polish=False)
    assert info.value.result is not None and not info.value.result.converged
    res = psh_envelope(obs, cone, max_iter=2, polish=False, raise_on_fail=False)
    assert not res.converged


def test_neg_abs2_envelope_error_shrinks_with_h():
    errs = []
    for h in (0.1, 0.05):
        _, _, mask, cone = grid("unit_disk", h)
        env = psh_envelope(gf(mask, lambda p: -np.sum(p**2, 1)), cone).envelope
        errs.append(abs(env.at_point((0, 0)) + 1))
    # boundary nodes sit up to h inside the circle, so the error is first order
    assert errs[1] < errs[0] <= 2 * 0.1


def test_relative_extremal_examples(disk005):
    _, _, mask, cone = disk005
    u = relative_extremal(mask.interior_positions, mask, cone)
    assert np.all(u.values[mask.interior_positions] == -1.0)
    assert np.all(u.values[mask.boundary_positions] == 0.0)
    with pytest.raises(PreconditionError):
        relative_extremal([], mask, cone)
    with pytest.raises(PreconditionError):
        relative_extremal(mask.boundary_positions[:1], mask, cone)


def test_relative_extremal_radial_oracle():
    vals = []
    for h in (0.1, 0.05):
        _, _, mask, cone = grid("unit_disk", h)
        pts = mask.closure_points()
        K = (np.hypot(pts[:, 0], pts[:, 1]) <= 0.25 + 1e-12) & mask.is_interior
        vals.append(relative_extremal(K, mask, cone, tol=1e-10).at_point((0.5, 0)))
    oracle = max(-1, np.log(0.5) / np.log(4))
    assert abs(vals[1] - oracle) < abs(vals[0] - oracle)
    assert abs(vals[1] - oracle) < 0.06


def test_dirichlet_examples(disk01):
    _, _, mask, cone = disk01
    f = gf(mask, lambda p: p[:, 0])
    res = dirichlet_psh_extension(f, mask, cone)
    assert res.boundary_mismatch <= 1e-8
    assert np.max(np.abs(res.envelope.values - f.values)) <= 1e-8
    zero = dirichlet_psh_extension(GridFunction.constant(mask, 0.0), mask, cone)
    assert np.all(zero.envelope.values == 0.0)


def test_dirichlet_below_harmonic(disk01):
    _, _, mask, cone = disk01
    f = gf(mask, lambda p: -np.abs(p[:, 1]) / np.maximum(np.hypot(p[:, 0], p[:, 1]), 1e-12))
    res = dirichlet_psh_extension(f, mask, cone)
    H = harmonic_extension(f, mask)
    assert np.all(res.envelope.values <= H.values + 1e-12)
    assert res.to_dict()["boundary_mismatch"] == res.boundary_mismatch
