"""Discrete Jensen measures as the linear-programming dual of the envelope.

For a node ``z`` and obstacle ``phi`` the measures are ``mu = delta_z - A^T lam``
with ``lam >= 0`` and ``mu >= 0``; minimising ``sum mu phi`` is the LP

    maximise (A phi)^T lam  subject to  A^T lam <= delta_z,  lam >= 0,

whose optimum equals the envelope of ``phi`` at ``z`` by strong duality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.sparse.csgraph import breadth_first_order

from .exceptions import LpInfeasible, LpUnbounded, MaskMismatch, PreconditionError
from .lattice import DiscretePshCone, DomainMask
from .pshcore import GridFunction, _check_mask

DENSE_LIMIT = 2000
PRUNE = 1e-12


@dataclass(eq=False)
class DiscreteMeasure:
    """Nonnegative weights on closure positions of a mask."""

    mask: DomainMask
    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=float)
        order = np.argsort(self.positions, kind="stable")
        self.positions, self.weights = self.positions[order], self.weights[order]
        if np.any(self.weights < 0):
            raise ValueError("measure weights must be nonnegative")

    @classmethod
    def point_mass(cls, mask: DomainMask, position: int) -> "DiscreteMeasure":
        return cls(mask, [int(position)], [1.0])

    @classmethod
    def from_dense(cls, mask: DomainMask, vec, prune: float = PRUNE, renormalize: bool = True) -> "DiscreteMeasure":
        vec = np.asarray(vec, dtype=float)
        keep = np.flatnonzero(vec > prune)
        w = vec[keep]
        if renormalize and w.sum() > 0:
            w = w / w.sum()
        return cls(mask, keep, w)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def dense(self) -> np.ndarray:
        out = np.zeros(self.mask.n_closure)
        np.add.at(out, self.positions, self.weights)
        return out

    def integrate(self, u) -> float:
        vals = u.values if isinstance(u, GridFunction) else np.asarray(u)
        return float(np.dot(self.weights, vals[self.positions]))

    def to_dict(self) -> dict:
        nodes = self.mask.closure_nodes[self.positions]
        coords = self.mask.lattice.coords(nodes)
        return {
            "total_mass": self.total_mass,
            "atoms": [
                {"node": int(n), "coords": c.tolist(), "weight": float(w)}
                for n, c, w in zip(nodes, coords, self.weights)
            ],
        }


@dataclass(eq=False)
class JensenSolution:
    value: float
    measure: DiscreteMeasure
    rows: np.ndarray
    lam: np.ndarray
    solver: str
    windowed: bool = False
    extras: dict = field(default_factory=dict)


@dataclass(eq=False)
class DualityCertificate:
    """Envelope value against the Jensen LP value at one node."""

    primal: float
    dual: float
    gap: float
    measure: DiscreteMeasure
    rows: np.ndarray
    lam: np.ndarray
    reconstruction_error: float

    def to_dict(self) -> dict:
        return {
            "primal": self.primal,
            "dual": self.dual,
            "gap": self.gap,
            "reconstruction_error": self.reconstruction_error,
            "measure": self.measure.to_dict(),
        }


class SimplexResult:
    def __init__(self, x, value, pivots):
        self.x, self.value, self.pivots = x, value, pivots


def dense_simplex(
    c, G, b, *, tol: float = 1e-9, max_pivots: int = 200_000, perturbation: float = 1e-7, bland_after: int = 50
) -> SimplexResult:
    """Maximise ``c x`` subject to ``G x <= b``, ``x >= 0`` with ``b >= 0``.

    Tableau simplex started from the slack basis.  The right-hand side is
    perturbed by small distinct positive amounts so that primal pivots are
    nondegenerate; entering columns use the most negative reduced cost and
    fall back to Bland's smallest-index rule after ``bland_after`` consecutive
    degenerate pivots.  Afterwards the exact right-hand side is restored and
    dual simplex pivots (smallest-index rules) recover primal feasibility, so
    the returned basis is optimal for the original data.
    """
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = G.shape
    if np.any(b < 0):
        raise PreconditionError("right-hand side must be nonnegative")
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = G
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b + perturbation * (1.0 + np.arange(m) / max(m, 1))
    T[m, :n] = -c
    basis = np.arange(n, n + m)
    pivots = 0

    def pivot(i, j):
        T[i] /= T[i, j]
        others = np.flatnonzero(T[:, j] != 0)
        others = others[others != i]
        T[others] -= np.outer(T[others, j], T[i])
        basis[i] = j

    stall = 0
    while True:
        neg = np.flatnonzero(T[m, :-1] < -tol)
        if neg.size == 0:
            break
        j = int(neg[0]) if stall >= bland_after else int(neg[np.argmin(T[m, neg])])
        col = T[:m, j]
        pos = np.flatnonzero(col > tol)
        if pos.size == 0:
            raise LpUnbounded("objective unbounded along an improving ray")
        ratios = T[pos, -1] / col[pos]
        rmin = ratios.min()
        ties = pos[ratios <= rmin + 1e-14 * max(1.0, abs(rmin))]
        i = int(ties[np.argmin(basis[ties])])
        stall = stall + 1 if rmin <= 1e-14 else 0
        pivot(i, j)
        pivots += 1
        if pivots > max_pivots:
            raise LpInfeasible("simplex pivot limit reached")

    # restore the exact right-hand side; B^{-1} sits in the slack columns
    T[:m, -1] = T[:m, n : n + m] @ b
    while True:
        bad = np.flatnonzero(T[:m, -1] < -tol)
        if bad.size == 0:
            break
        i = int(bad[np.argmin(basis[bad])])
        row = T[i, :-1]
        cand = np.flatnonzero(row < -tol)
        if cand.size == 0:
            raise LpInfeasible("original problem infeasible after perturbation")
        ratios = T[m, cand] / -row[cand]
        rmin = ratios.min()
        j = int(cand[ratios <= rmin + 1e-14 * max(1.0, abs(rmin))][0])
        pivot(i, j)
        pivots += 1
        if pivots > max_pivots:
            raise LpInfeasible("simplex pivot limit reached")

    x = np.zeros(n + m)
    full = np.hstack([G, np.eye(m)])
    try:
        xb = np.linalg.solve(full[:, basis], b)
    except np.linalg.LinAlgError:
        xb = T[:m, -1]
    x[basis] = xb
    x = np.maximum(x[:n], 0.0)
    return SimplexResult(x, float(c @ x), pivots)


def highs_envelope_lp(A, phi_nodes, z_local, free=None):
    """Solve ``max u_z`` s.t. ``A u <= 0``, ``u <= phi`` and read off the dual measure.

    Returns ``(value, lam, mu)`` where ``mu`` are the multipliers of the upper
    bounds and ``lam`` those of the cone rows, so ``delta_z = A^T lam + mu``.
    Nodes flagged ``free`` carry no upper bound, forcing zero mass there.
    """
    n = A.shape[1]
    cost = np.zeros(n)
    cost[z_local] = -1.0
    upper = np.asarray(phi_nodes, dtype=float).copy()
    if free is not None:
        upper[free] = np.inf
    res = linprog(
        cost,
        A_ub=A,
        b_ub=np.zeros(A.shape[0]),
        bounds=np.column_stack([np.full(n, -np.inf), upper]),
        method="highs-ds",
    )
    if res.status == 2:
        raise LpInfeasible(res.message)
    if res.status == 3:
        raise LpUnbounded(res.message)
    if res.status != 0:
        raise LpInfeasible(f"solver failure: {res.message}")
    lam = np.maximum(-res.ineqlin.marginals, 0.0)
    mu = np.maximum(-res.upper.marginals, 0.0)
    return float(-res.fun), lam, mu


def _row_subset(cone: DiscretePshCone, rows) -> np.ndarray:
    if isinstance(rows, str):
        if rows == "all":
            return np.arange(cone.n_rows)
        if rows == "interior":
            return np.flatnonzero(~cone.row_is_boundary)
        raise PreconditionError(f"unknown row selection {rows!r}")
    return np.asarray(rows, dtype=np.int64)


def reachable_rows(cone: DiscretePshCone, z: int, candidates: np.ndarray) -> np.ndarray:
    """Rows that can carry positive multipliers in a measure at ``z``.

    A row centred at ``c`` adds mass ``+lam`` at ``c`` which must be cancelled
    by rows whose stencils reach ``c``, or be absorbed by ``delta_z``; rows are
    reachable through chains of stencil supports starting from ``z``.
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if candidates.size == 0:
        return candidates
    nc = cone.mask.n_closure
    avg = cone.averaging_matrix()[candidates]
    centers = cone.row_center[candidates]
    lift = sp.csr_matrix((np.ones(candidates.size), (centers, np.arange(candidates.size))), shape=(nc, candidates.size))
    pattern = avg.copy()
    pattern.data = np.ones_like(pattern.data)
    adj = (lift @ pattern).tocsr()
    reached = breadth_first_order(adj, int(z), directed=True, return_predecessors=False)
    hit = np.zeros(nc, dtype=bool)
    hit[reached] = True
    return np.sort(candidates[hit[centers]])


def _window_rows(cone: DiscretePshCone, z: int, rows: np.ndarray, radius_cells: int) -> np.ndarray:
    lat = cone.mask.lattice
    zc = lat.multi_index(cone.mask.closure_nodes[z])
    centers = lat.multi_index(cone.mask.closure_nodes[cone.row_center[rows]])
    near = np.max(np.abs(centers - zc), axis=1) <= radius_cells
    return rows[near]


def jensen_lp(
    z: int,
    phi: GridFunction,
    cone: DiscretePshCone,
    *,
    rows="all",
    support=None,
    solver: str = "auto",
    window: int | None = None,
    max_rows: int = 20_000,
    prune: float = PRUNE,
) -> JensenSolution:
    """Minimise ``sum mu phi`` over discrete Jensen measures at closure position ``z``.

    ``rows`` selects the constraint rows (``'all'``, ``'interior'`` or an
    index array).  ``support='boundary'`` forces zero mass on interior nodes.
    ``solver`` is ``'dense'`` (own simplex), ``'highs'`` or ``'auto'``.
    When the reachable LP exceeds ``max_rows`` only rows centred within
    ``window`` cells of ``z`` are kept; the optimum is then an upper bound and
    the measure is still a genuine discrete Jensen measure.
    """
    mask = cone.mask
    _check_mask(phi, mask)
    z = int(z)
    if not 0 <= z < mask.n_closure:
        raise PreconditionError(f"position {z} is not a closure node")
    cand = _row_subset(cone, rows)
    windowed = False
    if window is None and cand.size > max_rows:
        window = 3
    if window is not None:
        cand = _window_rows(cone, z, cand, window)
        windowed = True
    R = reachable_rows(cone, z, cand)
    if R.size > max_rows:
        cand = _window_rows(cone, z, cand, 3 if window is None else window)
        R = reachable_rows(cone, z, cand)
        windowed = True
    if R.size == 0:
        return JensenSolution(float(phi.values[z]), DiscreteMeasure.point_mass(mask, z), R, np.zeros(0), "trivial", windowed)
    A = cone.matrix()[R]
    nodes = np.unique(np.r_[A.indices, z])
    G = A[:, nodes].T.tocsr()
    b = (nodes == z).astype(float)
    cvec = A @ phi.values
    eq = None
    if support == "boundary":
        inner = mask.is_interior[nodes] & (nodes != z)
        eq = np.flatnonzero(inner)
    elif support is not None:
        raise PreconditionError(f"unknown support restriction {support!r}")
    use_dense = solver == "dense" or (solver == "auto" and R.size <= DENSE_LIMIT and nodes.size <= DENSE_LIMIT)
    if solver not in ("auto", "dense", "highs"):
        raise PreconditionError(f"unknown solver {solver!r}")
    z_local = int(np.flatnonzero(nodes == z)[0])
    if use_dense:
        Gd = G.toarray()
        bd = b
        if eq is not None and eq.size:
            Gd = np.vstack([Gd, -Gd[eq]])
            bd = np.r_[b, -b[eq]]
        sol = dense_simplex(cvec, Gd, bd)
        lam = sol.x
        mu_nodes = b - G @ lam
        value = float(phi.values[z] - cvec @ lam)
        name, pivots = "dense", sol.pivots
    else:
        value, lam, mu_nodes = highs_envelope_lp(A[:, nodes], phi.values[nodes], z_local, eq)
        name, pivots = "highs", None
    mu_full = np.zeros(mask.n_closure)
    mu_full[nodes] = np.maximum(mu_nodes, 0.0)
    measure = DiscreteMeasure.from_dense(mask, mu_full, prune=prune)
    return JensenSolution(value, measure, R, lam, name, windowed, {"n_nodes": int(nodes.size), "pivots": pivots})


def reconstruct(cone: DiscretePshCone, z: int, rows: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Dense ``delta_z - A^T lam`` over closure nodes."""
    mu = np.zeros(cone.mask.n_closure)
    mu[z] = 1.0
    if rows.size:
        mu -= cone.matrix()[rows].T @ lam
    return mu


def is_jensen_feasible(cone: DiscretePshCone, z: int, rows, lam, tol: float = 1e-9) -> bool:
    lam = np.asarray(lam, dtype=float)
    mu = reconstruct(cone, z, np.asarray(rows, dtype=np.int64), lam)
    return bool(np.all(lam >= -tol) and np.all(mu >= -tol) and abs(mu.sum() - 1) <= tol)


def edwards_gap(
    z: int,
    phi: GridFunction,
    cone: DiscretePshCone,
    *,
    boundary: str = "fixed",
    envelope=None,
    solver: str = "auto",
    tol: float = 1e-11,
) -> DualityCertificate:
    """Compare the envelope at ``z`` with the Jensen LP value at ``z``.

    ``boundary`` selects the envelope semantics; the LP uses the matching row
    set (interior rows for ``'fixed'``, all rows for ``'closure'``).
    ``envelope`` may carry a precomputed EnvelopeResult.
    """
    from .envelope import psh_envelope

    if envelope is None:
        envelope = psh_envelope(phi, cone, boundary=boundary, tol=tol)
    primal = float(envelope.envelope.values[z])
    sol = jensen_lp(z, phi, cone, rows="interior" if boundary == "fixed" else "all", solver=solver)
    mu = reconstruct(cone, int(z), sol.rows, sol.lam)
    err = float(np.max(np.abs(mu - sol.measure.dense())))
    return DualityCertificate(
        primal=primal,
        dual=sol.value,
        gap=abs(primal - sol.value),
        measure=sol.measure,
        rows=sol.rows,
        lam=sol.lam,
        reconstruction_error=err,
    )


def support_profile(mu: DiscreteMeasure, mask: DomainMask) -> tuple[float, float]:
    """Split the mass of ``mu`` into (interior mass, boundary mass)."""
    if not mu.mask.same_as(mask):
        raise MaskMismatch("measure lives on a different mask")
    inner = mask.is_interior[mu.positions]
    return float(mu.weights[inner].sum()), float(mu.weights[~inner].sum())


def check_jensen_inequality(u: GridFunction, mu: DiscreteMeasure, z: int, tol: float = 1e-12):
    """Return ``(u(z) <= int u dmu + tol, slack)`` with ``slack = int u dmu - u(z)``."""
    if not u.mask.same_as(mu.mask):
        raise MaskMismatch("function and measure live on different masks")
    slack = mu.integrate(u) - float(u.values[z])
    return bool(slack >= -tol), float(slack)


def stencil_measure(cone: DiscretePshCone, row: int) -> DiscreteMeasure:
    """Circle-average measure of one constraint row (``delta_z - A_row``)."""
    avg = cone.averaging_matrix()
    lo, hi = avg.indptr[row], avg.indptr[row + 1]
    vec = np.zeros(cone.mask.n_closure)
    np.add.at(vec, avg.indices[lo:hi], avg.data[lo:hi])
    return DiscreteMeasure.from_dense(cone.mask, vec, prune=0.0, renormalize=False)


def row_witness(cone: DiscretePshCone, z: int, direction, radius: float | None = None):
    """Row at ``z`` with the given direction (and largest radius by default).

    Returns ``(row, measure)`` where the measure is ``delta_z - A_row^T``, the
    push-forward of circle measure along the row's complex line.
    """
    direction = np.asarray(direction, dtype=complex)
    direction = direction / np.linalg.norm(direction)
    rows = cone.rows_at(int(z))
    best = None
    for r in rows:
        kern = cone.kernels[cone.row_kernel[r]]
        if abs(abs(np.vdot(kern.direction, direction)) - 1) > 1e-9:
            continue
        if radius is not None and abs(kern.radius - radius) > 1e-9:
            continue
        if best is None or kern.radius > cone.kernels[cone.row_kernel[best]].radius:
            best = int(r)
    if best is None:
        raise PreconditionError("no stencil row with that direction at this node")
    return best, stencil_measure(cone, best)
