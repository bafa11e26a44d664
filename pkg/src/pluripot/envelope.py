"""Plurisubharmonic envelopes, harmonic extensions and relative extremal functions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import NonConvergence, PreconditionError
from .lattice import DiscretePshCone, DomainMask, _neighbour_offsets
from .pshcore import GridFunction, _check_mask

log = logging.getLogger(__name__)

# Howard polishing assembles sparse systems; skip it above this many nonzeros
_POLISH_NNZ = 3_000_000


@dataclass(eq=False)
class EnvelopeResult:
    """Outcome of an envelope computation."""

    envelope: GridFunction
    obstacle: GridFunction
    iterations: int
    residual: float
    tol: float
    converged: bool
    boundary: str = "fixed"
    polished: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def contact_set(self) -> np.ndarray:
        """Closure positions where the envelope touches the obstacle."""
        return np.flatnonzero(np.abs(self.envelope.values - self.obstacle.values) <= 10 * self.tol)

    def to_dict(self) -> dict:
        out = {
            "iterations": self.iterations,
            "residual": self.residual,
            "tol": self.tol,
            "converged": self.converged,
            "boundary": self.boundary,
            "polished": self.polished,
            "contact_set_size": int(self.contact_set.size),
        }
        out.update(self.extras)
        return out


def _active_rows(cone: DiscretePshCone, boundary: str) -> np.ndarray:
    if boundary == "fixed":
        return np.flatnonzero(~cone.row_is_boundary)
    if boundary == "closure":
        return np.arange(cone.n_rows)
    raise PreconditionError(f"boundary mode must be 'fixed' or 'closure', got {boundary!r}")


class _Sweeper:
    """One value-iteration sweep ``u -> min(obstacle, min_rows avg u)``."""

    def __init__(self, cone: DiscretePshCone, rows: np.ndarray, obstacle: np.ndarray):
        self.cone = cone
        self.rows = rows
        self.obstacle = obstacle
        self.centers, self.starts = cone.row_segments(rows)
        self.use_matrix = cone.nnz_estimate <= 4_000_000
        if self.use_matrix:
            self.avg = cone.averaging_matrix()[rows]

    def averages(self, u):
        if self.use_matrix:
            return self.avg @ u
        return self.cone.averages(u, self.rows)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        out = u.copy()
        if self.rows.size == 0:
            return out
        best = np.minimum.reduceat(self.averages(u), self.starts)
        out[self.centers] = np.minimum(self.obstacle[self.centers], best)
        return out

    def gauss_seidel(self, u: np.ndarray) -> np.ndarray:
        """In-place sweep in centre order; order dependent by design."""
        out = u.copy()
        avg = self.avg if self.use_matrix else self.cone.averaging_matrix()[self.rows]
        bounds = np.r_[self.starts, self.rows.size]
        indptr, indices, data = avg.indptr, avg.indices, avg.data
        for k, c in enumerate(self.centers):
            best = self.obstacle[c]
            for r in range(bounds[k], bounds[k + 1]):
                lo, hi = indptr[r], indptr[r + 1]
                best = min(best, float(np.dot(data[lo:hi], out[indices[lo:hi]])))
            out[c] = best
        return out


def _howard(sweeper: _Sweeper, u: np.ndarray, tol: float, max_rounds: int = 30):
    """Policy iteration from a supersolution; returns an improved iterate or ``None``."""
    cone = sweeper.cone
    obs = sweeper.obstacle
    n = u.size
    avg = sweeper.avg if sweeper.use_matrix else cone.averaging_matrix()[sweeper.rows]
    centers, starts = sweeper.centers, sweeper.starts
    counts = np.diff(np.r_[starts, sweeper.rows.size])
    seg_of_row = np.repeat(np.arange(centers.size), counts)
    current = u
    for _ in range(max_rounds):
        vals = avg @ current
        best = np.minimum.reduceat(vals, starts)
        take_row = best < obs[centers]
        # first row attaining the minimum in each segment
        hit = np.flatnonzero(vals == best[seg_of_row])
        first = np.full(centers.size, -1)
        seg_hit = seg_of_row[hit]
        first[seg_hit[::-1]] = hit[::-1]
        active = centers[take_row]
        chosen = first[take_row]
        lift = sp.csr_matrix((np.ones(active.size), (active, np.arange(active.size))), shape=(n, active.size))
        A = sp.identity(n, format="csr") - lift @ avg[chosen]
        rhs = current.copy()
        rhs[centers] = obs[centers]
        rhs[active] = 0.0
        try:
            with np.errstate(all="ignore"):
                new = spla.spsolve(A.tocsc(), rhs)
        except Exception:  # singular policy systems are skipped
            return None
        if not np.all(np.isfinite(new)):
            return None
        new = np.minimum(new, current)
        change = float(np.max(np.abs(new - current))) if n else 0.0
        current = new
        if change <= tol:
            break
    return current


def psh_envelope(
    obstacle: GridFunction,
    cone: DiscretePshCone,
    mask: DomainMask | None = None,
    *,
    boundary: str = "fixed",
    tol: float | None = None,
    max_iter: int = 10**6,
    sweep: str = "jacobi",
    polish="auto",
    raise_on_fail: bool = True,
) -> EnvelopeResult:
    """Greatest element of the discrete psh cone lying below ``obstacle``.

    Value iteration ``u <- min(obstacle, min over disks of avg u)`` starting
    from the obstacle.  With ``boundary='fixed'`` boundary nodes keep the
    obstacle value and only interior constraints are used; ``'closure'`` also
    enforces the constraints centred at boundary nodes.  ``polish`` runs
    Howard policy iteration on the converged iterate when the system is small
    enough (``'auto'``), which removes the slow geometric tail.
    """
    mask = cone.mask if mask is None else mask
    _check_mask(obstacle, mask)
    if not cone.mask.same_as(mask):
        raise PreconditionError("cone and mask disagree")
    obs = obstacle.values
    tol_abs = (1e-8 if tol is None else float(tol)) * (1.0 + obstacle.value_range)
    rows = _active_rows(cone, boundary)
    sweeper = _Sweeper(cone, rows, obs)
    step = sweeper if sweep == "jacobi" else sweeper.gauss_seidel
    if sweep not in ("jacobi", "gauss-seidel"):
        raise PreconditionError(f"unknown sweep mode {sweep!r}")

    u = obs.copy()
    residual = np.inf
    it = 0
    polished = False
    do_polish = (polish == "auto" and cone.nnz_estimate <= _POLISH_NNZ) or polish is True
    next_check = 200
    while it < max_iter:
        new = step(u)
        it += 1
        residual = float(np.max(u - new)) if u.size else 0.0
        u = new
        if residual <= tol_abs:
            break
        if do_polish and it >= next_check:
            cand = _howard(sweeper, u, tol_abs * 1e-3)
            if cand is not None:
                after = step(cand)
                res = float(np.max(np.abs(cand - after)))
                if res <= tol_abs:
                    u, residual, polished = after, res, True
                    it += 1
                    break
            next_check = it + min(2 * next_check, 5000)
    converged = residual <= tol_abs
    result = EnvelopeResult(
        envelope=GridFunction(mask, u, "envelope"),
        obstacle=obstacle,
        iterations=it,
        residual=residual,
        tol=tol_abs,
        converged=converged,
        boundary=boundary,
        polished=polished,
    )
    if not converged and raise_on_fail:
        raise NonConvergence(f"envelope residual {residual:.3e} after {it} sweeps", result=result, residual=residual)
    return result


def sweep_once(u: GridFunction, obstacle: GridFunction, cone: DiscretePshCone, boundary: str = "fixed") -> GridFunction:
    """Apply one Jacobi sweep; used to verify fixed points."""
    sweeper = _Sweeper(cone, _active_rows(cone, boundary), obstacle.values)
    return u.with_values(sweeper(u.values))


def laplacian_matrix(mask: DomainMask) -> sp.csr_matrix:
    """``(4n)``-point discrete Laplacian rows at interior nodes, identity at boundary nodes."""
    lat = mask.lattice
    nc = mask.n_closure
    interior = mask.interior_positions
    flat = mask.closure_nodes[interior]
    multi = lat.multi_index(flat)
    rows = [np.arange(nc)]
    cols = [np.arange(nc)]
    vals = [np.where(mask.is_interior, -2.0 * lat.dim, 1.0)]
    for off in _neighbour_offsets(lat.dim, "axis"):
        nb = lat.flat_index(multi + np.asarray(off))
        rows.append(interior)
        cols.append(mask.position[nb])
        vals.append(np.ones(interior.size))
    r, c, v = map(np.concatenate, (rows, cols, vals))
    if np.any(c < 0):
        raise PreconditionError("interior node with a neighbour outside the closure")
    return sp.csr_matrix((v, (r, c)), shape=(nc, nc))


def harmonic_extension(f, mask: DomainMask, *, tol: float = 1e-10) -> GridFunction:
    """Discrete harmonic function on the interior with boundary values ``f``.

    ``f`` is a GridFunction (only its boundary values are used), an array of
    boundary values ordered like ``mask.boundary_positions``, or a callable on
    points.  Solved directly with a sparse factorization.
    """
    nc = mask.n_closure
    bpos = mask.boundary_positions
    if callable(f) and not isinstance(f, GridFunction):
        fb = np.asarray(f(mask.closure_points()[bpos]), dtype=float)
    elif isinstance(f, GridFunction):
        _check_mask(f, mask)
        fb = f.values[bpos]
    else:
        fb = np.asarray(f, dtype=float)
    if fb.shape != (bpos.size,):
        raise PreconditionError(f"need {bpos.size} boundary values, got {fb.shape}")
    L = laplacian_matrix(mask)
    rhs = np.zeros(nc)
    rhs[bpos] = fb
    H = spla.spsolve(L.tocsc(), rhs) if nc else rhs
    H = np.asarray(H).ravel()
    scale = 1.0 + (float(fb.max() - fb.min()) if fb.size else 0.0)
    residual = float(np.max(np.abs(L @ H - rhs))) if nc else 0.0
    if not np.all(np.isfinite(H)) or residual > tol * scale:
        raise NonConvergence(f"harmonic extension residual {residual:.3e}", residual=residual)
    return GridFunction(mask, H, "H")


def relative_extremal(K, mask: DomainMask, cone: DiscretePshCone, **kwargs) -> GridFunction:
    """Envelope of the obstacle equal to ``-1`` on ``K`` and ``0`` elsewhere.

    ``K`` is an iterable of closure positions or a boolean array over closure
    nodes; it must be a nonempty set of interior nodes.
    """
    K = np.asarray(K)
    if K.dtype == bool:
        K = np.flatnonzero(K)
    K = K.astype(np.int64)
    if K.size == 0:
        raise PreconditionError("K must be nonempty")
    if not np.all(mask.is_interior[K]):
        raise PreconditionError("K must consist of interior nodes")
    obs = np.zeros(mask.n_closure)
    obs[K] = -1.0
    res = psh_envelope(GridFunction(mask, obs, "obstacle"), cone, mask, **kwargs)
    out = res.envelope
    out.role = "relative_extremal"
    return out


@dataclass(eq=False)
class DirichletResult:
    """Dirichlet psh extension with its boundary diagnostics."""

    result: EnvelopeResult
    harmonic: GridFunction
    boundary_mismatch: float
    jump_proxy: float

    @property
    def envelope(self) -> GridFunction:
        return self.result.envelope

    def to_dict(self) -> dict:
        out = self.result.to_dict()
        out.update(boundary_mismatch=self.boundary_mismatch, jump_proxy=self.jump_proxy)
        return out


def dirichlet_psh_extension(f, mask: DomainMask, cone: DiscretePshCone, **kwargs) -> DirichletResult:
    """Harmonic extension of ``f`` followed by the envelope on the closure.

    ``boundary_mismatch`` is ``max |Phi - f|`` over boundary nodes.
    ``jump_proxy`` is the largest difference between a boundary value and an
    adjacent interior value, a crude modulus-of-continuity indicator.
    """
    H = harmonic_extension(f, mask)
    kwargs.setdefault("boundary", "closure")
    res = psh_envelope(H.with_values(H.values, "obstacle"), cone, mask, **kwargs)
    phi = res.envelope.values
    b = mask.boundary_positions
    mismatch = float(np.max(np.abs(phi[b] - H.values[b]))) if b.size else 0.0
    res.extras["boundary_mismatch"] = mismatch
    full = res.envelope.to_lattice()
    cls = mask.classes
    jump = 0.0
    for off in _neighbour_offsets(mask.lattice.dim, "axis"):
        from .lattice import _shifted

        nb = _shifted(full, off, fill=np.nan)
        nbcls = _shifted(cls, off, fill=0)
        sel = (cls == 1) & (nbcls == 2)
        if np.any(sel):
            jump = max(jump, float(np.nanmax(np.abs(full[sel] - nb[sel]))))
    return DirichletResult(result=res, harmonic=H, boundary_mismatch=mismatch, jump_proxy=jump)
