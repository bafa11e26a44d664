"""Max-glueing over sublevel sets, bounded extension and cutoff boundary extension."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import BoundViolated, EmptyE, NoFeasibleC, PreconditionError, UnboundedU
from .lattice import DiscretePshCone, DomainMask
from .pshcore import GridFunction, _check_mask, cone_violation

log = logging.getLogger(__name__)


@dataclass
class GlueParams:
    eps: float
    K: float
    M: float
    E: np.ndarray
    M_rule: str = "sublevel"

    def to_dict(self) -> dict:
        return {"eps": self.eps, "K": self.K, "M": self.M, "E_size": int(self.E.size), "M_rule": self.M_rule}


def _positions(E, mask: DomainMask) -> np.ndarray:
    E = np.asarray(E)
    if E.dtype == bool:
        E = np.flatnonzero(E)
    return np.unique(E.astype(np.int64))


def _stencil_hull(cone: DiscretePshCone, centers: np.ndarray) -> np.ndarray:
    """Nodes read by any row centred in ``centers``."""
    sel = np.isin(cone.row_center, centers)
    avg = cone.averaging_matrix()[np.flatnonzero(sel)]
    return np.unique(np.r_[avg.indices, centers])


def max_glue(
    u: GridFunction,
    psi: GridFunction,
    E,
    cone: DiscretePshCone | None = None,
    *,
    M_rule: str = "auto",
    tol: float | None = None,
):
    """Glue ``u - M`` into ``K (psi + eps)`` below the level ``-eps``.

    Returns ``(u_tilde, GlueParams)`` with ``u_tilde = max{K(psi+eps), u-M}`` on
    ``{psi < -eps}`` and ``K(psi+eps)`` elsewhere.  ``M`` is the maximum of
    ``u`` over ``{psi <= -eps}``; with ``M_rule='hull'`` it also covers every
    node read by a stencil centred there, which keeps the grid sub-mean
    inequalities intact across the level set.  ``'auto'`` uses the sublevel
    rule unless the result leaves the cone.
    """
    mask = u.mask
    _check_mask(psi, mask)
    E = _positions(E, mask)
    if E.size == 0:
        raise EmptyE("E is empty")
    if not np.all(mask.is_interior[E]):
        raise PreconditionError("E must consist of interior nodes")
    top = float(psi.values[E].max())
    if not top < 0:
        raise PreconditionError("psi must be negative on E")
    eps = -top / 2
    sub = np.flatnonzero(psi.values <= -eps)
    undefined = ~np.isfinite(u.values[sub])
    if u.absent is not None:
        undefined |= u.absent[sub]
    if np.any(undefined):
        raise UnboundedU("u is not finite on the sublevel set")

    def build(rule):
        region = sub if rule == "sublevel" else _stencil_hull(cone, sub)
        M = float(u.values[region].max())
        K = (float(u.values[E].min()) - M - 1.0) / (top + eps)
        shifted = psi.values + eps
        # make K(psi+eps) < u - M strict on E
        for _ in range(60):
            if np.all(K * shifted[E] < u.values[E] - M):
                break
            K *= 2
        inside = psi.values < -eps
        vals = K * shifted
        vals[inside] = np.maximum(vals[inside], u.values[inside] - M)
        return GridFunction(mask, vals, "u_tilde"), GlueParams(eps, K, M, E, rule)

    if M_rule == "auto":
        out, params = build("sublevel")
        if cone is not None:
            rep = cone_violation(out, cone, tol)
            if rep.worst > 10 * rep.tol:
                log.info("sublevel rule leaves the cone by %.3e; using the stencil hull", rep.worst)
                out, params = build("hull")
        return out, params
    if M_rule not in ("sublevel", "hull"):
        raise PreconditionError(f"unknown M rule {M_rule!r}")
    if M_rule == "hull" and cone is None:
        raise PreconditionError("the hull rule needs the cone")
    return build(M_rule)


def bounded_extension(u, M: float, mask: DomainMask, cone: DiscretePshCone | None = None) -> GridFunction:
    """Keep ``u`` on interior nodes and put the constant ``M`` on boundary nodes.

    ``u`` is a GridFunction or an array over ``mask.interior_positions``.
    When ``cone`` is given the violation report is attached as ``.violation``.
    """
    if isinstance(u, GridFunction):
        _check_mask(u, mask)
        inner = u.values[mask.interior_positions]
    else:
        inner = np.asarray(u, dtype=float)
        if inner.shape != (mask.interior_positions.size,):
            raise PreconditionError("need one value per interior node")
    if inner.size and float(inner.max()) > M:
        raise BoundViolated(f"u reaches {float(inner.max())} above the bound {M}")
    vals = np.full(mask.n_closure, float(M))
    vals[mask.interior_positions] = inner
    out = GridFunction(mask, vals, "u_tilde")
    if cone is not None:
        out.violation = cone_violation(out, cone)
    return out


def smoothstep5(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t**2)


@dataclass(eq=False)
class CutoffResult:
    F: GridFunction
    C: float
    M: float
    s: float
    delta: float
    theta: GridFunction
    psi_tilde: GridFunction
    violation: float
    predicted_C: float
    boundary_error: float

    def __iter__(self):
        return iter((self.F, self.C))

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "M": self.M,
            "s": self.s,
            "delta": self.delta,
            "violation": self.violation,
            "predicted_C": self.predicted_C,
            "boundary_error": self.boundary_error,
        }


def cutoff_extension(
    f: GridFunction,
    psi: GridFunction,
    cone: DiscretePshCone,
    phi_spp: GridFunction | None = None,
    *,
    delta: float | None = None,
    s: float = 1.0,
    tol: float | None = None,
    max_doublings: int = 40,
) -> CutoffResult:
    """Extend collar data ``f`` inward as ``F = C psi_tilde + theta f``.

    ``theta`` is the quintic smoothstep in ``psi``: 1 on ``{psi > -delta/2}``
    and 0 on ``{psi < -delta}``.  ``psi_tilde = max{phi_spp - s, M psi}`` with
    ``M`` the smallest value making ``psi_tilde = phi_spp - s`` at the centre
    of every stencil that sees ``theta`` vary.  ``C`` is doubled from 1 until
    the cone violation is at most ``tol``.
    """
    mask = f.mask
    _check_mask(psi, mask)
    pts = mask.closure_points()
    if phi_spp is None:
        r2 = np.sum(pts**2, axis=1)
        phi_spp = GridFunction(mask, r2 - r2.max(), "phi_spp")
    _check_mask(phi_spp, mask)
    delta = -float(psi.values.min()) / 2 if delta is None else float(delta)
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    theta = smoothstep5((psi.values + delta) / (delta / 2))
    varying = np.flatnonzero((theta > 0) & (theta < 1))
    # rows reading a node where theta varies
    row_nodes = cone.averaging_matrix()
    touches = np.zeros(cone.n_rows, dtype=bool)
    is_var = np.zeros(mask.n_closure, dtype=bool)
    is_var[varying] = True
    hit = is_var[row_nodes.indices]
    touches[np.repeat(np.arange(cone.n_rows), np.diff(row_nodes.indptr))[hit]] = True
    touches |= is_var[cone.row_center]
    centers = np.unique(cone.row_center[touches])
    # psi_tilde >= phi_spp - s everywhere, so equality at the centres bounds A psi_tilde by A phi_spp
    core = np.unique(np.r_[varying, centers])
    if core.size and np.any(psi.values[core] >= 0):
        raise PreconditionError("collar transition reaches psi = 0; decrease delta")
    base = phi_spp.values - s
    M = float(np.max(base[core] / psi.values[core])) if core.size else 1.0
    M = max(M * (1 + 1e-9), 1.0 + 1e-9)
    psi_t = np.maximum(base, M * psi.values)
    theta_f = theta * f.values

    A_phi = cone.apply(phi_spp.values)
    A_tf = cone.apply(theta_f)
    rows = np.flatnonzero(touches)
    denom = -A_phi[rows]
    ok = denom > 0
    predicted = float(np.max(np.maximum(A_tf[rows][ok], 0) / denom[ok])) if np.any(ok) else 0.0

    C = 1.0
    best = np.inf
    for _ in range(max_doublings + 1):
        F = C * psi_t + theta_f
        gf = GridFunction(mask, F, "F")
        rep = cone_violation(gf, cone, tol)
        best = min(best, rep.worst)
        if rep.in_cone:
            b = mask.boundary_positions
            err = float(np.max(np.abs(F[b] - f.values[b]))) if b.size else 0.0
            return CutoffResult(
                F=gf,
                C=C,
                M=M,
                s=s,
                delta=delta,
                theta=GridFunction(mask, theta, "theta"),
                psi_tilde=GridFunction(mask, psi_t, "psi_tilde"),
                violation=rep.worst,
                predicted_C=predicted,
                boundary_error=err,
            )
        C *= 2
    raise NoFeasibleC(f"no C up to 2^{max_doublings} brings the violation below tolerance", best_violation=best)
