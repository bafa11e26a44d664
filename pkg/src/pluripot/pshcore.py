"""Diagnostics for grid functions: cone violation, Levi profiles, usc regularization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import DiscretePshCone, DomainMask, _shifted
from .exceptions import MaskMismatch, PreconditionError

HISTOGRAM_EDGES = (-np.inf, -1e-3, -1e-6, -1e-9, -1e-12, 1e-12, 1e-9, 1e-6, 1e-3, np.inf)


@dataclass(eq=False)
class GridFunction:
    """Real values on the closure nodes of a mask.

    ``absent`` optionally marks nodes where the value is undefined (stored as
    NaN), e.g. Levi eigenvalues at nodes lacking difference neighbours.
    """

    mask: DomainMask
    values: np.ndarray
    role: str = ""
    absent: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).copy()
        if self.values.shape != (self.mask.n_closure,):
            raise MaskMismatch(f"expected {self.mask.n_closure} closure values, got shape {self.values.shape}")
        defined = np.ones(self.values.size, dtype=bool) if self.absent is None else ~self.absent
        if not np.all(np.isfinite(self.values[defined])):
            raise ValueError("grid function values must be finite")

    @classmethod
    def from_callable(cls, mask: DomainMask, func, role: str = "") -> "GridFunction":
        return cls(mask, func(mask.closure_points()), role)

    @classmethod
    def constant(cls, mask: DomainMask, c: float, role: str = "") -> "GridFunction":
        return cls(mask, np.full(mask.n_closure, float(c)), role)

    @property
    def points(self) -> np.ndarray:
        return self.mask.closure_points()

    @property
    def value_range(self) -> float:
        v = self.values[np.isfinite(self.values)]
        return float(v.max() - v.min()) if v.size else 0.0

    def with_values(self, values, role: str | None = None) -> "GridFunction":
        return GridFunction(self.mask, values, self.role if role is None else role)

    def to_lattice(self, fill=np.nan) -> np.ndarray:
        """Values on the full lattice array (``fill`` off the closure)."""
        out = np.full(self.mask.lattice.size, fill, dtype=float)
        out[self.mask.closure_nodes] = self.values
        return out.reshape(self.mask.lattice.shape)

    def at_point(self, point) -> float:
        return float(self.values[self.mask.position_of_point(point)])


def _check_mask(u: GridFunction, mask: DomainMask):
    if not u.mask.same_as(mask):
        raise MaskMismatch("grid function lives on a different mask")


def default_tol(u: GridFunction) -> float:
    return 1e-9 * (1.0 + u.value_range)


@dataclass
class ViolationReport:
    """Worst sub-mean violation ``max_r (A u)_r`` with its location."""

    worst: float
    row: int | None
    node: int | None
    coords: list | None
    tol: float
    histogram: dict = field(default_factory=dict)

    @property
    def in_cone(self) -> bool:
        return self.worst <= self.tol

    def to_dict(self) -> dict:
        return {
            "worst": self.worst,
            "row": self.row,
            "node": self.node,
            "coords": self.coords,
            "tol": self.tol,
            "in_cone": self.in_cone,
            "histogram": self.histogram,
        }


def _histogram(values: np.ndarray) -> dict:
    counts, _ = np.histogram(values, bins=np.array(HISTOGRAM_EDGES))
    labels = [f"[{lo:g},{hi:g})" for lo, hi in zip(HISTOGRAM_EDGES[:-1], HISTOGRAM_EDGES[1:])]
    return dict(zip(labels, counts.tolist()))


def cone_violation(u: GridFunction, cone: DiscretePshCone, tol: float | None = None) -> ViolationReport:
    """Measure how far ``u`` is from the discrete psh cone."""
    _check_mask(u, cone.mask)
    tol = default_tol(u) if tol is None else float(tol)
    if cone.n_rows == 0:
        return ViolationReport(-np.inf, None, None, None, tol, {})
    vals = cone.apply(u.values)
    row = int(np.argmax(vals))
    pos = int(cone.row_center[row])
    node = int(cone.mask.closure_nodes[pos])
    return ViolationReport(
        worst=float(vals[row]),
        row=row,
        node=node,
        coords=cone.mask.lattice.coords(node).tolist(),
        tol=tol,
        histogram=_histogram(vals),
    )


def _neighbour_values(full: np.ndarray, off):
    return _shifted(full, off, fill=np.nan)


def _gradient(full: np.ndarray, h: float, axis: int) -> np.ndarray:
    dim = full.ndim
    e = [0] * dim
    e[axis] = 1
    fwd = _neighbour_values(full, tuple(e))
    bwd = _neighbour_values(full, tuple(-x for x in e))
    return (fwd - bwd) / (2 * h)


def _second(full: np.ndarray, h: float, a: int, b: int) -> np.ndarray:
    dim = full.ndim
    if a == b:
        e = [0] * dim
        e[a] = 1
        fwd = _neighbour_values(full, tuple(e))
        bwd = _neighbour_values(full, tuple(-x for x in e))
        return (fwd - 2 * full + bwd) / h**2
    acc = 0.0
    for sa, sb, sign in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
        off = [0] * dim
        off[a], off[b] = sa, sb
        acc = acc + sign * _neighbour_values(full, tuple(off))
    return acc / (4 * h**2)


def complex_hessian(full: np.ndarray, h: float):
    """Entries ``(H11, H12, H22)`` of ``[d^2 u / dz_j dzbar_k]`` for n = 2."""
    d = lambda a, b: _second(full, h, a, b)  # noqa: E731
    h11 = 0.25 * (d(0, 0) + d(1, 1))
    h22 = 0.25 * (d(2, 2) + d(3, 3))
    h12 = 0.25 * (d(0, 2) + d(1, 3)) + 0.25j * (d(0, 3) - d(1, 2))
    return h11, h12, h22


def levi_profile(u: GridFunction, tangential=False) -> GridFunction:
    """Smallest Levi eigenvalue per node (5-point Laplacian when n = 1).

    With ``tangential`` set (``True`` to use ``u`` itself, or a defining
    GridFunction) the n = 2 result is instead the Levi form evaluated on the
    unit complex tangent ``t = (rho_{z2}, -rho_{z1})`` of the level set.
    Nodes lacking a difference neighbour in the closure are marked absent.
    """
    mask = u.mask
    lat = mask.lattice
    h = lat.h
    full = u.to_lattice()
    if lat.n == 1:
        out = _second(full, h, 0, 0) + _second(full, h, 1, 1)
    else:
        h11, h12, h22 = complex_hessian(full, h)
        if tangential is False or tangential is None:
            half = 0.5 * (h11 + h22)
            out = half - np.sqrt((0.5 * (h11 - h22)) ** 2 + np.abs(h12) ** 2)
        else:
            rho = full if tangential is True else tangential.to_lattice()
            if tangential is not True:
                _check_mask(tangential, mask)
            g = [_gradient(rho, h, a) for a in range(4)]
            rz1 = 0.5 * (g[0] - 1j * g[1])
            rz2 = 0.5 * (g[2] - 1j * g[3])
            t1, t2 = rz2, -rz1
            norm2 = np.abs(t1) ** 2 + np.abs(t2) ** 2
            form = h11 * np.abs(t1) ** 2 + h22 * np.abs(t2) ** 2 + 2 * np.real(h12 * t1 * np.conj(t2))
            with np.errstate(invalid="ignore", divide="ignore"):
                out = np.where(norm2 > 0, form / norm2, np.nan)
            if tangential is not True:
                # difference neighbours of rho must also exist
                out = np.where(np.isnan(sum(g)), np.nan, out)
    vals = np.asarray(out).ravel()[mask.closure_nodes]
    absent = np.isnan(vals)
    return GridFunction(mask, vals, role="levi", absent=absent)


def _ball_offsets(dim: int, radius_cells: float):
    r = int(np.floor(radius_cells + 1e-9))
    rng = range(-r, r + 1)
    grids = np.array(np.meshgrid(*([rng] * dim), indexing="ij")).reshape(dim, -1).T
    keep = np.sum(grids.astype(float) ** 2, axis=1) <= radius_cells**2 + 1e-9
    return grids[keep]


def usc_regularize(u: GridFunction, delta: float) -> GridFunction:
    """Max of ``u`` over closure nodes within Euclidean distance ``delta``."""
    h = u.mask.lattice.h
    if delta < h * (1 - 1e-12):
        raise PreconditionError(f"delta={delta} must be at least the grid spacing {h}")
    full = u.to_lattice(fill=-np.inf)
    best = full.copy()
    for off in _ball_offsets(full.ndim, delta / h):
        if np.any(off):
            best = np.maximum(best, _shifted(full, tuple(int(o) for o in off), fill=-np.inf))
    vals = best.ravel()[u.mask.closure_nodes]
    return GridFunction(u.mask, vals, role=(u.role + "*") if u.role else "usc")


@dataclass
class MonotoneReport:
    nonincreasing: bool
    nondecreasing: bool
    first_increase: tuple | None
    violations: list
    all_in_cone: bool
    limit_violation: float
    tol: list

    def to_dict(self) -> dict:
        return {
            "nonincreasing": self.nonincreasing,
            "nondecreasing": self.nondecreasing,
            "first_increase": self.first_increase,
            "violations": self.violations,
            "all_in_cone": self.all_in_cone,
            "limit_violation": self.limit_violation,
        }


def monotone_limit_check(seq, cone: DiscretePshCone, tol: float | None = None) -> MonotoneReport:
    """Check a finite sequence for monotone decrease and cone membership.

    The last element stands in for the limit.  Both monotone directions are
    reported so that a sequence increasing to its limit is recognised.
    """
    seq = list(seq)
    if len(seq) < 2:
        raise PreconditionError("need at least two grid functions")
    for u in seq:
        _check_mask(u, cone.mask)
    first_increase = None
    nondecreasing = True
    for j in range(len(seq) - 1):
        diff = seq[j + 1].values - seq[j].values
        if first_increase is None and np.any(diff > 0):
            node = int(np.argmax(diff > 0))
            first_increase = (j, int(cone.mask.closure_nodes[node]))
        if np.any(diff < 0):
            nondecreasing = False
    reports = [cone_violation(u, cone, tol) for u in seq]
    return MonotoneReport(
        nonincreasing=first_increase is None,
        nondecreasing=nondecreasing,
        first_increase=first_increase,
        violations=[r.worst for r in reports],
        all_in_cone=all(r.in_cone for r in reports),
        limit_violation=reports[-1].worst,
        tol=[r.tol for r in reports],
    )
