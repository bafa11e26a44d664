"""Uniform grids over boxes in R^{2n}, node classification and disk stencils.

A stencil centred at a node only depends on the node through a translation,
so the sub-mean constraints are stored as a handful of integer-offset kernels
plus a ``(center, kernel)`` pair per constraint row.  The sparse matrix form
is assembled lazily for the LP and for small grids.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .domains import DomainSpec, as_real
from .exceptions import (
    DomainNotCovered,
    InvalidBox,
    IsolatedNode,
    NodeBudgetExceeded,
    OutOfBox,
    PreconditionError,
)

DEFAULT_NODE_CAP = 200_000
EXTERIOR, BOUNDARY, INTERIOR = 0, 1, 2
CLASS_NAMES = {EXTERIOR: "exterior", BOUNDARY: "boundary", INTERIOR: "interior"}

# kernel weights are rounded to this dyadic quantum so that every constraint
# row sums to exactly zero in floating point
_QUANTUM = 2.0 ** -50
_SNAP = 1e-9
# cell-fraction snap for interpolation; far above float noise, far below any real offset
_FRAC_SNAP = 1e-12


def node_cap_from_env() -> int:
    raw = os.environ.get("PLURIPOT_NODE_CAP")
    return int(float(raw)) if raw else DEFAULT_NODE_CAP


@dataclass(frozen=True, eq=False)
class Lattice:
    """Uniform grid with spacing ``h`` in all ``2n`` real axes.

    Node coordinates are ``corner + k * h`` per axis.  When a corner is an
    integer multiple of ``h`` it is stored as that integer (``anchor``) and
    coordinates are formed as ``(anchor + k) * h`` so that e.g. the origin is
    represented exactly.
    """

    n: int
    h: float
    corner: tuple
    shape: tuple
    anchor: tuple

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def strides(self) -> np.ndarray:
        s = np.ones(self.dim, dtype=np.int64)
        for i in range(self.dim - 2, -1, -1):
            s[i] = s[i + 1] * self.shape[i + 1]
        return s

    @property
    def upper(self) -> tuple:
        return tuple(self._axis_coord(i, self.shape[i] - 1) for i in range(self.dim))

    def _axis_coord(self, axis, k):
        a = self.anchor[axis]
        if a is not None:
            return (a + np.asarray(k)) * self.h
        return self.corner[axis] + np.asarray(k) * self.h

    def multi_index(self, flat) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(flat), self.shape), axis=-1)

    def flat_index(self, multi) -> np.ndarray:
        multi = np.asarray(multi, dtype=np.int64)
        return multi @ self.strides

    def coords(self, flat=None) -> np.ndarray:
        """Coordinates of the given flat node indices (all nodes by default)."""
        if flat is None:
            flat = np.arange(self.size)
        multi = self.multi_index(flat)
        out = np.empty(multi.shape, dtype=float)
        for axis in range(self.dim):
            out[..., axis] = self._axis_coord(axis, multi[..., axis])
        return out

    def nearest_node(self, point) -> int:
        point = np.asarray(point, dtype=float)
        t = (point - np.asarray(self.corner)) / self.h
        k = np.clip(np.rint(t).astype(np.int64), 0, np.asarray(self.shape) - 1)
        return int(self.flat_index(k))

    def contains(self, point, tol=1e-12) -> bool:
        point = np.asarray(point, dtype=float)
        lo = np.asarray(self.corner)
        hi = np.asarray(self.upper)
        return bool(np.all(point >= lo - tol) and np.all(point <= hi + tol))


def build_lattice(bbox, h: float, n: int, node_cap: int | None = None) -> Lattice:
    """Lay a grid of spacing ``h`` over ``bbox`` (``2n`` real intervals)."""
    if n not in (1, 2):
        raise InvalidBox(f"complex dimension must be 1 or 2, got {n}")
    bbox = [tuple(map(float, iv)) for iv in bbox]
    if len(bbox) != 2 * n:
        raise InvalidBox(f"expected {2 * n} intervals, got {len(bbox)}")
    if not (h > 0 and math.isfinite(h)):
        raise InvalidBox(f"grid spacing must be positive, got {h}")
    for lo, hi in bbox:
        if not (hi > lo):
            raise InvalidBox(f"degenerate interval [{lo}, {hi}]")
    counts = [int(math.floor((hi - lo) / h + _SNAP)) + 1 for lo, hi in bbox]
    cap = node_cap_from_env() if node_cap is None else int(node_cap)
    total = math.prod(counts)
    if total > cap:
        raise NodeBudgetExceeded(f"{total} nodes exceed the budget of {cap}")
    anchor = []
    for lo, _ in bbox:
        q = lo / h
        anchor.append(int(round(q)) if abs(q - round(q)) < _SNAP else None)
    return Lattice(n=n, h=float(h), corner=tuple(lo for lo, _ in bbox), shape=tuple(counts), anchor=tuple(anchor))


def lattice_for_domain(dom: DomainSpec, h: float, margin_cells: int = 2, node_cap: int | None = None) -> Lattice:
    """Grid aligned to integer multiples of ``h`` covering ``dom.bbox`` with a margin."""
    bbox = []
    for lo, hi in dom.bbox:
        k_lo = math.floor(lo / h + _SNAP) - margin_cells
        k_hi = math.ceil(hi / h - _SNAP) + margin_cells
        bbox.append((k_lo * h, k_hi * h))
    return build_lattice(bbox, h, dom.n, node_cap=node_cap)


def _neighbour_offsets(dim: int, kind: str = "cube"):
    if kind == "axis":
        for axis in range(dim):
            for s in (-1, 1):
                off = [0] * dim
                off[axis] = s
                yield tuple(off)
    else:
        for off in itertools.product((-1, 0, 1), repeat=dim):
            if any(off):
                yield off


def _shifted(arr: np.ndarray, off, fill=False) -> np.ndarray:
    """``out[k] = arr[k + off]`` with ``fill`` outside the array."""
    out = np.full(arr.shape, fill, dtype=arr.dtype)
    src, dst = [], []
    for o, n in zip(off, arr.shape):
        if o >= 0:
            src.append(slice(o, n))
            dst.append(slice(0, n - o))
        else:
            src.append(slice(0, n + o))
            dst.append(slice(-o, n))
    out[tuple(dst)] = arr[tuple(src)]
    return out


@dataclass(frozen=True, eq=False)
class DomainMask:
    """Per-node classification of a lattice against a domain."""

    lattice: Lattice
    classes: np.ndarray
    domain: DomainSpec | None = None

    def __post_init__(self):
        closure = np.flatnonzero(self.classes.ravel() != EXTERIOR)
        pos = np.full(self.lattice.size, -1, dtype=np.int64)
        pos[closure] = np.arange(closure.size)
        object.__setattr__(self, "closure_nodes", closure)
        object.__setattr__(self, "position", pos)
        cls = self.classes.ravel()[closure]
        object.__setattr__(self, "closure_classes", cls)
        object.__setattr__(self, "interior_positions", np.flatnonzero(cls == INTERIOR))
        object.__setattr__(self, "boundary_positions", np.flatnonzero(cls == BOUNDARY))

    @property
    def n_closure(self) -> int:
        return int(self.closure_nodes.size)

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.closure_nodes[self.interior_positions]

    @property
    def boundary_nodes(self) -> np.ndarray:
        return self.closure_nodes[self.boundary_positions]

    @property
    def is_interior(self) -> np.ndarray:
        return self.closure_classes == INTERIOR

    @property
    def is_boundary(self) -> np.ndarray:
        return self.closure_classes == BOUNDARY

    def closure_points(self) -> np.ndarray:
        return self.lattice.coords(self.closure_nodes)

    def class_of(self, flat) -> int:
        return int(self.classes.ravel()[flat])

    def position_of_point(self, point) -> int:
        """Closure position of the closure node nearest to ``point``."""
        pts = self.closure_points()
        d = np.sum((pts - np.asarray(point, dtype=float)) ** 2, axis=1)
        return int(np.argmin(d))

    def same_as(self, other: "DomainMask") -> bool:
        return self is other or (
            self.lattice.shape == other.lattice.shape
            and self.lattice.h == other.lattice.h
            and np.array_equal(self.closure_nodes, other.closure_nodes)
        )


def classify_nodes(lat: Lattice, dom: DomainSpec, *, allow_partial: bool = False, band: float = 0.5) -> DomainMask:
    """Classify every lattice node as interior, boundary or exterior.

    A closure node is *boundary* when some node of its ``3^{2n}`` neighbour
    cube lies outside the closure, when it is not in the open domain, or when
    ``|rho| <= band * h * lipschitz``.  ``allow_partial`` skips the coverage
    check; it is meant for local patches of large domains.
    """
    if lat.n != dom.n:
        raise PreconditionError(f"lattice dimension {lat.n} != domain dimension {dom.n}")
    if not allow_partial:
        lo, hi = np.asarray(lat.corner), np.asarray(lat.upper)
        blo = np.array([b[0] for b in dom.bbox])
        bhi = np.array([b[1] for b in dom.bbox])
        if np.any(blo < lo - 1e-12) or np.any(bhi > hi + 1e-12):
            raise DomainNotCovered(f"{dom.name} bounding box exits the lattice box")
    pts = lat.coords()
    closure = dom.closure_predicate(pts).reshape(lat.shape)
    if not allow_partial:
        faces = np.zeros(lat.shape, dtype=bool)
        for axis in range(lat.dim):
            idx = [slice(None)] * lat.dim
            idx[axis] = 0
            faces[tuple(idx)] = True
            idx[axis] = -1
            faces[tuple(idx)] = True
        if np.any(closure & faces):
            raise DomainNotCovered(f"{dom.name} touches the lattice faces")
    interior_pred = dom.interior_predicate(pts).reshape(lat.shape)
    all_nbrs = np.ones(lat.shape, dtype=bool)
    for off in _neighbour_offsets(lat.dim):
        all_nbrs &= _shifted(closure, off, fill=False)
    boundary = closure & (~all_nbrs | ~interior_pred)
    if dom.rho is not None and band > 0:
        rho = dom.defining_function(pts).reshape(lat.shape)
        boundary |= closure & (np.abs(rho) <= band * lat.h * dom.lipschitz)
    classes = np.full(lat.shape, EXTERIOR, dtype=np.int8)
    classes[closure] = INTERIOR
    classes[boundary] = BOUNDARY
    return DomainMask(lattice=lat, classes=classes, domain=dom)


@dataclass(frozen=True)
class SparseWeights:
    """Nonnegative weights on flat lattice nodes summing to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def total(self) -> float:
        return float(np.sum(self.weights))

    def apply(self, values_on_lattice: np.ndarray) -> float:
        return float(np.dot(self.weights, values_on_lattice[self.nodes]))


def _multilinear(t: np.ndarray):
    """Corner offsets and weights for a point with cell coordinates ``t``."""
    base = np.floor(t + _FRAC_SNAP).astype(np.int64)
    frac = t - base
    frac[np.abs(frac) < _FRAC_SNAP] = 0.0
    axes = np.flatnonzero(frac != 0.0)
    corners, weights = [], []
    for bits in itertools.product((0, 1), repeat=axes.size):
        off = base.copy()
        w = 1.0
        for axis, b in zip(axes, bits):
            off[axis] += b
            w *= frac[axis] if b else 1.0 - frac[axis]
        if w > 0.0:
            corners.append(off)
            weights.append(w)
    return np.array(corners, dtype=np.int64).reshape(-1, t.size), np.array(weights)


def interp_weights(lat: Lattice, p) -> SparseWeights:
    """Multilinear interpolation weights of point ``p`` over its cell corners."""
    p = np.asarray(p, dtype=float)
    if p.shape != (lat.dim,) or not lat.contains(p):
        raise OutOfBox(f"point {p} outside the lattice box")
    t = (p - np.asarray(lat.corner)) / lat.h
    corners, weights = _multilinear(t)
    corners = np.clip(corners, 0, np.asarray(lat.shape) - 1)
    return SparseWeights(nodes=lat.flat_index(corners), weights=weights)


def default_directions(n: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0 + 0j]])
    s = 1 / math.sqrt(2)
    return np.array([[1, 0], [0, 1], [s, s], [s, 1j * s], [s, -s], [s, -1j * s]], dtype=complex)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Circle-average pattern for one (direction, radius) pair in cell units."""

    direction: np.ndarray
    radius: float
    m: int
    offsets: np.ndarray
    weights: np.ndarray
    displacements: np.ndarray

    @property
    def size(self) -> int:
        return int(self.weights.size)


def _quantize(weights: np.ndarray) -> np.ndarray:
    q = np.rint(weights / _QUANTUM) * _QUANTUM
    q[np.argmax(q)] += 1.0 - np.sum(q)
    return q


def make_kernel(direction, radius_cells: float, m: int, h: float) -> Kernel:
    direction = np.asarray(direction, dtype=complex)
    zeta = radius_cells * np.exp(2j * np.pi * np.arange(m) / m)
    disp = as_real(zeta[:, None] * direction[None, :])
    acc: dict[tuple, float] = {}
    for d in disp:
        snapped = np.where(np.abs(d - np.rint(d)) < _SNAP, np.rint(d), d)
        corners, weights = _multilinear(snapped)
        for c, w in zip(map(tuple, corners), weights):
            acc[c] = acc.get(c, 0.0) + w / m
    keys = sorted(acc)
    w = _quantize(np.array([acc[k] for k in keys]))
    keep = w > 0
    return Kernel(
        direction=direction,
        radius=radius_cells * h,
        m=m,
        offsets=np.array(keys, dtype=np.int64)[keep],
        weights=w[keep],
        displacements=disp * h,
    )


@dataclass(frozen=True)
class DiskStencil:
    """One disk average: ``m`` samples of ``center + r e^{2 pi i k/m} w``."""

    center: int
    direction: np.ndarray
    radius: float
    m: int
    samples: list

    def averaged(self) -> SparseWeights:
        acc: dict[int, float] = {}
        for s in self.samples:
            for node, w in zip(s.nodes, s.weights):
                acc[int(node)] = acc.get(int(node), 0.0) + w / self.m
        keys = sorted(acc)
        return SparseWeights(np.array(keys), np.array([acc[k] for k in keys]))


@dataclass(eq=False)
class DiscretePshCone:
    """Polyhedral cone ``{u : A u <= 0}`` of disk sub-mean inequalities.

    Row ``r`` reads ``u(center_r) - avg_r(u) <= 0``.  Rows are sorted by
    ``(center, direction, radius)``.  Rows centred at boundary nodes only use
    full-radius disks lying in the closure; they are what distinguishes the
    cone on the compact closure from the cone on the open domain.
    """

    mask: DomainMask
    kernels: list
    row_center: np.ndarray
    row_kernel: np.ndarray
    row_direction: np.ndarray
    row_radius: np.ndarray
    row_level: np.ndarray
    directions: np.ndarray
    radii: tuple
    m: int
    _matrix: sp.csr_matrix | None = field(default=None, repr=False)
    _avg: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def n_rows(self) -> int:
        return int(self.row_center.size)

    @property
    def nnz_estimate(self) -> int:
        sizes = np.array([k.size for k in self.kernels])
        return int(np.sum(sizes[self.row_kernel]) + self.n_rows)

    @property
    def row_is_boundary(self) -> np.ndarray:
        return self.mask.is_boundary[self.row_center]

    def row_segments(self, rows=None):
        """Start offsets of the runs of rows sharing a centre (rows sorted)."""
        centers = self.row_center if rows is None else self.row_center[rows]
        starts = np.flatnonzero(np.r_[True, centers[1:] != centers[:-1]])
        return centers[starts], starts

    def averaging_matrix(self) -> sp.csr_matrix:
        """Sparse ``(rows, closure)`` matrix of the disk averages."""
        if self._avg is None:
            lat = self.mask.lattice
            strides = lat.strides
            cols, vals, ptr = [], [], []
            order = np.arange(self.n_rows)
            rows_idx = []
            for k, kern in enumerate(self.kernels):
                rows = order[self.row_kernel == k]
                if rows.size == 0:
                    continue
                flat = self.mask.closure_nodes[self.row_center[rows]]
                nb = flat[:, None] + (kern.offsets @ strides)[None, :]
                cols.append(self.mask.position[nb].ravel())
                vals.append(np.broadcast_to(kern.weights, nb.shape).ravel())
                rows_idx.append(np.repeat(rows, kern.size))
            r = np.concatenate(rows_idx) if rows_idx else np.zeros(0, dtype=np.int64)
            c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
            v = np.concatenate(vals) if vals else np.zeros(0)
            self._avg = sp.csr_matrix((v, (r, c)), shape=(self.n_rows, self.mask.n_closure))
            del ptr
        return self._avg

    def matrix(self) -> sp.csr_matrix:
        """Constraint matrix ``A`` with ``A u <= 0`` on the cone."""
        if self._matrix is None:
            eye = sp.csr_matrix(
                (np.ones(self.n_rows), (np.arange(self.n_rows), self.row_center)),
                shape=(self.n_rows, self.mask.n_closure),
            )
            self._matrix = (eye - self.averaging_matrix()).tocsr()
            self._matrix.sum_duplicates()
        return self._matrix

    def averages(self, u: np.ndarray, rows=None) -> np.ndarray:
        """Disk averages of closure values ``u`` for all (or selected) rows."""
        u = np.asarray(u, dtype=float)
        if self._avg is not None or self.nnz_estimate <= 4_000_000:
            out = self.averaging_matrix() @ u
            return out if rows is None else out[rows]
        lat = self.mask.lattice
        full = np.zeros(lat.size)
        full[self.mask.closure_nodes] = u
        sel = np.arange(self.n_rows) if rows is None else np.asarray(rows)
        out = np.zeros(sel.size)
        rk = self.row_kernel[sel]
        strides = lat.strides
        for k, kern in enumerate(self.kernels):
            pick = np.flatnonzero(rk == k)
            if pick.size == 0:
                continue
            flat = self.mask.closure_nodes[self.row_center[sel[pick]]]
            acc = np.zeros(pick.size)
            for off, w in zip(kern.offsets @ strides, kern.weights):
                acc += w * full[flat + off]
            out[pick] = acc
        return out

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Row values ``A u``; the cone is ``A u <= 0``."""
        u = np.asarray(u, dtype=float)
        return u[self.row_center] - self.averages(u)

    def stencil(self, row: int) -> DiskStencil:
        lat = self.mask.lattice
        kern = self.kernels[self.row_kernel[row]]
        center = self.mask.closure_nodes[self.row_center[row]]
        c = lat.coords(center)
        samples = [interp_weights(lat, c + d) for d in kern.displacements]
        return DiskStencil(center=int(center), direction=kern.direction, radius=kern.radius, m=kern.m, samples=samples)

    def rows_at(self, position: int) -> np.ndarray:
        lo = np.searchsorted(self.row_center, position, side="left")
        hi = np.searchsorted(self.row_center, position, side="right")
        return np.arange(lo, hi)

    def describe_row(self, row: int) -> dict:
        kern = self.kernels[self.row_kernel[row]]
        pos = int(self.row_center[row])
        return {
            "row": int(row),
            "center_position": pos,
            "center": self.mask.lattice.coords(self.mask.closure_nodes[pos]).tolist(),
            "direction": [[float(c.real), float(c.imag)] for c in kern.direction],
            "radius": float(kern.radius),
        }


def _fits(mask: DomainMask, centers_flat: np.ndarray, kern: Kernel, check_samples: bool) -> np.ndarray:
    lat = mask.lattice
    multi = lat.multi_index(centers_flat)
    shape = np.asarray(lat.shape)
    classes = mask.classes.ravel()
    ok = np.ones(centers_flat.size, dtype=bool)
    for off in kern.offsets:
        tgt = multi + off
        inside = np.all((tgt >= 0) & (tgt < shape), axis=1)
        flat = np.where(inside, tgt @ lat.strides, 0)
        ok &= inside & (classes[flat] != EXTERIOR)
    if check_samples and mask.domain is not None and np.any(ok):
        idx = np.flatnonzero(ok)
        pts = lat.coords(centers_flat[idx])[:, None, :] + kern.displacements[None, :, :]
        inside = mask.domain.closure_predicate(pts).all(axis=1)
        ok[idx] = inside
    return ok


def build_cone(
    lat: Lattice,
    mask: DomainMask,
    radii=None,
    dirs=None,
    m: int = 16,
    *,
    max_halvings: int = 3,
    boundary_rows: bool = True,
    check_samples: bool = True,
) -> DiscretePshCone:
    """Assemble the disk sub-mean constraints of the discrete psh cone.

    ``radii`` are physical radii (default ``2h, 4h``).  An interior node whose
    disk leaves the closure retries with the radius halved up to
    ``max_halvings`` times before that row is dropped; boundary nodes only get
    full-radius rows.
    """
    if mask.lattice is not lat:
        if not (mask.lattice.shape == lat.shape and mask.lattice.h == lat.h):
            raise PreconditionError("mask was built on a different lattice")
    h = lat.h
    radii = (2 * h, 4 * h) if radii is None else tuple(float(r) for r in radii)
    if any(r <= 0 for r in radii):
        raise PreconditionError("radii must be positive")
    if m < 4:
        raise PreconditionError("quadrature order must be at least 4")
    if lat.n == 1:
        dirs = default_directions(1)
    else:
        dirs = default_directions(lat.n) if dirs is None else np.asarray(dirs, dtype=complex)
        if dirs.ndim != 2 or dirs.shape[0] == 0 or dirs.shape[1] != lat.n:
            raise PreconditionError("directions must be a nonempty list of vectors in C^n")
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)

    kernels: list[Kernel] = []
    centers, kids, dids, rids, levels = [], [], [], [], []
    interior = mask.interior_positions
    boundary = mask.boundary_positions
    for di, d in enumerate(dirs):
        for ri, r in enumerate(radii):
            pending = interior
            for level in range(max_halvings + 1):
                kern = make_kernel(d, r / h / 2 ** level, m, h)
                kid = len(kernels)
                kernels.append(kern)
                candidates = [pending]
                if level == 0 and boundary_rows and boundary.size:
                    candidates.append(boundary)
                for group_i, group in enumerate(candidates):
                    if group.size == 0:
                        continue
                    ok = _fits(mask, mask.closure_nodes[group], kern, check_samples)
                    sel = group[ok]
                    centers.append(sel)
                    kids.append(np.full(sel.size, kid))
                    dids.append(np.full(sel.size, di))
                    rids.append(np.full(sel.size, ri))
                    levels.append(np.full(sel.size, level))
                    if group_i == 0:
                        pending = group[~ok]
                if pending.size == 0:
                    break
    cat = lambda xs: np.concatenate(xs) if xs else np.zeros(0, dtype=np.int64)  # noqa: E731
    center = cat(centers)
    kid, did, rid, lev = cat(kids), cat(dids), cat(rids), cat(levels)
    order = np.lexsort((rid, did, center))
    cone = DiscretePshCone(
        mask=mask,
        kernels=kernels,
        row_center=center[order].astype(np.int64),
        row_kernel=kid[order].astype(np.int64),
        row_direction=did[order].astype(np.int64),
        row_radius=rid[order].astype(np.int64),
        row_level=lev[order].astype(np.int64),
        directions=dirs,
        radii=radii,
        m=m,
    )
    has_row = np.zeros(mask.n_closure, dtype=bool)
    has_row[cone.row_center] = True
    lonely = interior[~has_row[interior]]
    if lonely.size:
        where = mask.lattice.coords(mask.closure_nodes[lonely[0]])
        raise IsolatedNode(f"{lonely.size} interior nodes admit no stencil, first at {where.tolist()}")
    return cone
