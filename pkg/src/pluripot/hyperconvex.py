"""Tests for P-hyperconvexity: exhaustions, fatness, analytic disks, boundary Jensen support."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .domains import DomainSpec, as_complex, as_real
from .envelope import relative_extremal
from .exceptions import DomainNotCovered, InvalidProbe, PluripotError, PreconditionError
from .jensen import jensen_lp, support_profile
from .lattice import (
    EXTERIOR,
    INTERIOR,
    DiscretePshCone,
    DomainMask,
    Lattice,
    _neighbour_offsets,
    _shifted,
    build_cone,
    classify_nodes,
    lattice_for_domain,
)
from .pshcore import GridFunction, cone_violation

log = logging.getLogger(__name__)

NOT_P = "NotPHyperconvex"
EVIDENCE_P = "EvidencePHyperconvex"
INCONCLUSIVE = "Inconclusive"


def _erode(inside: np.ndarray) -> np.ndarray:
    out = inside.copy()
    for off in _neighbour_offsets(inside.ndim):
        out &= _shifted(inside, off, fill=False)
    return out


def build_exhaustion(mask: DomainMask, cone: DiscretePshCone, depth: int = 2, **kwargs) -> GridFunction:
    """Relative extremal function of the interior nodes at least ``depth`` cells deep.

    Depth is the Chebyshev grid distance to the nearest non-interior node; if
    no node is that deep the deepest node is used.
    """
    if mask.interior_positions.size == 0:
        raise PreconditionError("mask has no interior nodes")
    inside = (mask.classes == INTERIOR)
    layers = [inside]
    while layers[-1].any() and len(layers) <= depth:
        layers.append(_erode(layers[-1]))
    core = layers[depth] if len(layers) > depth and layers[depth].any() else None
    if core is None:
        deepest = [lay for lay in layers if lay.any()][-1]
        first = np.flatnonzero(deepest.ravel())[0]
        K = np.array([mask.position[first]])
    else:
        K = mask.position[np.flatnonzero(core.ravel())]
    kwargs.setdefault("boundary", "fixed")
    psi = relative_extremal(K, mask, cone, **kwargs)
    psi.role = "psi"
    return psi


@dataclass
class FatnessReport:
    fat: bool
    witnesses: list

    def to_dict(self) -> dict:
        return {"fat": self.fat, "n_witnesses": len(self.witnesses), "witnesses": self.witnesses[:50]}


def fatness_test(dom: DomainSpec, lat: Lattice) -> FatnessReport:
    """Nodes interior to the closure (all axis neighbours in it) yet outside the domain."""
    lo, hi = np.asarray(lat.corner), np.asarray(lat.upper)
    blo = np.array([b[0] for b in dom.bbox])
    bhi = np.array([b[1] for b in dom.bbox])
    if np.any(blo < lo - 1e-12) or np.any(bhi > hi + 1e-12):
        raise DomainNotCovered(f"{dom.name} is not covered by the lattice")
    pts = lat.coords()
    closure = dom.closure_predicate(pts).reshape(lat.shape)
    interior = dom.interior_predicate(pts).reshape(lat.shape)
    nbrs = closure.copy()
    for off in _neighbour_offsets(lat.dim, "axis"):
        nbrs &= _shifted(closure, off, fill=False)
    flags = np.flatnonzero((nbrs & ~interior).ravel())
    return FatnessReport(fat=flags.size == 0, witnesses=[pts[i].tolist() for i in flags])


class AnalyticDiskProbe:
    """Polynomial disk ``f(zeta) = sum_k c_k zeta^k`` into ``C^n``."""

    def __init__(self, coeffs, n_radii: int = 4, n_angles: int = 8, n_circle: int = 16, label: str = ""):
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        self.n_radii, self.n_angles, self.n_circle = n_radii, n_angles, n_circle
        self.label = label

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def interior_samples(self) -> np.ndarray:
        radii = np.arange(1, self.n_radii) / self.n_radii
        ang = np.exp(2j * np.pi * np.arange(self.n_angles) / self.n_angles)
        return np.r_[0.0 + 0j, (radii[:, None] * ang[None, :]).ravel()]

    def circle_samples(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.n_circle) / self.n_circle)

    def __call__(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        powers = zeta[..., None] ** np.arange(self.coeffs.shape[0])
        return powers @ self.coeffs

    def to_dict(self) -> dict:
        return {"label": self.label, "coeffs": [[[c.real, c.imag] for c in row] for row in self.coeffs]}


@dataclass
class ProbeReport:
    witness: bool
    probe: dict | None = None
    zeta0: list | None = None
    f_zeta0: list | None = None
    zeta_inside: list | None = None
    f_zeta_inside: list | None = None
    n_probes: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _probe_status(dom: DomainSpec, probe: AnalyticDiskProbe):
    zi = probe.interior_samples()
    zc = probe.circle_samples()
    pi = as_real(probe(zi))
    pc = as_real(probe(zc))
    valid = bool(dom.closure_predicate(pi).all() and dom.closure_predicate(pc).all())
    return valid, zi, zc, pi, pc


def disk_probe(dom: DomainSpec, probes) -> ProbeReport:
    """Look for a disk touching the boundary at an interior parameter but not contained in it."""
    probes = list(probes)
    for probe in probes:
        valid, zi, zc, pi, pc = _probe_status(dom, probe)
        if not valid:
            raise InvalidProbe(f"probe {probe.label or probe.to_dict()} leaves the closure")
        on_bd = dom.boundary_predicate(pi)
        inside_i = dom.interior_predicate(pi)
        inside_c = dom.interior_predicate(pc)
        if on_bd.any() and (inside_i.any() or inside_c.any()):
            k0 = int(np.argmax(on_bd))
            if inside_i.any():
                k1 = int(np.argmax(inside_i))
                zin, fin = zi[k1], pi[k1]
            else:
                k1 = int(np.argmax(inside_c))
                zin, fin = zc[k1], pc[k1]
            return ProbeReport(
                witness=True,
                probe=probe.to_dict(),
                zeta0=[zi[k0].real, zi[k0].imag],
                f_zeta0=pi[k0].tolist(),
                zeta_inside=[zin.real, zin.imag],
                f_zeta_inside=fin.tolist(),
                n_probes=len(probes),
            )
    return ProbeReport(witness=False, n_probes=len(probes))


def verify_probe_witness(dom: DomainSpec, report: ProbeReport) -> bool:
    """Independently re-evaluate a probe witness."""
    if not report.witness:
        return False
    coeffs = np.array([[complex(*c) for c in row] for row in report.probe["coeffs"]])
    f = AnalyticDiskProbe(coeffs)
    z0 = complex(*report.zeta0)
    z1 = complex(*report.zeta_inside)
    p0 = as_real(f(np.array([z0])))
    p1 = as_real(f(np.array([z1])))
    return bool(abs(z0) < 1 and dom.boundary_predicate(p0)[0] and dom.interior_predicate(p1)[0])


def _largest_scale(dom: DomainSpec, make, s0: float, halvings: int = 12):
    s = s0
    for _ in range(halvings + 1):
        probe = make(s)
        if _probe_status(dom, probe)[0]:
            return probe
        s /= 2
    return None


def default_probes(dom: DomainSpec, mask: DomainMask | None = None, *, seed: int = 0, n_random: int = 100, max_coordinate: int = 400):
    """Coordinate disks through boundary points plus seeded random quadratic disks.

    Coordinate disks ``p + s zeta e_k`` are centred at lattice nodes lying on
    the analytic boundary, with ``s`` the largest power-of-two fraction of
    the box size keeping the disk in the closure.
    """
    n = dom.n
    span = max(hi - lo for lo, hi in dom.bbox)
    probes = []
    if mask is not None:
        pts = mask.closure_points()[mask.boundary_positions]
        on = pts[dom.boundary_predicate(pts)]
        if on.shape[0] > max_coordinate:
            on = on[farthest_point_sample(on, max_coordinate)]
        for p in on:
            pc = as_complex(p)
            for k in range(n):
                e = np.zeros(n, dtype=complex)
                e[k] = 1.0

                def make(s, pc=pc, e=e):
                    return AnalyticDiskProbe([pc, s * e], label="coordinate")

                probe = _largest_scale(dom, make, span)
                if probe is not None:
                    probes.append(probe)
    rng = np.random.default_rng(seed)
    if mask is not None and mask.interior_positions.size:
        centers = mask.closure_points()[mask.interior_positions]
    else:
        centers = None
    for _ in range(n_random):
        if centers is not None:
            c0 = as_complex(centers[rng.integers(centers.shape[0])])
        else:
            c0 = np.zeros(n, dtype=complex)
        c1 = rng.normal(size=n) + 1j * rng.normal(size=n)
        c2 = rng.normal(size=n) + 1j * rng.normal(size=n)

        def make(s, c0=c0, c1=c1, c2=c2):
            return AnalyticDiskProbe([c0, s * c1, s * c2], label="random")

        probe = _largest_scale(dom, make, span, halvings=30)
        if probe is not None:
            probes.append(probe)
    return probes


def farthest_point_sample(points: np.ndarray, k: int) -> np.ndarray:
    """Indices of ``k`` points chosen greedily for spread, starting at index 0."""
    points = np.asarray(points, dtype=float)
    k = min(k, points.shape[0])
    chosen = [0]
    dist = np.sum((points - points[0]) ** 2, axis=1)
    for _ in range(k - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.sum((points - points[nxt]) ** 2, axis=1))
    return np.array(chosen)


@dataclass
class SupportReport:
    max_interior_mass: float
    passed: bool
    tol: float
    nodes: list = field(default_factory=list)
    worst_node: list | None = None
    worst_measure: dict | None = None
    windowed: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def boundary_support_test(
    mask: DomainMask,
    cone: DiscretePshCone,
    phi: GridFunction | None = None,
    *,
    n_samples: int = 32,
    nodes=None,
    tol: float = 1e-6,
    solver: str = "auto",
) -> SupportReport:
    """Largest interior mass of LP-extremal Jensen measures at sampled boundary nodes.

    ``phi`` must vanish on boundary nodes and be negative on interior nodes;
    it defaults to the built exhaustion.
    """
    if phi is None:
        phi = build_exhaustion(mask, cone)
    b = mask.boundary_positions
    if np.any(np.abs(phi.values[b]) > 1e-9):
        raise PreconditionError("phi must vanish on boundary nodes")
    if np.any(phi.values[mask.interior_positions] >= 0):
        raise PreconditionError("phi must be strictly negative on interior nodes")
    if nodes is None:
        pts = mask.closure_points()[b]
        nodes = b[farthest_point_sample(pts, min(n_samples, b.size))]
    worst, worst_z, worst_mu, windowed = -1.0, None, None, False
    per = []
    for z in nodes:
        sol = jensen_lp(int(z), phi, cone, rows="all", solver=solver)
        inner, _ = support_profile(sol.measure, mask)
        windowed |= sol.windowed
        per.append({"node": mask.closure_points()[int(z)].tolist(), "interior_mass": inner, "value": sol.value})
        if inner > worst:
            worst, worst_z, worst_mu = inner, int(z), sol.measure
    return SupportReport(
        max_interior_mass=float(worst),
        passed=bool(worst <= tol),
        tol=tol,
        nodes=per,
        worst_node=mask.closure_points()[worst_z].tolist() if worst_z is not None else None,
        worst_measure=worst_mu.to_dict() if worst_mu is not None and worst > tol else None,
        windowed=windowed,
    )


@dataclass
class ClassificationVerdict:
    verdict: str
    reasons: list

    def witnesses(self) -> list:
        return [r for r in self.reasons if r["outcome"] == "witness"]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "reasons": self.reasons}


def classify_domain(
    dom: DomainSpec,
    lat: Lattice | None = None,
    *,
    h: float | None = None,
    cone_config: dict | None = None,
    seed: int = 0,
    n_random: int = 100,
    support_samples: int = 32,
    tol: float = 1e-8,
    node_cap: int | None = None,
) -> ClassificationVerdict:
    """Run the four sub-tests and aggregate them into a one-sided verdict.

    Any sub-test that errors is recorded and makes the verdict at most
    Inconclusive; only a concrete witness yields NotPHyperconvex.
    """
    if lat is None:
        if h is None:
            raise PreconditionError("need a lattice or a grid spacing")
        lat = lattice_for_domain(dom, h, node_cap=node_cap)
    cone_config = dict(cone_config or {})
    reasons = []
    mask = cone = psi = None

    def record(name, outcome, data):
        reasons.append({"test": name, "outcome": outcome, "data": data})

    try:
        rep = fatness_test(dom, lat)
        record("fatness", "pass" if rep.fat else "witness", rep.to_dict())
    except PluripotError as exc:
        record("fatness", "error", {"error": str(exc)})

    try:
        mask = classify_nodes(lat, dom)
        cone = build_cone(lat, mask, **cone_config)
    except PluripotError as exc:
        record("discretization", "error", {"error": str(exc)})

    try:
        probes = default_probes(dom, mask, seed=seed, n_random=n_random)
        rep = disk_probe(dom, probes)
        record("disk_probe", "witness" if rep.witness else "pass", rep.to_dict() | {"seed": seed})
    except PluripotError as exc:
        record("disk_probe", "error", {"error": str(exc)})

    if cone is not None:
        try:
            psi = build_exhaustion(mask, cone, tol=tol)
            rep = cone_violation(psi, cone, tol=tol * (1 + psi.value_range))
            bad = rep.worst > 10 * rep.tol
            record("exhaustion_cone", "witness" if bad else "pass", rep.to_dict())
        except PluripotError as exc:
            record("exhaustion_cone", "error", {"error": str(exc)})
        if psi is not None:
            try:
                rep = boundary_support_test(mask, cone, psi, n_samples=support_samples)
                record("boundary_support", "witness" if not rep.passed else "pass", rep.to_dict())
            except PluripotError as exc:
                record("boundary_support", "error", {"error": str(exc)})

    outcomes = [r["outcome"] for r in reasons]
    if "witness" in outcomes:
        verdict = NOT_P
    elif all(o == "pass" for o in outcomes) and len(outcomes) == 4:
        verdict = EVIDENCE_P
    else:
        verdict = INCONCLUSIVE
    return ClassificationVerdict(verdict, reasons)
