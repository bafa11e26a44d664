"""The domain zoo: membership predicates and defining functions.

Points are real arrays of shape ``(..., 2n)`` laid out as
``(x1, y1, x2, y2)``, i.e. ``z_j = x_j + i y_j``.  Every predicate is
vectorised over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .exceptions import BadParams, DimensionMismatch, EmptyIntersection

# predicates are evaluated with this slack so that grid nodes placed exactly
# on an analytic boundary (|z| = 1 at z = 1.0) are classified as closure points
EPS = 1e-12

Predicate = Callable[[np.ndarray], np.ndarray]


def as_complex(points: np.ndarray) -> np.ndarray:
    """Return the complex coordinates ``(..., n)`` of real points ``(..., 2n)``."""
    points = np.asarray(points, dtype=float)
    return points[..., 0::2] + 1j * points[..., 1::2]


def as_real(zs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`as_complex`."""
    zs = np.asarray(zs, dtype=complex)
    out = np.empty(zs.shape[:-1] + (2 * zs.shape[-1],))
    out[..., 0::2] = zs.real
    out[..., 1::2] = zs.imag
    return out


@dataclass(frozen=True)
class DomainSpec:
    """Analytic description of a bounded domain in C^n.

    Attributes
    ----------
    name : str
    n : int
        Complex dimension (1 or 2).
    closure : callable
        ``points -> bool array``; membership in the closure.
    interior : callable
        ``points -> bool array``; membership in the open domain.
    rho : callable or None
        Defining function, negative inside and positive outside.
    lipschitz : float
        Bound on the Lipschitz constant of ``rho`` near the boundary; used by
        the boundary-band rule of the node classifier.
    bbox : tuple of (lo, hi)
        Real bounding box with ``2n`` intervals.
    claims : dict
        What is known about the domain (``hyperconvex``, ``p_hyperconvex``,
        ``fat``, ...); metadata only.
    """

    name: str
    n: int
    closure: Predicate
    interior: Predicate
    rho: Predicate | None
    lipschitz: float
    bbox: tuple
    claims: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def closure_predicate(self, points):
        return np.asarray(self.closure(np.asarray(points, dtype=float)), dtype=bool)

    def interior_predicate(self, points):
        return np.asarray(self.interior(np.asarray(points, dtype=float)), dtype=bool)

    def boundary_predicate(self, points):
        points = np.asarray(points, dtype=float)
        return self.closure_predicate(points) & ~self.interior_predicate(points)

    def defining_function(self, points):
        if self.rho is None:
            raise NotImplementedError(f"{self.name} has no defining function")
        return np.asarray(self.rho(np.asarray(points, dtype=float)), dtype=float)


@dataclass(frozen=True)
class WormProfile:
    """Hinge-quartic profile ``eta(x) = c * max(0, |x| - 2 pi)**4``.

    ``a`` is the abscissa beyond which ``eta > 1``.
    """

    c: float

    @property
    def a(self) -> float:
        return 2 * math.pi + self.c ** -0.25

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * np.maximum(0.0, np.abs(x) - 2 * math.pi) ** 4

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return 4 * self.c * np.sign(x) * np.maximum(0.0, np.abs(x) - 2 * math.pi) ** 3

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        return 12 * self.c * np.maximum(0.0, np.abs(x) - 2 * math.pi) ** 2


def make_worm_profile(c: float) -> WormProfile:
    if not c > 0:
        raise BadParams(f"worm profile needs c > 0, got {c}")
    return WormProfile(float(c))


def _disk(center=0.0, radius=1.0) -> DomainSpec:
    center = complex(center if not isinstance(center, (list, tuple)) else complex(*center))
    radius = float(radius)
    if radius <= 0:
        raise BadParams("disk radius must be positive")

    def rho(p):
        return np.abs(as_complex(p)[..., 0] - center) - radius

    return DomainSpec(
        name="unit_disk" if (center == 0 and radius == 1) else "disk",
        n=1,
        closure=lambda p: rho(p) <= EPS,
        interior=lambda p: rho(p) < -EPS,
        rho=rho,
        lipschitz=1.0,
        bbox=((center.real - radius, center.real + radius), (center.imag - radius, center.imag + radius)),
        claims={"hyperconvex": True, "p_hyperconvex": True, "fat": True},
        params={"center": [center.real, center.imag], "radius": radius},
    )


def _annulus(r1, r2) -> DomainSpec:
    r1, r2 = float(r1), float(r2)
    if not 0 < r1 < r2:
        raise BadParams(f"annulus needs 0 < r1 < r2, got r1={r1}, r2={r2}")

    def rho(p):
        r = np.abs(as_complex(p)[..., 0])
        return np.maximum(r1 - r, r - r2)

    return DomainSpec(
        name="annulus",
        n=1,
        closure=lambda p: rho(p) <= EPS,
        interior=lambda p: rho(p) < -EPS,
        rho=rho,
        lipschitz=1.0,
        bbox=((-r2, r2), (-r2, r2)),
        claims={"hyperconvex": True, "p_hyperconvex": True, "fat": True},
        params={"r1": r1, "r2": r2},
    )


def _slit_disk(half_length=0.5) -> DomainSpec:
    # the slit lies on the real axis so that it is grid-aligned; rotating it
    # makes the fatness scan depend on rounding
    s = float(half_length)
    if not 0 < s < 1:
        raise BadParams("slit half length must lie in (0, 1)")

    def slit_dist(z):
        return np.abs(z - np.clip(z.real, -s, s))

    def rho(p):
        z = as_complex(p)[..., 0]
        return np.maximum(np.abs(z) - 1.0, -slit_dist(z))

    def closure(p):
        return np.abs(as_complex(p)[..., 0]) <= 1.0 + EPS

    def interior(p):
        z = as_complex(p)[..., 0]
        return (np.abs(z) < 1.0 - EPS) & (slit_dist(z) > EPS)

    return DomainSpec(
        name="slit_disk",
        n=1,
        closure=closure,
        interior=interior,
        rho=rho,
        lipschitz=1.0,
        bbox=((-1.0, 1.0), (-1.0, 1.0)),
        claims={"hyperconvex": True, "p_hyperconvex": False, "fat": False},
        params={"half_length": s},
    )


def _unit_ball2() -> DomainSpec:
    def rho(p):
        return np.sqrt(np.sum(np.asarray(p) ** 2, axis=-1)) - 1.0

    return DomainSpec(
        name="unit_ball2",
        n=2,
        closure=lambda p: rho(p) <= EPS,
        interior=lambda p: rho(p) < -EPS,
        rho=rho,
        lipschitz=1.0,
        bbox=((-1.0, 1.0),) * 4,
        claims={"hyperconvex": True, "p_hyperconvex": True, "fat": True},
    )


def _hartogs_triangle() -> DomainSpec:
    def parts(p):
        zw = np.abs(as_complex(p))
        return zw[..., 0], zw[..., 1]

    def rho(p):
        az, aw = parts(p)
        return np.maximum(az - aw, aw - 1.0)

    def closure(p):
        az, aw = parts(p)
        return (az <= aw + EPS) & (aw <= 1.0 + EPS)

    def interior(p):
        az, aw = parts(p)
        return (az < aw - EPS) & (aw < 1.0 - EPS)

    return DomainSpec(
        name="hartogs_triangle",
        n=2,
        closure=closure,
        interior=interior,
        rho=rho,
        lipschitz=math.sqrt(2.0),
        bbox=((-1.0, 1.0),) * 4,
        claims={"pseudoconvex": True, "hyperconvex": False, "p_hyperconvex": False, "fat": True},
    )


def _worm(c=math.pi ** -4, profile: WormProfile | None = None) -> DomainSpec:
    eta = profile if profile is not None else make_worm_profile(c)
    a = eta.a
    w_lo, w_hi = math.exp(-(a + 1) / 2), math.exp((a + 1) / 2)

    def rho(p):
        zw = as_complex(p)
        z, aw2 = zw[..., 0], np.abs(zw[..., 1]) ** 2
        safe = aw2 > 0
        L = np.log(np.where(safe, aw2, 1.0))
        val = np.abs(z - np.exp(1j * L)) ** 2 - 1.0 + eta(L)
        return np.where(safe, val, np.inf)

    def guard(p):
        aw = np.abs(as_complex(p)[..., 1])
        return (aw >= w_lo) & (aw <= w_hi)

    return DomainSpec(
        name="worm",
        n=2,
        closure=lambda p: guard(p) & (rho(p) <= EPS),
        interior=lambda p: guard(p) & (rho(p) < -EPS),
        rho=rho,
        lipschitz=4.0,
        bbox=((-2.0, 2.0), (-2.0, 2.0), (-w_hi, w_hi), (-w_hi, w_hi)),
        claims={"pseudoconvex": True, "hyperconvex": True, "p_hyperconvex": True,
                "strictly_hyperconvex": False, "fat": True},
        params={"c": eta.c, "a": a},
    )


def _polydisk() -> DomainSpec:
    return replace(combine("product", _disk(), _disk()), name="polydisk")


_ZOO = {
    "unit_disk": _disk,
    "disk": _disk,
    "annulus": _annulus,
    "slit_disk": _slit_disk,
    "unit_ball2": _unit_ball2,
    "polydisk": _polydisk,
    "hartogs_triangle": _hartogs_triangle,
    "worm": _worm,
}


def domain_names() -> list[str]:
    return sorted(_ZOO)


def make_domain(name: str, **params) -> DomainSpec:
    """Build a zoo domain by name.

    Examples
    --------
    >>> make_domain("annulus", r1=0.5, r2=1.0).name
    'annulus'
    """
    try:
        ctor = _ZOO[name]
    except KeyError:
        raise BadParams(f"unknown domain {name!r}; known: {domain_names()}") from None
    try:
        return ctor(**params)
    except TypeError as exc:
        raise BadParams(f"bad parameters for {name}: {exc}") from None


def _sample_box(bbox, count, rng):
    lo = np.array([b[0] for b in bbox])
    hi = np.array([b[1] for b in bbox])
    return lo + (hi - lo) * rng.random((count, len(bbox)))


def combine(op: str, d1: DomainSpec, d2: DomainSpec, *, samples: int = 20000, seed: int = 0) -> DomainSpec:
    """Intersect two domains or form their cartesian product."""
    if op == "intersect":
        if d1.n != d2.n:
            raise DimensionMismatch(f"cannot intersect dimensions {d1.n} and {d2.n}")
        bbox = tuple((max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(d1.bbox, d2.bbox))
        if any(lo >= hi for lo, hi in bbox):
            raise EmptyIntersection("bounding boxes do not overlap")
        pts = _sample_box(bbox, samples, np.random.default_rng(seed))
        if not np.any(d1.interior_predicate(pts) & d2.interior_predicate(pts)):
            raise EmptyIntersection(f"no common interior point among {samples} samples")
        rho = None
        if d1.rho is not None and d2.rho is not None:
            rho = lambda p: np.maximum(d1.rho(p), d2.rho(p))  # noqa: E731
        claims = {}
        if d1.claims.get("p_hyperconvex") and d2.claims.get("p_hyperconvex"):
            claims["p_hyperconvex"] = True
        return DomainSpec(
            name=f"({d1.name})&({d2.name})",
            n=d1.n,
            closure=lambda p: d1.closure(p) & d2.closure(p),
            interior=lambda p: d1.interior(p) & d2.interior(p),
            rho=rho,
            lipschitz=max(d1.lipschitz, d2.lipschitz),
            bbox=bbox,
            claims=claims,
            params={"parts": [d1.name, d2.name]},
        )
    if op == "product":
        if d1.n + d2.n > 2:
            raise DimensionMismatch("products are limited to total dimension 2")
        k = 2 * d1.n
        rho = None
        if d1.rho is not None and d2.rho is not None:
            rho = lambda p: np.maximum(d1.rho(p[..., :k]), d2.rho(p[..., k:]))  # noqa: E731
        claims = {key: d1.claims.get(key) and d2.claims.get(key)
                  for key in ("hyperconvex", "p_hyperconvex", "fat")
                  if key in d1.claims and key in d2.claims}
        return DomainSpec(
            name=f"({d1.name})x({d2.name})",
            n=d1.n + d2.n,
            closure=lambda p: d1.closure(p[..., :k]) & d2.closure(p[..., k:]),
            interior=lambda p: d1.interior(p[..., :k]) & d2.interior(p[..., k:]),
            rho=rho,
            lipschitz=max(d1.lipschitz, d2.lipschitz),
            bbox=tuple(d1.bbox) + tuple(d2.bbox),
            claims=claims,
            params={"parts": [d1.name, d2.name]},
        )
    raise BadParams(f"unknown combine op {op!r}")


def domain_from_config(cfg: dict) -> DomainSpec:
    """Resolve ``{"name": ..., "params": {...}}``; supports nested combine."""
    name = cfg["name"]
    params = dict(cfg.get("params", {}))
    if name in ("intersect", "product"):
        parts = params.pop("parts")
        if len(parts) != 2:
            raise BadParams("combine needs exactly two parts")
        return combine(name, domain_from_config(parts[0]), domain_from_config(parts[1]), **params)
    return make_domain(name, **params)
