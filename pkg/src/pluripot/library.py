"""Fixed library of named obstacle and boundary-data functions.

Every function takes an ``(N, 2n)`` array of real coordinates and returns
``N`` values; the complex variable ``z`` is the first coordinate pair.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigError


def _z1(pts):
    pts = np.asarray(pts, dtype=float)
    return pts[:, 0] + 1j * pts[:, 1]


def _abs2(pts):
    return np.sum(np.asarray(pts, dtype=float) ** 2, axis=1)


def _neg_abs_sin(pts):
    z = _z1(pts)
    r = np.abs(z)
    return np.where(r > 0, -np.abs(z.imag) / np.where(r > 0, r, 1.0), 0.0)


FUNCTIONS = {
    "const": lambda p: np.zeros(len(p)),
    "re_z": lambda p: _z1(p).real,
    "re_z2": lambda p: (_z1(p) ** 2).real,
    "abs2": _abs2,
    "neg_abs2": lambda p: -_abs2(p),
    "neg_sqrt": lambda p: -np.sqrt(np.maximum(0.0, 1.0 - _abs2(p))),
    "neg_abs_sin": _neg_abs_sin,
}


def named_function(name: str, value: float = 0.0):
    """Look up a library function; ``const`` takes its level from ``value``."""
    if name not in FUNCTIONS:
        raise ConfigError(f"unknown function {name!r}; choose from {sorted(FUNCTIONS)}")
    if name == "const":
        return lambda p: np.full(len(p), float(value))
    return FUNCTIONS[name]


def random_obstacle(points, seed: int, n_modes: int = 6):
    """Seeded smooth obstacle: a random trigonometric sum plus a random multiple of ``|z|^2``."""
    rng = np.random.default_rng(seed)
    pts = np.asarray(points, dtype=float)
    freq = rng.normal(scale=2.0, size=(n_modes, pts.shape[1]))
    phase = rng.uniform(0, 2 * np.pi, size=n_modes)
    amp = rng.uniform(-1, 1, size=n_modes) / n_modes
    return np.cos(pts @ freq.T + phase) @ amp + rng.uniform(-0.5, 0.5) * np.sum(pts**2, axis=1)
