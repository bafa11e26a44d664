"""Scikit-learn style wrappers around the envelope, Dirichlet and classification solvers.

A fitted estimator owns one discretization (lattice, mask, cone).  Functions
are exchanged as arrays of values on ``nodes_``, the closure node
coordinates, or as callables on coordinate arrays.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .domains import DomainSpec, domain_from_config, make_domain
from .envelope import dirichlet_psh_extension, psh_envelope
from .exceptions import DimensionMismatch
from .hyperconvex import EVIDENCE_P, INCONCLUSIVE, NOT_P, classify_domain
from .lattice import build_cone, classify_nodes, lattice_for_domain
from .pshcore import GridFunction


def _resolve_domain(domain, params=None) -> DomainSpec:
    if isinstance(domain, DomainSpec):
        return domain
    if isinstance(domain, dict):
        return domain_from_config(domain)
    return make_domain(domain, **(params or {}))


class _LatticeEstimator(BaseEstimator):
    """Shared discretization parameters and fitting."""

    def _discretize(self):
        self.domain_ = _resolve_domain(self.domain, self.domain_params)
        self.lattice_ = lattice_for_domain(self.domain_, self.h, node_cap=self.node_cap)
        self.mask_ = classify_nodes(self.lattice_, self.domain_)
        self.cone_ = build_cone(self.lattice_, self.mask_, radii=self.radii, m=self.m)
        self.nodes_ = self.mask_.closure_points()
        self.n_features_in_ = self.nodes_.shape[0]

    def _values(self, X) -> np.ndarray:
        if callable(X):
            return np.asarray(X(self.nodes_), dtype=float)
        vals = check_array(np.atleast_2d(np.asarray(X, dtype=float)), ensure_all_finite=True)
        if vals.shape != (1, self.n_features_in_):
            raise DimensionMismatch(f"expected {self.n_features_in_} node values, got shape {np.shape(X)}")
        return vals[0]

    def _points(self, P) -> np.ndarray:
        P = check_array(P)
        if P.shape[1] != self.nodes_.shape[1]:
            raise DimensionMismatch(f"points need {self.nodes_.shape[1]} real coordinates")
        return np.array([self.mask_.position_of_point(p) for p in P], dtype=np.int64)


class PshEnvelope(_LatticeEstimator, TransformerMixin):
    """Largest discrete plurisubharmonic minorant of an obstacle.

    Parameters
    ----------
    domain : str, dict or DomainSpec
        Zoo name, config dictionary or a ready domain.
    domain_params : dict, optional
        Keyword arguments for a zoo domain.
    h : float
        Grid spacing.
    boundary : {'fixed', 'closure'}
        Envelope semantics on boundary nodes.
    tol : float
        Relative sweep tolerance.
    max_iter : int
        Sweep budget.
    m : int
        Circle samples per stencil.
    radii : list of float, optional
        Stencil radii in cells.
    node_cap : int, optional
        Lattice node budget.

    Attributes
    ----------
    nodes_ : ndarray of shape (n_nodes, 2n)
        Closure node coordinates; obstacles are value vectors over these.
    envelope_ : GridFunction
        Envelope of the obstacle passed to ``fit``.
    result_ : EnvelopeResult
    """

    def __init__(
        self,
        domain="unit_disk",
        domain_params=None,
        h=0.1,
        boundary="fixed",
        tol=1e-8,
        max_iter=10**6,
        m=16,
        radii=None,
        node_cap=None,
    ):
        self.domain = domain
        self.domain_params = domain_params
        self.h = h
        self.boundary = boundary
        self.tol = tol
        self.max_iter = max_iter
        self.m = m
        self.radii = radii
        self.node_cap = node_cap

    def _solve(self, values):
        obs = GridFunction(self.mask_, values, "obstacle")
        return psh_envelope(obs, self.cone_, boundary=self.boundary, tol=self.tol, max_iter=self.max_iter)

    def fit(self, X, y=None):
        """Discretize the domain and compute the envelope of the obstacle ``X``."""
        self._discretize()
        self.result_ = self._solve(self._values(X))
        self.envelope_ = self.result_.envelope
        return self

    def transform(self, X):
        """Envelopes of a batch of obstacles, one per row of ``X``."""
        check_is_fitted(self, "cone_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"expected {self.n_features_in_} node values per row")
        return np.vstack([self._solve(row).envelope.values for row in X])

    def predict(self, P):
        """Envelope values at the closure nodes nearest to points ``P``."""
        check_is_fitted(self, "envelope_")
        return self.envelope_.values[self._points(P)]


class DirichletPshExtension(_LatticeEstimator):
    """Maximal discrete psh function below the harmonic extension of boundary data.

    Parameters are those of :class:`PshEnvelope` without ``boundary``; the
    closure cone is always used.

    Attributes
    ----------
    extension_ : GridFunction
    boundary_mismatch_ : float
        ``max |Phi - f|`` over boundary nodes.
    """

    def __init__(self, domain="unit_disk", domain_params=None, h=0.1, tol=1e-8, max_iter=10**6, m=16, radii=None, node_cap=None):
        self.domain = domain
        self.domain_params = domain_params
        self.h = h
        self.tol = tol
        self.max_iter = max_iter
        self.m = m
        self.radii = radii
        self.node_cap = node_cap

    def fit(self, X, y=None):
        """``X`` is boundary data: values over ``nodes_`` or a callable."""
        self._discretize()
        f = GridFunction(self.mask_, self._values(X), "f")
        self.result_ = dirichlet_psh_extension(f, self.mask_, self.cone_, tol=self.tol, max_iter=self.max_iter)
        self.extension_ = self.result_.envelope
        self.boundary_mismatch_ = self.result_.boundary_mismatch
        return self

    def predict(self, P):
        check_is_fitted(self, "extension_")
        return self.extension_.values[self._points(P)]


class PHyperconvexityClassifier(ClassifierMixin, BaseEstimator):
    """One-sided P-hyperconvexity verdicts for a list of domains.

    ``predict`` maps each domain (zoo name, config dictionary or DomainSpec)
    to one of ``'NotPHyperconvex'``, ``'EvidencePHyperconvex'`` or
    ``'Inconclusive'``.  ``fit`` only records the label set; nothing is learned.
    """

    def __init__(self, h=0.1, seed=0, n_random=100, support_samples=32, tol=1e-8, node_cap=None):
        self.h = h
        self.seed = seed
        self.n_random = n_random
        self.support_samples = support_samples
        self.tol = tol
        self.node_cap = node_cap

    def fit(self, X=None, y=None):
        self.classes_ = np.array([NOT_P, EVIDENCE_P, INCONCLUSIVE])
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        self.verdicts_ = []
        for item in X:
            dom = _resolve_domain(item)
            self.verdicts_.append(
                classify_domain(
                    dom,
                    h=self.h,
                    seed=self.seed,
                    n_random=self.n_random,
                    support_samples=self.support_samples,
                    tol=self.tol,
                    node_cap=self.node_cap,
                )
            )
        return np.array([v.verdict for v in self.verdicts_])
