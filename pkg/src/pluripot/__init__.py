"""Discrete plurisubharmonic functions, envelopes and Jensen measures on grids."""

from .domains import DomainSpec, combine, domain_from_config, domain_names, make_domain, make_worm_profile
from .envelope import (
    DirichletResult,
    EnvelopeResult,
    dirichlet_psh_extension,
    harmonic_extension,
    psh_envelope,
    relative_extremal,
)
from .estimators import DirichletPshExtension, PHyperconvexityClassifier, PshEnvelope
from .exceptions import PluripotError
from .glue import GlueParams, bounded_extension, cutoff_extension, max_glue
from .hyperconvex import (
    EVIDENCE_P,
    INCONCLUSIVE,
    NOT_P,
    AnalyticDiskProbe,
    boundary_support_test,
    build_exhaustion,
    classify_domain,
    disk_probe,
    fatness_test,
)
from .jensen import DiscreteMeasure, edwards_gap, jensen_lp
from .lattice import DiscretePshCone, DomainMask, Lattice, build_cone, build_lattice, classify_nodes, lattice_for_domain
from .pshcore import GridFunction, cone_violation, levi_profile, monotone_limit_check, usc_regularize

__version__ = "0.1.0"

__all__ = [
    "AnalyticDiskProbe",
    "DirichletPshExtension",
    "DirichletResult",
    "DiscreteMeasure",
    "DiscretePshCone",
    "DomainMask",
    "DomainSpec",
    "EVIDENCE_P",
    "EnvelopeResult",
    "GlueParams",
    "GridFunction",
    "INCONCLUSIVE",
    "Lattice",
    "NOT_P",
    "PHyperconvexityClassifier",
    "PluripotError",
    "PshEnvelope",
    "boundary_support_test",
    "bounded_extension",
    "build_cone",
    "build_exhaustion",
    "build_lattice",
    "classify_domain",
    "classify_nodes",
    "combine",
    "cone_violation",
    "cutoff_extension",
    "dirichlet_psh_extension",
    "disk_probe",
    "domain_from_config",
    "domain_names",
    "edwards_gap",
    "fatness_test",
    "harmonic_extension",
    "jensen_lp",
    "lattice_for_domain",
    "levi_profile",
    "make_domain",
    "make_worm_profile",
    "max_glue",
    "monotone_limit_check",
    "psh_envelope",
    "relative_extremal",
    "usc_regularize",
]
