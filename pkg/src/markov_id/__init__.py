"""Identity testing for reversible Markov chains from a single trajectory.

The package reduces the general reversible problem to the symmetric one: a
memoryless embedding built from the reference's rational stationary law
turns the reference into a symmetric chain and lifts the observed
trajectory without touching the contrast between hypotheses, so any tester
for symmetric chains applies unchanged. Exact path-level oracles for the
identities behind that reduction live alongside and back the test suite.
"""

from .contrast import ContrastValue, contrast, renyi_half, renyi_rate_via_paths
from .embedding import (
    LumpingMap,
    MemorylessEmbedding,
    Symmetrizer,
    build_symmetrizer,
    embed_distribution,
    embed_matrix,
    embedded_edge_set,
    induced_edge_image,
    is_lumpable,
    load_symmetrizer,
    lump,
    save_symmetrizer,
    symmetry_defect,
)
from .errors import (
    EdgeMismatchError,
    ExclusionRegionError,
    IncompatibleStateCountError,
    MarkovIdError,
    NoConvergenceError,
    NotIrreducibleError,
    NotLumpableError,
    OffEdgeMassError,
    PreconditionFailedError,
    RationalizationFailedError,
    ReferenceClassError,
    RowSumError,
    TooLargeError,
    ZeroOnEdgeError,
)
from .markov_core import (
    EdgeSet,
    MembershipReport,
    RationalStationary,
    StationaryDistribution,
    TransitionMatrix,
    check_reference_class,
    is_irreducible,
    is_reversible,
    load_matrix,
    rationalize,
    save_matrix,
    spectral_radius,
    stationary_distribution,
    validate,
)
from .paths import (
    PathDistribution,
    PathMorphism,
    path_distribution,
    path_divergence_invariance,
    pushforward_defect,
)
from .sampling import (
    RandomSource,
    Trajectory,
    embed_trajectory,
    load_trajectory,
    save_trajectory,
    simulate,
)
from .testing import (
    RiskReport,
    ScanResult,
    SymmetricTester,
    TESTERS,
    TestConfig,
    TestVerdict,
    estimate_risk,
    plugin_symmetric_tester,
    reduced_identity_test,
    sample_complexity_scan,
)

__version__ = "0.1.0"

__all__ = [
    "ContrastValue",
    "EdgeMismatchError",
    "EdgeSet",
    "ExclusionRegionError",
    "IncompatibleStateCountError",
    "LumpingMap",
    "MarkovIdError",
    "MembershipReport",
    "MemorylessEmbedding",
    "NoConvergenceError",
    "NotIrreducibleError",
    "NotLumpableError",
    "OffEdgeMassError",
    "PathDistribution",
    "PathMorphism",
    "PreconditionFailedError",
    "RandomSource",
    "RationalStationary",
    "RationalizationFailedError",
    "ReferenceClassError",
    "RiskReport",
    "RowSumError",
    "ScanResult",
    "StationaryDistribution",
    "SymmetricTester",
    "Symmetrizer",
    "TESTERS",
    "TestConfig",
    "TestVerdict",
    "TooLargeError",
    "Trajectory",
    "TransitionMatrix",
    "ZeroOnEdgeError",
    "build_symmetrizer",
    "check_reference_class",
    "contrast",
    "embed_distribution",
    "embed_matrix",
    "embed_trajectory",
    "estimate_risk",
    "embedded_edge_set",
    "induced_edge_image",
    "is_irreducible",
    "is_lumpable",
    "is_reversible",
    "load_matrix",
    "load_symmetrizer",
    "load_trajectory",
    "lump",
    "path_distribution",
    "path_divergence_invariance",
    "plugin_symmetric_tester",
    "pushforward_defect",
    "rationalize",
    "reduced_identity_test",
    "renyi_half",
    "renyi_rate_via_paths",
    "sample_complexity_scan",
    "save_matrix",
    "save_symmetrizer",
    "save_trajectory",
    "simulate",
    "spectral_radius",
    "stationary_distribution",
    "symmetry_defect",
    "validate",
]
