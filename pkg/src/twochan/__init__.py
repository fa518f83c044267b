"""Removal of resolvent-like energy dependence from two-channel couplings.

Solves the stationary operator Riccati equation for the graph operator Q,
builds energy-independent effective channel Hamiltonians H = A + B Q, and
verifies the associated structure: block-diagonalization, spectral
partition, biorthogonal eigen-systems, weighted self-adjointness, and
on-shell scattering equivalence on grid-discretized instances.
"""

from .errors import (
    ClassificationError,
    ConvergenceError,
    DomainError,
    GapError,
    NumericalError,
    OracleFailureError,
    PartitionOverlapError,
    PartitionResolutionError,
    ProblemFileError,
    ReportError,
    ResolventError,
    SingularityError,
    StructuralError,
    TwoChanError,
)
from .model import (
    Band,
    CouplingBlock,
    LinearTermReduction,
    SpectralOperator,
    TwoChannelProblem,
    assemble_full,
    hilbert_schmidt_norm,
    reduce_linear_term,
    spectral_gap,
)
from .riccati import (
    ContractionCertificate,
    RiccatiSolution,
    certify_contraction,
    contraction_map,
    oracle_graph_from_projector,
    riccati_residual,
    solve_riccati,
)
from .effective import (
    BlockDiagonalization,
    EffectiveChannel,
    Triangularization,
    block_diagonalize,
    build_effective,
    symmetrize,
    triangularize,
    weighted_inner_product,
)
from .spectral import (
    EigenSystem,
    PartitionReport,
    SmoothnessStats,
    completeness_check,
    dual_system,
    kernel_smoothness_probe,
    partition_spectrum,
    weight_identity_check,
)
from .scattering import (
    ScatteringResult,
    continuum_eigenfunction,
    onshell_equality,
    s_matrix,
    scatter_channel,
    t_matrix_full,
    t_reduced,
)
from .harness import RunConfig, RunReport, run
from .problem_io import ParsedProblem, dump_problem, load_problem, parse_problem

__version__ = "0.1.0"
