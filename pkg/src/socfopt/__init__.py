"""Sharp lower bounds for sparse univariate polynomials on intervals.

A polynomial with few monomials that is nonnegative on an interval admits a
structured decomposition into interval weights times shifted squares of low
degree.  This package builds those decompositions as small block
semidefinite programs, solves them with a self-contained interior-point
method, recovers the optimal bound together with a checkable certificate,
and cross-validates everything against an exact rational minimization
oracle and the combinatorial theory of the cone's extreme rays.
"""

from .certify import GramCertificate, CertificatePart, extract, theorem_shape, verify
from .cli import BoundOutcome, compute_bound, main
from .cones import (
    BlockSdp,
    BlockSpec,
    Constraint,
    MomentVector,
    Objective,
    WeightedBlock,
    assemble_banded,
    banded_to_cliques,
    bound_value,
    build_banded,
    build_bound_primal,
    build_full_line,
    build_membership,
    build_moment_dual,
    default_k,
    expand_banded,
    moments_from_solution,
    pick_radius,
    weight_system,
)
from .oracle import OracleResult, companion_root_clusters, count_roots, global_min
from .poly import IntervalSpec, SparsePoly
from .schur import (
    MultiplicityVector,
    Partition,
    confluent_alternant,
    schur_expand,
    schur_restrict,
    strict_to_partition,
)
from .sdp import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TROUBLE,
    STATUS_UNBOUNDED,
    SdpSolution,
    SolverSettings,
    residuals,
    solve,
)
from .sdpa import dumps_sdpa, loads_sdpa, read_sdpa, write_sdpa
from .xray import (
    RootPattern,
    check_root_count,
    extreme_ray_from_roots,
    verify_extreme_factorization,
)

__version__ = "1.0.0"

__all__ = [
    "BlockSdp",
    "BlockSpec",
    "BoundOutcome",
    "CertificatePart",
    "Constraint",
    "GramCertificate",
    "IntervalSpec",
    "MomentVector",
    "MultiplicityVector",
    "Objective",
    "OracleResult",
    "Partition",
    "RootPattern",
    "STATUS_INFEASIBLE",
    "STATUS_OPTIMAL",
    "STATUS_TROUBLE",
    "STATUS_UNBOUNDED",
    "SdpSolution",
    "SolverSettings",
    "SparsePoly",
    "WeightedBlock",
    "assemble_banded",
    "banded_to_cliques",
    "bound_value",
    "build_banded",
    "build_bound_primal",
    "build_full_line",
    "build_membership",
    "build_moment_dual",
    "check_root_count",
    "companion_root_clusters",
    "compute_bound",
    "confluent_alternant",
    "count_roots",
    "default_k",
    "dumps_sdpa",
    "expand_banded",
    "extract",
    "extreme_ray_from_roots",
    "global_min",
    "loads_sdpa",
    "main",
    "moments_from_solution",
    "pick_radius",
    "read_sdpa",
    "residuals",
    "schur_expand",
    "schur_restrict",
    "solve",
    "strict_to_partition",
    "theorem_shape",
    "verify",
    "verify_extreme_factorization",
    "weight_system",
    "write_sdpa",
]
