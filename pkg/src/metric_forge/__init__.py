"""Finite checks and explicit metrization for b-metric and theta-metric spaces."""

from .baction import (
    BAction,
    ContinuityCertificate,
    check_baction_axioms,
    origin_continuity_delta,
    quarter_disk_sup,
    solve_axiom_iii,
)
from .chittenden import (
    ChittendenCertificate,
    RegularityModulus,
    b_metric_modulus,
    chittenden_gate,
    default_epsilon_grid,
    modulus_b_metric,
    modulus_theta,
    theta_modulus,
    verify_uniform_regularity,
)
from .distances import (
    AxiomReport,
    DistanceMatrix,
    PointSet,
    Violation,
    check_point_axioms,
    is_metric,
    minimal_relaxation_constant,
    relaxation_witness,
    verify_b_metric,
    verify_theta_metric,
)
from .errors import (
    ContinuityError,
    EvaluationError,
    InvalidParameterError,
    MalformedInputError,
    MetricForgeError,
    MetrizationError,
    SolvabilityError,
)
from .generators import REGISTRY, gen_baction, gen_power_line, gen_random_b_metric
from .metrization import (
    MetrizationResult,
    chain_metric,
    equivalence_check,
    metrize_b,
    metrize_theta,
    simple_path_minimum,
    snowflake,
    witness_chain,
)
from .serialization import read_matrix_csv, write_matrix_csv

__version__ = "0.1.0"
