"""Surgical eigenstructure assignment for linear time-invariant systems.

Given x' = A x + B u with (A, B) controllable, construct a real static gain
F = F0 + F1 so that A + B F carries r specified eigenvalues with fully
specified eigenvectors or generalized eigenvectors, and places the remaining
n - r eigenvalues at arbitrary self-conjugate locations. A verification
report recomputed from (A, B, F) alone accompanies every synthesized gain.
"""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatch,
    EigsurgError,
    Inadmissible,
    InvarianceViolated,
    KernelError,
    NotControllable,
    NotReal,
    PairingMismatch,
    ProblemInvalid,
    RankDeficient,
    SchemaError,
    SelectionFailed,
    Singular,
)
from .model import (
    EigenTarget,
    InputDirections,
    SurgicalProblem,
    SystemPair,
    Violation,
    check_controllability,
    compute_input_directions,
    conjugate_pairing,
    parse_problem,
    realify_columns,
    validate_structure,
)
from .numerics import Tolerances
from .synthesis import (
    GainResult,
    InvariantDecomposition,
    Stage0Result,
    decompose,
    reduced_placement,
    stage0,
    stage1,
    synthesize,
)
from .verify import (
    VerificationReport,
    chain_residuals,
    match_spectra,
    verify_closed_loop,
)

__all__ = [
    "__version__",
    # errors
    "EigsurgError", "KernelError", "RankDeficient", "Singular",
    "DimensionMismatch", "SchemaError", "PairingMismatch", "NotReal",
    "Inadmissible", "NotControllable", "InvarianceViolated",
    "SelectionFailed", "ProblemInvalid",
    # model
    "SystemPair", "EigenTarget", "SurgicalProblem", "InputDirections",
    "Violation", "validate_structure", "check_controllability",
    "compute_input_directions", "conjugate_pairing", "realify_columns",
    "parse_problem",
    # numerics
    "Tolerances",
    # synthesis
    "Stage0Result", "InvariantDecomposition", "GainResult",
    "stage0", "decompose", "reduced_placement", "stage1", "synthesize",
    # verify
    "VerificationReport", "verify_closed_loop", "match_spectra",
    "chain_residuals",
]
