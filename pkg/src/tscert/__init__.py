"""Stability certificates for Takagi-Sugeno fuzzy systems.

Assembles the classic quadratic, fuzzy-Lyapunov (rate-bounded), and
augmented-state LMI stability conditions for ẋ = Σ α_i(x) A_i(λ) x,
solves them as strict-feasibility SDPs, verifies every certificate with
an independent eigenvalue check, and searches for the largest feasible
λ. Ships a nonlinear simulator, finite-difference identity checks, and
domain-of-attraction estimates on top.
"""

from .analysis import (
    ComplexityRow,
    DAEstimate,
    LambdaSearchResult,
    OmegaReport,
    ProbeRecord,
    complexity_report,
    estimate_da_augmented,
    estimate_da_quadratic,
    lambda_max_search,
    omega_region_check,
)
from .conditions import (
    Certificate,
    Method,
    aug_dim,
    build_condition,
    certificate_from_dict,
    certificate_to_dict,
    gamma_matrix,
    load_certificate,
    phi_matrix,
    save_certificate,
    xi_vector,
)
from .errors import (
    EigenConvergenceError,
    ExprError,
    LinAlgError,
    ModelError,
    NotSPDError,
    SolverError,
    TscertError,
)
from .lmi import AffineMatExpr, Constraint, LMIProblem, VarSpace, relax_double, relax_single
from .model import (
    Box,
    HullReport,
    JacobianModel,
    MembershipSpec,
    ModelBundle,
    TSModel,
    check_jacobian_hull,
    jacobian_fd,
    load_bundle,
    save_bundle,
    system_matrix,
)
from .sdp import (
    FeasibilityOutcome,
    SolverConfig,
    Verdict,
    check_assignment,
    dump_problem,
    solve_feasibility,
)
from .verify import (
    Trajectory,
    VerificationReport,
    check_lyapunov_decrease,
    check_mf_dynamics,
    check_xi_dynamics,
    simulate,
    verify_certificate,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMatExpr",
    "Box",
    "Certificate",
    "ComplexityRow",
    "Constraint",
    "DAEstimate",
    "EigenConvergenceError",
    "ExprError",
    "FeasibilityOutcome",
    "HullReport",
    "JacobianModel",
    "LMIProblem",
    "LambdaSearchResult",
    "LinAlgError",
    "MembershipSpec",
    "Method",
    "ModelBundle",
    "ModelError",
    "NotSPDError",
    "OmegaReport",
    "ProbeRecord",
    "SolverConfig",
    "SolverError",
    "TSModel",
    "Trajectory",
    "TscertError",
    "VarSpace",
    "Verdict",
    "VerificationReport",
    "aug_dim",
    "build_condition",
    "certificate_from_dict",
    "certificate_to_dict",
    "check_assignment",
    "check_jacobian_hull",
    "check_lyapunov_decrease",
    "check_mf_dynamics",
    "check_xi_dynamics",
    "complexity_report",
    "dump_problem",
    "estimate_da_augmented",
    "estimate_da_quadratic",
    "gamma_matrix",
    "jacobian_fd",
    "lambda_max_search",
    "load_bundle",
    "load_certificate",
    "omega_region_check",
    "phi_matrix",
    "relax_double",
    "relax_single",
    "save_bundle",
    "save_certificate",
    "simulate",
    "solve_feasibility",
    "system_matrix",
    "verify_certificate",
    "write_trajectory_csv",
    "xi_vector",
]
