"""Bi-Hamiltonian pencil on pairs of matrices and its reduction to the rational Calogero-Moser system."""
from .matpair import (
    DEFAULT_TOL,
    CovectorPair,
    DomainError,
    MembershipReport,
    PhasePoint,
    TangentPair,
    TraceExpr,
    conjugate,
    eval_trace_expr,
    grad_trace_expr,
    in_open_set_M,
    pairing,
    random_phase_point,
)
from .pencil import (
    P0,
    P1,
    bracket_numeric,
    hierarchy_field,
    jacobi_defect,
    necklace_bracket,
    nijenhuis_torsion_numeric,
    recursion_apply,
    recursion_transpose_apply,
)
from .reduction import SectionPoint, canonical_form, projected_flow, tangent_decompose
from .cmspace import (
    CMState,
    InvariantVector,
    QPrimeData,
    bracket_IJ,
    bracket_table,
    cm_flow,
    embed_Q,
    embed_Q_prime,
    invariants_map,
    lax_matrix,
    n2_bracket1_xy,
    normalize_to_Q,
    pi_inverse,
    rank1_check,
    transported_xy_brackets,
    xi_closed_form,
)
from .integrate import DriftReport, IntegrationConfig, integrate_flow

__version__ = "0.1.0"
