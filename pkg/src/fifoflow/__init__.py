"""Traffic-network simulation and verification with partial-FIFO diverges.

Builds directed link networks with supply/demand junction flow rules,
integrates the density dynamics, constructs the mixed-monotone decomposition
and its doubled embedding system, audits the structural flow conditions
numerically, and certifies global convergence to an equilibrium from the
extreme embedding trajectory.
"""

from .embedding import (
    EmbeddingState,
    box_upper,
    decomposition,
    decomposition_signature,
    embedding_field,
    order_leq,
    surrogate_state,
)
from .junctions import (
    ConvexCombo,
    DivergeRuleViolation,
    FlowBreakdown,
    FullFifo,
    JunctionModel,
    MultiSetFifo,
    NonFifo,
    PartialFifoLanes,
    RestrictionSet,
    alpha_fifo,
    alpha_nonfifo,
    alpha_phi,
    branch_signature,
    exogenous_inflow,
    exogenous_outflow,
    link_to_link_flows,
    vector_field,
)
from .links import (
    Affine,
    Exponential,
    LinkParams,
    PiecewiseLinear,
    curve_violations,
    demand,
    supply,
)
from .numerics import FdSpec, NonFiniteState, Trajectory, integrate, jacobian_fd
from .scenario import (
    ParseError,
    RunDefaults,
    Scenario,
    ScenarioError,
    ValidationError,
    build_scenario,
    load_scenario,
)
from .topology import (
    DuplicateLinkId,
    Network,
    SelfLoop,
    TopologyError,
    Violation,
    build_network,
    validate_structure,
)
from .verification import (
    AuditReport,
    ConditionResult,
    ConvergenceCertificate,
    SignSummary,
    SignSurvey,
    certify_convergence,
    check_assumptions,
    check_decomposition,
    jacobian_sign_survey,
)

__version__ = "0.1.0"

__all__ = [
    "Affine",
    "AuditReport",
    "ConditionResult",
    "ConvergenceCertificate",
    "ConvexCombo",
    "DivergeRuleViolation",
    "DuplicateLinkId",
    "EmbeddingState",
    "Exponential",
    "FdSpec",
    "FlowBreakdown",
    "FullFifo",
    "JunctionModel",
    "LinkParams",
    "MultiSetFifo",
    "Network",
    "NonFifo",
    "NonFiniteState",
    "ParseError",
    "PartialFifoLanes",
    "PiecewiseLinear",
    "RestrictionSet",
    "RunDefaults",
    "Scenario",
    "ScenarioError",
    "SelfLoop",
    "SignSummary",
    "SignSurvey",
    "TopologyError",
    "Trajectory",
    "ValidationError",
    "Violation",
    "alpha_fifo",
    "alpha_nonfifo",
    "alpha_phi",
    "box_upper",
    "branch_signature",
    "build_network",
    "build_scenario",
    "certify_convergence",
    "check_assumptions",
    "check_decomposition",
    "curve_violations",
    "decomposition",
    "decomposition_signature",
    "demand",
    "embedding_field",
    "exogenous_inflow",
    "exogenous_outflow",
    "integrate",
    "jacobian_fd",
    "jacobian_sign_survey",
    "link_to_link_flows",
    "load_scenario",
    "order_leq",
    "supply",
    "surrogate_state",
    "validate_structure",
    "vector_field",
]
