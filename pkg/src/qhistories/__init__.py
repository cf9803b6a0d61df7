"""Quantum contexts, consistent histories and generalized contexts in finite dimension."""

from .consistent import (
    ConsistencyReport,
    DecoherenceMatrix,
    HistoryFamily,
    at,
    class_operator,
    decoherence_functional,
    event_probability,
    family_conditional,
    history_probability,
    is_consistent,
)
from .contexts import (
    Context,
    Property,
    State,
    born_probability,
    clamp_probability,
    complement,
    conditional_probability,
    conditioned_state,
    is_contrary,
    join,
    leq,
    meet,
    property_projector,
    validate_context,
)
from .errors import (
    ContextError,
    DimensionMismatchError,
    InconsistentFamilyError,
    NonCommutingError,
    NumericalError,
    QHistoriesError,
    ScenarioError,
    UnregisteredTimePairError,
    ValidationError,
    ZeroConditioningError,
)
from .histories import (
    GeneralizedContext,
    GeneralizedProperty,
    IncompatibleVerdict,
    NonCommutingPair,
    TimedContext,
    build_generalized_context,
    generalized_conditional,
    generalized_probability,
    heisenberg_translate,
)
from .inference import (
    Conclusion,
    RetrodictionReport,
    analyze_retrodiction,
    scan_contrary_pairs,
    three_box_report,
    three_box_scenario,
)
from .linalg import (
    TOL,
    Projector,
    Propagator,
    commutator_norm,
    commutes,
    identity,
    is_projector,
    projector_from_vectors,
    propagate,
    ray,
    subspace_leq,
    zero,
)
from .scenario_io import (
    Scenario,
    load_fixture,
    load_scenario,
    parse_scenario,
    serialize_report,
    serialize_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "analyze_retrodiction",
    "at",
    "born_probability",
    "build_generalized_context",
    "clamp_probability",
    "class_operator",
    "commutator_norm",
    "commutes",
    "complement",
    "Conclusion",
    "conditional_probability",
    "conditioned_state",
    "ConsistencyReport",
    "Context",
    "ContextError",
    "decoherence_functional",
    "DecoherenceMatrix",
    "DimensionMismatchError",
    "event_probability",
    "family_conditional",
    "generalized_conditional",
    "generalized_probability",
    "GeneralizedContext",
    "GeneralizedProperty",
    "heisenberg_translate",
    "history_probability",
    "HistoryFamily",
    "identity",
    "IncompatibleVerdict",
    "InconsistentFamilyError",
    "is_consistent",
    "is_contrary",
    "is_projector",
    "join",
    "leq",
    "load_fixture",
    "load_scenario",
    "meet",
    "NonCommutingError",
    "NonCommutingPair",
    "NumericalError",
    "parse_scenario",
    "Projector",
    "projector_from_vectors",
    "propagate",
    "Propagator",
    "Property",
    "property_projector",
    "QHistoriesError",
    "ray",
    "RetrodictionReport",
    "scan_contrary_pairs",
    "Scenario",
    "ScenarioError",
    "serialize_report",
    "serialize_scenario",
    "State",
    "subspace_leq",
    "three_box_report",
    "three_box_scenario",
    "TimedContext",
    "TOL",
    "UnregisteredTimePairError",
    "validate_context",
    "ValidationError",
    "zero",
    "ZeroConditioningError",
]
