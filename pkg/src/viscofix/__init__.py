"""Fixed points of nonexpansive maps by viscosity implicit iterations.

The package bundles a small Hilbert-space toolkit (weighted inner
products, convex projections), map wrappers with property spot-checks,
admissible parameter schedules, the implicit iteration engine, and a
config-driven command line.
"""

from .errors import (
    ConfigurationError,
    InnerSolveError,
    InputError,
    NotConvergedError,
    ViscofixError,
)
from .maps import (
    ContractionModulus,
    FredholmProblem,
    GeneralizedContraction,
    MonotoneOperatorSpec,
    NonexpansiveMap,
    average_pseudocontraction,
    check_contraction,
    check_inverse_strongly_monotone,
    check_nonexpansive,
    forward_projected,
    fredholm_grid,
    fredholm_operator,
    linear_modulus,
    rational_modulus,
)
from .schedules import (
    AnalyticFacts,
    ConditionReport,
    Schedule,
    ScheduleParams,
    Status,
    compare_t16,
    custom_rational,
    eq75,
    halpern_mix,
    schedule_eval,
    validate_assumption12,
)
from .solver import (
    IDENTITY_SCHEMES,
    IterationState,
    SchemeKind,
    SolveReport,
    SolverConfig,
    Termination,
    TraceRow,
    compare_limits,
    inner_implicit_solve,
    read_trace_csv,
    run,
    step,
    vi_residual,
    write_trace_csv,
)
from .space import (
    AffineSpan,
    Ball,
    Box,
    Halfspace,
    SpaceDescriptor,
    WholeSpace,
    euclidean,
    inner,
    norm,
    project,
    trapezoid,
    trapezoid_nodes,
)

__version__ = "0.1.0"

__all__ = [
    "AffineSpan",
    "AnalyticFacts",
    "Ball",
    "Box",
    "ConditionReport",
    "ConfigurationError",
    "ContractionModulus",
    "FredholmProblem",
    "GeneralizedContraction",
    "Halfspace",
    "IDENTITY_SCHEMES",
    "InnerSolveError",
    "InputError",
    "IterationState",
    "MonotoneOperatorSpec",
    "NonexpansiveMap",
    "NotConvergedError",
    "Schedule",
    "ScheduleParams",
    "SchemeKind",
    "SolveReport",
    "SolverConfig",
    "SpaceDescriptor",
    "Status",
    "Termination",
    "TraceRow",
    "ViscofixError",
    "WholeSpace",
    "average_pseudocontraction",
    "check_contraction",
    "check_inverse_strongly_monotone",
    "check_nonexpansive",
    "compare_limits",
    "compare_t16",
    "custom_rational",
    "eq75",
    "euclidean",
    "forward_projected",
    "fredholm_grid",
    "fredholm_operator",
    "halpern_mix",
    "inner",
    "inner_implicit_solve",
    "linear_modulus",
    "norm",
    "project",
    "rational_modulus",
    "read_trace_csv",
    "run",
    "schedule_eval",
    "step",
    "trapezoid",
    "trapezoid_nodes",
    "validate_assumption12",
    "vi_residual",
    "write_trace_csv",
]
