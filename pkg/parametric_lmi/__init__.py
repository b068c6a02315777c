"""
parametric_lmi - Exact feasibility of parametric linear matrix inequalities

Given a symmetric matrix A(y, x) affine in x and polynomial in the parameters y,
this library computes a formula in y describing a dense subset of the
parameters for which some x makes A(y, x) positive semidefinite.

Features:
- Exact arithmetic over Q and Q(y) (sympy rings and fraction fields)
- Parametric Groebner bases, quotient algebras and Hermite matrices
- Real root counting, univariate cell decomposition and sign determination
- Feasibility decision for non-parametric LMIs
- Degree bounds, SOS-to-LMI conversion, JSON schemas and result stores
- Concurrent branch pipelines with metrics and structured logging
"""

# Exact arithmetic
from .exact_arith import (
    CoefficientField,
    VarGroup,
    VarKind,
    coefficient_field,
    format_poly,
    make_ring,
    monomial_order,
    parse_poly,
)

# Matrices and models
from .lmi_model import (
    ChangeOfVars,
    GCoeffs,
    ParamLinearMatrix,
    change_vars,
    psd_matrix_cond,
    sos_to_lmi,
    specialize_params,
)

# Groebner bases
from .groebner_engine import (
    ExclusionLocus,
    GroebnerBasis,
    PolySystem,
    QuotientAlgebra,
    buchberger,
    quotient_basis,
    w_infty,
)

# Branch systems
from .incidence_lagrange import (
    branch_keys,
    incidence_system,
    lagrange_system,
    real_det,
)

# Real roots and Hermite forms
from .univariate_real import cell_decomposition, isolate_roots, sample_points_1d, sturm_count
from .hermite_forms import HermiteMatrix, hermite_matrix, signature, tarski_query

# Formulas and classification
from .formula import Formula, Verdict, evaluate_formula
from .sign_classification import (
    SolveResult,
    classification,
    count_nonneg_solutions,
    parametric_solve_lmi,
    sign_matrix,
)
from .lmi_decide import DecisionReport, PointStatus, check_point, decide_lmi, solve_lmi

# Bounds
from .bounds import BoundInput, delta_bar_star, delta_star, deg_g_bound, mbb_delta, theta_cardinality

# Configuration, storage and metrics
from .config import SolverConfig, StoreSettings
from .limits import ReductionBudget, RetryPolicy
from .result_store import (
    FileResultStore,
    MemoryResultStore,
    RedisResultStore,
    ResultStore,
    create_store,
    result_key,
)
from .metrics import BranchMetric, PerformanceTimer, RunMetrics, StructuredLogger
from .schemas import InstanceFile, ResultFile

# Errors
from .exceptions import (
    BadIndexSet,
    DivisionByZero,
    GenericityFailure,
    InvalidSpecialization,
    NotRepresentable,
    NotSymmetric,
    NotZeroDimensional,
    ParametricLMIError,
    ParseError,
    ResourceLimit,
    SingularMatrix,
    UnsupportedDimension,
)

__version__ = "0.1.0"

__all__ = [
    # Exact arithmetic
    "CoefficientField",
    "VarGroup",
    "VarKind",
    "coefficient_field",
    "format_poly",
    "make_ring",
    "monomial_order",
    "parse_poly",
    # Matrices and models
    "ChangeOfVars",
    "GCoeffs",
    "ParamLinearMatrix",
    "change_vars",
    "psd_matrix_cond",
    "sos_to_lmi",
    "specialize_params",
    # Groebner bases
    "ExclusionLocus",
    "GroebnerBasis",
    "PolySystem",
    "QuotientAlgebra",
    "buchberger",
    "quotient_basis",
    "w_infty",
    # Branch systems
    "branch_keys",
    "incidence_system",
    "lagrange_system",
    "real_det",
    # Real roots and Hermite forms
    "cell_decomposition",
    "isolate_roots",
    "sample_points_1d",
    "sturm_count",
    "HermiteMatrix",
    "hermite_matrix",
    "signature",
    "tarski_query",
    # Formulas and classification
    "Formula",
    "Verdict",
    "evaluate_formula",
    "SolveResult",
    "classification",
    "count_nonneg_solutions",
    "parametric_solve_lmi",
    "sign_matrix",
    "DecisionReport",
    "PointStatus",
    "check_point",
    "decide_lmi",
    "solve_lmi",
    # Bounds
    "BoundInput",
    "delta_bar_star",
    "delta_star",
    "deg_g_bound",
    "mbb_delta",
    "theta_cardinality",
    # Configuration, storage and metrics
    "SolverConfig",
    "StoreSettings",
    "ReductionBudget",
    "RetryPolicy",
    "ResultStore",
    "MemoryResultStore",
    "FileResultStore",
    "RedisResultStore",
    "create_store",
    "result_key",
    "BranchMetric",
    "PerformanceTimer",
    "RunMetrics",
    "StructuredLogger",
    "InstanceFile",
    "ResultFile",
    # Errors
    "ParametricLMIError",
    "BadIndexSet",
    "DivisionByZero",
    "GenericityFailure",
    "InvalidSpecialization",
    "NotRepresentable",
    "NotSymmetric",
    "NotZeroDimensional",
    "ParseError",
    "ResourceLimit",
    "SingularMatrix",
    "UnsupportedDimension",
]
