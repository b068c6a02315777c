"""
Sign determination, classification and parametric LMI solving.

Real solutions of a zero-dimensional system with g_1..g_s ≥ 0 are counted
as Σ_α a_α·Sign(H_α) over α ∈ {0,1,2}^s, where H_α is the Hermite matrix of
g^α and a is read off the inverse of the sign-condition matrix.

parametric_solve_lmi runs one pipeline per RealDet branch (Groebner basis,
Hermite matrices, classification) and returns the disjunction of the
origin clause with every branch entry that asserts a positive count.
"""

import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import islice, product
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from sympy.polys.rings import PolyElement

from .branch_runner import run_branches
from .config import OPTION_ASSERTION, OPTION_CELLS, OPTION_MINORS, SolverConfig
from .exact_arith import (
    CoefficientField,
    coefficient_field,
    convert,
    format_rational,
    matrix_det,
    matrix_inverse,
    specialize,
    to_qq,
)
from .exceptions import GenericityFailure, NotZeroDimensional, ResourceLimit, UnsupportedDimension
from .formula import (
    FALSE,
    TRUE,
    CountAssertion,
    Formula,
    Node,
    PolyAtom,
    SignatureProfile,
    conjunction,
    disjunction,
    sign_atom,
)
from .groebner_engine import ExclusionLocus, PolySystem, QuotientAlgebra, buchberger, quotient_basis, w_infty
from .hermite_forms import (
    Alpha,
    HermiteMatrix,
    alphas,
    congruence,
    field_rank,
    hermite_matrices,
    leading_minors,
    signature,
    specialize_hermite,
)
from .incidence_lagrange import BranchKey, branch_keys, branch_system, choose_randomness
from .limits import SATURATION_OFF, SATURATION_RABINOWITSCH, ReductionBudget, RetryPolicy
from .lmi_model import ChangeOfVars, ParamLinearMatrix, change_vars, psd_matrix_cond
from .metrics import BranchMetric, PerformanceTimer, RunMetrics, StructuredLogger
from .univariate_real import sample_points_1d, sign_variations

logger = logging.getLogger("parametric_lmi.sign_classification")

SIGN_VALUES = (0, 1, -1)


# Sign determination

@dataclass(frozen=True)
class SignConditionMatrix:
    """Mat[α][σ] = Π σ_i^α_i (0^0 = 1); rows {0,1,2}^s, columns {0,1,−1}^s."""

    s: int
    rows: Tuple[Alpha, ...]
    columns: Tuple[Tuple[int, ...], ...]
    matrix: Tuple[Tuple[int, ...], ...]


@lru_cache(maxsize=None)
def sign_matrix(s: int) -> SignConditionMatrix:
    if s < 0:
        raise ValueError("s must be non-negative")
    rows = tuple(alphas(s))
    columns = tuple(product(SIGN_VALUES, repeat=s))
    matrix = []
    for alpha in rows:
        row = []
        for sigma in columns:
            value = 1
            for a, v in zip(alpha, sigma):
                value *= v ** a
            row.append(value)
        matrix.append(tuple(row))
    return SignConditionMatrix(s, rows, columns, tuple(matrix))


@dataclass(frozen=True)
class CountCoefficients:
    """a_α with Σ_α a_α·TaQ(g^α) = #{real roots with every g_i ≥ 0}."""

    s: int
    alphas: Tuple[Alpha, ...]
    values: Tuple[Any, ...]

    def __getitem__(self, alpha: Alpha):
        return self.values[self.alphas.index(tuple(alpha))]

    def to_strings(self) -> List[str]:
        return [format_rational(v) for v in self.values]


@lru_cache(maxsize=None)
def count_coefficients(s: int) -> CountCoefficients:
    """Sums over σ ∈ {0,1}^s of the rows of Mat⁻¹."""
    mat = sign_matrix(s)
    inverse = matrix_inverse(mat.matrix)
    nonneg = [k for k, sigma in enumerate(mat.columns) if all(v >= 0 for v in sigma)]
    values = tuple(sum((inverse[k][j] for k in nonneg), to_qq(0)) for j in range(len(mat.rows)))
    return CountCoefficients(s, mat.rows, values)


def relevant_sign_polys(gs: Sequence[PolyElement]) -> Tuple[List[PolyElement], bool]:
    """
    Drop constant sign polynomials.

    Returns:
        (kept polynomials, True when some constant is negative)
    """
    kept = []
    infeasible = False
    for g in gs:
        if g.is_ground:
            if g and g.LC < 0:
                infeasible = True
            continue
        kept.append(g)
    return kept, infeasible


def count_from_matrices(matrices: Sequence[HermiteMatrix], coefficients: Sequence[Any],
                        y: Mapping[str, Any]) -> int:
    total = to_qq(0)
    for H, a in zip(matrices, coefficients):
        total = total + a * signature(specialize_hermite(H, y)).signature
    return int(total)


def count_nonneg_solutions(
    algebra: QuotientAlgebra,
    gs: Sequence[PolyElement],
    y: Optional[Mapping[str, Any]] = None,
):
    """
    Real solutions with every g_i ≥ 0.

    Returns an integer at a parameter point ``y`` (``{}`` when t = 0), or the
    parametric assertion "count > 0" when ``y`` is None.

    Raises:
        InvalidSpecialization: y lies on the validity locus
    """
    kept, infeasible = relevant_sign_polys([convert(g, algebra.ring) for g in gs])
    if infeasible or algebra.dimension == 0:
        return 0 if y is not None else FALSE
    matrices = hermite_matrices(algebra, kept)
    coefficients = count_coefficients(len(kept))
    ordered = [matrices[a] for a in coefficients.alphas]
    if y is None:
        return CountAssertion(ordered, coefficients.values, ">", 0)
    return count_from_matrices(ordered, coefficients.values, y)


# Classification

@dataclass(frozen=True)
class ClassificationEntry:
    """Φ_i with a witness; ``count`` is None when only "count > 0" is asserted."""

    formula: Node
    witness: Optional[Tuple[str, ...]] = None
    count: Optional[int] = None

    @property
    def contributes(self) -> bool:
        if isinstance(self.formula, CountAssertion):
            return True
        return self.count is not None and self.count > 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "formula": self.formula.to_dict(),
            "witness": list(self.witness) if self.witness is not None else None,
            "count": self.count,
        }


@dataclass
class ClassificationResult:
    entries: List[ClassificationEntry]
    exceptions: ExclusionLocus
    delta: int
    option: str = OPTION_ASSERTION


def _candidate_points(params: Sequence[str], limit: int = 200) -> Iterator[Dict[str, Any]]:
    values = [0]
    for k in range(1, 6):
        values.extend([k, -k])
    for combo in islice(product(values, repeat=len(params)), limit):
        yield {name: to_qq(v) for name, v in zip(params, combo)}


def _witness_tuple(point: Mapping[str, Any], params: Sequence[str]) -> Tuple[str, ...]:
    return tuple(format_rational(point[p]) for p in params)


def require_single_parameter(option: str, t: int) -> None:
    if t != 1:
        raise UnsupportedDimension(f"option {option!r} needs exactly one parameter, got {t}")


def _check_option(option: str, t: int) -> str:
    if option == OPTION_ASSERTION:
        return option
    try:
        require_single_parameter(option, t)
    except UnsupportedDimension as e:
        logger.warning(f"{e}; falling back to the signature assertion")
        return OPTION_ASSERTION
    return option


def _assertion_entries(matrices, coefficients, exceptions: ExclusionLocus,
                       params: Tuple[str, ...]) -> List[ClassificationEntry]:
    assertion = CountAssertion(matrices, coefficients.values, ">", 0)
    for point in _candidate_points(params):
        if exceptions.contains(point):
            continue
        count = count_from_matrices(matrices, coefficients.values, point)
        if count > 0:
            return [ClassificationEntry(assertion, _witness_tuple(point, params), count)]
    return [ClassificationEntry(assertion)]


def _random_invertible(rng: random.Random, n: int) -> List[List[int]]:
    while True:
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        if matrix_det(rows):
            return rows


def jacobi_minors(H: HermiteMatrix, rng: random.Random, tries: int = 100) -> Tuple[int, List[Any]]:
    """
    Generic rank ρ of H and leading minors D_1..D_ρ of some P^T·H·P, all nonzero.

    Raises:
        GenericityFailure: no congruence found within ``tries`` random matrices
    """
    field = H.field
    rho = field_rank(H)
    if rho == 0:
        return 0, []
    n = H.size
    P = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(tries + 1):
        minors = leading_minors(congruence(H.entries, P, field), field, rho)
        if all(minors):
            return rho, minors
        P = _random_invertible(rng, n)
    raise GenericityFailure(f"no congruence with nonvanishing leading minors for alpha={H.alpha}")


def _minor_polys(minors: Sequence[Any], field: CoefficientField) -> List[PolyElement]:
    polys = []
    for D in minors:
        num, den = field.numer_denom(D)
        polys.extend([num, den])
    return [p for p in polys if not p.is_ground]


def _sign_polys(minors: Sequence[Any], field: CoefficientField) -> List[PolyElement]:
    """sign(D) = sign(num·den)."""
    polys = []
    for D in minors:
        num, den = field.numer_denom(D)
        polys.append(num * den)
    return polys


def _jacobi_signature(rho: int, minors: Sequence[Any], field: CoefficientField, point) -> int:
    signs = [1]
    for D in minors:
        value = field.evaluate(D, point)
        signs.append((value > 0) - (value < 0))
    return rho - 2 * sign_variations(signs)


def _minors_entries(matrices, coefficients, exceptions: ExclusionLocus, params, rng):
    field = coefficient_field(params)
    data = [jacobi_minors(H, rng) for H in matrices]
    extra = [p for _, minors in data for p in _minor_polys(minors, field)]
    exceptions = exceptions.union(ExclusionLocus.of(extra, params))
    sign_polys = [_sign_polys(minors, field) for _, minors in data]
    entries: Dict[Tuple[int, ...], ClassificationEntry] = {}
    for value in sample_points_1d(list(exceptions.polynomials), include_roots=False):
        point = {params[0]: value}
        if exceptions.contains(point):
            continue
        count = to_qq(0)
        vector = []
        atoms = []
        for (rho, minors), polys, a in zip(data, sign_polys, coefficients.values):
            count = count + a * _jacobi_signature(rho, minors, field, point)
            for D, p in zip(minors, polys):
                v = field.evaluate(D, point)
                sign = (v > 0) - (v < 0)
                vector.append(sign)
                if not p.is_ground:
                    atoms.append(sign_atom(p, sign))
        key = tuple(vector)
        if key not in entries:
            entries[key] = ClassificationEntry(conjunction(atoms), _witness_tuple(point, params), int(count))
    return list(entries.values()), exceptions


def _cells_entries(matrices, coefficients, exceptions: ExclusionLocus, params, rng):
    field = coefficient_field(params)
    top = []
    for H in matrices:
        _, minors = jacobi_minors(H, rng)
        if minors:
            top.append(minors[-1])
    exceptions = exceptions.union(ExclusionLocus.of(_minor_polys(top, field), params))
    entries: Dict[Tuple[int, ...], ClassificationEntry] = {}
    for value in sample_points_1d(list(exceptions.polynomials), include_roots=False):
        point = {params[0]: value}
        if exceptions.contains(point):
            continue
        profile = tuple(signature(specialize_hermite(H, point)).signature for H in matrices)
        if profile in entries:
            continue
        count = sum((a * s for a, s in zip(coefficients.values, profile)), to_qq(0))
        entries[profile] = ClassificationEntry(
            SignatureProfile(matrices, profile), _witness_tuple(point, params), int(count)
        )
    return list(entries.values()), exceptions


def classification(
    system: PolySystem,
    gs: Sequence[PolyElement],
    option: str = OPTION_ASSERTION,
    budget: Optional[ReductionBudget] = None,
    rng: Optional[random.Random] = None,
) -> ClassificationResult:
    """
    Entries (Φ_i, witness, r_i) describing the real solutions of ``system``
    with every g ≥ 0 as the parameters vary.

    Raises:
        NotZeroDimensional: the system has positive dimension over Q(y)
        ResourceLimit: the pair budget ran out
    """
    gb = buchberger(system, budget=budget)
    algebra = QuotientAlgebra(gb, quotient_basis(gb))
    params = gb.params
    exceptions = w_infty(gb)
    option = _check_option(option, len(params))
    kept, infeasible = relevant_sign_polys([convert(g, gb.ring) for g in gs])
    if infeasible or algebra.dimension == 0:
        return ClassificationResult([ClassificationEntry(TRUE, count=0)], exceptions, algebra.dimension, option)

    built = hermite_matrices(algebra, kept)
    coefficients = count_coefficients(len(kept))
    matrices = [built[a] for a in coefficients.alphas]
    exceptions = exceptions.union(*(H.locus for H in matrices))
    rng = rng or random.Random(0)
    if option == OPTION_MINORS:
        entries, exceptions = _minors_entries(matrices, coefficients, exceptions, params, rng)
    elif option == OPTION_CELLS:
        entries, exceptions = _cells_entries(matrices, coefficients, exceptions, params, rng)
    else:
        entries = _assertion_entries(matrices, coefficients, exceptions, params)
    logger.debug(f"Classification: delta={algebra.dimension}, s={len(kept)}, {len(entries)} entries")
    return ClassificationResult(entries, exceptions, algebra.dimension, option)


# Parametric solving

@dataclass(frozen=True)
class BranchTask:
    A: ParamLinearMatrix
    g: Tuple[PolyElement, ...]
    M: ChangeOfVars
    tau: Tuple[int, ...]
    key: BranchKey
    saturation: str
    option: str
    max_pairs: int
    seed: int
    attempt: int = 0


@dataclass
class BranchOutcome:
    key: BranchKey
    metric: BranchMetric
    result: Optional[ClassificationResult] = None
    error: Optional[Exception] = None


def branch_sign_polys(g: Sequence[PolyElement], M: ChangeOfVars, tau: Sequence, i: int) -> List[PolyElement]:
    """g^M with x_1..x_{i−1} fixed to τ."""
    prefix = {f"x{k + 1}": to_qq(tau[k]) for k in range(i - 1)}
    return [specialize(change_vars(gi, M), prefix) for gi in g]


def run_branch(task: BranchTask) -> BranchOutcome:
    """One share-nothing pipeline: branch system, Groebner basis, classification."""
    r, iota, i = task.key
    metric = BranchMetric(r, tuple(iota), i, saturation=task.saturation, attempt=task.attempt)
    outcome = BranchOutcome(task.key, metric)
    with PerformanceTimer() as timer:
        try:
            branch = branch_system(task.A, task.M, task.tau, task.key, task.saturation, task.seed)
            gs = branch_sign_polys(task.g, task.M, task.tau, i)
            rng = random.Random(f"{task.seed}:{task.key}")
            result = classification(branch.system.polys, gs, task.option, ReductionBudget(task.max_pairs), rng)
            outcome.result = result
            metric.delta = result.delta
            metric.zero_dimensional = True
            metric.entries = len(result.entries)
        except (NotZeroDimensional, ResourceLimit) as e:
            outcome.error = e
            metric.error = type(e).__name__
    metric.elapsed_ms = timer.elapsed_ms
    return outcome


@dataclass
class SolveResult:
    """Formula plus everything needed to reproduce and audit it."""

    formula: Formula
    sound: bool
    seed: int
    attempts: int
    M: ChangeOfVars
    tau: Tuple[int, ...]
    option: str
    entries: Dict[BranchKey, List[ClassificationEntry]] = field(default_factory=dict)
    failed: List[BranchKey] = field(default_factory=list)
    metrics: RunMetrics = field(default_factory=RunMetrics)


def origin_clause(A: ParamLinearMatrix, g: Sequence[PolyElement]) -> Node:
    """All g_i(y, 0) > 0."""
    ring = coefficient_field(A.y_names).ring
    origin = {x: 0 for x in A.x_names}
    atoms = []
    for gi in g:
        value = convert(specialize(gi, origin), ring)
        if value.is_ground:
            atoms.append(TRUE if value and value.LC > 0 else FALSE)
        else:
            atoms.append(PolyAtom(value, ">"))
    return conjunction(atoms)


def _assemble(A: ParamLinearMatrix, initial: Node, outcomes: Sequence[BranchOutcome]) -> Tuple[Formula, Dict]:
    params = A.y_names
    clauses = [initial]
    exceptions = ExclusionLocus((), params)
    entries = {}
    for outcome in outcomes:
        if outcome.result is None:
            continue
        entries[outcome.key] = outcome.result.entries
        exceptions = exceptions.union(outcome.result.exceptions)
        clauses.extend(e.formula for e in outcome.result.entries if e.contributes)
    return Formula(disjunction(clauses), exceptions, params), entries


def parametric_solve_lmi(
    A: ParamLinearMatrix,
    config: Optional[SolverConfig] = None,
    metrics: Optional[RunMetrics] = None,
) -> SolveResult:
    """
    Formula Φ in y whose solutions are feasible parameters.

    Φ = (every g_i(y, 0) > 0) ∨ the positive entries of every branch.

    Raises:
        ValueError: when A has no parameters
        GenericityFailure: some branch stays positive-dimensional for every seed
        ResourceLimit: a basis computation exceeded the pair budget
    """
    if A.t < 1:
        raise ValueError("parametric classification needs at least one parameter; use decide")
    config = config or SolverConfig()
    metrics = metrics or RunMetrics()
    structured = StructuredLogger("parametric_lmi.run", include_timestamp=False)
    metrics.add_callback(structured.branch)
    g = tuple(psd_matrix_cond(A).polys)
    initial = origin_clause(A, g)
    policy = RetryPolicy(config.max_retries, config.seed)
    failed_before: Set[BranchKey] = set()
    partial: Optional[SolveResult] = None

    for attempt in policy.attempts():
        seed = policy.seed_for(attempt)
        M, tau = choose_randomness(seed, A.n)
        structured.set_context(seed=seed, option=config.option, attempt=attempt)
        structured.info("randomness", M=M.to_strings(), tau=list(tau))
        tasks = []
        for key in branch_keys(A.m, A.n):
            if config.saturation != SATURATION_OFF:
                mode = SATURATION_RABINOWITSCH
            else:
                mode = policy.saturation_for(attempt, key in failed_before)
                if mode != SATURATION_OFF:
                    logger.warning(f"Saturation enabled for branch {key} on attempt {attempt}")
            tasks.append(BranchTask(A, g, M, tau, key, mode, config.option,
                                    config.max_pair_reductions, seed, attempt))

        with PerformanceTimer() as timer:
            outcomes = run_branches(tasks, run_branch, config.jobs)
        metrics.add_phase(f"attempt_{attempt}_ms", timer.elapsed_ms)

        failed = []
        for task, outcome in zip(tasks, outcomes):
            if isinstance(outcome, Exception):
                logger.error(f"Branch {task.key} crashed: {outcome}")
                raise outcome
            metrics.record(outcome.metric)
            if isinstance(outcome.error, ResourceLimit):
                logger.error(f"Branch {outcome.key} exceeded the reduction budget")
                raise outcome.error
            if outcome.error is not None:
                failed.append(outcome.key)

        formula, entries = _assemble(A, initial, outcomes)
        result = SolveResult(formula, not failed, seed, attempt + 1, M, tau, config.option,
                             entries, failed, metrics)
        if not failed:
            logger.info(f"Classification finished on attempt {attempt} with seed {seed}")
            structured.info("summary", **metrics.get_global_metrics())
            return result
        partial = result
        failed_before.update(failed)
        logger.warning(f"{len(failed)} branches not zero-dimensional with seed {seed}")

    raise GenericityFailure(
        f"branches {sorted(failed_before)} stayed positive-dimensional after {policy.max_retries} seeds",
        partial=partial,
        failed_branches=sorted(partial.failed) if partial else [],
    )
