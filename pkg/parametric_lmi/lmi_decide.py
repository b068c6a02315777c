"""
Exact feasibility of non-parametric LMIs.

Step 1 tests the origin. Step 2 looks for a real point with every g_i ≥ 0
on some RealDet branch; a positive count on any zero-dimensional branch
is a feasibility witness. Before concluding infeasibility the incidence
systems of the skipped ranks are counted as well.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

from sympy.polys.rings import PolyElement

from .branch_runner import run_until_positive
from .config import SolverConfig
from .exact_arith import RationalLike, evaluate_poly, to_qq
from .exceptions import GenericityFailure, NotZeroDimensional, ResourceLimit
from .groebner_engine import PolySystem, QuotientAlgebra, buchberger, quotient_basis
from .incidence_lagrange import (
    BranchKey,
    branch_fiber,
    branch_keys,
    branch_system,
    choose_randomness,
    closes_fiber,
    key_to_dict,
    skipped_rank_keys,
)
from .limits import SATURATION_OFF, SATURATION_RABINOWITSCH, ReductionBudget, RetryPolicy
from .lmi_model import ChangeOfVars, ParamLinearMatrix, psd_matrix_cond
from .metrics import BranchMetric, PerformanceTimer, RunMetrics
from .sign_classification import BranchTask, branch_sign_polys, count_nonneg_solutions

logger = logging.getLogger("parametric_lmi.lmi_decide")

STEP_ORIGIN = "origin"
STEP_BRANCH = "branch"
STEP_EXHAUSTED = "exhausted"
STEP_RANK_SWEEP = "rank_sweep"


class PointStatus(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def check_point(A: ParamLinearMatrix, x: Sequence[RationalLike], y: Sequence[RationalLike] = ()) -> PointStatus:
    """Position of x relative to the spectrahedron, read from the signs of g_i(x)."""
    if len(x) != A.n:
        raise ValueError(f"expected {A.n} coordinates, got {len(x)}")
    if len(y) != A.t:
        raise ValueError(f"expected {A.t} parameter values, got {len(y)}")
    point = {name: to_qq(v) for name, v in zip(A.x_names, x)}
    point.update({name: to_qq(v) for name, v in zip(A.y_names, y)})
    values = [evaluate_poly(g, point) for g in psd_matrix_cond(A)]
    if all(v > 0 for v in values):
        return PointStatus.INTERIOR
    if all(v >= 0 for v in values):
        return PointStatus.BOUNDARY
    return PointStatus.OUTSIDE


@dataclass
class DecisionReport:
    """Verdict, the step that reached it and the randomness it depends on."""

    feasible: bool
    step: str
    seed: Optional[int] = None
    attempts: int = 0
    branch: Optional[BranchKey] = None
    count: Optional[int] = None
    failed: List[BranchKey] = field(default_factory=list)
    metrics: RunMetrics = field(default_factory=RunMetrics)
    M: Optional[ChangeOfVars] = None
    tau: Tuple[int, ...] = ()
    caveats: List[str] = field(default_factory=list)

    @property
    def generic(self) -> bool:
        """False when some system stayed positive-dimensional, so the verdict leans on genericity."""
        return not self.caveats and not self.failed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": "feasible" if self.feasible else "infeasible",
            "step": self.step,
            "seed": self.seed,
            "attempts": self.attempts,
            "M": None if self.M is None else self.M.to_strings(),
            "tau": [str(v) for v in self.tau],
            "branch": None if self.branch is None else key_to_dict(self.branch),
            "count": self.count,
            "failed_branches": [key_to_dict(k) for k in self.failed],
            "generic": self.generic,
            "caveats": list(self.caveats),
        }


@dataclass
class _CountOutcome:
    key: BranchKey
    metric: BranchMetric
    count: int = 0
    error: Optional[Exception] = None
    caveat: Optional[str] = None


def _finite_count(system: PolySystem, gs: Sequence[PolyElement], max_pairs: int) -> Tuple[int, int]:
    """(count of real points with every g ≥ 0, δ); NotZeroDimensional otherwise."""
    gb = buchberger(system, budget=ReductionBudget(max_pairs))
    algebra = QuotientAlgebra(gb, quotient_basis(gb))
    return count_nonneg_solutions(algebra, gs, {}), algebra.dimension


def _count_fiber(task: BranchTask, gs: Sequence[PolyElement]) -> Tuple[Optional[int], Optional[int], bool]:
    """
    Count on the fiber of a branch without Lagrange multipliers.

    Returns (count, δ, complete). A zero-dimensional fiber gives a complete
    count. Otherwise its rank-exactly-r part is counted after saturation,
    which still yields witnesses but misses the lower ranks; count is None
    when both are positive-dimensional.
    """
    for mode in (SATURATION_OFF, SATURATION_RABINOWITSCH):
        if mode == SATURATION_RABINOWITSCH and task.key[0] < 1:
            break
        system = branch_fiber(task.A, task.M, task.tau, task.key, mode, task.seed)
        try:
            count, delta = _finite_count(system, gs, task.max_pairs)
        except NotZeroDimensional:
            continue
        return count, delta, mode == SATURATION_OFF
    return None, None, False


def _count_branch(task: BranchTask) -> _CountOutcome:
    r, iota, i = task.key
    metric = BranchMetric(r, tuple(iota), i, saturation=task.saturation, attempt=task.attempt)
    outcome = _CountOutcome(task.key, metric)
    with PerformanceTimer() as timer:
        try:
            gs = branch_sign_polys(task.g, task.M, task.tau, i)
            done = False
            if closes_fiber(task.key, task.A.m, task.A.n):
                # Singular fiber points have no Lagrange multipliers; count the fiber itself when finite
                count, delta, complete = _count_fiber(task, gs)
                if count is not None:
                    outcome.count = count
                    metric.fiber_counted = True
                    metric.delta = delta
                done = complete or outcome.count > 0
                metric.zero_dimensional = complete
                if not complete and not outcome.count:
                    outcome.caveat = f"fiber of branch {key_to_dict(task.key)} is positive-dimensional"
            if not done:
                branch = branch_system(task.A, task.M, task.tau, task.key, task.saturation, task.seed)
                outcome.count, metric.delta = _finite_count(branch.system.polys, gs, task.max_pairs)
                metric.zero_dimensional = True
        except (NotZeroDimensional, ResourceLimit) as e:
            outcome.error = e
            metric.error = type(e).__name__
    metric.elapsed_ms = timer.elapsed_ms
    return outcome


def _rank_sweep(A: ParamLinearMatrix, g: Sequence[PolyElement], config: SolverConfig,
                metrics: RunMetrics, attempt: int = 0) -> Tuple[Optional[_CountOutcome], List[str]]:
    """
    Count on the incidence systems of the ranks with negative fiber dimension.

    Boundary points of S whose rank drops below every enumerated rank only
    show up here.
    """
    identity = ChangeOfVars.identity(A.n)
    caveats: List[str] = []
    for key in skipped_rank_keys(A.m, A.n):
        task = BranchTask(A, tuple(g), identity, (), key, SATURATION_OFF, config.option,
                          config.max_pair_reductions, config.seed)
        metric = BranchMetric(key[0], key[1], key[2], attempt=attempt)
        with PerformanceTimer() as timer:
            count, delta, complete = _count_fiber(task, g)
        metric.elapsed_ms = timer.elapsed_ms
        metric.delta = delta
        metric.zero_dimensional = complete
        metric.fiber_counted = count is not None
        metrics.record(metric)
        if count:
            return _CountOutcome(key, metric, count), caveats
        if not complete:
            caveats.append(f"incidence system for r={key[0]} iota={list(key[1])} is positive-dimensional")
    return None, caveats


def decide_lmi(A: ParamLinearMatrix, config: Optional[SolverConfig] = None,
               metrics: Optional[RunMetrics] = None) -> DecisionReport:
    """
    Decide whether the spectrahedron of A is nonempty and report which step concluded.

    Raises:
        ValueError: when A has parameters
        GenericityFailure: no seed made every branch zero-dimensional
        ResourceLimit: a basis computation exceeded the pair budget
    """
    if A.t != 0:
        raise ValueError("decide needs a matrix without parameters; use classify")
    config = config or SolverConfig()
    metrics = metrics or RunMetrics()
    g = tuple(psd_matrix_cond(A).polys)
    origin = {x: 0 for x in A.x_names}
    if all(evaluate_poly(gi, origin) >= 0 for gi in g):
        logger.info("Origin lies in the spectrahedron")
        return DecisionReport(True, STEP_ORIGIN, metrics=metrics)

    policy = RetryPolicy(config.max_retries, config.seed)
    failed_before: Set[BranchKey] = set()
    failed: List[BranchKey] = []
    caveats: List[str] = []
    M, tau = None, ()
    for attempt in policy.attempts():
        seed = policy.seed_for(attempt)
        M, tau = choose_randomness(seed, A.n)
        tasks = []
        for key in branch_keys(A.m, A.n):
            if config.saturation != SATURATION_OFF:
                mode = SATURATION_RABINOWITSCH
            else:
                mode = policy.saturation_for(attempt, key in failed_before)
            tasks.append(BranchTask(A, g, M, tau, key, mode, config.option,
                                    config.max_pair_reductions, seed, attempt))

        outcome = run_until_positive(tasks, _count_branch, lambda o: o.error is None and o.count > 0, config.jobs)
        failed = []
        caveats = []
        for task, result in zip(tasks, outcome.results):
            if result is None:
                continue
            if isinstance(result, Exception):
                logger.error(f"Branch {task.key} crashed: {result}")
                raise result
            metrics.record(result.metric)
            if isinstance(result.error, ResourceLimit):
                raise result.error
            if result.error is not None:
                failed.append(result.key)
            if result.caveat is not None:
                caveats.append(result.caveat)

        if outcome.accepted is not None:
            winner = outcome.results[outcome.accepted]
            logger.info(f"Feasible: branch {winner.key} has {winner.count} real points with g >= 0")
            return DecisionReport(True, STEP_BRANCH, seed, attempt + 1, winner.key, winner.count, failed,
                                  metrics, M, tau, caveats)
        if not failed:
            break
        failed_before.update(failed)
        logger.warning(f"{len(failed)} branches not zero-dimensional with seed {seed}; retrying")

    seed = policy.seed_for(attempt)
    witness, sweep_caveats = _rank_sweep(A, g, config, metrics, attempt)
    if witness is not None:
        logger.info(f"Feasible: incidence system {witness.key} has {witness.count} real points with g >= 0")
        return DecisionReport(True, STEP_RANK_SWEEP, seed, attempt + 1, witness.key, witness.count, failed,
                              metrics, ChangeOfVars.identity(A.n), (), caveats)
    caveats.extend(sweep_caveats)
    if not failed:
        if caveats:
            logger.warning(f"Infeasible for seed {seed}, assuming genericity: {caveats}")
        else:
            logger.info(f"Infeasible: every branch count is zero for seed {seed}")
        return DecisionReport(False, STEP_EXHAUSTED, seed, attempt + 1, metrics=metrics, M=M, tau=tau,
                              caveats=caveats)

    partial = DecisionReport(False, STEP_EXHAUSTED, seed, policy.max_retries, failed=failed, metrics=metrics,
                             M=M, tau=tau, caveats=caveats)
    raise GenericityFailure(
        f"branches {sorted(failed_before)} stayed positive-dimensional after {policy.max_retries} seeds",
        partial=partial,
        failed_branches=sorted(failed),
    )


def solve_lmi(A: ParamLinearMatrix, config: Optional[SolverConfig] = None) -> bool:
    """True iff {x : A(x) ⪰ 0} is nonempty."""
    return decide_lmi(A, config).feasible
