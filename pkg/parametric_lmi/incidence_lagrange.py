"""
Incidence systems, Lagrange systems and the RealDet enumeration.

For every rank r with non-negative expected fiber dimension
d_r = n − binom(m − r + 1, 2), every row set ι of size m − r and every
i in 1..d_r + 1, one polynomial system is produced whose real solutions
meet each connected component of the rank-r stratum.
"""

import logging
import random
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.rings import PolyElement

from .exact_arith import (
    convert,
    format_rational,
    jacobian,
    make_ring,
    matrix_det,
    param_names,
    primal_names,
    ring_eliminated,
    ring_params,
    specialize,
    to_qq,
    var_names,
)
from .exceptions import BadIndexSet
from .groebner_engine import PolySystem
from .limits import SATURATION_OFF, SATURATION_RABINOWITSCH
from .lmi_model import ChangeOfVars, ParamLinearMatrix, change_vars, determinant

logger = logging.getLogger("parametric_lmi.incidence_lagrange")

BranchKey = Tuple[int, Tuple[int, ...], int]


def kernel_names(m: int, r: int) -> Tuple[str, ...]:
    return tuple(f"u{i}_{j}" for i in range(1, m + 1) for j in range(1, m - r + 1))


def fiber_dimension(n: int, m: int, r: int) -> int:
    return n - comb(m - r + 1, 2)


@dataclass(frozen=True)
class IncidenceSystem:
    """Entries (i ≥ j) of A·U with U_ι = Id, plus the pins U_ι − Id."""

    r: int
    iota: Tuple[int, ...]
    polys: PolySystem
    n_entries: int
    n_pins: int


@dataclass(frozen=True)
class LagrangeSystem:
    """Critical points of the first remaining coordinate on a base system."""

    base: PolySystem
    multipliers: Tuple[str, ...]
    fixed_prefix: Tuple[int, Tuple[str, ...]]
    polys: PolySystem
    saturation: str = SATURATION_OFF

    @property
    def variable_count(self) -> int:
        return len(ring_eliminated(self.polys.ring))


@dataclass(frozen=True)
class BranchSystem:
    r: int
    iota: Tuple[int, ...]
    i: int
    system: LagrangeSystem

    @property
    def key(self) -> BranchKey:
        return (self.r, self.iota, self.i)


@dataclass(frozen=True)
class RealDetOutput:
    systems: Tuple[BranchSystem, ...]
    M: ChangeOfVars
    tau: Tuple[str, ...]


def incidence_system(A: ParamLinearMatrix, r: int, iota: Sequence[int]) -> IncidenceSystem:
    """
    Incidence system of A for rank r and pinned rows ι (1-based).

    Raises:
        BadIndexSet: when |ι| ≠ m − r or ι leaves 1..m
    """
    m = A.m
    iota = tuple(sorted(iota))
    if not 0 <= r <= m - 1:
        raise BadIndexSet(f"rank {r} outside 0..{m - 1}")
    if len(iota) != m - r or len(set(iota)) != len(iota) or any(not 1 <= k <= m for k in iota):
        raise BadIndexSet(f"index set {iota} must hold {m - r} distinct rows in 1..{m}")

    cols = m - r
    us = kernel_names(m, r)
    ring = make_ring(primal_names(A.n) + us, param_names(A.t))
    gens = dict(zip(var_names(ring), ring.gens))
    entries = [[convert(A.entries[i][j], ring) for j in range(m)] for i in range(m)]

    def u_value(row: int, col: int) -> PolyElement:
        if row in iota:
            return ring.one if iota.index(row) == col - 1 else ring.zero
        return gens[f"u{row}_{col}"]

    product = []
    for i in range(1, m + 1):
        for j in range(1, cols + 1):
            if i < j:
                continue
            value = ring.zero
            for k in range(1, m + 1):
                value = value + entries[i - 1][k - 1] * u_value(k, j)
            product.append(value)
    pins = []
    for position, row in enumerate(iota):
        for col in range(1, cols + 1):
            pins.append(gens[f"u{row}_{col}"] - (ring.one if position == col - 1 else ring.zero))
    n_entries = len(product)
    product = [p for p in product if p]
    return IncidenceSystem(r, iota, PolySystem(tuple(product + pins), ring), n_entries, len(pins))


def _moved_generators(f: PolySystem, i: int, tau: Sequence, M: Optional[ChangeOfVars]):
    ring = f.ring
    eliminated = ring_eliminated(ring)
    xs = tuple(name for name in eliminated if name.startswith("x"))
    others = tuple(name for name in eliminated if not name.startswith("x"))
    if not 1 <= i <= len(xs) + 1:
        raise ValueError(f"prefix length {i - 1} exceeds the {len(xs)} x variables")
    if len(tau) < i - 1:
        raise ValueError(f"need {i - 1} prefix values, got {len(tau)}")
    M = M if M is not None else ChangeOfVars.identity(len(xs))
    if M.size != len(xs):
        raise ValueError("change of variables does not match the x variables")

    prefix = {xs[k]: to_qq(tau[k]) for k in range(i - 1)}
    moved = [specialize(change_vars(p, M, xs), prefix) for p in f.generators]
    return [p for p in moved if p], xs, xs[i - 1:] + others, prefix


def fiber_system(
    f: PolySystem,
    i: int,
    tau: Sequence,
    M: Optional[ChangeOfVars] = None,
) -> PolySystem:
    """f^M with x_1..x_{i−1} fixed to τ, over the remaining variables only."""
    moved, _, remaining, _ = _moved_generators(f, i, tau, M)
    target = make_ring(remaining, ring_params(f.ring))
    return PolySystem.of([convert(p, target) for p in moved], target)


def lagrange_system(
    f: PolySystem,
    i: int,
    tau: Sequence,
    M: Optional[ChangeOfVars] = None,
) -> LagrangeSystem:
    """
    f^M with x_1..x_{i−1} fixed to τ, together with λ^T·jac − (1, 0, ..., 0).

    The jacobian is taken with respect to the remaining x variables and all
    other eliminated variables of f.
    """
    ring = f.ring
    moved, xs, remaining, prefix = _moved_generators(f, i, tau, M)
    multipliers = tuple(f"l{k}" for k in range(1, len(moved) + 1))
    target = make_ring(remaining + multipliers, ring_params(ring))
    base = [convert(p, target) for p in moved]
    jac = jacobian(base, remaining)
    lam = [target.gens[var_names(target).index(name)] for name in multipliers]
    rows = []
    for c in range(len(remaining)):
        value = target.zero
        for k, p_row in enumerate(jac):
            value = value + lam[k] * p_row[c]
        rows.append(value - (target.one if c == 0 else target.zero))
    fixed = (i, tuple(format_rational(prefix[x]) for x in xs[:i - 1]))
    return LagrangeSystem(PolySystem.of(base, target), multipliers, fixed, PolySystem.of(base + rows, target))


def rank_minors(A: ParamLinearMatrix, r: int) -> List[PolyElement]:
    """All r×r minors of A in its model ring."""
    minors = []
    for rows in combinations(range(A.m), r):
        for cols in combinations(range(A.m), r):
            minors.append(determinant([[A.entries[i][j] for j in cols] for i in rows]))
    return minors


def saturate_rank_defect(
    system: PolySystem,
    A: ParamLinearMatrix,
    r: int,
    mode: str = SATURATION_OFF,
    rng: Optional[random.Random] = None,
) -> PolySystem:
    """
    Exclude the rank < r locus with a Rabinowitsch variable z1: append z1·h − 1.

    ``A`` must already be expressed in the coordinates of ``system`` (change of
    variables applied, prefix fixed). h is a random integer combination of the
    r×r minors of A.
    """
    if mode == SATURATION_OFF:
        return system
    if mode != SATURATION_RABINOWITSCH:
        raise ValueError(f"Unknown saturation mode: {mode}")
    if r < 1:
        raise ValueError("saturation needs r ≥ 1")
    rng = rng or random.Random(0)
    ring = system.ring
    eliminated = ring_eliminated(ring)
    target = make_ring(eliminated + ("z1",), ring_params(ring))
    h = target.zero
    coefficients = []
    for minor in rank_minors(A, r):
        c = rng.choice([k for k in range(-5, 6) if k])
        coefficients.append(c)
        h = h + convert(minor, target).mul_ground(to_qq(c))
    z = target.gens[len(eliminated)]
    logger.info(f"Rank-defect saturation r={r}: coefficients={coefficients}")
    return PolySystem.of([convert(p, target) for p in system.generators] + [z * h - target.one], target)


def choose_randomness(seed: int, n: int) -> Tuple[ChangeOfVars, Tuple[int, ...]]:
    """
    Deterministic (M, τ) for a seed.

    M has integer entries in [−5, 5] and is resampled until invertible;
    τ holds distinct integers in [−7, 7].
    """
    if n > 15:
        raise ValueError("at most 15 distinct prefix values are available")
    rng = random.Random(seed)
    while True:
        rows = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
        if n == 0 or matrix_det(rows):
            break
    tau = tuple(rng.sample(range(-7, 8), n))
    logger.info(f"Randomness for seed={seed}: M={rows}, tau={list(tau)}")
    return ChangeOfVars(tuple(tuple(r) for r in rows)), tau


def _prefix_matrix(A: ParamLinearMatrix, M: ChangeOfVars, tau: Sequence, i: int) -> ParamLinearMatrix:
    """A^M with x_1..x_{i−1} fixed, kept in the model ring."""
    moved = change_vars(A, M)
    prefix = {f"x{k + 1}": to_qq(tau[k]) for k in range(i - 1)}
    entries = tuple(tuple(specialize(e, prefix) for e in row) for row in moved.entries)
    return ParamLinearMatrix(A.m, A.n, A.t, entries)


def closes_fiber(key: BranchKey, m: int, n: int) -> bool:
    """True when the prefix fixes every free direction, so the fiber is expected finite."""
    r, _, i = key
    return i == fiber_dimension(n, m, r) + 1


def branch_keys(m: int, n: int) -> List[BranchKey]:
    """(r, ι, i) in enumeration order; ranks with negative fiber dimension are skipped."""
    keys = []
    for r in range(m):
        d = fiber_dimension(n, m, r)
        if d < 0:
            continue
        for iota in combinations(range(1, m + 1), m - r):
            for i in range(1, d + 2):
                keys.append((r, iota, i))
    return keys


def skipped_rank_keys(m: int, n: int) -> List[BranchKey]:
    """(r, ι, 1) for the ranks branch_keys leaves out (negative fiber dimension)."""
    return [(r, iota, 1)
            for r in range(m) if fiber_dimension(n, m, r) < 0
            for iota in combinations(range(1, m + 1), m - r)]


def branch_fiber(
    A: ParamLinearMatrix,
    M: ChangeOfVars,
    tau: Sequence,
    key: BranchKey,
    saturation: str = SATURATION_OFF,
    seed: int = 0,
) -> PolySystem:
    """Incidence system of a branch after x ← M·x with the prefix fixed, without multipliers."""
    r, iota, i = key
    system = fiber_system(incidence_system(A, r, iota).polys, i, tau, M)
    if saturation != SATURATION_OFF and r >= 1:
        rng = random.Random(f"{seed}:{r}:{iota}:{i}:fiber")
        system = saturate_rank_defect(system, _prefix_matrix(A, M, tau, i), r, saturation, rng)
    return system


def branch_system(
    A: ParamLinearMatrix,
    M: ChangeOfVars,
    tau: Sequence,
    key: BranchKey,
    saturation: str = SATURATION_OFF,
    seed: int = 0,
) -> BranchSystem:
    r, iota, i = key
    incidence = incidence_system(A, r, iota)
    lagrange = lagrange_system(incidence.polys, i, tau, M)
    if saturation != SATURATION_OFF and r >= 1:
        rng = random.Random(f"{seed}:{r}:{iota}:{i}")
        saturated = saturate_rank_defect(lagrange.polys, _prefix_matrix(A, M, tau, i), r, saturation, rng)
        lagrange = LagrangeSystem(lagrange.base, lagrange.multipliers, lagrange.fixed_prefix, saturated, saturation)
    return BranchSystem(r, iota, i, lagrange)


def real_det(
    A: ParamLinearMatrix,
    M: ChangeOfVars,
    tau: Sequence,
    saturation: str = SATURATION_OFF,
    per_branch: Optional[Dict[BranchKey, str]] = None,
    seed: int = 0,
) -> RealDetOutput:
    """
    Every branch system of A for the given randomness.

    Args:
        A: Parametric linear matrix
        M: Change of variables
        tau: Prefix values, distinct, at least n − 1 of them
        saturation: Default saturation mode
        per_branch: Saturation overrides keyed by (r, ι, i)
        seed: Seed for the saturation combinations
    """
    if len(set(map(str, tau))) != len(tau):
        raise ValueError("prefix values must be distinct")
    per_branch = per_branch or {}
    systems = tuple(
        branch_system(A, M, tau, key, per_branch.get(key, saturation), seed)
        for key in branch_keys(A.m, A.n)
    )
    logger.info(f"RealDet produced {len(systems)} branch systems for m={A.m}, n={A.n}")
    return RealDetOutput(systems, M, tuple(format_rational(v) for v in tau))


def expected_system_count(m: int, n: int) -> int:
    return sum(comb(m, m - r) * (fiber_dimension(n, m, r) + 1)
               for r in range(m) if fiber_dimension(n, m, r) >= 0)


def key_to_dict(key: BranchKey) -> Dict[str, object]:
    r, iota, i = key
    return {"r": r, "iota": list(iota), "i": i}
