"""
Groebner bases under block elimination orders.

Bases are computed in Q[y][eliminated] with sympy polynomial rings; the
coefficient field Q(y) is only used for normal forms.

Algorithm: Buchberger with the sugar selection strategy and the
Gebauer-Moeller criteria (Becker & Weispfenning, p. 230).
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.monomials import monomial_div, monomial_lcm, monomial_mul
from sympy.polys.orderings import MonomialOrder, grevlex
from sympy.polys.rings import PolyElement, PolyRing

from .exact_arith import (
    Monomial,
    coefficient_field,
    convert,
    eliminated_count,
    evaluate_poly,
    format_poly,
    make_ring,
    normalize_poly,
    parse_poly,
    ring_eliminated,
    ring_params,
    specialize,
    squarefree_normalized,
    with_order,
)
from .exceptions import NotZeroDimensional
from .limits import ReductionBudget

logger = logging.getLogger("parametric_lmi.groebner")


@dataclass(frozen=True)
class PolySystem:
    """Generators of an ideal in one ring; zero generators are dropped."""

    generators: Tuple[PolyElement, ...]
    ring: PolyRing

    @classmethod
    def of(cls, polys: Iterable[PolyElement], ring: Optional[PolyRing] = None) -> "PolySystem":
        polys = list(polys)
        if ring is None:
            if not polys:
                raise ValueError("cannot infer the ring of an empty system")
            ring = polys[0].ring
        return cls(tuple(convert(p, ring) for p in polys if p), ring)

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def specialized(self, point: Mapping[str, Any]) -> "PolySystem":
        """Substitute every parameter; the result lives in a parameter-free ring."""
        params = ring_params(self.ring)
        missing = [y for y in params if y not in point]
        if missing:
            raise ValueError(f"no value for parameters {missing}")
        target = make_ring(ring_eliminated(self.ring), ())
        assignment = {y: point[y] for y in params}
        return PolySystem.of([convert(specialize(p, assignment), target) for p in self.generators], target)


@dataclass(frozen=True)
class GroebnerBasis:
    """Reduced basis; leading x-coefficients are primitive integer polynomials in y."""

    elements: Tuple[PolyElement, ...]
    ring: PolyRing
    reduced: bool = True
    pairs_reduced: int = 0

    @property
    def order(self) -> MonomialOrder:
        return self.ring.order

    @property
    def n_eliminated(self) -> int:
        return eliminated_count(self.ring)

    @property
    def eliminated(self) -> Tuple[str, ...]:
        return ring_eliminated(self.ring)

    @property
    def params(self) -> Tuple[str, ...]:
        return ring_params(self.ring)

    def leading_x_monomials(self) -> List[Monomial]:
        return [lm_x(g) for g in self.elements]

    def is_unit(self) -> bool:
        """True when the ideal over Q(y) is the whole ring."""
        return any(not any(m) for m in self.leading_x_monomials())


@dataclass(frozen=True)
class QuotientBasis:
    """Staircase monomials in the eliminated variables, increasing in grevlex."""

    monomials: Tuple[Monomial, ...]
    names: Tuple[str, ...]

    @property
    def dimension(self) -> int:
        return len(self.monomials)

    def index(self, monomial: Monomial) -> Optional[int]:
        try:
            return self.monomials.index(monomial)
        except ValueError:
            return None


@dataclass(frozen=True)
class ExclusionLocus:
    """Squarefree, non-constant polynomials in y; valid parameters avoid all their zeros."""

    polynomials: Tuple[PolyElement, ...] = ()
    params: Tuple[str, ...] = ()

    @classmethod
    def of(cls, polys: Iterable[PolyElement], params: Sequence[str]) -> "ExclusionLocus":
        params = tuple(params)
        if not params:
            return cls((), ())
        ring = coefficient_field(params).ring
        unique: Dict[str, PolyElement] = {}
        for p in polys:
            if not p:
                continue
            q = squarefree_normalized(convert(p, ring))
            if q.is_ground:
                continue
            unique.setdefault(format_poly(q), q)
        return cls(tuple(unique[k] for k in sorted(unique)), params)

    @classmethod
    def from_strings(cls, texts: Sequence[str], params: Sequence[str]) -> "ExclusionLocus":
        params = tuple(params)
        if not params:
            return cls((), ())
        ring = coefficient_field(params).ring
        return cls.of([parse_poly(t, ring) for t in texts], params)

    def union(self, *others: "ExclusionLocus") -> "ExclusionLocus":
        params = self.params
        polys = list(self.polynomials)
        for other in others:
            params = params or other.params
            polys.extend(other.polynomials)
        return ExclusionLocus.of(polys, params)

    def vanishing_at(self, point: Mapping[str, Any]) -> Optional[str]:
        """First locus polynomial that vanishes at ``point``, as text."""
        for p in self.polynomials:
            if not evaluate_poly(p, point):
                return format_poly(p)
        return None

    def contains(self, point: Mapping[str, Any]) -> bool:
        return self.vanishing_at(point) is not None

    def to_strings(self) -> List[str]:
        return [format_poly(p) for p in self.polynomials]

    def __len__(self) -> int:
        return len(self.polynomials)


# x-block helpers

def x_parts(p: PolyElement) -> Dict[Monomial, PolyElement]:
    """Split ``p`` by x-monomial into y-only coefficient polynomials."""
    ring = p.ring
    k = eliminated_count(ring)
    pad = (0,) * k
    parts: Dict[Monomial, Dict[Monomial, Any]] = {}
    for monom, coeff in p.items():
        parts.setdefault(monom[:k], {})[pad + monom[k:]] = coeff
    return {xm: ring.from_dict(terms) for xm, terms in parts.items()}


def lm_x(p: PolyElement) -> Monomial:
    return p.LM[:eliminated_count(p.ring)]


def lc_x(p: PolyElement) -> PolyElement:
    return x_parts(p)[lm_x(p)]


# Buchberger

def _reduce(p: PolyElement, divisors: Sequence[Tuple[Monomial, Any, PolyElement]], order) -> PolyElement:
    """Full reduction of ``p`` by divisors given as (LM, LC, polynomial)."""
    ring = p.ring
    work = dict(p)
    remainder: Dict[Monomial, Any] = {}
    zero = ring.domain.zero
    while work:
        lead = max(work, key=order)
        coeff = work[lead]
        for lm, lc, g in divisors:
            q = monomial_div(lead, lm)
            if q is None:
                continue
            factor = coeff / lc
            for m, c in g.items():
                mm = monomial_mul(m, q)
                value = work.get(mm, zero) - factor * c
                if value:
                    work[mm] = value
                else:
                    work.pop(mm, None)
            break
        else:
            remainder[lead] = coeff
            del work[lead]
    return ring.from_dict(remainder)


class _BuchbergerState:
    def __init__(self, ring: PolyRing, budget: ReductionBudget):
        self.ring = ring
        self.order = ring.order
        self.budget = budget
        self.polys: List[PolyElement] = []
        self.sugar: List[int] = []
        self.active: List[int] = []
        self.pairs: List[Tuple[int, int]] = []
        self.reductions = 0

    def divisors(self) -> List[Tuple[Monomial, Any, PolyElement]]:
        return [(self.polys[i].LM, self.polys[i].LC, self.polys[i]) for i in self.active]

    def pair_key(self, pair: Tuple[int, int]):
        i, j = pair
        lcm = monomial_lcm(self.polys[i].LM, self.polys[j].LM)
        deg = sum(lcm)
        sugar = max(self.sugar[i] + deg - sum(self.polys[i].LM), self.sugar[j] + deg - sum(self.polys[j].LM))
        return sugar, self.order(lcm), i, j

    def spoly(self, i: int, j: int) -> PolyElement:
        f, g = self.polys[i], self.polys[j]
        lcm = monomial_lcm(f.LM, g.LM)
        mf = monomial_div(lcm, f.LM)
        mg = monomial_div(lcm, g.LM)
        return f.mul_term((mf, self.ring.domain.one / f.LC)) - g.mul_term((mg, self.ring.domain.one / g.LC))

    def add(self, h: PolyElement, sugar: int) -> None:
        h = h.monic()
        index = len(self.polys)
        self.polys.append(h)
        self.sugar.append(max(sugar, sum(h.LM)))
        self.update(index)

    def update(self, ih: int) -> None:
        polys = self.polys
        mh = polys[ih].LM

        candidates = list(self.active)
        kept: List[Tuple[int, int]] = []
        for pos, ig in enumerate(candidates):
            mg = polys[ig].LM
            lcm_hg = monomial_lcm(mh, mg)

            def lcm_divides(ip: int) -> bool:
                return monomial_div(lcm_hg, monomial_lcm(mh, polys[ip].LM)) is not None

            coprime = monomial_mul(mh, mg) == lcm_hg
            others = candidates[pos + 1:]
            if coprime or (not any(lcm_divides(ip) for ip in others)
                           and not any(lcm_divides(pr[1]) for pr in kept)):
                kept.append((ih, ig))

        new_pairs = [(ih, ig) for _, ig in kept
                     if monomial_mul(mh, polys[ig].LM) != monomial_lcm(mh, polys[ig].LM)]

        old_pairs = []
        for ig1, ig2 in self.pairs:
            mg1, mg2 = polys[ig1].LM, polys[ig2].LM
            lcm12 = monomial_lcm(mg1, mg2)
            if (monomial_div(lcm12, mh) is None or monomial_lcm(mg1, mh) == lcm12
                    or monomial_lcm(mg2, mh) == lcm12):
                old_pairs.append((ig1, ig2))

        self.pairs = old_pairs + new_pairs
        self.active = [ig for ig in self.active if monomial_div(polys[ig].LM, mh) is None] + [ih]

    def run(self, generators: Sequence[PolyElement]) -> None:
        for p in sorted(generators, key=lambda g: self.order(g.LM)):
            h = _reduce(p, self.divisors(), self.order)
            if h:
                self.add(h, max(sum(m) for m in p.itermonoms()))
        while self.pairs:
            pair = min(self.pairs, key=self.pair_key)
            self.pairs.remove(pair)
            self.budget.consume()
            self.reductions += 1
            sugar = self.pair_key(pair)[0]
            h = _reduce(self.spoly(*pair), self.divisors(), self.order)
            if h:
                self.add(h, sugar)
                if self.reductions % 500 == 0:
                    logger.debug(
                        f"Buchberger progress: {self.reductions} pairs, "
                        f"{len(self.active)} active, {len(self.pairs)} queued"
                    )

    def reduced_basis(self) -> List[PolyElement]:
        basis = [self.polys[i] for i in self.active]
        minimal = []
        for i, g in enumerate(basis):
            if any(j != i and monomial_div(g.LM, h.LM) is not None and (g.LM != h.LM or j < i)
                   for j, h in enumerate(basis)):
                continue
            minimal.append(g)
        result = []
        for i, g in enumerate(minimal):
            others = [(h.LM, h.LC, h) for j, h in enumerate(minimal) if j != i]
            result.append(_reduce(g, others, self.order).monic())
        return sorted(result, key=lambda g: self.order(g.LM))


def _normalize_element(g: PolyElement) -> PolyElement:
    lead = lc_x(g)
    target = normalize_poly(lead)
    return g.mul_ground(target.LC / lead.LC)


def buchberger(
    system: PolySystem,
    order: Optional[MonomialOrder] = None,
    budget: Optional[ReductionBudget] = None,
) -> GroebnerBasis:
    """
    Compute the reduced Groebner basis of ``system``.

    Args:
        system: Generators of the ideal
        order: Monomial order; defaults to the ring's own (block) order
        budget: Pair-reduction budget; defaults to the configured limit

    Returns:
        GroebnerBasis: reduced, normalized basis sorted by increasing leading monomial

    Raises:
        ResourceLimit: when the budget is exhausted
    """
    if not system.generators:
        raise ValueError("cannot compute the basis of an empty system")
    ring = system.ring
    if order is not None and order != ring.order:
        ring = with_order(ring, order)
    generators = [convert(p, ring) for p in system.generators]
    budget = budget if budget is not None else ReductionBudget()

    state = _BuchbergerState(ring, budget)
    state.run(generators)
    elements = tuple(_normalize_element(g) for g in state.reduced_basis())
    logger.debug(
        f"Groebner basis: {len(elements)} elements after {state.reductions} pair reductions "
        f"({budget.get_remaining()} left in budget)"
    )
    return GroebnerBasis(elements, ring, True, state.reductions)


# Quotient algebra

def quotient_basis(gb: GroebnerBasis) -> QuotientBasis:
    """
    Staircase of ``gb`` over Q(y).

    Raises:
        NotZeroDimensional: some eliminated variable has no pure-power leading monomial
    """
    k = gb.n_eliminated
    names = gb.eliminated
    leads = gb.leading_x_monomials()
    if gb.is_unit():
        return QuotientBasis((), names)

    missing = []
    for i in range(k):
        if not any(m[i] and sum(m) == m[i] for m in leads):
            missing.append(names[i])
    if missing:
        raise NotZeroDimensional(missing)

    def reducible(m: Monomial) -> bool:
        return any(monomial_div(m, lead) is not None for lead in leads)

    start = (0,) * k
    seen = {start}
    queue = deque([start])
    while queue:
        m = queue.popleft()
        for i in range(k):
            nxt = m[:i] + (m[i] + 1,) + m[i + 1:]
            if nxt not in seen and not reducible(nxt):
                seen.add(nxt)
                queue.append(nxt)
    return QuotientBasis(tuple(sorted(seen, key=grevlex)), names)


def is_zero_dimensional(gb: GroebnerBasis) -> Tuple[bool, Optional[int]]:
    try:
        return True, quotient_basis(gb).dimension
    except NotZeroDimensional:
        return False, None


def w_infty(gb: GroebnerBasis) -> ExclusionLocus:
    """Squarefree parts of the non-constant leading x-coefficients of ``gb``."""
    return ExclusionLocus.of([lc_x(g) for g in gb.elements], gb.params)


class QuotientAlgebra:
    """Q(y)[eliminated]/I with normal forms over the staircase basis."""

    def __init__(self, gb: GroebnerBasis, basis: Optional[QuotientBasis] = None):
        self.gb = gb
        self.basis = basis if basis is not None else quotient_basis(gb)
        self.field = coefficient_field(gb.params)
        self._index = {m: i for i, m in enumerate(self.basis.monomials)}
        self._reducers = []
        for g in gb.elements:
            parts = self._split(g)
            lead = lm_x(g)
            lc = parts.pop(lead)
            self._reducers.append((lead, lc, parts))
        self._monomial_cache: Dict[Monomial, Tuple[Any, ...]] = {}

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def ring(self) -> PolyRing:
        return self.gb.ring

    def _split(self, p: PolyElement) -> Dict[Monomial, Any]:
        p = convert(p, self.ring)
        return {xm: self.field.from_poly(c) for xm, c in x_parts(p).items()}

    def reduce_terms(self, terms: Dict[Monomial, Any]) -> Tuple[Any, ...]:
        """Normal form of an x-polynomial given as {x-monomial: field element}."""
        zero = self.field.zero
        work = {m: c for m, c in terms.items() if c}
        result = [zero] * self.dimension
        while work:
            lead = max(work, key=grevlex)
            coeff = work.pop(lead)
            position = self._index.get(lead)
            if position is not None:
                result[position] = result[position] + coeff
                continue
            for lm, lc, tail in self._reducers:
                q = monomial_div(lead, lm)
                if q is None:
                    continue
                factor = coeff / lc
                for tm, tc in tail.items():
                    mm = monomial_mul(tm, q)
                    value = work.get(mm, zero) - factor * tc
                    if value:
                        work[mm] = value
                    else:
                        work.pop(mm, None)
                break
            else:
                raise RuntimeError(f"monomial {lead} is neither reducible nor in the staircase")
        return tuple(result)

    def normal_form(self, p: PolyElement) -> Tuple[Any, ...]:
        return self.reduce_terms(self._split(p))

    def monomial_normal_form(self, monomial: Monomial) -> Tuple[Any, ...]:
        if monomial not in self._monomial_cache:
            self._monomial_cache[monomial] = self.reduce_terms({monomial: self.field.one})
        return self._monomial_cache[monomial]

    def multiply(self, a: Sequence[Any], b: Sequence[Any]) -> Tuple[Any, ...]:
        """Product of two normal-form vectors, reduced."""
        zero = self.field.zero
        result = [zero] * self.dimension
        for i, ca in enumerate(a):
            if not ca:
                continue
            for j, cb in enumerate(b):
                if not cb:
                    continue
                product = monomial_mul(self.basis.monomials[i], self.basis.monomials[j])
                nf = self.monomial_normal_form(product)
                scale = ca * cb
                for k, c in enumerate(nf):
                    if c:
                        result[k] = result[k] + scale * c
        return tuple(result)

    def mult_matrix(self, g: PolyElement) -> List[List[Any]]:
        """Column k is the normal form of g·b_k."""
        return self.mult_matrix_of_vector(self.normal_form(g))

    def mult_matrix_of_vector(self, vector: Sequence[Any]) -> List[List[Any]]:
        columns = []
        for k in range(self.dimension):
            unit = [self.field.zero] * self.dimension
            unit[k] = self.field.one
            columns.append(self.multiply(vector, unit))
        return [[columns[k][row] for k in range(self.dimension)] for row in range(self.dimension)]


def normal_form(p: PolyElement, gb: GroebnerBasis, basis: Optional[QuotientBasis] = None) -> Tuple[Any, ...]:
    """Coordinates of p modulo gb over the staircase basis, coefficients in Q(y)."""
    return QuotientAlgebra(gb, basis).normal_form(p)


def mult_matrix(g: PolyElement, gb: GroebnerBasis, basis: Optional[QuotientBasis] = None) -> List[List[Any]]:
    return QuotientAlgebra(gb, basis).mult_matrix(g)
