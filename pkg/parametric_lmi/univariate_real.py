"""
Exact univariate real-root tools.

Sturm sequences, dyadic root isolation with half-open intervals (a, b],
signs of polynomials at real algebraic points, a one-dimensional cell
decomposition, sample points and an independent feasibility test for
univariate sign conditions g_i ≥ 0.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, List, Optional, Sequence

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing

from .exact_arith import convert, make_ring, to_qq, var_names

logger = logging.getLogger("parametric_lmi.univariate_real")

Bound = Optional[Any]


def univariate(p: PolyElement, name: Optional[str] = None) -> PolyElement:
    """Move a polynomial using at most one variable into Q[name]."""
    used = [n for n, e in zip(var_names(p.ring), zip(*p.itermonoms())) if any(e)] if p else []
    if len(used) > 1:
        raise ValueError(f"polynomial is not univariate: uses {used}")
    name = name or (used[0] if used else "x1")
    if used and used[0] != name:
        raise ValueError(f"polynomial uses {used[0]}, expected {name}")
    return convert(p, make_ring((name,), ()))


def _ring_of(polys: Sequence[PolyElement]) -> PolyRing:
    names = set()
    for p in polys:
        for n, exps in zip(var_names(p.ring), zip(*p.itermonoms())):
            if any(exps):
                names.add(n)
    if len(names) > 1:
        raise ValueError(f"polynomials use several variables: {sorted(names)}")
    return make_ring((names.pop() if names else "x1",), ())


def _value(p: PolyElement, a):
    if not p:
        return QQ.zero
    return p(a)


def _sign(value) -> int:
    return (value > 0) - (value < 0)


def _sign_at_infinity(p: PolyElement, positive: bool) -> int:
    if not p:
        return 0
    lead = _sign(p.LC)
    if positive or p.degree() % 2 == 0:
        return lead
    return -lead


def sturm_sequence(p: PolyElement) -> List[PolyElement]:
    """p, p', then negated remainders until zero."""
    if not p:
        return []
    chain = [p, p.diff(p.ring.gens[0])]
    while chain[-1]:
        chain.append(-chain[-2].rem(chain[-1]))
    return chain[:-1]


def sign_variations(signs: Iterable[int]) -> int:
    nonzero = [s for s in signs if s]
    return sum(1 for a, b in zip(nonzero, nonzero[1:]) if a != b)


def _variations_at(chain: Sequence[PolyElement], point: Bound, positive: bool = True) -> int:
    if point is None:
        return sign_variations(_sign_at_infinity(q, positive) for q in chain)
    return sign_variations(_sign(_value(q, point)) for q in chain)


def sturm_count(p: PolyElement, lower: Bound = None, upper: Bound = None) -> int:
    """
    Number of distinct real roots of p in (lower, upper].

    ``None`` stands for −∞ (lower) or +∞ (upper).
    """
    p = univariate(p)
    if not p or p.is_ground:
        return 0
    lower = None if lower is None else to_qq(lower)
    upper = None if upper is None else to_qq(upper)
    if lower is not None and upper is not None and lower >= upper:
        return 0
    chain = sturm_sequence(p.sqf_part())
    return _variations_at(chain, lower, positive=False) - _variations_at(chain, upper, positive=True)


def root_bound(p: PolyElement):
    """A power of two strictly above the absolute value of every real root."""
    lead = abs(p.LC)
    bound = QQ.one + max((abs(c) / lead for m, c in p.items() if m != p.LM), default=QQ.zero)
    power = QQ.one
    while power < bound:
        power = power * 2
    return power


@dataclass(frozen=True)
class IsolatingInterval:
    """Exactly one real root of ``poly`` lies in (lower, upper]."""

    poly: PolyElement
    lower: Any
    upper: Any

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def midpoint(self):
        return (self.lower + self.upper) / 2

    def refine(self) -> "IsolatingInterval":
        """Halve the interval, keeping the root."""
        middle = self.midpoint
        if sturm_count(self.poly, self.lower, middle):
            return IsolatingInterval(self.poly, self.lower, middle)
        return IsolatingInterval(self.poly, middle, self.upper)

    def refine_below(self, width) -> "IsolatingInterval":
        interval = self
        while interval.width > width:
            interval = interval.refine()
        return interval

    def contains(self, value) -> bool:
        value = to_qq(value)
        return self.lower < value <= self.upper

    def __str__(self) -> str:
        return f"({self.lower}, {self.upper}]"


def isolate_roots(p: PolyElement) -> List[IsolatingInterval]:
    """Disjoint dyadic intervals, one per distinct real root, sorted increasingly."""
    p = univariate(p)
    if not p:
        raise ValueError("cannot isolate the roots of the zero polynomial")
    if p.is_ground:
        return []
    p = p.sqf_part()
    bound = root_bound(p)
    stack = [(-bound, bound)]
    found = []
    while stack:
        lower, upper = stack.pop()
        count = sturm_count(p, lower, upper)
        if count == 0:
            continue
        if count == 1:
            found.append(IsolatingInterval(p, lower, upper))
            continue
        middle = (lower + upper) / 2
        stack.append((lower, middle))
        stack.append((middle, upper))
    return sorted(found, key=lambda interval: interval.lower)


def rational_roots(p: PolyElement) -> List[Any]:
    p = univariate(p)
    if not p or p.is_ground:
        return []
    _, factors = p.factor_list()
    roots = []
    for factor, _ in factors:
        if factor.degree() == 1:
            coeffs = dict(factor)
            roots.append(-coeffs.get((0,), QQ.zero) / coeffs[(1,)])
    return sorted(roots)


def sign_at_root(q: PolyElement, root: IsolatingInterval) -> int:
    """
    Sign of q at the real root isolated by ``root``.

    Zero is detected exactly through gcd(q, poly); otherwise the interval is
    refined until q has no root inside and q is evaluated at the upper end.
    """
    q = univariate(q, var_names(root.poly.ring)[0])
    if not q:
        return 0
    if q.is_ground:
        return _sign(q.LC)
    common = q.gcd(root.poly)
    if not common.is_ground and sturm_count(common, root.lower, root.upper):
        return 0
    interval = root
    while sturm_count(q, interval.lower, interval.upper):
        interval = interval.refine()
    return _sign(_value(q, interval.upper))


class CellKind(Enum):
    POINT = "point"
    INTERVAL = "interval"
    RAY = "ray"


@dataclass(frozen=True)
class Cell1D:
    """A cell of the real line; ``sample`` is None for an irrational point cell."""

    kind: CellKind
    sample: Optional[Any]
    root: Optional[IsolatingInterval] = None

    def sign_of(self, q: PolyElement) -> int:
        if self.kind is CellKind.POINT and self.sample is None:
            return sign_at_root(q, self.root)
        return _sign(_value(univariate(q, var_names(self.root.poly.ring)[0] if self.root else None), self.sample))


def _between(left: IsolatingInterval, right: IsolatingInterval, squarefree: PolyElement):
    """A rational strictly between the roots isolated by left and right."""
    while True:
        if _value(squarefree, left.upper):
            return left.upper
        if right.lower > left.upper:
            return right.lower
        right = right.refine()


def cell_decomposition(polys: Sequence[PolyElement]) -> List[Cell1D]:
    """Cells of the line induced by the real roots of all nonzero ``polys``."""
    ring = _ring_of(polys)
    name = var_names(ring)[0]
    product = ring.one
    for p in polys:
        if p:
            product = product * univariate(p, name)
    if product.is_ground:
        return [Cell1D(CellKind.RAY, QQ.zero)]
    squarefree = product.sqf_part()
    roots = isolate_roots(squarefree)
    exact = {r for r in rational_roots(squarefree)}
    if not roots:
        return [Cell1D(CellKind.RAY, QQ.zero)]

    def point_cell(interval: IsolatingInterval) -> Cell1D:
        sample = next((r for r in exact if interval.contains(r)), None)
        return Cell1D(CellKind.POINT, sample, interval)

    cells = [Cell1D(CellKind.RAY, roots[0].lower - 1, roots[0])]
    for left, right in zip(roots, roots[1:]):
        cells.append(point_cell(left))
        cells.append(Cell1D(CellKind.INTERVAL, _between(left, right, squarefree), left))
    cells.append(point_cell(roots[-1]))
    cells.append(Cell1D(CellKind.RAY, roots[-1].upper + 1, roots[-1]))
    return cells


def sample_points_1d(polys: Sequence[PolyElement], include_roots: bool = True) -> List[Any]:
    """
    At least one rational point in every open cell, plus the rational roots.

    An empty input yields the single sample 0.
    """
    polys = [p for p in polys if p]
    if not polys:
        return [QQ.zero]
    points = set()
    for cell in cell_decomposition(polys):
        if cell.sample is None:
            continue
        if cell.kind is CellKind.POINT and not include_roots:
            continue
        points.add(cell.sample)
    return sorted(points)


def feasibility_oracle_1d(gs: Sequence[PolyElement]) -> bool:
    """True iff some real x has g_i(x) ≥ 0 for every i."""
    gs = list(gs)
    if any(not g for g in gs):
        raise ValueError("every sign polynomial must be nonzero")
    if not gs:
        return True
    ring = _ring_of(gs)
    name = var_names(ring)[0]
    gs = [univariate(g, name) for g in gs]
    for cell in cell_decomposition(gs):
        if all(cell.sign_of(g) >= 0 for g in gs):
            logger.debug(f"Feasible cell {cell.kind.value} at {cell.sample if cell.sample is not None else cell.root}")
            return True
    return False
