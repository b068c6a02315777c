"""
Hermite quadratic forms over Q(y).

For a zero-dimensional ideal with staircase b_1..b_δ the Hermite matrix of
g has entries Tr(M_{g·b_i·b_j}). Its rank counts the distinct complex
roots with g ≠ 0 and its signature equals the Tarski query of g.
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement

from .exact_arith import CoefficientField, coefficient_field, is_symmetric, to_qq
from .exceptions import InvalidSpecialization, NotSymmetric
from .groebner_engine import ExclusionLocus, GroebnerBasis, QuotientAlgebra, QuotientBasis, w_infty
from .univariate_real import sign_variations

logger = logging.getLogger("parametric_lmi.hermite_forms")

Alpha = Tuple[int, ...]


@dataclass(frozen=True)
class SignatureResult:
    rank: int
    signature: int

    @property
    def positives(self) -> int:
        return (self.rank + self.signature) // 2


@dataclass(frozen=True)
class HermiteMatrix:
    """Symmetric δ×δ matrix over Q(y) for the product g^α, valid off ``locus``."""

    entries: Tuple[Tuple[Any, ...], ...]
    alpha: Alpha
    locus: ExclusionLocus
    params: Tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def field(self) -> CoefficientField:
        return coefficient_field(self.params)

    def to_dict(self) -> Dict[str, Any]:
        field = self.field
        return {
            "alpha": list(self.alpha),
            "entries": [[field.format(e) for e in row] for row in self.entries],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], params: Sequence[str],
                  locus: Optional[ExclusionLocus] = None) -> "HermiteMatrix":
        params = tuple(params)
        field = coefficient_field(params)
        entries = tuple(tuple(field.parse(e) for e in row) for row in data["entries"])
        if not is_symmetric(entries):
            raise NotSymmetric("stored Hermite matrix is not symmetric")
        locus = locus if locus is not None else ExclusionLocus((), params)
        return cls(entries, tuple(data["alpha"]), locus, params)


def trace_vector(algebra: QuotientAlgebra) -> List[Any]:
    """τ_ℓ = Tr(M_{b_ℓ})."""
    basis = algebra.basis.monomials
    traces = []
    for b in basis:
        total = algebra.field.zero
        for k, bk in enumerate(basis):
            product_nf = algebra.monomial_normal_form(tuple(x + y for x, y in zip(b, bk)))
            total = total + product_nf[k]
        traces.append(total)
    return traces


def _power_vectors(algebra: QuotientAlgebra, gs: Sequence[PolyElement]) -> List[List[Tuple[Any, ...]]]:
    """Normal forms of g_i^0, g_i^1, g_i^2 for every g_i."""
    one = algebra.normal_form(algebra.ring.one) if algebra.dimension else ()
    powers = []
    for g in gs:
        first = algebra.normal_form(g)
        powers.append([one, first, algebra.multiply(first, first)])
    return powers


def _hermite_from_vector(algebra: QuotientAlgebra, vector: Sequence[Any], traces: Sequence[Any]) -> List[List[Any]]:
    """h_ij = τ·M_w·NF(b_i b_j) where w is the normal form of g^α."""
    delta = algebra.dimension
    zero = algebra.field.zero
    mult = algebra.mult_matrix_of_vector(vector)
    functional = [sum((traces[l] * mult[l][k] for l in range(delta)), zero) for k in range(delta)]
    basis = algebra.basis.monomials
    rows = [[zero] * delta for _ in range(delta)]
    for i in range(delta):
        for j in range(i, delta):
            nf = algebra.monomial_normal_form(tuple(a + b for a, b in zip(basis[i], basis[j])))
            value = sum((functional[k] * nf[k] for k in range(delta) if nf[k]), zero)
            rows[i][j] = rows[j][i] = value
    return rows


def _validity_locus(gb: GroebnerBasis, rows: Sequence[Sequence[Any]], field: CoefficientField) -> ExclusionLocus:
    if field.is_rational:
        return ExclusionLocus((), ())
    denominators = [e.denom for row in rows for e in row]
    return w_infty(gb).union(ExclusionLocus.of(denominators, field.params))


def hermite_matrix(
    gb: GroebnerBasis,
    basis: Optional[QuotientBasis],
    g: PolyElement,
    power: int = 1,
    algebra: Optional[QuotientAlgebra] = None,
) -> HermiteMatrix:
    """
    Hermite matrix of g^power modulo ``gb``.

    Raises:
        NotZeroDimensional: propagated from the staircase computation
    """
    algebra = algebra or QuotientAlgebra(gb, basis)
    if algebra.dimension == 0:
        return HermiteMatrix((), (power,), w_infty(gb), gb.params)
    vector = algebra.normal_form(algebra.ring.one)
    g_nf = algebra.normal_form(g)
    for _ in range(power):
        vector = algebra.multiply(vector, g_nf)
    rows = _hermite_from_vector(algebra, vector, trace_vector(algebra))
    locus = _validity_locus(gb, rows, algebra.field)
    return HermiteMatrix(tuple(tuple(r) for r in rows), (power,), locus, gb.params)


def alphas(s: int) -> List[Alpha]:
    """{0,1,2}^s in lexicographic order."""
    return list(product(range(3), repeat=s))


def hermite_matrices(algebra: QuotientAlgebra, gs: Sequence[PolyElement]) -> Dict[Alpha, HermiteMatrix]:
    """Hermite matrices of every product g^α, α ∈ {0,1,2}^s."""
    gb = algebra.gb
    s = len(gs)
    if algebra.dimension == 0:
        return {alpha: HermiteMatrix((), alpha, w_infty(gb), gb.params) for alpha in alphas(s)}
    traces = trace_vector(algebra)
    powers = _power_vectors(algebra, gs)
    one = algebra.normal_form(algebra.ring.one)
    result = {}
    for alpha in alphas(s):
        vector = one
        for i, a in enumerate(alpha):
            if a:
                vector = algebra.multiply(vector, powers[i][a])
        rows = _hermite_from_vector(algebra, vector, traces)
        locus = _validity_locus(gb, rows, algebra.field)
        result[alpha] = HermiteMatrix(tuple(tuple(r) for r in rows), alpha, locus, gb.params)
    logger.debug(f"Built {len(result)} Hermite matrices of size {algebra.dimension}")
    return result


# Signatures over Q

def charpoly(rows: Sequence[Sequence[Any]]) -> List[Any]:
    """Coefficients of det(λI − M), highest degree first."""
    n = len(rows)
    if n == 0:
        return [QQ.one]
    matrix = DomainMatrix([[to_qq(v) for v in row] for row in rows], (n, n), QQ)
    return list(matrix.charpoly())


def signature(rows: Sequence[Sequence[Any]]) -> SignatureResult:
    """
    Rank and signature of a symmetric rational matrix.

    The characteristic polynomial is real-rooted, so the positive eigenvalues
    are counted exactly by the sign variations of its coefficients.

    Raises:
        NotSymmetric: when rows is not a symmetric square matrix
    """
    rows = [[to_qq(v) for v in row] for row in rows]
    if not is_symmetric(rows):
        raise NotSymmetric("signature needs a symmetric matrix")
    n = len(rows)
    coefficients = charpoly(rows)
    zero_multiplicity = 0
    for c in reversed(coefficients):
        if c:
            break
        zero_multiplicity += 1
    rank = n - zero_multiplicity
    positives = sign_variations((c > 0) - (c < 0) for c in coefficients)
    return SignatureResult(rank, 2 * positives - rank)


def specialize_hermite(H: HermiteMatrix, y: Mapping[str, Any]) -> List[List[Any]]:
    """
    Entrywise evaluation at a parameter point.

    Raises:
        InvalidSpecialization: when y lies on the validity locus
    """
    point = {name: to_qq(v) for name, v in y.items()}
    if H.params:
        bad = H.locus.vanishing_at(point)
        if bad is not None:
            raise InvalidSpecialization(point, bad)
    field = H.field
    return [[field.evaluate(e, point) for e in row] for row in H.entries]


def tarski_query(gb: GroebnerBasis, basis: Optional[QuotientBasis], g: PolyElement,
                 y: Optional[Mapping[str, Any]] = None) -> int:
    """#{real roots with g > 0} − #{real roots with g < 0} at the parameter point y."""
    H = hermite_matrix(gb, basis, g)
    return signature(specialize_hermite(H, y or {})).signature


# Generic rank and leading minors over Q(y)

def field_rank(H: HermiteMatrix) -> int:
    """Rank of H over Q(y)."""
    if H.size == 0:
        return 0
    field = H.field
    if field.is_rational:
        return signature(H.entries).rank
    domain = field.field.to_domain()
    return DomainMatrix([list(r) for r in H.entries], (H.size, H.size), domain).rank()


def leading_minors(rows: Sequence[Sequence[Any]], field: CoefficientField, count: int) -> List[Any]:
    """D_1..D_count of a square matrix over Q(y)."""
    if field.is_rational:
        domain = QQ
    else:
        domain = field.field.to_domain()
    minors = []
    for k in range(1, count + 1):
        block = [list(r[:k]) for r in rows[:k]]
        minors.append(DomainMatrix(block, (k, k), domain).det())
    return minors


def congruence(rows: Sequence[Sequence[Any]], P: Sequence[Sequence[Any]], field: CoefficientField) -> List[List[Any]]:
    """P^T·H·P for a rational matrix P."""
    n = len(rows)
    lift = [[field.from_rational(v) for v in row] for row in P]
    zero = field.zero
    hp = [[sum((rows[i][k] * lift[k][j] for k in range(n)), zero) for j in range(n)] for i in range(n)]
    return [[sum((lift[k][i] * hp[k][j] for k in range(n)), zero) for j in range(n)] for i in range(n)]
