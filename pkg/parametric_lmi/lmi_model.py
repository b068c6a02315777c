"""
Parametric linear matrices A(y, x) = A_0 + x_1 A_1 + ... + x_n A_n.

Entries live in Q[x, T1, y] where T1 is the auxiliary eigenvalue shift used
by psd_matrix_cond.
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing

from .exact_arith import (
    RationalLike,
    convert,
    evaluate_poly,
    format_poly,
    format_rational,
    make_ring,
    matrix_det,
    matrix_inverse,
    matrix_rank,
    param_names,
    parse_poly,
    primal_names,
    qq_matrix,
    specialize,
    substitute,
    to_qq,
    var_names,
    x_degree,
)
from .exceptions import NotRepresentable, NotSymmetric, SingularMatrix

logger = logging.getLogger("parametric_lmi.lmi_model")

AUX = "T1"


def model_ring(n: int, t: int) -> PolyRing:
    return make_ring(primal_names(n) + (AUX,), param_names(t))


@dataclass(frozen=True)
class ParamLinearMatrix:
    """Symmetric m×m matrix, affine in x1..xn, polynomial in y1..yt."""

    m: int
    n: int
    t: int
    entries: Tuple[Tuple[PolyElement, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.m or any(len(row) != self.m for row in self.entries):
            raise ValueError(f"expected a {self.m}×{self.m} matrix")
        ring = self.ring
        xs = primal_names(self.n)
        for i in range(self.m):
            for j in range(self.m):
                entry = self.entries[i][j]
                if entry.ring != ring:
                    raise ValueError("matrix entries must share the model ring")
                if x_degree(entry, (AUX,)) > 0:
                    raise ValueError(f"entry ({i + 1},{j + 1}) uses the auxiliary variable {AUX}")
                if x_degree(entry, xs) > 1:
                    raise ValueError(f"entry ({i + 1},{j + 1}) is not affine in x")
                if j > i and entry != self.entries[j][i]:
                    raise NotSymmetric(f"entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ")

    @property
    def ring(self) -> PolyRing:
        return model_ring(self.n, self.t)

    @property
    def x_names(self) -> Tuple[str, ...]:
        return primal_names(self.n)

    @property
    def y_names(self) -> Tuple[str, ...]:
        return param_names(self.t)

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[Union[str, PolyElement, int]]], n: int, t: int) -> "ParamLinearMatrix":
        """
        Build a matrix from a full square array or its upper triangle.

        Args:
            rows: Row i holds either m entries or the m − i entries on and right of the diagonal
            n: Number of x variables
            t: Number of parameters
        """
        ring = model_ring(n, t)
        m = len(rows)

        def coerce(value) -> PolyElement:
            if isinstance(value, PolyElement):
                return convert(value, ring)
            if isinstance(value, str):
                return parse_poly(value, ring)
            return ring.ground_new(to_qq(value))

        # One layout for the whole array: full rows only if every row has m entries
        triangle = any(len(row) != m for row in rows)
        full: List[List[Optional[PolyElement]]] = [[None] * m for _ in range(m)]
        for i, row in enumerate(rows):
            expected = m - i if triangle else m
            if len(row) != expected:
                layout = "upper triangle" if triangle else "full matrix"
                raise ValueError(f"row {i + 1} has {len(row)} entries; expected {expected} for a {layout}")
            if triangle:
                for offset, value in enumerate(row):
                    j = i + offset
                    full[i][j] = coerce(value)
                    full[j][i] = full[i][j]
            else:
                for j, value in enumerate(row):
                    full[i][j] = coerce(value)
        return cls(m, n, t, tuple(tuple(row) for row in full))

    @classmethod
    def identity(cls, m: int, n: int = 0, t: int = 0) -> "ParamLinearMatrix":
        return cls.from_entries([[1 if i == j else 0 for j in range(m)] for i in range(m)], n, t)

    def upper_triangle(self) -> List[List[str]]:
        return [[format_poly(self.entries[i][j]) for j in range(i, self.m)] for i in range(self.m)]

    def canonical_text(self) -> str:
        rows = ";".join(",".join(row) for row in self.upper_triangle())
        return f"m={self.m};n={self.n};t={self.t};{rows}"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()

    def evaluate(self, y: Sequence[RationalLike] = (), x: Sequence[RationalLike] = ()) -> List[List[Any]]:
        """Fully specialized matrix over QQ."""
        point = dict(zip(self.y_names, y))
        point.update(zip(self.x_names, x))
        if len(point) != self.n + self.t:
            raise ValueError(f"expected {self.t} parameter and {self.n} x values")
        return [[evaluate_poly(e, point) for e in row] for row in self.entries]


@dataclass(frozen=True)
class GCoeffs:
    """g_0..g_m: coefficients of λ^i in det(A + λ·I), in the model ring without T1."""

    polys: Tuple[PolyElement, ...]

    def __len__(self) -> int:
        return len(self.polys)

    def __getitem__(self, i: int) -> PolyElement:
        return self.polys[i]

    def __iter__(self):
        return iter(self.polys)

    def at(self, point: Dict[str, RationalLike]) -> List[Any]:
        return [evaluate_poly(g, point) for g in self.polys]


def _determinant(matrix: Sequence[Sequence[PolyElement]], ring: PolyRing) -> PolyElement:
    m = len(matrix)
    cache: Dict[Tuple[int, ...], PolyElement] = {}

    def minor(row: int, columns: Tuple[int, ...]) -> PolyElement:
        if not columns:
            return ring.one
        if columns in cache:
            return cache[columns]
        total = ring.zero
        for position, col in enumerate(columns):
            entry = matrix[row][col]
            if not entry:
                continue
            rest = minor(row + 1, columns[:position] + columns[position + 1:])
            term = entry * rest
            total = total - term if position % 2 else total + term
        cache[columns] = total
        return total

    return minor(0, tuple(range(m)))


def determinant(matrix: Sequence[Sequence[PolyElement]]) -> PolyElement:
    """Determinant by minor expansion, memoized over column subsets."""
    if not matrix:
        raise ValueError("empty matrix")
    return _determinant(matrix, matrix[0][0].ring)


def psd_matrix_cond(A: ParamLinearMatrix) -> GCoeffs:
    """
    Coefficients g_0..g_m of det(A + λ·I).

    A(y, x) ⪰ 0 exactly when every g_i(y, x) ≥ 0.
    """
    ring = A.ring
    shift = ring.gens[var_names(ring).index(AUX)]
    shifted = [[A.entries[i][j] + (shift if i == j else ring.zero) for j in range(A.m)] for i in range(A.m)]
    char = determinant(shifted)
    aux = var_names(ring).index(AUX)
    coeffs: List[Dict[Tuple[int, ...], Any]] = [dict() for _ in range(A.m + 1)]
    for monom, coeff in char.items():
        stripped = monom[:aux] + (0,) + monom[aux + 1:]
        coeffs[monom[aux]][stripped] = coeff
    return GCoeffs(tuple(ring.from_dict(c) for c in coeffs))


@dataclass(frozen=True)
class ChangeOfVars:
    """Invertible n×n rational matrix M; x is replaced by M·x."""

    matrix: Tuple[Tuple[Any, ...], ...]

    def __post_init__(self):
        rows = qq_matrix(self.matrix)
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in rows))
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("change of variables must be square")
        if rows and not matrix_det(rows):
            raise SingularMatrix("change of variables matrix is singular")

    @classmethod
    def identity(cls, n: int) -> "ChangeOfVars":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.matrix)

    def inverse(self) -> "ChangeOfVars":
        return ChangeOfVars(tuple(tuple(r) for r in matrix_inverse(self.matrix)))

    def to_strings(self) -> List[List[str]]:
        return [[format_rational(v) for v in row] for row in self.matrix]


def change_vars(target, M: ChangeOfVars, names: Optional[Sequence[str]] = None):
    """
    Apply x ← M·x to a polynomial or to every entry of a ParamLinearMatrix.

    Args:
        target: PolyElement or ParamLinearMatrix
        M: Invertible change of variables
        names: Variables playing the role of x1..xn (default: x1..x_size)
    """
    names = tuple(names) if names is not None else primal_names(M.size)
    if isinstance(target, ParamLinearMatrix):
        entries = [[change_vars(e, M, names) for e in row] for row in target.entries]
        return ParamLinearMatrix(target.m, target.n, target.t, tuple(tuple(r) for r in entries))
    ring = target.ring
    gens = {name: gen for name, gen in zip(var_names(ring), ring.gens)}
    images = {}
    for i, name in enumerate(names):
        image = ring.zero
        for j, other in enumerate(names):
            if M.matrix[i][j]:
                image = image + gens[other].mul_ground(M.matrix[i][j])
        images[name] = image
    return substitute(target, images)


def specialize_params(A: ParamLinearMatrix, y: Sequence[RationalLike]) -> ParamLinearMatrix:
    """Substitute parameter values; the result has t = 0."""
    if len(y) != A.t:
        raise ValueError(f"expected {A.t} parameter values, got {len(y)}")
    if A.t == 0:
        return A
    assignment = dict(zip(A.y_names, y))
    ring = model_ring(A.n, 0)
    entries = [[convert(specialize(e, assignment), ring) for e in row] for row in A.entries]
    return ParamLinearMatrix(A.m, A.n, 0, tuple(tuple(r) for r in entries))


def rank_at(A: ParamLinearMatrix, y: Sequence[RationalLike] = (), x: Sequence[RationalLike] = ()) -> int:
    return matrix_rank(A.evaluate(y, x))


def _as_monomial(value, ring: PolyRing) -> Tuple[int, ...]:
    poly = parse_poly(value, ring) if isinstance(value, str) else convert(value, ring)
    if len(poly) != 1 or poly.LC != 1:
        raise ValueError(f"{format_poly(poly)} is not a monomial")
    return poly.LM


def sos_to_lmi(p: PolyElement, beta: Sequence[Union[str, PolyElement]]) -> ParamLinearMatrix:
    """
    Gram spectrahedron of ``p`` over the monomial vector ``beta``.

    Pairs (i ≤ j) are grouped by the monomial β_i·β_j. In each group the first
    pair (lexicographic) is solved from the coefficient match and every other
    pair becomes a fresh variable x_k. Off-diagonal pairs count twice.

    Raises:
        NotRepresentable: a monomial of p is not a product of two basis monomials
    """
    ring = p.ring
    names = var_names(ring)
    x_count = sum(1 for name in names if name.startswith("x"))
    params = tuple(name for name in names if name.startswith("y"))
    monomials = [_as_monomial(b, ring) for b in beta]
    for m in monomials:
        if any(m[x_count:]):
            raise ValueError("basis monomials must only involve x variables")
    size = len(monomials)

    classes: Dict[Tuple[int, ...], List[Tuple[int, int]]] = {}
    for i in range(size):
        for j in range(i, size):
            product = tuple(a + b for a, b in zip(monomials[i][:x_count], monomials[j][:x_count]))
            classes.setdefault(product, []).append((i, j))

    targets: Dict[Tuple[int, ...], Dict[Tuple[int, ...], Any]] = {}
    for monom, coeff in p.items():
        targets.setdefault(monom[:x_count], {})[monom[x_count:]] = coeff
    for xm in targets:
        if xm not in classes:
            label = "*".join(f"{n}^{e}" for n, e in zip(names, xm) if e) or "1"
            raise NotRepresentable(label)

    free = sum(len(pairs) - 1 for pairs in classes.values())
    t = len(params)
    out_ring = model_ring(free, t)
    y_offset = free + 1
    gram: List[List[Optional[PolyElement]]] = [[None] * size for _ in range(size)]
    next_var = 0
    for product, pairs in classes.items():
        terms = targets.get(product, {})
        target = out_ring.from_dict({(0,) * y_offset + ym: c for ym, c in terms.items()})
        pivot, others = pairs[0], pairs[1:]
        for (i, j) in others:
            var = out_ring.gens[next_var]
            next_var += 1
            gram[i][j] = gram[j][i] = var
            target = target - (var if i == j else var.mul_ground(QQ(2)))
        weight = QQ(1) if pivot[0] == pivot[1] else QQ(2)
        value = target.mul_ground(QQ(1) / weight)
        gram[pivot[0]][pivot[1]] = gram[pivot[1]][pivot[0]] = value
    logger.info(f"Gram matrix of size {size} with {free} free variables")
    return ParamLinearMatrix(size, free, t, tuple(tuple(r) for r in gram))


def gram_polynomial(A: ParamLinearMatrix, beta: Sequence[Union[str, PolyElement]], ring: PolyRing,
                    x: Sequence[RationalLike] = ()) -> PolyElement:
    """β^T W β in ``ring`` for the Gram matrix W = A(y, x) at rational x."""
    point = dict(zip(A.x_names, x))
    vector = [parse_poly(b, ring) if isinstance(b, str) else convert(b, ring) for b in beta]
    total = ring.zero
    for i in range(A.m):
        for j in range(A.m):
            coefficient = convert(specialize(A.entries[i][j], point), ring)
            total = total + coefficient * vector[i] * vector[j]
    return total
