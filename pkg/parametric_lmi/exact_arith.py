"""
Exact arithmetic for parametric LMI computations.

This module provides:
- Named variable groups (parameters y, primal x, kernel u, multipliers l, ...)
- Polynomial rings over QQ with a block elimination order
- Specialization, substitution and formal jacobians
- The coefficient field Q(y) (plain QQ when there are no parameters)
- A text grammar for polynomials and a canonical printer
- Small dense linear algebra over QQ
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ
from sympy.polys.fields import FracField
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import MonomialOrder, grevlex, lex
from sympy.polys.rings import PolyElement, PolyRing

from .exceptions import DivisionByZero, InvalidSpecialization, ParseError

logger = logging.getLogger("parametric_lmi.exact_arith")

Monomial = Tuple[int, ...]
RationalLike = Union[int, str, Fraction, Any]


class VarKind(Enum):
    """Kinds of variables, in the order they appear inside a ring."""

    PRIMAL = "x"
    INCIDENCE = "u"
    MULTIPLIER = "l"
    SATURATION = "z"
    AUXILIARY = "T"
    PARAM = "y"


_NAME_RE = re.compile(r"^(?:(?P<kind>[xylzT])(?P<index>\d+)|u(?P<row>\d+)_(?P<col>\d+))$")


@dataclass(frozen=True)
class VarGroup:
    """A named variable: kind plus 1-based index (row/column for kernel variables)."""

    kind: VarKind
    index: int
    column: Optional[int] = None

    def __post_init__(self):
        if self.index < 1 or (self.column is not None and self.column < 1):
            raise ValueError(f"variable indices are 1-based, got {self.index}, {self.column}")
        if (self.kind is VarKind.INCIDENCE) != (self.column is not None):
            raise ValueError("only kernel variables carry a column index")

    @property
    def name(self) -> str:
        if self.kind is VarKind.INCIDENCE:
            return f"u{self.index}_{self.column}"
        return f"{self.kind.value}{self.index}"

    @classmethod
    def parse(cls, name: str) -> "VarGroup":
        match = _NAME_RE.match(name)
        if not match:
            raise ValueError(f"not a variable name: {name!r}")
        if match.group("row"):
            return cls(VarKind.INCIDENCE, int(match.group("row")), int(match.group("col")))
        return cls(VarKind(match.group("kind")), int(match.group("index")))

    def __str__(self) -> str:
        return self.name


def primal_names(n: int) -> Tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n + 1))


def param_names(t: int) -> Tuple[str, ...]:
    return tuple(f"y{i}" for i in range(1, t + 1))


class BlockOrder(MonomialOrder):
    """Elimination order: the first ``size`` variables are compared first (grevlex),
    ties are broken by grevlex on the remaining ones."""

    alias = "block"
    is_global = True
    is_default = False

    def __init__(self, size: int):
        self.size = size

    def __call__(self, monomial: Monomial):
        return (grevlex(monomial[:self.size]), grevlex(monomial[self.size:]))

    def __repr__(self) -> str:
        return f"BlockOrder({self.size})"

    def __eq__(self, other) -> bool:
        return isinstance(other, BlockOrder) and other.size == self.size

    def __hash__(self) -> int:
        return hash(("block", self.size))


ORDER_BLOCK = "block"
ORDER_GREVLEX = "grevlex"
ORDER_LEX = "lex"
ORDER_NAMES = (ORDER_BLOCK, ORDER_GREVLEX, ORDER_LEX)


def monomial_order(name: str, size: int = 0) -> MonomialOrder:
    """Order by name; ``size`` is the eliminated block of a block order."""
    if name == ORDER_BLOCK:
        return BlockOrder(size)
    if name == ORDER_GREVLEX:
        return grevlex
    if name == ORDER_LEX:
        return lex
    raise ValueError(f"Unknown monomial order: {name}")


@lru_cache(maxsize=None)
def make_ring(eliminated: Tuple[str, ...], params: Tuple[str, ...] = (), order: str = ORDER_BLOCK) -> PolyRing:
    """
    Build Q[eliminated, params], by default under the block order eliminated ≻ params.

    Args:
        eliminated: Names of the eliminated block (x, u, l, z, T variables)
        params: Names of the parameter block (y variables)
        order: One of ORDER_NAMES; grevlex and lex ignore the block split

    Returns:
        PolyRing: sympy polynomial ring over QQ
    """
    symbols = tuple(eliminated) + tuple(params)
    if not symbols:
        raise ValueError("a ring needs at least one variable")
    for name in symbols:
        VarGroup.parse(name)
    return PolyRing(symbols, QQ, monomial_order(order, len(eliminated)))


def var_names(ring: PolyRing) -> Tuple[str, ...]:
    return tuple(str(s) for s in ring.symbols)


def eliminated_count(ring: PolyRing) -> int:
    """Size of the eliminated block of ``ring``."""
    if isinstance(ring.order, BlockOrder):
        return ring.order.size
    return ring.ngens


def ring_params(ring: PolyRing) -> Tuple[str, ...]:
    return var_names(ring)[eliminated_count(ring):]


def ring_eliminated(ring: PolyRing) -> Tuple[str, ...]:
    return var_names(ring)[:eliminated_count(ring)]


def with_order(ring: PolyRing, order: MonomialOrder) -> PolyRing:
    return PolyRing(ring.symbols, ring.domain, order)


# Rationals

def to_qq(value: RationalLike):
    """Convert int, Fraction, decimal/fraction string or QQ element to QQ."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        frac = Fraction(value.strip())
        return QQ(frac.numerator, frac.denominator)
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; use Fraction or str")
    if QQ.of_type(value):
        return value
    return QQ.convert(value)


def to_fraction(value) -> Fraction:
    value = to_qq(value)
    return Fraction(int(value.numerator), int(value.denominator))


def format_rational(value) -> str:
    return str(to_fraction(value))


# Polynomials

def convert(p: PolyElement, ring: PolyRing) -> PolyElement:
    """Move ``p`` into ``ring`` matching variables by name."""
    if p.ring == ring:
        return p
    target = {name: i for i, name in enumerate(var_names(ring))}
    source = var_names(p.ring)
    terms: Dict[Monomial, Any] = {}
    for monom, coeff in p.items():
        exps = [0] * ring.ngens
        for name, e in zip(source, monom):
            if not e:
                continue
            if name not in target:
                raise ValueError(f"variable {name} does not exist in the target ring")
            exps[target[name]] = e
        terms[tuple(exps)] = coeff
    return ring.from_dict(terms)


def poly_arith(p: PolyElement, q: PolyElement, op: str) -> PolyElement:
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"Unknown polynomial operation: {op}")


def _indexed(ring: PolyRing, assignment: Mapping[str, Any]) -> Dict[int, Any]:
    names = var_names(ring)
    index = {}
    for name, value in assignment.items():
        if name not in names:
            raise ValueError(f"variable {name} is not declared in {names}")
        index[names.index(name)] = value
    return index


def specialize(p: PolyElement, assignment: Mapping[str, RationalLike]) -> PolyElement:
    """Substitute rationals for some variables; the result stays in p's ring."""
    if not assignment:
        return p
    values = {i: to_qq(v) for i, v in _indexed(p.ring, assignment).items()}
    terms: Dict[Monomial, Any] = {}
    for monom, coeff in p.items():
        exps = list(monom)
        for i, v in values.items():
            if exps[i]:
                coeff = coeff * v ** exps[i]
                exps[i] = 0
        if coeff:
            key = tuple(exps)
            terms[key] = terms.get(key, QQ.zero) + coeff
    return p.ring.from_dict(terms)


def substitute(p: PolyElement, images: Mapping[str, PolyElement]) -> PolyElement:
    """Substitute polynomials (in p's ring) for variables."""
    ring = p.ring
    if not images:
        return p
    index = _indexed(ring, images)
    powers: Dict[Tuple[int, int], PolyElement] = {}
    result = ring.zero
    for monom, coeff in p.items():
        term = ring.from_dict({tuple(0 if i in index else e for i, e in enumerate(monom)): coeff})
        for i, image in index.items():
            e = monom[i]
            if e:
                if (i, e) not in powers:
                    powers[(i, e)] = image ** e
                term = term * powers[(i, e)]
        result = result + term
    return result


def evaluate_poly(p: PolyElement, values: Mapping[str, RationalLike]):
    """Evaluate at a point assigning every variable that occurs in ``p``."""
    remaining = specialize(p, values)
    if not remaining:
        return QQ.zero
    if len(remaining) > 1 or any(remaining.LM):
        raise ValueError("evaluation point does not assign every variable")
    return remaining.LC


def jacobian(system: Sequence[PolyElement], variables: Sequence[Union[str, VarGroup]]) -> List[List[PolyElement]]:
    """Formal jacobian; entry (i, j) is the derivative of system[i] by variables[j]."""
    names = [str(v) for v in variables]
    if len(set(names)) != len(names):
        raise ValueError("jacobian variables must be distinct")
    if not system:
        return []
    ring = system[0].ring
    indices = [var_names(ring).index(name) for name in names]
    return [[p.diff(i) for i in indices] for p in system]


def x_degree(p: PolyElement, names: Sequence[str]) -> int:
    """Total degree of ``p`` in the given variables."""
    index = [var_names(p.ring).index(n) for n in names if n in var_names(p.ring)]
    return max((sum(m[i] for i in index) for m in p.itermonoms()), default=0)


def normalize_poly(p: PolyElement) -> PolyElement:
    """Primitive integer multiple of ``p`` with positive leading coefficient."""
    if not p:
        return p
    _, q = p.clear_denoms()
    content = 0
    for c in q.itercoeffs():
        content = gcd(content, int(c.numerator))
    q = q.mul_ground(QQ(1, content))
    if q.LC < 0:
        q = -q
    return q


def squarefree_normalized(p: PolyElement) -> PolyElement:
    return normalize_poly(p.sqf_part())


# Coefficient field

class CoefficientField:
    """
    Q(y) as a sympy FracField ordered by grevlex in y, or plain QQ when t = 0.

    Elements are FracElements (t ≥ 1) or QQ elements (t = 0); both support
    + - * / with each other of the same kind.
    """

    def __init__(self, params: Sequence[str]):
        self.params = tuple(params)
        if self.params:
            self.field = FracField(self.params, QQ, grevlex)
            self.ring = self.field.ring
        else:
            self.field = None
            self.ring = None

    @property
    def is_rational(self) -> bool:
        return self.field is None

    @property
    def zero(self):
        return QQ.zero if self.field is None else self.field.zero

    @property
    def one(self):
        return QQ.one if self.field is None else self.field.one

    def from_rational(self, value: RationalLike):
        q = to_qq(value)
        return q if self.field is None else self.field.ground_new(q)

    def from_poly(self, p: PolyElement):
        """Embed a polynomial involving only parameters."""
        if self.field is None:
            if not p:
                return QQ.zero
            if len(p) > 1 or any(p.LM):
                raise ValueError("non-constant polynomial in a parameter-free field")
            return p.LC
        return self.field.new(convert(p, self.ring))

    def from_parts(self, numer: PolyElement, denom: PolyElement):
        if not denom:
            raise DivisionByZero("zero denominator")
        if self.field is None:
            return self.from_poly(numer) / self.from_poly(denom)
        return self.field.new(convert(numer, self.ring), convert(denom, self.ring))

    def numer_denom(self, element) -> Tuple[Any, Any]:
        if self.field is None:
            q = to_qq(element)
            return QQ(q.numerator), QQ(q.denominator)
        return element.numer, element.denom

    def evaluate(self, element, point: Mapping[str, RationalLike]):
        """Value at a parameter point; InvalidSpecialization on a pole."""
        if self.field is None:
            return element
        den = evaluate_poly(element.denom, point)
        if not den:
            raise InvalidSpecialization(dict(point), format_poly(element.denom))
        return evaluate_poly(element.numer, point) / den

    def format(self, element) -> Dict[str, str]:
        num, den = self.numer_denom(element)
        if self.field is None:
            return {"num": format_rational(num), "den": format_rational(den)}
        return {"num": format_poly(num), "den": format_poly(den)}

    def parse(self, data: Mapping[str, str]):
        if self.field is None:
            num, den = to_qq(data["num"]), to_qq(data["den"])
            if not den:
                raise DivisionByZero("zero denominator")
            return num / den
        ring = self.ring
        return self.from_parts(parse_poly(data["num"], ring), parse_poly(data["den"], ring))


@lru_cache(maxsize=None)
def coefficient_field(params: Tuple[str, ...]) -> CoefficientField:
    return CoefficientField(params)


def ratfunc_arith(a, b, op: str):
    """Field arithmetic on Q(y) (or QQ) elements with an explicit zero check for div."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise DivisionByZero("division by the zero rational function")
        return a / b
    raise ValueError(f"Unknown field operation: {op}")


# Text grammar

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*^()]))")


class _PolyParser:
    """Recursive descent parser: expr := signed ([+-] signed)*, signed := [+-] term, term := factor (* factor)*,
    factor := atom [^ int], atom := number | variable | ( expr )."""

    def __init__(self, text: str, ring: PolyRing):
        self.text = text
        self.ring = ring
        self.names = {name: gen for name, gen in zip(var_names(ring), ring.gens)}
        self.tokens = self._tokenize()
        self.pos = 0

    def _location(self, offset: int) -> Tuple[int, int]:
        line = self.text.count("\n", 0, offset) + 1
        column = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, column

    def _error(self, message: str, offset: Optional[int] = None):
        if offset is None:
            offset = self.tokens[self.pos][2] if self.pos < len(self.tokens) else len(self.text)
        line, column = self._location(offset)
        raise ParseError(message, line, column, self.text)

    def _tokenize(self) -> List[Tuple[str, str, int]]:
        tokens = []
        offset = 0
        stripped_end = len(self.text.rstrip())
        while offset < stripped_end:
            match = _TOKEN_RE.match(self.text, offset)
            if not match:
                start = offset + (len(self.text[offset:]) - len(self.text[offset:].lstrip()))
                self._error(f"unexpected character {self.text[start]!r}", start)
            kind = match.lastgroup
            tokens.append((kind, match.group(kind), match.start(kind)))
            offset = match.end()
        return tokens

    def _peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _accept(self, op: str) -> bool:
        token = self._peek()
        if token and token[0] == "op" and token[1] == op:
            self.pos += 1
            return True
        return False

    def parse(self) -> PolyElement:
        if not self.tokens:
            self._error("empty polynomial", 0)
        value = self._expr()
        if self._peek() is not None:
            token = self._peek()
            if token[0] in ("num", "var") or token[1] == "(":
                self._error("implicit multiplication is not allowed")
            self._error(f"unexpected token {token[1]!r}")
        return value

    def _expr(self) -> PolyElement:
        value = self._signed()
        while True:
            if self._accept("+"):
                value = value + self._signed()
            elif self._accept("-"):
                value = value - self._signed()
            else:
                return value

    def _signed(self) -> PolyElement:
        # At most one sign per term: "1 + -x1" parses, "--x1" does not
        if self._accept("-"):
            return -self._term()
        self._accept("+")
        return self._term()

    def _term(self) -> PolyElement:
        value = self._factor()
        while self._accept("*"):
            value = value * self._factor()
        return value

    def _factor(self) -> PolyElement:
        base = self._atom()
        if self._accept("^"):
            token = self._peek()
            if token is None or token[0] != "num" or "/" in token[1]:
                self._error("exponent must be a non-negative integer")
            self.pos += 1
            base = base ** int(token[1])
        return base

    def _atom(self) -> PolyElement:
        token = self._peek()
        if token is None:
            self._error("unexpected end of input")
        kind, text, offset = token
        if kind == "num":
            self.pos += 1
            num, _, den = text.partition("/")
            if den and int(den) == 0:
                self._error("zero denominator", offset)
            return self.ring.ground_new(QQ(int(num), int(den or 1)))
        if kind == "var":
            if text not in self.names:
                self._error(f"unknown variable {text!r}", offset)
            self.pos += 1
            return self.names[text]
        if text == "(":
            self.pos += 1
            value = self._expr()
            if not self._accept(")"):
                self._error("expected ')'")
            return value
        self._error(f"unexpected token {text!r}", offset)


def parse_poly(text: str, ring: PolyRing) -> PolyElement:
    """
    Parse polynomial text over the variables of ``ring``.

    Raises:
        ParseError: with 1-based line and column of the offending token
    """
    return _PolyParser(text, ring).parse()


def format_poly(p: PolyElement) -> str:
    """Canonical text: terms by decreasing grevlex, reduced fraction coefficients."""
    if not p:
        return "0"
    names = var_names(p.ring)
    pieces = []
    for monom, coeff in sorted(p.items(), key=lambda item: grevlex(item[0]), reverse=True):
        c = to_fraction(coeff)
        factors = [name if e == 1 else f"{name}^{e}" for name, e in zip(names, monom) if e]
        magnitude = abs(c)
        if not factors:
            body = str(magnitude)
        elif magnitude == 1:
            body = "*".join(factors)
        else:
            body = f"{magnitude}*" + "*".join(factors)
        if not pieces:
            pieces.append(f"-{body}" if c < 0 else body)
        else:
            pieces.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(pieces)


# Dense linear algebra over QQ

def qq_matrix(rows: Sequence[Sequence[RationalLike]]) -> List[List[Any]]:
    return [[to_qq(v) for v in row] for row in rows]


def _domain_matrix(rows: Sequence[Sequence[Any]]) -> DomainMatrix:
    n_rows = len(rows)
    n_cols = len(rows[0]) if n_rows else 0
    return DomainMatrix([list(r) for r in qq_matrix(rows)], (n_rows, n_cols), QQ)


def matrix_rank(rows: Sequence[Sequence[RationalLike]]) -> int:
    if not rows or not rows[0]:
        return 0
    return _domain_matrix(rows).rank()


def matrix_det(rows: Sequence[Sequence[RationalLike]]):
    if not rows:
        return QQ.one
    return _domain_matrix(rows).det()


def matrix_inverse(rows: Sequence[Sequence[RationalLike]]) -> List[List[Any]]:
    if not matrix_det(rows):
        raise DivisionByZero("matrix is singular")
    inverse = _domain_matrix(rows).inv().to_Matrix()
    return [[QQ.from_sympy(inverse[i, j]) for j in range(inverse.cols)] for i in range(inverse.rows)]


def is_symmetric(rows: Sequence[Sequence[Any]]) -> bool:
    n = len(rows)
    return all(len(r) == n for r in rows) and all(
        rows[i][j] == rows[j][i] for i in range(n) for j in range(i + 1, n)
    )
