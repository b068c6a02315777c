"""
Semi-algebraic formulas over the parameters.

Atoms are strict sign conditions on polynomials in y, count assertions
(Σ a_α·Sign(H_α(y)) compared with an integer) and signature profiles.
Connectives are AND/OR. A formula carries an exception locus on which it
makes no claim.
"""

import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.rings import PolyElement

from .exact_arith import coefficient_field, evaluate_poly, format_poly, format_rational, parse_poly, to_qq
from .exceptions import InvalidSpecialization, ParseError
from .groebner_engine import ExclusionLocus
from .hermite_forms import HermiteMatrix, signature, specialize_hermite

logger = logging.getLogger("parametric_lmi.formula")

RELATIONS = (">", ">=", "==", "!=")


class Verdict(Enum):
    TRUE = "true"
    FALSE = "false"
    EXCEPTION = "exception"


class Node(ABC):
    """A formula node; evaluation assumes the point is off the exception locus."""

    @abstractmethod
    def evaluate(self, point: Mapping[str, Any]) -> bool:
        pass

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass

    def key(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __eq__(self, other) -> bool:
        return isinstance(other, Node) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


class TrueNode(Node):
    def evaluate(self, point):
        return True

    def to_dict(self):
        return {"op": "true"}


class FalseNode(Node):
    def evaluate(self, point):
        return False

    def to_dict(self):
        return {"op": "false"}


TRUE = TrueNode()
FALSE = FalseNode()


def _compare(value, relation: str, bound) -> bool:
    if relation == ">":
        return value > bound
    if relation == ">=":
        return value >= bound
    if relation == "==":
        return value == bound
    if relation == "!=":
        return value != bound
    raise ValueError(f"Unknown relation: {relation}")


class PolyAtom(Node):
    """p(y) <relation> 0; "<" is written by negating p."""

    def __init__(self, poly: PolyElement, relation: str = ">"):
        if relation not in RELATIONS:
            raise ValueError(f"Unknown relation: {relation}")
        self.poly = poly
        self.relation = relation

    def evaluate(self, point):
        return _compare(evaluate_poly(self.poly, point), self.relation, 0)

    def to_dict(self):
        return {"op": "sign", "poly": format_poly(self.poly), "rel": self.relation}


class CountAssertion(Node):
    """Σ_α a_α·Sign(H_α(y)) <relation> value."""

    def __init__(self, matrices: Sequence[HermiteMatrix], coefficients: Sequence[Any],
                 relation: str = ">", value: int = 0):
        if len(matrices) != len(coefficients):
            raise ValueError("one coefficient per Hermite matrix is required")
        if relation not in RELATIONS:
            raise ValueError(f"Unknown relation: {relation}")
        self.matrices = tuple(matrices)
        self.coefficients = tuple(to_qq(c) for c in coefficients)
        self.relation = relation
        self.value = value

    def count_at(self, point: Mapping[str, Any]):
        total = to_qq(0)
        for H, a in zip(self.matrices, self.coefficients):
            if a:
                total = total + a * signature(specialize_hermite(H, point)).signature
        return total

    def evaluate(self, point):
        return _compare(self.count_at(point), self.relation, self.value)

    def to_dict(self):
        return {
            "op": "count",
            "rel": self.relation,
            "value": self.value,
            "coefficients": [format_rational(a) for a in self.coefficients],
            "matrices": [H.to_dict() for H in self.matrices],
        }


class SignatureProfile(Node):
    """Every H_α(y) has the listed signature."""

    def __init__(self, matrices: Sequence[HermiteMatrix], signatures: Sequence[int]):
        if len(matrices) != len(signatures):
            raise ValueError("one signature per Hermite matrix is required")
        self.matrices = tuple(matrices)
        self.signatures = tuple(int(s) for s in signatures)

    def evaluate(self, point):
        return all(signature(specialize_hermite(H, point)).signature == s
                   for H, s in zip(self.matrices, self.signatures))

    def to_dict(self):
        return {
            "op": "signatures",
            "signatures": list(self.signatures),
            "matrices": [H.to_dict() for H in self.matrices],
        }


class _Junction(Node):
    op = ""

    def __init__(self, children: Sequence[Node]):
        self.children = tuple(children)

    def to_dict(self):
        return {"op": self.op, "args": [c.to_dict() for c in self.children]}


class And(_Junction):
    op = "and"

    def evaluate(self, point):
        return all(c.evaluate(point) for c in self.children)


class Or(_Junction):
    op = "or"

    def evaluate(self, point):
        return any(c.evaluate(point) for c in self.children)


def _flatten(items: Iterable[Node], kind: type) -> List[Node]:
    seen = set()
    result = []
    for item in items:
        parts = item.children if isinstance(item, kind) else (item,)
        for part in parts:
            k = part.key()
            if k not in seen:
                seen.add(k)
                result.append(part)
    return result


def disjunction(items: Iterable[Node]) -> Node:
    """OR with constant folding and duplicate removal."""
    parts = [p for p in _flatten(items, Or) if p is not FALSE and p.key() != FALSE.key()]
    if any(p.key() == TRUE.key() for p in parts):
        return TRUE
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(parts)


def conjunction(items: Iterable[Node]) -> Node:
    """AND with constant folding and duplicate removal."""
    parts = [p for p in _flatten(items, And) if p.key() != TRUE.key()]
    if any(p.key() == FALSE.key() for p in parts):
        return FALSE
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(parts)


@dataclass
class Formula:
    """Root node plus the exception locus; ``params`` fixes the variable names."""

    root: Node
    exceptions: ExclusionLocus = field(default_factory=ExclusionLocus)
    params: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": list(self.params),
            "exceptions": self.exceptions.to_strings(),
            "root": self.root.to_dict(),
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Formula":
        params = tuple(data.get("params", ()))
        exceptions = ExclusionLocus.from_strings(data.get("exceptions", []), params)
        return cls(node_from_dict(data["root"], params), exceptions, params)

    def evaluate(self, y: Mapping[str, Any]) -> Verdict:
        return evaluate_formula(self, y)


def node_from_dict(data: Mapping[str, Any], params: Sequence[str]) -> Node:
    """
    Rebuild a node from its JSON form.

    Raises:
        ParseError: on an unknown "op" or a malformed polynomial
    """
    params = tuple(params)
    op = data.get("op")
    if op == "true":
        return TRUE
    if op == "false":
        return FALSE
    if op in ("and", "or"):
        children = [node_from_dict(c, params) for c in data.get("args", [])]
        return And(children) if op == "and" else Or(children)
    if op == "sign":
        ring = coefficient_field(params).ring if params else None
        if ring is None:
            raise ParseError("sign atoms need parameters", 1, 1, json.dumps(data))
        return PolyAtom(parse_poly(data["poly"], ring), data.get("rel", ">"))
    if op == "count":
        matrices = [HermiteMatrix.from_dict(m, params) for m in data["matrices"]]
        return CountAssertion(matrices, data["coefficients"], data.get("rel", ">"), int(data.get("value", 0)))
    if op == "signatures":
        matrices = [HermiteMatrix.from_dict(m, params) for m in data["matrices"]]
        return SignatureProfile(matrices, data["signatures"])
    raise ParseError(f"unknown formula node {op!r}", 1, 1, json.dumps(data))


def evaluate_formula(phi: Formula, y: Mapping[str, Any]) -> Verdict:
    """
    Truth value of Φ at a rational parameter point.

    Returns EXCEPTION when y zeroes an exception polynomial or hits a pole of
    a Hermite entry.
    """
    point = {name: to_qq(v) for name, v in y.items()}
    missing = [p for p in phi.params if p not in point]
    if missing:
        raise ValueError(f"no value for parameters {missing}")
    bad = phi.exceptions.vanishing_at(point)
    if bad is not None:
        logger.debug(f"Point {point} lies on the exception locus ({bad})")
        return Verdict.EXCEPTION
    try:
        return Verdict.TRUE if phi.root.evaluate(point) else Verdict.FALSE
    except InvalidSpecialization as e:
        logger.warning(f"Point {point} hit a pole not listed in the exceptions: {e}")
        return Verdict.EXCEPTION


def sign_atom(poly: PolyElement, sign: int) -> Node:
    """Strict atom p > 0 or −p > 0; zero sign is not expressible strictly."""
    if sign > 0:
        return PolyAtom(poly, ">")
    if sign < 0:
        return PolyAtom(-poly, ">")
    raise ValueError("strict atoms only")
