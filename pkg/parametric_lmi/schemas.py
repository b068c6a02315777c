"""
JSON documents read and written by the command line.

Both documents carry ``"schema": 1``. Polynomials travel as canonical
strings so files stay diffable.
"""

import json
import logging
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .exceptions import ParseError
from .formula import Formula
from .incidence_lagrange import key_to_dict
from .lmi_model import ParamLinearMatrix
from .metrics import BranchMetric

logger = logging.getLogger("parametric_lmi.schemas")

SCHEMA_VERSION = 1


class _Document(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    schema_version: int = Field(SCHEMA_VERSION, alias="schema")

    @model_validator(mode="after")
    def _known_version(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {self.schema_version}")
        return self

    def dumps(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


class InstanceFile(_Document):
    """Parametric linear matrix given by its upper triangle."""

    m: int = Field(..., ge=1)
    n: int = Field(..., ge=0)
    t: int = Field(..., ge=0)
    entries: List[List[str]]

    @model_validator(mode="after")
    def _upper_triangle(self):
        if len(self.entries) != self.m:
            raise ValueError(f"expected {self.m} rows, got {len(self.entries)}")
        for i, row in enumerate(self.entries):
            if len(row) != self.m - i:
                raise ValueError(f"row {i + 1} must hold {self.m - i} entries")
        return self

    @classmethod
    def from_matrix(cls, A: ParamLinearMatrix) -> "InstanceFile":
        return cls(m=A.m, n=A.n, t=A.t, entries=A.upper_triangle())

    def to_matrix(self) -> ParamLinearMatrix:
        """
        Raises:
            ParseError: when an entry does not parse or is not affine in x
        """
        try:
            return ParamLinearMatrix.from_entries(self.entries, self.n, self.t)
        except ParseError:
            raise
        except ValueError as e:
            raise ParseError(str(e)) from e


class BranchDiagnostics(BaseModel):
    r: int
    iota: List[int]
    i: int
    delta: Optional[int] = None
    zero_dimensional: bool = False
    saturation: str = "off"
    entries: int = 0
    error: Optional[str] = None
    attempt: int = 0
    fiber_counted: bool = False

    @classmethod
    def from_metric(cls, metric: BranchMetric) -> "BranchDiagnostics":
        return cls(**metric.to_dict())


class ResultFile(_Document):
    """Classification output; replaying ``seed`` reproduces everything except ``timings``."""

    instance: str
    seed: int
    option: str
    sound: bool
    attempts: int
    M: List[List[str]]
    tau: List[str]
    formula: Dict[str, Any]
    exceptions: List[str] = Field(default_factory=list)
    entries: List[Dict[str, Any]] = Field(default_factory=list)
    branches: List[BranchDiagnostics] = Field(default_factory=list)
    failed_branches: List[Dict[str, Any]] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_solve_result(cls, A: ParamLinearMatrix, result) -> "ResultFile":
        """Build from a SolveResult."""
        entries = [
            {"branch": key_to_dict(key), "entries": [e.to_dict() for e in items]}
            for key, items in sorted(result.entries.items())
        ]
        formula = result.formula.to_dict()
        return cls(
            instance=A.digest(),
            seed=result.seed,
            option=result.option,
            sound=result.sound,
            attempts=result.attempts,
            M=result.M.to_strings(),
            tau=[str(v) for v in result.tau],
            formula=formula,
            exceptions=formula["exceptions"],
            entries=entries,
            branches=[BranchDiagnostics.from_metric(m) for m in result.metrics.branches()],
            failed_branches=[key_to_dict(k) for k in result.failed],
            timings=result.metrics.timings(),
        )

    def to_formula(self) -> Formula:
        return Formula.from_dict(self.formula)


def _load(model: type, text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno, text) from e
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "document"
        raise ParseError(f"{where}: {first['msg']}", 1, 1, text) from e


def load_instance(text: str) -> InstanceFile:
    """
    Raises:
        ParseError: malformed JSON or a document not matching the schema
    """
    return _load(InstanceFile, text)


def load_result(text: str) -> ResultFile:
    return _load(ResultFile, text)
