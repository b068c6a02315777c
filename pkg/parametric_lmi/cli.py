"""
Command line for parametric_lmi.

    parametric-lmi classify INSTANCE [--option assertion|minors|cells] [--out FILE]
        [--store file|redis] [--cache FILE] [--redis-url URL]
    parametric-lmi decide INSTANCE
    parametric-lmi check INSTANCE RESULT --grid a:b:step
    parametric-lmi sos2lmi POLYFILE --monomials 1,x1*x2,...
    parametric-lmi bounds m r d n t [--json]

Exit codes: 0 success or feasible, 1 infeasible or check disagreement,
2 usage, 3 parse error, 4 genericity failure, 5 resource limit,
6 polynomial not representable.
"""

import argparse
import json
import logging
import re
import sys
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .bounds import BoundInput, bounds_table
from .config import OPTIONS, STORE_FILE, STORE_REDIS, SolverConfig, StoreSettings
from .exact_arith import format_rational, make_ring, param_names, parse_poly, primal_names
from .exceptions import GenericityFailure, NotRepresentable, ParseError, ResourceLimit
from .formula import Verdict
from .limits import SATURATION_OFF, SATURATION_RABINOWITSCH
from .lmi_decide import decide_lmi
from .lmi_model import ParamLinearMatrix, sos_to_lmi, specialize_params
from .result_store import ResultStore, create_store, result_key
from .schemas import InstanceFile, ResultFile, load_instance, load_result
from .sign_classification import parametric_solve_lmi

logger = logging.getLogger("parametric_lmi.cli")

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_GENERICITY = 4
EXIT_RESOURCE = 5
EXIT_NOT_REPRESENTABLE = 6

_VAR_RE = re.compile(r"\b([xy])(\d+)\b")


class UsageError(Exception):
    """Arguments are well-formed for argparse but not for the command."""


def _write_text(path: Optional[Path], text: str) -> None:
    if path is None:
        print(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")


def _read_instance(path: Path) -> ParamLinearMatrix:
    return load_instance(path.read_text(encoding="utf-8")).to_matrix()


def _config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig.from_env(
        seed=args.seed,
        option=getattr(args, "option", None),
        max_retries=args.max_retries,
        jobs=args.jobs,
        saturation=SATURATION_RABINOWITSCH if getattr(args, "saturate", False) else SATURATION_OFF,
    )


def _store(args: argparse.Namespace) -> Optional[ResultStore]:
    try:
        settings = StoreSettings.from_env(
            kind=args.store,
            path=str(args.cache) if args.cache else None,
            redis_url=args.redis_url,
        )
    except ValueError as e:
        raise UsageError(str(e))
    return create_store(settings)


def parse_grid(spec: str) -> List[Fraction]:
    """
    "a:b:step" as exact rationals a, a + step, ... up to b.

    Raises:
        UsageError: on a malformed grid or a non-positive step
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {spec!r} must look like a:b:step")
    try:
        lower, upper, step = (Fraction(p) for p in parts)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"grid {spec!r} holds a non-rational bound")
    if step <= 0:
        raise UsageError("grid step must be positive")
    points = []
    value = lower
    while value <= upper:
        points.append(value)
        value += step
    return points


def parse_point(spec: str) -> List[Fraction]:
    try:
        return [Fraction(p) for p in spec.split(",")]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"point {spec!r} must be comma separated rationals")


def cmd_classify(args: argparse.Namespace) -> int:
    A = _read_instance(args.instance)
    if A.t < 1:
        raise UsageError("instance has no parameters; use the decide command")
    config = _config(args)
    store = _store(args)

    def compute() -> ResultFile:
        try:
            result = parametric_solve_lmi(A, config)
        except GenericityFailure as e:
            if e.partial is not None:
                _write_text(args.out, ResultFile.from_solve_result(A, e.partial).dumps())
            raise
        return ResultFile.from_solve_result(A, result)

    if store is None:
        document = compute()
    else:
        document, _ = store.fetch_or_compute(result_key(A.digest(), config), compute)
    _write_text(args.out, document.dumps())
    return EXIT_OK


def cmd_decide(args: argparse.Namespace) -> int:
    A = _read_instance(args.instance)
    if A.t != 0:
        raise UsageError("instance has parameters; use the classify command")
    report = decide_lmi(A, _config(args))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print("feasible" if report.feasible else "infeasible")
    return EXIT_OK if report.feasible else EXIT_NEGATIVE


def check_points(A: ParamLinearMatrix, document: ResultFile, points: Sequence[Sequence[Fraction]],
                 config: SolverConfig) -> Dict[str, Any]:
    """Compare the stored formula with a fresh decision at every point off the exception locus."""
    if document.instance != A.digest():
        raise UsageError("result file was computed for a different instance")
    phi = document.to_formula()
    skipped: List[List[str]] = []
    disagreements: List[Dict[str, Any]] = []
    undecided: List[List[str]] = []
    checked = 0
    for y in points:
        label = [format_rational(v) for v in y]
        verdict = phi.evaluate(dict(zip(A.y_names, y)))
        if verdict is Verdict.EXCEPTION:
            logger.warning(f"Skipping {label}: on the exception locus")
            skipped.append(label)
            continue
        try:
            truth = decide_lmi(specialize_params(A, y), config).feasible
        except GenericityFailure as e:
            logger.warning(f"No decision at {label}: {e}")
            undecided.append(label)
            continue
        checked += 1
        if truth != (verdict is Verdict.TRUE):
            disagreements.append({"point": label, "formula": verdict.value, "decide": truth})
    agreement = 100.0 if checked == 0 else round(100.0 * (checked - len(disagreements)) / checked, 2)
    return {
        "points": len(points),
        "checked": checked,
        "agreement": agreement,
        "skipped_exceptions": skipped,
        "undecided": undecided,
        "disagreements": disagreements,
    }


def cmd_check(args: argparse.Namespace) -> int:
    A = _read_instance(args.instance)
    document = load_result(args.result.read_text(encoding="utf-8"))
    points: List[List[Fraction]] = []
    if args.grid:
        if len(args.grid) != A.t:
            raise UsageError(f"need one --grid per parameter ({A.t})")
        points.extend(list(p) for p in product(*(parse_grid(g) for g in args.grid)))
    for spec in args.point or []:
        point = parse_point(spec)
        if len(point) != A.t:
            raise UsageError(f"point {spec!r} needs {A.t} coordinates")
        points.append(point)
    if not points:
        raise UsageError("give at least one --grid or --point")
    report = check_points(A, document, points, _config(args))
    _write_text(args.out, json.dumps(report, indent=2))
    return EXIT_OK if not report["disagreements"] else EXIT_NEGATIVE


def cmd_sos2lmi(args: argparse.Namespace) -> int:
    text = args.polynomial.read_text(encoding="utf-8").strip()
    n = t = 0
    for kind, index in _VAR_RE.findall(text + " " + args.monomials):
        if kind == "x":
            n = max(n, int(index))
        else:
            t = max(t, int(index))
    ring = make_ring(primal_names(n), param_names(t))
    p = parse_poly(text, ring)
    beta = [m.strip() for m in args.monomials.split(",") if m.strip()]
    A = sos_to_lmi(p, beta)
    _write_text(args.out, InstanceFile.from_matrix(A).dumps())
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    try:
        inp = BoundInput(args.m, args.r, args.d, args.n, args.t)
    except ValueError as e:
        raise UsageError(str(e))
    table = bounds_table(inp)
    if args.json:
        print(json.dumps(table, indent=2))
    else:
        width = max(len(k) for k in table)
        for name, value in table.items():
            print(f"{name:<{width}}  {value}")
    return EXIT_OK


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-retries", dest="max_retries", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None, help="worker threads (default: CPU count)")
    parser.add_argument("--saturate", action="store_true", help="saturate the rank-defect locus on every branch")


def _parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="parametric-lmi",
        description="Exact feasibility of (parametric) linear matrix inequalities.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    classify = commands.add_parser("classify", help="formula for the feasible parameters")
    classify.add_argument("instance", type=Path)
    classify.add_argument("--option", choices=OPTIONS, default="assertion")
    classify.add_argument("--out", type=Path)
    classify.add_argument("--store", choices=(STORE_FILE, STORE_REDIS), help="cache backend for results")
    classify.add_argument("--cache", type=Path, help="JSON file of previously computed results (implies --store file)")
    classify.add_argument("--redis-url", dest="redis_url", help="Redis URL for --store redis")
    _add_solver_flags(classify)
    classify.set_defaults(handler=cmd_classify)

    decide = commands.add_parser("decide", help="feasibility of an instance without parameters")
    decide.add_argument("instance", type=Path)
    decide.add_argument("--json", action="store_true")
    _add_solver_flags(decide)
    decide.set_defaults(handler=cmd_decide)

    check = commands.add_parser("check", help="compare a result file with decide on parameter points")
    check.add_argument("instance", type=Path)
    check.add_argument("result", type=Path)
    check.add_argument("--grid", action="append", help="a:b:step, once per parameter")
    check.add_argument("--point", action="append", help="comma separated parameter values")
    check.add_argument("--out", type=Path)
    _add_solver_flags(check)
    check.set_defaults(handler=cmd_check)

    sos = commands.add_parser("sos2lmi", help="Gram matrix LMI of a polynomial")
    sos.add_argument("polynomial", type=Path)
    sos.add_argument("--monomials", required=True, help="comma separated basis monomials")
    sos.add_argument("--out", type=Path)
    sos.set_defaults(handler=cmd_sos2lmi)

    bounds = commands.add_parser("bounds", help="degree bounds for given sizes")
    for name in ("m", "r", "d", "n", "t"):
        bounds.add_argument(name, type=int)
    bounds.add_argument("--json", action="store_true")
    bounds.set_defaults(handler=cmd_bounds)
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except GenericityFailure as e:
        print(f"genericity failure: {e}", file=sys.stderr)
        return EXIT_GENERICITY
    except ResourceLimit as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except NotRepresentable as e:
        print(f"not representable: {e}", file=sys.stderr)
        return EXIT_NOT_REPRESENTABLE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
