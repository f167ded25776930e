"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 the method does not apply to the
input, 3 an internal invariant or verification check failed.
"""
from __future__ import annotations

import argparse
import json
import sys

from .engine import (
    DEFAULT_DEGREE,
    ReductionResult,
    bruno_result,
    inverse_replay,
    inverse_transform,
    lie_transform,
    lrf,
    poincare_normalize,
    prf,
    replay,
)
from .fields import bracket
from .harness import formula_checks, property_suite
from .io import DocumentError, parse, parse_log, render, render_field, render_structure
from .structure import NotQuasiLinear, UnsupportedLinearPart, analyze

EXIT_OK, EXIT_INPUT, EXIT_APPLICABILITY, EXIT_INVARIANT = 0, 1, 2, 3

SCHEMES = {"normalize": poincare_normalize, "prf": prf, "lrf": lrf, "bruno-check": bruno_result}


class InvariantViolation(RuntimeError):
    pass


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--degree", type=int, default=DEFAULT_DEGREE, help="truncation grade N (default %(default)s)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--input", help="field document (default: stdin)")
    common.add_argument("--output", help="destination (default: stdout)")

    parser = argparse.ArgumentParser(prog="nfreduce", description="Normal forms of polynomial vector fields.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("structure", parents=[common], help="centralizer, invariants and quasi-linearity of the linear part")
    for name in ("normalize", "prf", "lrf"):
        sub.add_parser(name, parents=[common], help=f"{name} reduction with generator log")
    sub.add_parser("bruno-check", parents=[common], help="orthogonality predicate per grade")
    p = sub.add_parser("bracket", parents=[common], help="Lie bracket with another field")
    p.add_argument("--other", required=True, help="second field document")
    p = sub.add_parser("transform", parents=[common], help="apply a generator or a replayable log")
    p.add_argument("--generator", required=True, help="homogeneous generator document, or a JSON result/log")
    p.add_argument("--inverse", action="store_true")
    p = sub.add_parser("verify", parents=[common], help="run the property and formula checks")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--formulas", type=int, default=25, help="planar-family instances checked against closed forms")
    return parser


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _check_commutant(result: ReductionResult) -> None:
    if result.scheme == "BRUNO-CHECK":
        return
    out = result.output
    XA = out.linear_part()
    if bracket(XA, out - XA, max_grade=result.degree):
        raise InvariantViolation(f"{result.scheme} output does not commute with its linear part")


def _is_log(text: str) -> bool:
    if not text.lstrip().startswith(("[", "{")):
        return False
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return False
    return isinstance(doc, list) or (isinstance(doc, dict) and "log" in doc)


def _transform(args) -> str:
    f = parse(_read(args.input))
    text = _read(args.generator)
    N = args.degree
    if _is_log(text):
        entries = parse_log(text, f.dim)
        g = inverse_replay(entries, f, N) if args.inverse else replay(entries, f, N)
    else:
        h = parse(text)
        if h.dim != f.dim:
            raise DocumentError(f"generator dimension {h.dim} does not match field dimension {f.dim}")
        if h and (len(h.grades()) != 1 or h.grades()[0] < 1):
            raise DocumentError("generator must be homogeneous of grade at least 1")
        g = inverse_transform(f, h, N) if args.inverse else lie_transform(f, h, N)
    return render_field(g, args.format)


def _verify(args) -> tuple[str, bool]:
    lines = property_suite(args.seed, args.trials) + formula_checks(args.seed, args.formulas)
    ok = all(line.passed for line in lines)
    if args.format == "json":
        doc = [{"pass": line.passed, "check": line.check_id, "detail": line.detail} for line in lines]
        return json.dumps({"seed": args.seed, "checks": doc}, indent=2, sort_keys=True) + "\n", ok
    header = f"seed {args.seed}\n"
    return header + "\n".join(str(line) for line in lines) + "\n", ok


def run(args) -> int:
    if args.degree < 1:
        raise DocumentError("--degree must be at least 1")
    if args.command == "verify":
        text, ok = _verify(args)
        _write(args.output, text)
        return EXIT_OK if ok else EXIT_INVARIANT
    if args.command == "transform":
        _write(args.output, _transform(args))
        return EXIT_OK
    f = parse(_read(args.input))
    if args.command == "structure":
        _write(args.output, render_structure(analyze(f.linear_matrix(), args.degree), args.format))
        return EXIT_OK
    if args.command == "bracket":
        g = parse(_read(args.other))
        if g.dim != f.dim:
            raise DocumentError(f"dimension mismatch: {f.dim} vs {g.dim}")
        _write(args.output, render_field(bracket(f, g, max_grade=args.degree), args.format))
        return EXIT_OK
    result = SCHEMES[args.command](f, args.degree)
    _check_commutant(result)
    _write(args.output, render(result, args.format))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return run(args)
    except NotQuasiLinear as exc:
        print(f"error: {exc}; try the prf subcommand instead", file=sys.stderr)
        return EXIT_APPLICABILITY
    except UnsupportedLinearPart as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_APPLICABILITY
    except DocumentError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, AssertionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
