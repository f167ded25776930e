"""Field documents and deterministic rendering.

Two input forms are accepted. The JSON document::

    {"dimension": 2,
     "linear": [["0", "0"], ["0", "1"]],
     "terms": [{"component": 1, "exponents": [3, 0], "coeff": "1"}]}

keeps the linear part in ``linear`` and only nonlinear monomials in
``terms``. The line form has a ``dim n`` header followed by terms such as
``-1/2 * x1^2 x2 d_2`` (one or more per line, joined by `` + ``); linear
terms are allowed there. Rationals are always strings, never floats.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction

from .engine import GeneratorLogEntry, ReductionResult
from .fields import PolyVectorField, format_field, format_monomial, format_polynomial
from .structure import StructureReport


class DocumentError(ValueError):
    """Malformed field document."""


_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")
_FACTOR = re.compile(r"^x(\d+)(\^(\d+))?$")
_COMPONENT = re.compile(r"^d_(\d+)$")


def parse_rational(text) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise DocumentError(f"malformed rational {text!r}")
    s = str(text).strip()
    if not _RATIONAL.match(s):
        raise DocumentError(f"malformed rational {text!r}")
    try:
        return Fraction(s)
    except ZeroDivisionError:
        raise DocumentError(f"malformed rational {text!r}: zero denominator") from None


def format_rational(c: Fraction) -> str:
    """Lowest-terms string, ``"p/q"`` or ``"p"`` for integers."""
    return str(Fraction(c))


def _put(terms: dict, key, c: Fraction) -> None:
    if key in terms:
        comp, mu = key
        raise DocumentError(f"duplicate term for component {comp + 1}, exponents {list(mu)}")
    terms[key] = c


def _from_mapping(doc) -> PolyVectorField:
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    n = doc.get("dimension")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DocumentError("dimension must be a positive integer")
    terms: dict = {}
    linear = doc.get("linear", [[0] * n for _ in range(n)])
    if not isinstance(linear, list) or len(linear) != n or any(not isinstance(r, list) or len(r) != n for r in linear):
        raise DocumentError(f"linear must be a {n}x{n} array")
    for i, row in enumerate(linear):
        for j, v in enumerate(row):
            c = parse_rational(v)
            if c:
                mu = tuple(1 if t == j else 0 for t in range(n))
                terms[(i, mu)] = c
    entries = doc.get("terms", [])
    if not isinstance(entries, list):
        raise DocumentError("terms must be a list")
    for t in entries:
        if not isinstance(t, dict) or set(t) - {"component", "exponents", "coeff"}:
            raise DocumentError(f"malformed term {t!r}")
        comp = t.get("component")
        if isinstance(comp, bool) or not isinstance(comp, int) or not 1 <= comp <= n:
            raise DocumentError(f"component must be an integer in 1..{n}, got {comp!r}")
        mu = t.get("exponents")
        if not isinstance(mu, list) or any(isinstance(m, bool) or not isinstance(m, int) or m < 0 for m in mu):
            raise DocumentError(f"exponents must be a list of non-negative integers, got {mu!r}")
        if len(mu) != n:
            raise DocumentError(f"exponent list {mu} has arity {len(mu)}, expected {n}")
        if sum(mu) < 2:
            raise DocumentError(f"term of degree {sum(mu)} in terms; linear content belongs in 'linear'")
        c = parse_rational(t.get("coeff"))
        _put(terms, (comp - 1, tuple(mu)), c)
    return PolyVectorField(n, terms)


def _parse_term(text: str, n: int):
    if "*" not in text:
        raise DocumentError(f"malformed term {text!r}: expected 'coeff * monomial d_i'")
    coeff, rest = (s.strip() for s in text.split("*", 1))
    c = parse_rational(coeff)
    tokens = rest.split()
    if not tokens or not _COMPONENT.match(tokens[-1]):
        raise DocumentError(f"malformed term {text!r}: missing component 'd_i'")
    comp = int(_COMPONENT.match(tokens[-1]).group(1))
    if not 1 <= comp <= n:
        raise DocumentError(f"component {comp} out of range 1..{n}")
    mu = [0] * n
    for tok in tokens[:-1]:
        if tok == "1":
            continue
        m = _FACTOR.match(tok)
        if not m:
            raise DocumentError(f"malformed factor {tok!r}")
        i = int(m.group(1))
        if not 1 <= i <= n:
            raise DocumentError(f"variable x{i} out of range for dimension {n}")
        mu[i - 1] += int(m.group(3) or 1)
    if sum(mu) == 0:
        raise DocumentError(f"constant term {text!r}; fields must vanish at the origin")
    return (comp - 1, tuple(mu)), c


def _from_lines(text: str) -> PolyVectorField:
    n = None
    terms: dict = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "dim" or not parts[1].isdigit() or int(parts[1]) < 1:
                raise DocumentError("line form must start with 'dim n'")
            n = int(parts[1])
            continue
        if line == "0":
            continue
        for chunk in re.split(r"\s\+\s", line):
            key, c = _parse_term(chunk, n)
            _put(terms, key, c)
    if n is None:
        raise DocumentError("empty document")
    return PolyVectorField(n, terms)


def parse(text: str) -> PolyVectorField:
    """Parse a JSON field document or the line form into a canonical field."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"invalid JSON: {exc}") from None
        return _from_mapping(doc)
    return _from_lines(text)


def field_document(f: PolyVectorField) -> dict:
    n = f.dim
    linear = [[format_rational(Fraction(c)) for c in row] for row in f.linear_matrix()]
    terms = [
        {"component": comp + 1, "exponents": list(mu), "coeff": format_rational(c)}
        for (comp, mu), c in f.items()
        if sum(mu) >= 2
    ]
    if any(sum(mu) == 0 for (_, mu) in f.terms):
        raise DocumentError("constant terms cannot be serialized")
    return {"dimension": n, "linear": linear, "terms": terms}


def field_text(f: PolyVectorField) -> str:
    lines = [f"dim {f.dim}"]
    lines.extend(f"{c} * {format_monomial(mu)} d_{comp + 1}" for (comp, mu), c in f.items())
    return "\n".join(lines) + "\n"


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def log_document(entries) -> list[dict]:
    return [{"step": e.step_label, "grade": e.grade, "generator": field_document(e.generator)} for e in entries]


def parse_log(entries, dim: int | None = None) -> list[GeneratorLogEntry]:
    """Generator log from its JSON form (a list, or a rendered result holding ``log``)."""
    if isinstance(entries, str):
        try:
            entries = json.loads(entries)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"invalid JSON: {exc}") from None
    if isinstance(entries, dict):
        entries = entries.get("log")
    if not isinstance(entries, list):
        raise DocumentError("generator log must be a list")
    out = []
    for e in entries:
        if not isinstance(e, dict) or not {"step", "grade", "generator"} <= set(e):
            raise DocumentError(f"malformed log entry {e!r}")
        g = _from_mapping(e["generator"])
        if dim is not None and g.dim != dim:
            raise DocumentError(f"generator dimension {g.dim} does not match field dimension {dim}")
        if not isinstance(e["grade"], int) or (g and g.grades() != [e["grade"]]):
            raise DocumentError(f"generator is not homogeneous of grade {e['grade']}")
        out.append(GeneratorLogEntry(str(e["step"]), e["grade"], g))
    return out


def render(result: ReductionResult, fmt: str = "text") -> str:
    """Deterministic rendering of a reduction result."""
    if fmt == "json":
        return _dumps(
            {
                "scheme": result.scheme,
                "degree": result.degree,
                "input": field_document(result.input),
                "output": field_document(result.output),
                "log": log_document(result.log),
                "diagnostics": list(result.diagnostics),
            }
        )
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"scheme: {result.scheme}", f"degree: {result.degree}"]
    lines.extend(f"diagnostic: {d}" for d in result.diagnostics)
    lines.append(f"generators: {len(result.log)}")
    for e in result.log:
        lines.append(f"  [{e.step_label}] grade {e.grade}: {format_field(e.generator)}")
    lines.append("output:")
    lines.append(field_text(result.output).rstrip("\n"))
    return "\n".join(lines) + "\n"


def render_field(f: PolyVectorField, fmt: str = "text") -> str:
    if fmt == "json":
        return _dumps(field_document(f))
    return field_text(f)


def _matrix_text(M) -> str:
    return "[" + "; ".join(" ".join(str(c) for c in row) for row in M.rows) + "]"


def render_structure(report: StructureReport, fmt: str = "text") -> str:
    ql = {str(k): v for k, v in sorted(report.quasi_linear.items())}
    if fmt == "json":
        return _dumps(
            {
                "linear": [[format_rational(Fraction(c)) for c in row] for row in report.A.rows],
                "degree": report.degree,
                "centralizer": [[[format_rational(Fraction(c)) for c in row] for row in K.rows] for K in report.centralizer_basis],
                "ideal_indices": report.ideal_indices,
                "mover_indices": report.mover_indices,
                "invariant_generators": [format_polynomial(p) for p in report.invariant_generators],
                "quasi_linear": ql,
                "dcs_dimensions": [len(c) for c in report.dcs_chain],
                "nilpotent": report.nilpotent,
            }
        )
    lines = [f"linear part: {_matrix_text(report.A)}", f"degree: {report.degree}"]
    lines.append(f"centralizer dimension: {len(report.centralizer_basis)}")
    for i, K in enumerate(report.centralizer_basis):
        role = "ideal" if i in report.ideal_indices else "mover"
        lines.append(f"  K{i} ({role}): {_matrix_text(K)}")
    lines.append(f"invariant generators: {len(report.invariant_generators)}")
    for p in report.invariant_generators:
        lines.append(f"  {format_polynomial(p)}")
    lines.append("quasi-linear by grade: " + ", ".join(f"{k}:{'yes' if v else 'no'}" for k, v in ql.items()))
    lines.append(f"descending central series dimensions: {[len(c) for c in report.dcs_chain]}")
    lines.append(f"nilpotent: {report.nilpotent}")
    return "\n".join(lines) + "\n"
