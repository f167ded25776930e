"""Normalization and further-reduction algorithms.

Every scheme is a sequence of Lie transforms ``f -> exp(ad h) f`` with
homogeneous generators; the ordered generators form a log that replays the
reduction exactly (all statements hold modulo grades above ``N``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .fields import (
    PolyVectorField,
    bracket,
    exponent_factorial,
    field_sum,
    linear_combination,
)
from .linalg import RationalMatrix, canonical_basis, nullspace, project, solve_min_norm
from .structure import NotQuasiLinear, StructureContext, canonical_fields

DEFAULT_DEGREE = 6
# inner product used for Bruno's adjoint operators
BRUNO_INNER_PRODUCT = "bargmann"


@dataclass(frozen=True)
class GeneratorLogEntry:
    step_label: str
    grade: int
    generator: PolyVectorField


@dataclass
class ReductionResult:
    input: PolyVectorField
    output: PolyVectorField
    degree: int
    log: list[GeneratorLogEntry]
    scheme: str
    diagnostics: list[str] = field(default_factory=list)


def lie_transform(f: PolyVectorField, h: PolyVectorField, N: int) -> PolyVectorField:
    """``exp(ad h) f`` truncated at grade ``N``; ``h`` homogeneous of grade >= 1."""
    if f.dim != h.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {h.dim}")
    f = f.truncate(N)
    if not h:
        return f
    grades = h.grades()
    if len(grades) != 1:
        raise ValueError("generator must be homogeneous")
    if grades[0] < 1:
        raise ValueError("generator grade must be at least 1")
    out = [f]
    term = f
    s = 0
    while term:
        s += 1
        term = bracket(h, term, max_grade=N).scale(Fraction(1, s))
        out.append(term)
    return field_sum(out, f.dim)


def inverse_transform(f: PolyVectorField, h: PolyVectorField, N: int) -> PolyVectorField:
    return lie_transform(f, -h, N)


def replay(entries, f: PolyVectorField, N: int) -> PolyVectorField:
    for e in entries:
        if e.generator.dim != f.dim:
            raise ValueError("generator dimension mismatch")
        if e.generator and e.generator.grades() != [e.grade]:
            raise ValueError(f"generator grade does not match logged grade {e.grade}")
        f = lie_transform(f, e.generator, N)
    return f.truncate(N)


def inverse_replay(entries, g: PolyVectorField, N: int) -> PolyVectorField:
    for e in reversed(list(entries)):
        g = inverse_transform(g, e.generator, N)
    return g.truncate(N)


def _context(f: PolyVectorField, N: int) -> StructureContext:
    return StructureContext(f.linear_matrix(), N)


def poincare_normalize(f: PolyVectorField, N: int = DEFAULT_DEGREE, ctx: StructureContext | None = None) -> ReductionResult:
    """Remove every non-resonant term grade by grade.

    At grade ``k`` the generator solves ``L0(h_k) = r_k`` where ``r_k`` is the
    range component of the current ``f_k``; among solutions the one
    Bargmann-orthogonal to ``Ker(L0)`` is taken.
    """
    ctx = ctx or _context(f, N)
    entries = []
    g = f.truncate(N)
    for k in range(1, N + 1):
        fk = g.grade(k)
        if not fk:
            continue
        op = ctx.operator(k)
        _, ran = op.split_field(fk)
        if not ran:
            continue
        h = op.solve_field(ran)
        g = lie_transform(g, h, N)
        entries.append(GeneratorLogEntry("NF", k, h))
    diagnostics = []
    if not any(any(r) for r in ctx.A.rows):
        diagnostics.append("experimental: vanishing linear part")
    return ReductionResult(f, g, N, entries, "NF", diagnostics)


def _gram_diag(keys) -> list[int]:
    return [exponent_factorial(k[1]) for k in keys]


def _keys_of(fields) -> list:
    return sorted({k for f in fields for k in f.terms}, key=lambda k: (sum(k[1]), k[0], k[1]))


def _solve_round_step(C: list[PolyVectorField], images: list[PolyVectorField], target: PolyVectorField, n: int):
    """Generator in span(C) cancelling the range component of ``target``.

    ``images[i]`` is the operator applied to ``C[i]``. Returns ``None`` when
    nothing in ``target`` lies in the range.
    """
    if not target or not any(images):
        return None
    keys = _keys_of(images + [target])
    cols = [[im.terms.get(k, Fraction(0)) for k in keys] for im in images]
    weights = _gram_diag(keys)
    ran = canonical_basis(cols, len(keys))
    w = [target.terms.get(k, Fraction(0)) for k in keys]
    elim = project(ran, w, weights)
    if not any(elim):
        return None
    M = RationalMatrix.from_columns(cols, len(keys))
    dkeys = _keys_of(C)
    dw = _gram_diag(dkeys)
    dvec = [[c.terms.get(k, Fraction(0)) for k in dkeys] for c in C]
    G = RationalMatrix(
        [[sum((x * y * g for x, y, g in zip(a, b, dw)), Fraction(0)) for b in dvec] for a in dvec], len(C)
    )
    coeffs = solve_min_norm(M, [-v for v in elim], G)
    if coeffs is None:
        raise AssertionError("projected right-hand side is outside the range")
    return linear_combination(coeffs, C, n)


def _kernel_within(C: list[PolyVectorField], images: list[PolyVectorField], n: int) -> list[PolyVectorField]:
    if not C:
        return []
    if not any(images):
        return C
    keys = _keys_of(images)
    M = RationalMatrix([[im.terms.get(k, Fraction(0)) for im in images] for k in keys], len(C))
    return canonical_fields([linear_combination(v, C, n) for v in nullspace(M)], n)


def _renormalize(
    g: PolyVectorField,
    N: int,
    spaces: dict[int, list[PolyVectorField]],
    component: Callable[[PolyVectorField, int], PolyVectorField],
    label: str,
    entries: list,
    diagnostics: list,
) -> PolyVectorField:
    """Iterated restricted homological reduction.

    ``component(w, t)`` extracts the part of a grade-``t`` resonant field the
    scheme acts on (all of it for PRF, the mover or ideal part for LRF).
    Round ``j`` brackets generators from the current constraint spaces
    against the whole term of grade ``p_j``, the next grade where the field
    is nonzero; the constraint spaces then shrink to the kernel of that
    operator.
    """
    n = g.dim
    spaces = {k: list(v) for k, v in spaces.items()}
    chain = []
    p = 0
    j = 0
    while True:
        p = next((t for t in range(p + 1, N) if g.grade(t)), None)
        if p is None or not any(spaces.get(k) for k in range(1, N - p + 1)):
            break
        Wp = g.grade(p)
        for k in range(1, N - p + 1):
            C = spaces.get(k)
            if not C:
                continue
            t = p + k
            images = [component(bracket(c, Wp), t) for c in C]
            h = _solve_round_step(C, images, component(g.grade(t), t), n)
            if h is None:
                continue
            g = lie_transform(g, h, N)
            entries.append(GeneratorLogEntry(f"{label}:j={j}", k, h))
        for k in range(1, N - p + 1):
            C = spaces.get(k)
            if C:
                spaces[k] = _kernel_within(C, [component(bracket(c, Wp), p + k) for c in C], n)
        chain.append(p)
        j += 1
    diagnostics.append(f"{label} orders p_j: {', '.join(map(str, chain)) or 'none'}")
    return g


def prf(f: PolyVectorField, N: int = DEFAULT_DEGREE) -> ReductionResult:
    """Poincare renormalized form: normalize, then run the restricted rounds."""
    ctx = _context(f, N)
    nf = poincare_normalize(f, N, ctx)
    entries = list(nf.log)
    diagnostics = list(nf.diagnostics)
    spaces = {k: ctx.kernel(k) for k in range(1, N)}
    out = _renormalize(nf.output, N, spaces, lambda w, t: w, "PRF", entries, diagnostics)
    return ReductionResult(f, out, N, entries, "PRF", diagnostics)


def lrf(f: PolyVectorField, N: int = DEFAULT_DEGREE) -> ReductionResult:
    """Lie renormalized form.

    Phase one reduces the mover part (the quotient by the annihilating ideal)
    with mover generators; phase two reduces with ideal generators, which
    cannot disturb mover terms.
    """
    ctx = _context(f, N)
    report = ctx.report
    bad = report.first_failure
    if bad is not None:
        raise NotQuasiLinear(N, bad)
    for k in range(1, N + 1):
        if not ctx.check_direct_sum(k):
            raise NotQuasiLinear(N, k, "mover and ideal modules overlap")
    nf = poincare_normalize(f, N, ctx)
    entries = list(nf.log)
    diagnostics = list(nf.diagnostics)
    diagnostics.append(
        f"centralizer: {len(report.mover_indices)} mover, {len(report.ideal_indices)} ideal generators"
    )

    def mover_part(w, t):
        return ctx.split_modules(w, t)[0] if w else w

    def ideal_part(w, t):
        return ctx.split_modules(w, t)[1] if w else w

    g = _renormalize(
        nf.output, N, {k: ctx.modules(k)[0] for k in range(1, N)}, mover_part, "LRF:mover", entries, diagnostics
    )
    g = _renormalize(
        g, N, {k: ctx.modules(k)[1] for k in range(1, N)}, ideal_part, "LRF:ideal", entries, diagnostics
    )
    for name, part in (("mover", mover_part), ("ideal", ideal_part)):
        low = next((t for t in range(1, N + 1) if part(g.grade(t), t)), None)
        diagnostics.append(f"lowest {name} grade: {low if low is not None else 'none'}")
    return ReductionResult(f, g, N, entries, "LRF", diagnostics)


def bruno_psi(f: PolyVectorField, m: int, H: PolyVectorField) -> PolyVectorField:
    """``Psi_m(H) = -(L_0 + ... + L_m)(H)`` with ``L_k = {f_k, .}``."""
    if m < 0:
        raise ValueError("m must be non-negative")
    return -bracket(f.truncate(m), H)


def bruno_check(f: PolyVectorField, N: int = DEFAULT_DEGREE) -> dict[int, bool]:
    """Per grade ``k``: is ``f_k`` orthogonal to the grade-``k`` image of ``Psi_{k-1}``?

    The grade-``k`` image is the sum over ``p < k`` of ``L_p(V_{k-p})``, so the
    predicate is ``L_p^+ f_k = 0`` for every ``p < k``.
    """
    from .fields import _inner_unchecked, grade_basis

    out = {}
    for k in range(1, N + 1):
        fk = f.grade(k)
        ok = True
        if fk:
            for p in range(k):
                fp = f.grade(p)
                if not fp:
                    continue
                for key in grade_basis(f.dim, k - p):
                    e = PolyVectorField._raw(f.dim, {key: Fraction(1)})
                    if _inner_unchecked(fk, bracket(fp, e)):
                        ok = False
                        break
                if not ok:
                    break
        out[k] = ok
    return out


def bruno_result(f: PolyVectorField, N: int = DEFAULT_DEGREE) -> ReductionResult:
    verdict = bruno_check(f, N)
    diag = [f"grade {k}: {'orthogonal' if ok else 'not orthogonal'}" for k, ok in verdict.items()]
    diag.append(f"inner product: {BRUNO_INNER_PRODUCT}")
    return ReductionResult(f, f.truncate(N), N, [], "BRUNO-CHECK", diag)
