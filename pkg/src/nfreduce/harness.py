"""Worked-example families, closed-form coefficient oracles and property checks.

Symbolic constants are replaced by seeded random rationals; every comparison
is an exact equality.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .engine import (
    DEFAULT_DEGREE,
    ReductionResult,
    bruno_check,
    bruno_psi,
    inverse_replay,
    lrf,
    poincare_normalize,
    prf,
    replay,
)
from .fields import PolyVectorField, ScalarPolynomial, apply_linear, bracket, field_sum, monomials
from .linalg import RationalMatrix, rank, solve
from .structure import NotQuasiLinear

# ---------------------------------------------------------------- families


def ex3_X(k: int) -> PolyVectorField:
    """``x^{k+1} d_x`` in the plane."""
    return PolyVectorField(2, {(0, (k + 1, 0)): 1})


def ex3_Y(k: int) -> PolyVectorField:
    """``x^k y d_y`` in the plane."""
    return PolyVectorField(2, {(1, (k, 1)): 1})


EX3_A = [[0, 0], [0, 1]]


def ex3_field(a: dict[int, Fraction], b: dict[int, Fraction]) -> PolyVectorField:
    """``Y_0 + sum a_k X_k + b_k Y_k``."""
    parts = [ex3_Y(0)]
    parts += [ex3_X(k).scale(c) for k, c in a.items()]
    parts += [ex3_Y(k).scale(c) for k, c in b.items()]
    return field_sum(parts, 2)


def ex3_slots(N: int) -> dict[str, PolyVectorField]:
    slots = {"Y0": ex3_Y(0)}
    for k in range(1, N + 1):
        slots[f"X{k}"] = ex3_X(k)
        slots[f"Y{k}"] = ex3_Y(k)
    return slots


EX1_A = [[0, -1, 0], [1, 0, 0], [0, 0, -1]]


def _sumsq(n: int, i: int, j: int) -> ScalarPolynomial:
    return ScalarPolynomial.variable(n, i) ** 2 + ScalarPolynomial.variable(n, j) ** 2


def ex1_X(k: int) -> PolyVectorField:
    """``Psi^k (x d_x + y d_y)`` with ``Psi = x^2 + y^2``."""
    return (_sumsq(3, 0, 1) ** k).times_field(apply_linear([[1, 0, 0], [0, 1, 0], [0, 0, 0]]))


def ex1_Y(k: int) -> PolyVectorField:
    """``Psi^k (-y d_x + x d_y)``."""
    return (_sumsq(3, 0, 1) ** k).times_field(apply_linear([[0, -1, 0], [1, 0, 0], [0, 0, 0]]))


def ex1_Z(k: int) -> PolyVectorField:
    """``Psi^k z d_z``."""
    return (_sumsq(3, 0, 1) ** k).times_field(apply_linear([[0, 0, 0], [0, 0, 0], [0, 0, 1]]))


def ex1_field(a: dict, b: dict, c: dict) -> PolyVectorField:
    parts = [apply_linear(EX1_A)]
    parts += [ex1_X(k).scale(v) for k, v in a.items()]
    parts += [ex1_Y(k).scale(v) for k, v in b.items()]
    parts += [ex1_Z(k).scale(v) for k, v in c.items()]
    return field_sum(parts, 3)


def ex1_slots(K: int) -> dict[str, PolyVectorField]:
    slots = {}
    for k in range(0, K + 1):
        slots[f"X{k}"] = ex1_X(k)
        slots[f"Y{k}"] = ex1_Y(k)
        slots[f"Z{k}"] = ex1_Z(k)
    return slots


_I2 = [[1, 0], [0, 1]]
_J2 = [[0, -1], [1, 0]]


def _blocks(top, bottom) -> list[list[int]]:
    z = [[0, 0], [0, 0]]
    top = top or z
    bottom = bottom or z
    return [top[0] + [0, 0], top[1] + [0, 0], [0, 0] + bottom[0], [0, 0] + bottom[1]]


EX2_M = {
    1: _blocks(_I2, None),
    2: _blocks(None, _I2),
    3: _blocks(_J2, None),
    4: _blocks(None, _J2),
}


def ex2_A(alpha: int = 1, beta: int = 13) -> list[list[int]]:
    """Two rotation blocks; a large integer frequency ratio keeps extra
    resonances above the working degree."""
    return _blocks([[0, -alpha], [alpha, 0]], [[0, -beta], [beta, 0]])


def ex2_X(alpha: int, k: int, m: int) -> PolyVectorField:
    """``psi_1^k psi_2^m X^(alpha)``."""
    p = (_sumsq(4, 0, 1) ** k) * (_sumsq(4, 2, 3) ** m)
    return p.times_field(apply_linear(EX2_M[alpha]))


def ex2_slots(K: int) -> dict[str, PolyVectorField]:
    """Named resonant fields ``X{alpha}_{k},{m}`` with ``k + m <= K``."""
    return {
        f"X{al}_{k},{t - k}": ex2_X(al, k, t - k) for t in range(K + 1) for k in range(t + 1) for al in (1, 2, 3, 4)
    }


def ex2_random_field(rng: random.Random, K: int, mu: int, alpha: int = 1, beta: int = 13) -> PolyVectorField:
    """Resonant field on the two-oscillator linear part.

    Mover terms (``alpha = 1, 2``) start at power ``mu``; ideal terms
    (``alpha = 3, 4``) are present from power 1.
    """
    parts = [apply_linear(ex2_A(alpha, beta))]
    for t in range(1, K + 1):
        for k in range(t + 1):
            for al in (1, 2, 3, 4):
                if al <= 2 and t < mu:
                    continue
                parts.append(ex2_X(al, k, t - k).scale(random_rational(rng, nonzero=True)))
    return field_sum(parts, 4)


def ex2_ideal_residue(f: PolyVectorField, K: int) -> tuple[int | None, dict[str, Fraction]]:
    """Lowest mover power of ``f`` and its ideal coefficients above that power."""
    coeffs, rem = decompose(f, ex2_slots(K))
    if rem:
        raise ValueError("field is not resonant for the two-oscillator linear part")
    powers = [_ex2_power(nm) for nm, c in coeffs.items() if nm[1] in "12" and c]
    if not powers:
        return None, {}
    mu = min(powers)
    return mu, {nm: c for nm, c in coeffs.items() if nm[1] in "34" and _ex2_power(nm) > mu}


def _ex2_power(name: str) -> int:
    k, m = name.split("_")[1].split(",")
    return int(k) + int(m)


def ex2_ideal_rank(mover: PolyVectorField, mu: int, J: int) -> tuple[int, int]:
    """Rank of ``h -> [mover, h]`` from ideal fields of power ``J`` to power
    ``J + mu``, and the dimension of that target space; ``mover`` is a
    combination of mover fields of power ``mu``.

    Ideal generators commute among themselves, so this is the only way the
    ideal phase can reach the lowest target above ``mover``.
    """
    gens = [ex2_X(al, k, J - k) for k in range(J + 1) for al in (3, 4)]
    targets = ex2_slots(J + mu)
    images = [decompose(bracket(mover, h), targets)[0] for h in gens]
    names = sorted({nm for im in images for nm in im})
    M = RationalMatrix([[im.get(nm, Fraction(0)) for im in images] for nm in names], len(gens))
    return (rank(M) if names else 0), 2 * (J + mu + 1)


def decompose(f: PolyVectorField, slots: dict[str, PolyVectorField]) -> tuple[dict[str, Fraction], PolyVectorField]:
    """Coefficients of ``f`` on named slot fields, plus the unexplained remainder.

    Slots are grouped by grade and solved exactly on the monomials they
    cover; a nonzero remainder means ``f`` is not in the span.
    """
    coeffs: dict[str, Fraction] = {}
    rest = []
    by_grade: dict[int, list[str]] = {}
    for name, s in slots.items():
        by_grade.setdefault(s.grades()[0], []).append(name)
    for k in sorted(set(f.grades()) | set(by_grade)):
        fk = f.grade(k)
        names = by_grade.get(k, [])
        keys = sorted({key for nm in names for key in slots[nm].terms})
        c = None
        if names and fk:
            M = RationalMatrix([[slots[nm].terms.get(key, Fraction(0)) for nm in names] for key in keys], len(names))
            c = solve(M, [fk.terms.get(key, Fraction(0)) for key in keys])
        if c is None:
            # the covered part is itself outside the span: report the whole component
            rest.append(fk)
            continue
        fitted = field_sum([slots[nm].scale(v) for nm, v in zip(names, c)], f.dim)
        rest.append(fk - fitted)
        coeffs.update({nm: v for nm, v in zip(names, c) if v})
    return coeffs, field_sum(rest, f.dim)


def support(f: PolyVectorField, slots: dict[str, PolyVectorField]) -> set[str]:
    coeffs, rem = decompose(f, slots)
    if rem:
        raise ValueError(f"field has terms outside the slot family: {rem}")
    return set(coeffs)


# -------------------------------------------------------------- instances


@dataclass
class ParamInstance:
    values: dict[str, Fraction]
    constraints: list[str] = field(default_factory=list)

    def __getitem__(self, name: str) -> Fraction:
        return self.values.get(name, Fraction(0))

    def check(self) -> None:
        bad = [c for c in self.constraints if not self[c]]
        if bad:
            raise ValueError(f"constraint violated: {', '.join(bad)} must be nonzero")


def random_rational(rng: random.Random, bound: int = 10, nonzero: bool = False) -> Fraction:
    while True:
        v = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
        if v or not nonzero:
            return v


def draw_instance(rng: random.Random, names: Iterable[str], nonzero: Iterable[str] = (), zero: Iterable[str] = ()) -> ParamInstance:
    nonzero = list(nonzero)
    zero = set(zero)
    values = {}
    for nm in names:
        if nm in zero:
            values[nm] = Fraction(0)
        else:
            values[nm] = random_rational(rng, nonzero=nm in nonzero)
    inst = ParamInstance(values, nonzero)
    inst.check()
    return inst


def ex3_from_instance(inst: ParamInstance, N: int) -> PolyVectorField:
    a = {k: inst[f"a{k}"] for k in range(1, N + 1)}
    b = {k: inst[f"b{k}"] for k in range(1, N + 1)}
    return ex3_field(a, b)


def ex3_nondegenerate_instance(rng: random.Random, N: int = 5) -> ParamInstance:
    names = [f"a{k}" for k in range(1, N + 1)] + [f"b{k}" for k in range(1, N + 1)]
    return draw_instance(rng, names, nonzero=["b1", "a2"], zero=["a1"])


def ex3_degenerate_instance(rng: random.Random, nu: int, mu: int, N: int) -> ParamInstance:
    names = [f"a{k}" for k in range(1, N + 1)] + [f"b{k}" for k in range(1, N + 1)]
    zero = [f"a{k}" for k in range(1, mu)] + [f"b{k}" for k in range(1, nu)]
    nonzero = [f"a{k}" for k in range(mu, N + 1)] + [f"b{k}" for k in range(nu, N + 1)]
    return draw_instance(rng, names, nonzero=nonzero, zero=zero)


# ---------------------------------------------------------------- oracles


def _prf_formulas(v: ParamInstance) -> dict[str, Fraction]:
    a = {k: v[f"a{k}"] for k in range(1, 6)}
    b = {k: v[f"b{k}"] for k in range(1, 6)}
    b1 = b[1]
    return {
        "Y0": Fraction(1),
        "Y1": b1,
        "X2": a[2],
        "X3": a[3] - a[2] * b[2] / b1,
        "X4": a[4] - 2 * a[3] * b[2] / b1 + a[2] * b[2] ** 2 / b1**2,
        "X5": a[5]
        - 3 * a[4] * b[2] / b1
        + 4 * a[3] * b[2] ** 2 / b1**2
        - a[3] * b[3] / b1
        - 2 * a[2] * b[2] * b[3] / b1**2
        + a[2] * b[4] / b1,
    }


def _lrf_formulas(v: ParamInstance) -> dict[str, Fraction]:
    a2, a3, a4 = v["a2"], v["a3"], v["a4"]
    b1, b2 = v["b1"], v["b2"]
    out = {
        "Y0": Fraction(1),
        "Y1": b1,
        "X2": a2,
        "Y2": b2 - a3 * b1 / a2,
        "X4": a4 - a3**2 / a2,
    }
    return {k: c for k, c in out.items() if c}


FORMULAS: dict[str, tuple[Callable[[ParamInstance], dict], list[str]]] = {
    "prf": (_prf_formulas, ["b1"]),
    "lrf": (_lrf_formulas, ["a2"]),
}


def closed_form_oracle(name: str, inst: ParamInstance) -> dict[str, Fraction]:
    """Closed-form order-5 coefficients for the planar ``diag(0, 1)`` family.

    ``name`` is ``"prf"`` or ``"lrf"`` for the full coefficient map, or e.g.
    ``"prf:X3"`` for a single slot (returned as a one-entry map).
    """
    scheme, _, slot = name.partition(":")
    if scheme not in FORMULAS:
        raise KeyError(f"unknown formula {name!r}")
    fn, required = FORMULAS[scheme]
    bad = [r for r in required if not inst[r]]
    if bad:
        raise ValueError(f"constraint violated: {', '.join(bad)} must be nonzero")
    values = fn(inst)
    if slot:
        return {slot: values.get(slot, Fraction(0))}
    return values


# name required by the public API contract
paper_formula_oracle = closed_form_oracle


# --------------------------------------------------------- comparisons


def is_fixed_point(scheme: Callable[[PolyVectorField, int], ReductionResult], f: PolyVectorField, N: int) -> bool:
    return scheme(f, N).output == f.truncate(N)


# slot pattern of Bruno's planar normal form and its simplest representative
BRUNO_SLOTS = {"Y0", "Y1", "X2", "X4"}
BRUNO_FIELD = ex3_field({2: Fraction(1)}, {1: Fraction(1)})


@dataclass
class CompareReport:
    prf: ReductionResult
    lrf: ReductionResult | None
    lrf_error: str | None
    lrf_is_prf: bool | None
    prf_bruno: dict[int, bool]
    lrf_bruno: dict[int, bool] | None
    notes: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"PRF output: {_fmt(self.prf.output)}"]
        if self.lrf is not None:
            out.append(f"LRF output: {_fmt(self.lrf.output)}")
            out.append(f"LRF output is a PRF fixed point: {self.lrf_is_prf}")
        else:
            out.append(f"LRF not applicable: {self.lrf_error}")
        out.append(f"Bruno predicate on PRF: {self.prf_bruno}")
        if self.lrf_bruno is not None:
            out.append(f"Bruno predicate on LRF: {self.lrf_bruno}")
        return out + self.notes


def _fmt(f: PolyVectorField) -> str:
    from .fields import format_field

    return format_field(f)


def differential_compare(f: PolyVectorField, N: int = DEFAULT_DEGREE) -> CompareReport:
    p = prf(f, N)
    try:
        l = lrf(f, N)
        err = None
    except NotQuasiLinear as exc:
        l, err = None, str(exc)
    rep = CompareReport(
        prf=p,
        lrf=l,
        lrf_error=err,
        lrf_is_prf=None if l is None else is_fixed_point(prf, l.output, N),
        prf_bruno=bruno_check(p.output, N),
        lrf_bruno=None if l is None else bruno_check(l.output, N),
    )
    if f.dim == 2 and f.linear_matrix() == [[0, 0], [0, 1]]:
        coeffs, rem = decompose(p.output, ex3_slots(N))
        if not rem:
            pattern = {s for s in coeffs}
            rep.notes.append(f"PRF slots: {sorted(pattern, key=_slot_key)}")
            rep.notes.append(f"PRF differs from Bruno slot pattern: {bool(pattern - BRUNO_SLOTS)}")
            rep.notes.append(f"PRF differs from Bruno reference form: {p.output != BRUNO_FIELD.truncate(N)}")
        if l is not None:
            lc, lrem = decompose(l.output, ex3_slots(N))
            if not lrem:
                rep.notes.append(f"LRF slots: {sorted(lc, key=_slot_key)}")
    return rep


def _slot_key(name: str):
    return (int(name[1:]), name[0])


# ------------------------------------------------------ property suite


@dataclass(frozen=True)
class LedgerLine:
    passed: bool
    check_id: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.check_id} {self.detail}".rstrip()


def random_field(rng: random.Random, n: int, grades: Iterable[int], density: float = 0.4) -> PolyVectorField:
    terms = {}
    for k in grades:
        for mu in monomials(n, k + 1):
            for a in range(n):
                if rng.random() < density:
                    terms[(a, mu)] = random_rational(rng, 5)
    return PolyVectorField(n, terms)


def random_homogeneous(rng: random.Random, n: int, k: int, density: float = 0.5) -> PolyVectorField:
    return random_field(rng, n, [k], density)


SPECTRA = [(0, 1), (1, 2), (1, -1), (2, 3), (0, 1, 2), (-1, 1, 2), (1, 1, 2), (1, 2, 3), (1, -1, 0)]


def bracket_table_checks() -> list[LedgerLine]:
    """Commutation tables of the worked examples, by direct bracket computation."""
    out = []
    ok = True
    for k in range(0, 4):
        for m in range(0, 4):
            X, Y, Z = ex1_X, ex1_Y, ex1_Z
            checks = [
                (bracket(X(k), X(m)), X(k + m).scale(2 * (m - k))),
                (bracket(Y(k), Y(m)), PolyVectorField.zero(3)),
                (bracket(Z(k), Z(m)), PolyVectorField.zero(3)),
                (bracket(X(k), Y(m)), Y(k + m).scale(2 * m)),
                (bracket(X(k), Z(m)), Z(k + m).scale(2 * m)),
                (bracket(Y(k), Z(m)), PolyVectorField.zero(3)),
            ]
            ok &= all(lhs == rhs for lhs, rhs in checks)
    out.append(LedgerLine(ok, "table-ex1", "k,m <= 3"))
    ok = True
    for k in range(4):
        for m in range(4):
            for p in range(4):
                for q in range(4):
                    if k + m > 3 or p + q > 3:
                        continue
                    X = ex2_X
                    checks = [
                        (bracket(X(1, k, m), X(1, p, q)), X(1, k + p, m + q).scale(2 * (p - k))),
                        (bracket(X(2, k, m), X(2, p, q)), X(2, k + p, m + q).scale(2 * (q - m))),
                        (
                            bracket(X(1, k, m), X(2, p, q)),
                            X(2, k + p, m + q).scale(2 * p) - X(1, k + p, m + q).scale(2 * m),
                        ),
                    ]
                    for al in (3, 4):
                        checks.append((bracket(X(1, k, m), X(al, p, q)), X(al, k + p, m + q).scale(2 * p)))
                        checks.append((bracket(X(2, k, m), X(al, p, q)), X(al, k + p, m + q).scale(2 * q)))
                    ok &= all(lhs == rhs for lhs, rhs in checks)
    out.append(LedgerLine(ok, "table-ex2", "k+m, p+q <= 3"))
    ok_direct = True
    printed_differs = False
    for k in range(4):
        for m in range(4):
            lhs = bracket(ex3_X(k), ex3_Y(m))
            ok_direct &= lhs == ex3_Y(k + m).scale(m)
            printed_differs |= m != 0 and k != 0 and lhs != ex3_Y(m).scale(m)
            ok_direct &= bracket(ex3_X(k), ex3_X(m)) == ex3_X(k + m).scale(m - k)
            ok_direct &= not bracket(ex3_Y(k), ex3_Y(m))
    out.append(LedgerLine(ok_direct, "table-ex3", "[X_k,Y_m] = m Y_(k+m) by direct computation"))
    out.append(LedgerLine(printed_differs, "table-ex3-printed", "printed m Y_m differs from direct result"))
    return out


def _commutant_ok(result: ReductionResult) -> bool:
    out = result.output
    XA = out.linear_part()
    return not bracket(XA, out - XA, max_grade=result.degree)


def _roundtrip_ok(result: ReductionResult) -> bool:
    N = result.degree
    return replay(result.log, result.input, N) == result.output and inverse_replay(
        result.log, result.output, N
    ) == result.input.truncate(N)


def property_suite(seed: int = 0, trials: int = 5) -> list[LedgerLine]:
    """Exact property checks over ``trials`` seeded random inputs."""
    if trials <= 0:
        return []
    rng = random.Random(seed)
    lines: list[LedgerLine] = []
    for t in range(trials):
        n = rng.randint(1, 3)
        f, g, h = (random_field(rng, n, range(0, 3), 0.5) for _ in range(3))
        lines.append(LedgerLine(bracket(f, g) == -bracket(g, f), f"antisymmetry[{t}]", f"n={n}"))
        jac = bracket(f, bracket(g, h)) + bracket(g, bracket(h, f)) + bracket(h, bracket(f, g))
        lines.append(LedgerLine(not jac, f"jacobi[{t}]", f"n={n}"))
        k, m = rng.randint(0, 3), rng.randint(0, 3)
        fk, gm = random_homogeneous(rng, n, k), random_homogeneous(rng, n, m)
        b = bracket(fk, gm)
        lines.append(LedgerLine(not b or b.grades() == [k + m], f"grading[{t}]", f"{k}+{m}"))

        lam = rng.choice(SPECTRA)
        N = 4 if len(lam) == 3 else 5
        nonlinear = random_field(rng, len(lam), range(1, N + 1), 0.3)
        field = apply_linear(RationalMatrix.diag(lam)) + nonlinear
        results = [poincare_normalize(field, N), prf(field, N)]
        try:
            results.append(lrf(field, N))
        except NotQuasiLinear:
            pass
        for r in results:
            lines.append(LedgerLine(_commutant_ok(r), f"commutant-{r.scheme}[{t}]", f"spectrum={lam}"))
            lines.append(LedgerLine(_roundtrip_ok(r), f"replay-{r.scheme}[{t}]", f"spectrum={lam}"))

        inst = ex3_nondegenerate_instance(rng, 7)
        w = ex3_from_instance(inst, 7)
        stable = prf(w, 7).output.truncate(5) == prf(w, 5).output
        lines.append(LedgerLine(stable, f"truncation[{t}]", "N=7 vs N=5"))

        F = random_field(rng, 2, range(0, 4), 0.4)
        H = random_field(rng, 2, range(1, 3), 0.4)
        mm = rng.randint(0, 3)
        direct = -field_sum([bracket(F.grade(j), H) for j in range(mm + 1)], 2)
        lines.append(LedgerLine(bruno_psi(F, mm, H) == direct, f"bruno-psi[{t}]", f"m={mm}"))
    lines.extend(bracket_table_checks())
    return lines


def formula_checks(seed: int = 0, count: int = 25) -> list[LedgerLine]:
    """Planar-family reductions at order 5 against the closed forms."""
    rng = random.Random(seed)
    lines = []
    for i in range(count):
        inst = ex3_nondegenerate_instance(rng, 5)
        w = ex3_from_instance(inst, 5)
        got, rem = decompose(prf(w, 5).output, ex3_slots(5))
        want = closed_form_oracle("prf", inst)
        ok = not rem and all(got.get(s, 0) == want[s] for s in ("X3", "X4", "X5"))
        lines.append(LedgerLine(ok, f"prf-formula[{i}]"))
        got, rem = decompose(lrf(w, 5).output, ex3_slots(5))
        want = closed_form_oracle("lrf", inst)
        lines.append(LedgerLine(not rem and got == want, f"lrf-formula[{i}]"))
    return lines
