from fractions import Fraction
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfreduce.engine import (
    bruno_check,
    bruno_psi,
    bruno_result,
    inverse_replay,
    inverse_transform,
    lie_transform,
    lrf,
    poincare_normalize,
    prf,
    replay,
)
from nfreduce.fields import PolyVectorField, apply_linear, bracket, field_sum, monomials
from nfreduce.harness import (
    ex3_degenerate_instance,
    ex3_field,
    ex3_from_instance,
    ex3_nondegenerate_instance,
    ex3_slots,
    random_field,
    support,
)
from nfreduce.structure import NotQuasiLinear, StructureContext, UnsupportedLinearPart, resonant_kernel

from oracles import sympy_lie_transform

Y0 = apply_linear([[0, 0], [0, 1]])


def mono(n, comp, mu, c=1):
    return PolyVectorField(n, {(comp, tuple(mu)): c})


@st.composite
def transform_case(draw):
    n = draw(st.integers(1, 2))
    seed = draw(st.integers(0, 10**6))
    rng = random.Random(seed)
    k = draw(st.integers(1, 2))
    f = random_field(rng, n, range(0, 3), 0.5)
    h = random_field(rng, n, [k], 0.6)
    return f, h


def test_lie_transform_zero_generator():
    f = Y0 + mono(2, 0, (2, 0))
    assert lie_transform(f, PolyVectorField.zero(2), 4) == f


def test_lie_transform_rejects_bad_generators():
    f = Y0
    with pytest.raises(ValueError):
        lie_transform(f, mono(2, 0, (2, 0)) + mono(2, 0, (3, 0)), 4)
    with pytest.raises(ValueError):
        lie_transform(f, Y0, 4)


def test_lie_transform_grade_support():
    f = mono(2, 0, (2, 0)) + mono(2, 1, (1, 1), 3)  # grade 1
    h = mono(2, 1, (0, 3)) + mono(2, 0, (2, 1))  # grade 2
    out = lie_transform(f, h, 9)
    assert set(out.grades()) <= {1, 3, 5, 7, 9}


def test_lie_transform_example_against_oracle():
    h = mono(2, 0, (0, 2), Fraction(1, 2))
    assert lie_transform(Y0, h, 4) == sympy_lie_transform(Y0, h, 4)
    assert lie_transform(Y0, h, 4).grade(1) == bracket(h, Y0)


@settings(max_examples=30, deadline=None)
@given(transform_case())
def test_lie_transform_matches_sympy(case):
    f, h = case
    if not h:
        return
    assert lie_transform(f, h, 5) == sympy_lie_transform(f, h, 5)


@settings(max_examples=30, deadline=None)
@given(transform_case())
def test_inverse_transform_round_trip(case):
    f, h = case
    assert inverse_transform(lie_transform(f, h, 5), h, 5) == f.truncate(5)


def test_linear_field_round_trip():
    h = mono(2, 0, (1, 1))
    assert inverse_transform(lie_transform(Y0, h, 6), h, 6) == Y0


def test_normalize_resonant_input_unchanged():
    f = ex3_field({2: 1}, {1: 3})
    r = poincare_normalize(f, 5)
    assert r.output == f and not r.log


def test_normalize_nonresonant_quadratic():
    f = Y0 + mono(2, 0, (0, 2))
    r = poincare_normalize(f, 4)
    assert r.log[0].grade == 1
    assert r.log[0].generator == mono(2, 0, (0, 2), Fraction(1, 2))
    assert not r.output.grade(1)


def test_normalize_output_is_resonant():
    rng = random.Random(3)
    f = Y0 + random_field(rng, 2, [1, 2, 3], 1.0)
    r = poincare_normalize(f, 3)
    for k in (1, 2, 3):
        K = resonant_kernel([[0, 0], [0, 1]], k)
        assert K.contains([r.output.grade(k).terms.get(key, 0) for key in K.ambient.keys])
    assert set(support(r.output, ex3_slots(3))) <= {"Y0", "X1", "Y1", "X2", "Y2", "X3", "Y3"}


def test_normalize_rejects_nilpotent():
    with pytest.raises(UnsupportedLinearPart):
        poincare_normalize(apply_linear([[0, 1], [0, 0]]), 3)


def test_vanishing_linear_part_flagged():
    f = mono(2, 0, (2, 0)) + mono(2, 1, (1, 1))
    r = prf(f, 3)
    assert any("experimental" in d for d in r.diagnostics)
    assert replay(r.log, f, 3) == r.output


def test_prf_fixed_point():
    f = ex3_field({}, {1: 2})
    r = prf(f, 6)
    assert r.output == f


def test_prf_nondegenerate_shape():
    rng = random.Random(11)
    for _ in range(5):
        w = ex3_from_instance(ex3_nondegenerate_instance(rng, 6), 6)
        s = support(prf(w, 6).output, ex3_slots(6))
        assert {"Y0", "Y1"} <= s
        assert not {f"Y{k}" for k in range(2, 7)} & s


def test_prf_degenerate_shape():
    rng = random.Random(12)
    nu, mu = 2, 3
    w = ex3_from_instance(ex3_degenerate_instance(rng, nu, mu, 8), 8)
    s = support(prf(w, 8).output, ex3_slots(8))
    assert {nm for nm in s if nm[0] == "Y"} == {"Y0", "Y2"}
    assert all(int(nm[1:]) >= mu for nm in s if nm[0] == "X")


def test_prf_round_safety():
    # a round-j generator of grade k leaves every grade below p_j + k unchanged
    rng = random.Random(5)
    w = ex3_from_instance(ex3_nondegenerate_instance(rng, 6), 6)
    r = prf(w, 6)
    chain = [int(p) for p in r.diagnostics[-1].split(":")[1].split(",")]
    g = w
    for e in r.log:
        nxt = lie_transform(g, e.generator, 6)
        if e.step_label.startswith("PRF:j="):
            p = chain[int(e.step_label.split("=")[1])]
            assert (nxt - g).truncate(p + e.grade - 1).terms == {}
        g = nxt
    assert g == r.output


def test_prf_truncation_stability():
    rng = random.Random(2)
    w = ex3_from_instance(ex3_nondegenerate_instance(rng, 7), 7)
    assert prf(w, 7).output.truncate(5) == prf(w, 5).output


def test_determinism():
    rng = random.Random(9)
    w = ex3_from_instance(ex3_nondegenerate_instance(rng, 6), 6)
    a, b = prf(w, 6), prf(w, 6)
    assert a.output == b.output and a.log == b.log


def test_lrf_planar_closed_form():
    a = {1: 0, 2: 2, 3: 3, 4: -1, 5: 1}
    b = {1: 1, 2: 5, 3: 2, 4: 7, 5: -3}
    w = ex3_field({k: Fraction(v) for k, v in a.items()}, {k: Fraction(v) for k, v in b.items()})
    out = lrf(w, 5).output
    want = ex3_field({2: 2, 4: Fraction(-1) - Fraction(9, 2)}, {1: 1, 2: Fraction(5) - Fraction(3, 2)})
    assert out == want


def test_lrf_ideal_phase_keeps_mover_part():
    rng = random.Random(4)
    w = ex3_from_instance(ex3_nondegenerate_instance(rng, 6), 6)
    r = lrf(w, 6)
    ctx = StructureContext(w.linear_matrix(), 6)
    g = w
    for e in r.log:
        nxt = lie_transform(g, e.generator, 6)
        if e.step_label.startswith("LRF:ideal"):
            for t in range(1, 7):
                assert ctx.split_modules(nxt.grade(t), t)[0] == ctx.split_modules(g.grade(t), t)[0]
        g = nxt


def test_lrf_refuses_non_quasi_linear():
    f = apply_linear([[-1, 0, 0], [0, 1, 0], [0, 0, 2]]) + mono(3, 2, (0, 2, 0))
    with pytest.raises(NotQuasiLinear, match="not quasi-linear up to 4, grade"):
        lrf(f, 4)


def test_replay_contract():
    rng = random.Random(8)
    w = ex3_from_instance(ex3_nondegenerate_instance(rng, 5), 5)
    for scheme in (poincare_normalize, prf, lrf):
        r = scheme(w + mono(2, 0, (1, 1)), 5)
        assert replay([], r.input, 5) == r.input.truncate(5)
        assert replay(r.log, r.input, 5) == r.output
        assert inverse_replay(r.log, r.output, 5) == r.input.truncate(5)


def test_replay_rejects_grade_mismatch():
    from nfreduce.engine import GeneratorLogEntry

    with pytest.raises(ValueError):
        replay([GeneratorLogEntry("NF", 2, mono(2, 0, (2, 0)))], Y0, 4)


def test_bruno_psi_examples():
    H = mono(2, 0, (2, 0)) + mono(2, 1, (0, 2))
    assert bruno_psi(Y0, 3, H) == -bracket(Y0, H)
    assert not bruno_psi(Y0 + mono(2, 0, (2, 0)), 0, Y0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_bruno_psi_sum(seed):
    rng = random.Random(seed)
    f = random_field(rng, 2, range(0, 4), 0.4)
    H = random_field(rng, 2, range(1, 3), 0.4)
    want = -field_sum([bracket(f.grade(0), H), bracket(f.grade(1), H), bracket(f.grade(2), H)], 2)
    assert bruno_psi(f, 2, H) == want


def test_bruno_check_linear_vacuous():
    assert all(bruno_check(Y0, 5).values())


def test_bruno_check_regression():
    # Bruno's normal form satisfies his orthogonality predicate at every grade
    bruno_form = ex3_field({2: Fraction(1), 4: Fraction(2)}, {1: Fraction(3)})
    assert bruno_check(bruno_form, 6) == {k: True for k in range(1, 7)}
    # the order-six PRF of the cubic system does not
    system = ex3_field({2: Fraction(1)}, {1: Fraction(1), 2: Fraction(1)})
    verdict = bruno_check(prf(system, 6).output, 6)
    assert verdict == {1: True, 2: True, 3: False, 4: False, 5: True, 6: False}
    r = bruno_result(system, 6)
    assert r.scheme == "BRUNO-CHECK" and "inner product: bargmann" in r.diagnostics


def test_bruno_check_against_direct_adjoint():
    # orthogonality to every bracket image, checked on the full image basis
    rng = random.Random(1)
    f = Y0 + random_field(rng, 2, [1, 2], 0.5)
    verdict = bruno_check(f, 2)
    from nfreduce.fields import bargmann_inner

    for k in (1, 2):
        ok = True
        for p in range(k):
            for mu in monomials(2, k - p + 1):
                for a in range(2):
                    img = bracket(f.grade(p), mono(2, a, mu))
                    if img and f.grade(k) and bargmann_inner(f.grade(k), img):
                        ok = False
        assert verdict[k] == ok
