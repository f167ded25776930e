"""Acceptance criteria 1-11, each reported as one PASS/FAIL line.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
from fractions import Fraction
from functools import cache
import itertools
import random
import time

import pytest

from nfreduce.engine import bruno_psi, inverse_replay, lrf, poincare_normalize, prf, replay
from nfreduce.fields import apply_linear, bracket, field_sum
from nfreduce.harness import (
    BRUNO_SLOTS,
    BRUNO_FIELD,
    SPECTRA,
    bracket_table_checks,
    decompose,
    ex1_field,
    ex1_slots,
    ex2_X,
    ex2_ideal_rank,
    ex2_ideal_residue,
    ex2_random_field,
    ex3_degenerate_instance,
    ex3_field,
    ex3_from_instance,
    ex3_nondegenerate_instance,
    ex3_slots,
    closed_form_oracle,
    random_field,
    random_rational,
    support,
)
from nfreduce.linalg import RationalMatrix
from nfreduce.structure import NotQuasiLinear

SEED = 2024
INSTANCES = 25
TIME_LIMIT = 30.0


class Outcome:
    def __init__(self, cid, passed, detail, results=()):
        self.cid = cid
        self.passed = bool(passed)
        self.detail = detail
        self.results = list(results)

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} criterion-{self.cid} {self.detail}"


def _record(outcome):
    try:
        from conftest import ACCEPTANCE_LINES
    except ImportError:
        return outcome
    ACCEPTANCE_LINES[outcome.cid] = outcome.line()
    return outcome


@cache
def _nondegenerate_instances():
    rng = random.Random(SEED)
    return [ex3_nondegenerate_instance(rng, 5) for _ in range(INSTANCES)]


@cache
def criterion_1():
    t = time.perf_counter()
    results, bad = [], 0
    for inst in _nondegenerate_instances():
        r = prf(ex3_from_instance(inst, 5), 5)
        got, rem = decompose(r.output, ex3_slots(5))
        want = closed_form_oracle("prf", inst)
        bad += bool(rem) or any(got.get(s, 0) != want[s] for s in ("X3", "X4", "X5"))
        results.append(r)
    elapsed = time.perf_counter() - t
    ok = bad == 0 and elapsed < TIME_LIMIT
    return Outcome(1, ok, f"PRF X3..X5 closed forms: {INSTANCES - bad}/{INSTANCES} exact, {elapsed:.2f}s", results)


@cache
def criterion_2():
    t = time.perf_counter()
    results, bad = [], 0
    for inst in _nondegenerate_instances():
        r = lrf(ex3_from_instance(inst, 5), 5)
        got, rem = decompose(r.output, ex3_slots(5))
        bad += bool(rem) or got != closed_form_oracle("lrf", inst)
        results.append(r)
    elapsed = time.perf_counter() - t
    ok = bad == 0 and elapsed < TIME_LIMIT
    return Outcome(2, ok, f"LRF five-slot closed form: {INSTANCES - bad}/{INSTANCES} exact, {elapsed:.2f}s", results)


@cache
def _degenerate_cases():
    rng = random.Random(SEED + 3)
    cases = []
    for nu, mu in itertools.combinations(range(1, 6), 2):
        N = 2 * mu + 2
        cases.append((nu, mu, N, ex3_from_instance(ex3_degenerate_instance(rng, nu, mu, N), N)))
    return cases


@cache
def criterion_3():
    results, bad = [], []
    for nu, mu, N, w in _degenerate_cases():
        r = lrf(w, N)
        want = {"Y0", f"X{mu}", f"X{2 * mu}"} | {f"Y{k}" for k in range(nu, mu + 1)}
        s = support(r.output, ex3_slots(N))
        if s != want or len(s) - 1 != mu - nu + 3:
            bad.append((nu, mu))
        results.append(r)
    return Outcome(3, not bad, f"degenerate LRF support, {10 - len(bad)}/10 (nu, mu) pairs exact", results)


@cache
def criterion_4():
    results, bad = [], 0
    for inst in _nondegenerate_instances():
        r = prf(ex3_from_instance(inst, 5), 5)
        s = support(r.output, ex3_slots(5))
        bad += any(nm[0] == "Y" and int(nm[1:]) >= 2 for nm in s)
        results.append(r)
    for nu, mu, N, w in _degenerate_cases():
        r = prf(w, N)
        s = support(r.output, ex3_slots(N))
        ys = {nm for nm in s if nm[0] == "Y"}
        xs = [int(nm[1:]) for nm in s if nm[0] == "X"]
        bad += ys != {"Y0", f"Y{nu}"} or any(k < mu for k in xs)
        results.append(r)
    total = INSTANCES + 10
    return Outcome(4, bad == 0, f"PRF shapes: {total - bad}/{total} inputs match", results)


@cache
def criterion_5():
    rng = random.Random(SEED + 5)
    results, bad = [], []
    for mu, nu, sigma in itertools.product(range(1, 4), repeat=3):
        K = 2 * mu + 2
        N = 2 * K
        a = {k: random_rational(rng, nonzero=True) for k in range(mu, K + 1)}
        b = {k: random_rational(rng, nonzero=True) for k in range(nu, K + 1)}
        c = {k: random_rational(rng, nonzero=True) for k in range(sigma, K + 1)}
        r = lrf(ex1_field(a, b, c), N)
        want = {"Y0", "Z0", f"X{mu}", f"X{2 * mu}"}
        want |= {f"Y{k}" for k in range(nu, mu + 1)} | {f"Z{k}" for k in range(sigma, mu + 1)}
        if support(r.output, ex1_slots(K)) != want:
            bad.append((mu, nu, sigma))
        results.append(r)
    return Outcome(5, not bad, f"three-dimensional LRF support, {27 - len(bad)}/27 (mu, nu, sigma) triples exact", results)


@cache
def criterion_6():
    rng = random.Random(SEED + 6)
    results, survivors, total = [], 0, 0
    for mu, K in ((1, 2), (1, 2), (1, 3), (2, 3)):
        r = lrf(ex2_random_field(rng, K, mu), 2 * K)
        low, residue = ex2_ideal_residue(r.output, K)
        survivors += bool(residue)
        total += 1
        results.append(r)
    # the linear obstruction behind the survivors
    rank, target = ex2_ideal_rank(ex2_X(1, 1, 0) + ex2_X(2, 0, 1).scale(3), 1, 1)
    detail = (
        f"ideal terms above the lowest mover power removed in {total - survivors}/{total} instances; "
        f"ideal generators reach rank {rank} of {target} target dimensions"
    )
    return Outcome(6, survivors == 0, detail, results)


@cache
def criterion_7():
    rng = random.Random(SEED + 7)
    results, bad, counts = [], 0, {"NF": 0, "PRF": 0, "LRF": 0}
    for _ in range(50):
        lam = rng.choice(SPECTRA)
        f = apply_linear(RationalMatrix.diag(lam)) + random_field(rng, len(lam), range(1, 7), 0.3)
        batch = [poincare_normalize(f, 6), prf(f, 6)]
        try:
            batch.append(lrf(f, 6))
        except NotQuasiLinear:
            pass
        for r in batch:
            XA = r.output.linear_part()
            bad += bool(bracket(XA, r.output - XA, max_grade=6))
            counts[r.scheme] += 1
        results.extend(batch)
    detail = f"commutant after reduction: {len(results) - bad}/{len(results)} outputs ({counts['NF']} NF, {counts['PRF']} PRF, {counts['LRF']} LRF)"
    return Outcome(7, bad == 0, detail, results)


@cache
def criterion_8():
    results = []
    for crit in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7):
        results.extend(crit().results)
    bad = 0
    for r in results:
        N = r.degree
        bad += replay(r.log, r.input, N) != r.output or inverse_replay(r.log, r.output, N) != r.input.truncate(N)
    return Outcome(8, bad == 0, f"replay and inverse replay exact for {len(results) - bad}/{len(results)} results")


@cache
def criterion_9():
    rng = random.Random(SEED + 9)
    bad = 0
    for _ in range(10):
        w = ex3_from_instance(ex3_nondegenerate_instance(rng, 7), 7)
        bad += prf(w, 7).output.truncate(5) != prf(w, 5).output
    return Outcome(9, bad == 0, f"PRF at N=7 truncated to 5 equals PRF at N=5 on {10 - bad}/10 instances")


@cache
def criterion_10():
    lines = bracket_table_checks()
    ok = all(line.passed for line in lines)
    return Outcome(10, ok, "; ".join(f"{line.check_id}={'ok' if line.passed else 'bad'}" for line in lines))


@cache
def criterion_11():
    system = ex3_field({2: Fraction(1)}, {1: Fraction(1), 2: Fraction(1)})
    out = prf(system, 6).output
    slots, rem = decompose(out, ex3_slots(6))
    differs_a4 = bool(rem) or bool(set(slots) - BRUNO_SLOTS)
    differs_a5 = out != BRUNO_FIELD.truncate(6)
    rng = random.Random(SEED + 11)
    psi_bad = 0
    for _ in range(10):
        f = random_field(rng, 2, range(0, 4), 0.4)
        H = random_field(rng, 2, range(1, 3), 0.4)
        m = rng.randint(0, 3)
        direct = -field_sum([bracket(f.grade(k), H) for k in range(m + 1)], 2)
        psi_bad += bruno_psi(f, m, H) != direct
    extra = sorted(set(slots) - BRUNO_SLOTS, key=lambda s: (int(s[1:]), s[0]))
    detail = (
        f"PRF of the cubic system has slots outside the Bruno pattern {extra} (X3 = {slots.get('X3', 0)}), "
        f"differs from the truncated form: {differs_a5}; Psi_m matches the sum on {10 - psi_bad}/10 triples"
    )
    return Outcome(11, differs_a4 and differs_a5 and psi_bad == 0, detail)


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
]

EXAMPLE_II_REASON = (
    "ideal generators of power J reach only a 2(J+1)-dimensional part of the "
    "2(J+mu+1)-dimensional ideal space one mover power higher, and brackets of ideal "
    "fields with each other vanish, so generic ideal terms above mu cannot all be removed"
)


def _check(crit):
    outcome = _record(crit())
    print(outcome.line())
    assert outcome.passed, outcome.line()


@pytest.mark.parametrize(
    "crit",
    [
        pytest.param(c, id=c.__name__, marks=[pytest.mark.xfail(strict=True, reason=EXAMPLE_II_REASON)])
        if c is criterion_6
        else pytest.param(c, id=c.__name__)
        for c in CRITERIA
    ],
)
def test_acceptance(crit):
    _check(crit)


if __name__ == "__main__":
    for crit in CRITERIA:
        print(crit().line(), flush=True)
