"""Structure of the linear part: resonances, centralizer, invariants.

Kernels of the homological operator ``L0 = {X_A, .}`` are computed by direct
exact linear algebra on each graded component. The operator is split into
connected blocks of the monomial-vector basis first, which keeps the solves
tiny for diagonal and block-rotation linear parts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Sequence

from .fields import (
    PolyVectorField,
    ScalarPolynomial,
    apply_linear,
    bracket,
    exponent_factorial,
    grade_basis,
    lie_derivative,
    linear_combination,
    monomials,
)
from .linalg import (
    Ambient,
    GradedSubspace,
    RationalMatrix,
    as_matrix,
    canonical_basis,
    is_semisimple,
    nullspace,
    rank,
    solve,
    solve_min_norm,
)


class UnsupportedLinearPart(ValueError):
    """The linear part is not semisimple."""


class NotQuasiLinear(ValueError):
    """Resonant fields at some grade are not an invariant-module over the centralizer."""

    def __init__(self, degree: int, grade: int, reason: str = ""):
        self.degree = degree
        self.grade = grade
        msg = f"not quasi-linear up to {degree}, grade {grade}"
        super().__init__(msg + (f" ({reason})" if reason else ""))


def require_semisimple(A) -> RationalMatrix:
    A = as_matrix(A)
    if not is_semisimple(A):
        raise UnsupportedLinearPart("unsupported linear part: matrix is not semisimple")
    return A


class BlockOperator:
    """Linear endomorphism given column-by-column on a keyed basis.

    The basis is partitioned into the connected components of the operator's
    sparsity graph; every solve happens inside one component.
    """

    def __init__(self, keys: Sequence[Hashable], apply: Callable[[Hashable], dict], weight: Callable[[Hashable], int]):
        self.keys = list(keys)
        index = {k: i for i, k in enumerate(self.keys)}
        self._columns = {k: apply(k) for k in self.keys}
        parent = list(range(len(self.keys)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for k, col in self._columns.items():
            for r in col:
                if r not in index:
                    raise ValueError(f"operator leaves the space: {r}")
                a, b = find(index[k]), find(index[r])
                if a != b:
                    parent[max(a, b)] = min(a, b)
        groups: dict[int, list] = {}
        for i, k in enumerate(self.keys):
            groups.setdefault(find(i), []).append(k)
        self.blocks = [_Block(g, self._columns, weight) for g in groups.values()]
        self._block_of = {k: b for b in self.blocks for k in b.keys}

    def kernel(self) -> list[dict]:
        out = []
        for b in self.blocks:
            out.extend(b.kernel_vectors())
        # blocks are key-disjoint; sorting by first key in basis order keeps RREF shape
        order = {k: i for i, k in enumerate(self.keys)}
        out.sort(key=lambda v: min(order[k] for k in v))
        return out

    def _blocks_touching(self, w: dict) -> list["_Block"]:
        seen = []
        for k in w:
            b = self._block_of[k]
            if b not in seen:
                seen.append(b)
        return seen

    def split(self, w: dict) -> tuple[dict, dict]:
        """Decompose ``w`` into its kernel and range components."""
        ker, ran = {}, {}
        for b in self._blocks_touching(w):
            kb, rb = b.split(w)
            ker.update(kb)
            ran.update(rb)
        return ker, ran

    def solve_min_norm(self, r: dict) -> dict:
        """Weighted-minimal-norm preimage of ``r`` (which must lie in the range)."""
        out = {}
        for b in self._blocks_touching(r):
            out.update(b.solve(r))
        return out


class _Block:
    def __init__(self, keys, columns, weight):
        self.keys = keys
        pos = {k: i for i, k in enumerate(keys)}
        m = len(keys)
        rows = [[Fraction(0)] * m for _ in range(m)]
        for j, k in enumerate(keys):
            for r, c in columns[k].items():
                rows[pos[r]][j] = c
        self.M = RationalMatrix(rows, m)
        self.weights = [weight(k) for k in keys]

    @cached_property
    def _kernel(self):
        return nullspace(self.M)

    @cached_property
    def _range(self):
        return canonical_basis(self.M.columns(), len(self.keys))

    def kernel_vectors(self) -> list[dict]:
        return [{k: c for k, c in zip(self.keys, v) if c} for v in self._kernel]

    def split(self, w):
        vec = [w.get(k, Fraction(0)) for k in self.keys]
        K, R = self._kernel, self._range
        if not R:
            return {k: c for k, c in zip(self.keys, vec) if c}, {}
        if not K:
            return {}, {k: c for k, c in zip(self.keys, vec) if c}
        sol = solve(RationalMatrix.from_columns(list(K) + list(R), len(vec)), vec)
        if sol is None:
            raise UnsupportedLinearPart("kernel and range do not span the component")
        kc = sol[: len(K)]
        ker = [sum((c * v[i] for c, v in zip(kc, K)), Fraction(0)) for i in range(len(vec))]
        return (
            {k: c for k, c in zip(self.keys, ker) if c},
            {k: c - kk for k, c, kk in zip(self.keys, vec, ker) if c - kk},
        )

    def solve(self, r):
        vec = [r.get(k, Fraction(0)) for k in self.keys]
        x = solve_min_norm(self.M, vec, RationalMatrix.diag(self.weights))
        if x is None:
            raise ValueError("right-hand side is not in the range")
        return {k: c for k, c in zip(self.keys, x) if c}


def _bargmann_weight(key) -> int:
    return exponent_factorial(key[1])


class HomologicalOperator(BlockOperator):
    """``L0 = {X_A, .}`` acting on the grade-``k`` component V_k."""

    def __init__(self, A, k: int):
        A = as_matrix(A)
        self.A = A
        self.n = A.nrows
        self.grade = k
        XA = apply_linear(A)
        n = self.n

        def apply(key):
            return dict(bracket(XA, PolyVectorField._raw(n, {key: Fraction(1)})).terms)

        super().__init__(grade_basis(n, k), apply, _bargmann_weight)

    def kernel_fields(self) -> list[PolyVectorField]:
        return [PolyVectorField._raw(self.n, v) for v in self.kernel()]

    def split_field(self, w: PolyVectorField) -> tuple[PolyVectorField, PolyVectorField]:
        ker, ran = self.split(dict(w.terms))
        return PolyVectorField._raw(self.n, ker), PolyVectorField._raw(self.n, ran)

    def solve_field(self, r: PolyVectorField) -> PolyVectorField:
        return PolyVectorField._raw(self.n, self.solve_min_norm(dict(r.terms)))


def fields_to_subspace(fields: Sequence[PolyVectorField], n: int, k: int) -> GradedSubspace:
    amb = Ambient.of(n, k)
    return GradedSubspace(amb, [[f.terms.get(key, Fraction(0)) for key in amb.keys] for f in fields])


def resonant_kernel(A, k: int) -> GradedSubspace:
    """Basis of ``Ker(L0)`` on V_k in canonical form."""
    if k < 1:
        raise ValueError("grade must be at least 1")
    A = require_semisimple(A)
    op = HomologicalOperator(A, k)
    amb = Ambient.of(A.nrows, k)
    sub = GradedSubspace(amb)
    # block kernels are each in reduced echelon form on disjoint supports, so the
    # pivot-ordered union is already the canonical basis
    sub.basis = tuple(tuple(v.get(key, Fraction(0)) for key in amb.keys) for v in op.kernel())
    return sub


@dataclass(frozen=True)
class ResonanceRelation:
    """``mu . lambda = lambda_alpha`` with ``|mu| >= 2``; ``alpha`` is 0-based."""

    mu: tuple[int, ...]
    alpha: int
    defect: Fraction = Fraction(0)


def resonance_enumerate(lam: Sequence, N: int) -> list[ResonanceRelation]:
    lam = [Fraction(v) for v in lam]
    n = len(lam)
    out = []
    for d in range(2, N + 2):
        for mu in monomials(n, d):
            s = sum((m * l for m, l in zip(mu, lam)), Fraction(0))
            for a in range(n):
                if s == lam[a]:
                    out.append(ResonanceRelation(mu, a, Fraction(0)))
    return out


def _swap_in(basis: list[tuple], target: tuple) -> list[tuple]:
    """Replace one element of ``basis`` by ``target`` (put first), keeping the span."""
    if not any(target) or not basis:
        return basis
    size = len(target)
    coeffs = solve(RationalMatrix.from_columns(basis, size), target)
    if coeffs is None:
        return basis
    j = next(i for i, c in enumerate(coeffs) if c)
    return [target] + [b for i, b in enumerate(basis) if i != j]


def _to_matrix(v: Sequence, n: int) -> RationalMatrix:
    return RationalMatrix([v[i * n:(i + 1) * n] for i in range(n)], n)


def centralizer(A) -> list[RationalMatrix]:
    """Basis of ``{K : KA = AK}``; when ``A != 0`` the first element is ``A``."""
    A = as_matrix(A)
    n = A.nrows
    cols = []
    for idx in range(n * n):
        E = [[Fraction(int(i * n + j == idx)) for j in range(n)] for i in range(n)]
        Em = RationalMatrix(E, n)
        cols.append((Em @ A - A @ Em).flatten())
    basis = nullspace(RationalMatrix.from_columns(cols, n * n))
    basis = _swap_in(list(basis), A.flatten())
    return [_to_matrix(v, n) for v in basis]


def invariant_space(A, d: int) -> list[ScalarPolynomial]:
    """All homogeneous degree-``d`` polynomials annihilated by ``X_A``."""
    A = as_matrix(A)
    n = A.nrows
    XA = apply_linear(A)
    op = BlockOperator(
        monomials(n, d),
        lambda mu: dict(lie_derivative(XA, ScalarPolynomial._raw(n, {mu: Fraction(1)})).terms),
        exponent_factorial,
    )
    return [ScalarPolynomial._raw(n, v) for v in op.kernel()]


def _poly_vector(p: ScalarPolynomial, mons: list) -> list[Fraction]:
    return [p.terms.get(m, Fraction(0)) for m in mons]


def _products(gens: list[tuple[int, ScalarPolynomial]], d: int, start: int = 0):
    # all products of generators (with repetition, non-decreasing index) of total degree d
    if d == 0:
        yield None
        return
    for i in range(start, len(gens)):
        deg, g = gens[i]
        if deg <= d:
            for rest in _products(gens, d - deg, i):
                yield g if rest is None else g * rest


def invariant_generators(A, N: int) -> list[ScalarPolynomial]:
    """Greedy basic invariants of degree ``1..N+1``.

    At each degree, kernel vectors are kept only if they are independent of
    products of generators already found.
    """
    A = require_semisimple(A)
    n = A.nrows
    gens: list[tuple[int, ScalarPolynomial]] = []
    for d in range(1, N + 2):
        kernel = invariant_space(A, d)
        if not kernel:
            continue
        mons = monomials(n, d)
        span = [_poly_vector(p, mons) for p in _products(gens, d)]
        r = rank(span) if span else 0
        for p in kernel:
            v = _poly_vector(p, mons)
            r2 = rank(span + [v])
            if r2 > r:
                span.append(v)
                r = r2
                gens.append((d, p))
    return [g for _, g in gens]


def module_span(A, k: int, matrices: Sequence[RationalMatrix]) -> list[PolyVectorField]:
    """Canonical basis of ``span{p (K x) . d : p invariant of degree k, K in matrices}``."""
    A = as_matrix(A)
    n = A.nrows
    inv = invariant_space(A, k)
    fields = [p.times_field(apply_linear(K)) for p in inv for K in matrices]
    return canonical_fields(fields, n)


def canonical_fields(fields: Sequence[PolyVectorField], n: int) -> list[PolyVectorField]:
    """Echelon basis of the span of ``fields``, over the union of their supports."""
    fields = [f for f in fields if f]
    if not fields:
        return []
    keys = sorted({k for f in fields for k in f.terms}, key=lambda k: (sum(k[1]), k[0], k[1]))
    rows = [[f.terms.get(k, Fraction(0)) for k in keys] for f in fields]
    return [PolyVectorField._raw(n, {k: c for k, c in zip(keys, r) if c}) for r in canonical_basis(rows, len(keys))]


def quasi_linear_check(A, N: int) -> dict[int, bool]:
    """Per grade ``1..N``: does the invariant module over the centralizer fill Ker(L0)?"""
    A = require_semisimple(A)
    C = centralizer(A)
    out = {}
    for k in range(1, N + 1):
        kdim = len(HomologicalOperator(A, k).kernel())
        out[k] = len(module_span(A, k, C)) == kdim
    return out


@dataclass
class CentralSeries:
    chain: list[list[RationalMatrix]]
    nilpotent: bool


def _commutator(X: RationalMatrix, Y: RationalMatrix) -> RationalMatrix:
    return X @ Y - Y @ X


def dcs(basis: Sequence[RationalMatrix]) -> CentralSeries:
    """Descending central series ``G_0 = G``, ``G_{k+1} = [G, G_k]``."""
    basis = [as_matrix(b) for b in basis]
    if not basis:
        return CentralSeries([[]], True)
    n = basis[0].nrows
    size = n * n
    G0 = canonical_basis([b.flatten() for b in basis], size)
    r0 = len(G0)
    for X in basis:
        for Y in basis:
            if rank(G0 + [_commutator(X, Y).flatten()]) != r0:
                raise ValueError("basis is not closed under the commutator")
    chain = [G0]
    current = G0
    while current:
        nxt = canonical_basis(
            [_commutator(_to_matrix(g, n), _to_matrix(c, n)).flatten() for g in G0 for c in current], size
        )
        if nxt == current:
            break
        chain.append(nxt)
        current = nxt
    mats = [[_to_matrix(v, n) for v in member] for member in chain]
    return CentralSeries(mats, nilpotent=not chain[-1])


@dataclass
class StructureReport:
    """Everything the Lie-structured reduction needs about a linear part."""

    A: RationalMatrix
    degree: int
    centralizer_basis: list[RationalMatrix]
    invariant_generators: list[ScalarPolynomial]
    quasi_linear: dict[int, bool]
    ideal_indices: list[int]
    mover_indices: list[int]
    dcs_chain: list[list[RationalMatrix]] = field(default_factory=list)
    nilpotent: bool = False

    @property
    def quasi_linear_up_to_degree(self) -> bool:
        return all(self.quasi_linear.values())

    @property
    def first_failure(self) -> int | None:
        return next((k for k, ok in sorted(self.quasi_linear.items()) if not ok), None)

    @property
    def movers(self) -> list[RationalMatrix]:
        return [self.centralizer_basis[i] for i in self.mover_indices]

    @property
    def ideal(self) -> list[RationalMatrix]:
        return [self.centralizer_basis[i] for i in self.ideal_indices]


def _annihilates(K: RationalMatrix, invariants: Sequence[ScalarPolynomial]) -> bool:
    XK = apply_linear(K)
    return all(not lie_derivative(XK, p) for p in invariants)


def annihilator_partition(report: StructureReport) -> tuple[list[int], list[int]]:
    """(ideal, mover) indices: ideal elements annihilate every basic invariant."""
    ideal, mover = [], []
    for i, K in enumerate(report.centralizer_basis):
        (ideal if _annihilates(K, report.invariant_generators) else mover).append(i)
    return ideal, mover


def _adapted_centralizer(A: RationalMatrix, invariants: Sequence[ScalarPolynomial]):
    """Centralizer basis split into annihilating part (A first) and its Frobenius complement."""
    n = A.nrows
    size = n * n
    C = centralizer(A)
    if not C:
        return [], []
    flat = [K.flatten() for K in C]
    # linear conditions on coefficients c: sum_i c_i X_{K_i}(psi_j) = 0
    derivs = [[lie_derivative(apply_linear(K), p) for p in invariants] for K in C]
    keys = sorted({(j, m) for row in derivs for j, q in enumerate(row) for m in q.terms})
    if keys:
        M = RationalMatrix([[row[j].terms.get(m, Fraction(0)) for row in derivs] for j, m in keys], len(C))
        coeffs = nullspace(M)
    else:
        coeffs = [tuple(Fraction(int(i == j)) for j in range(len(C))) for i in range(len(C))]
    ideal = canonical_basis(
        [[sum((c * f[t] for c, f in zip(cv, flat)), Fraction(0)) for t in range(size)] for cv in coeffs], size
    )
    ideal = _swap_in(list(ideal), A.flatten())
    if ideal:
        # Frobenius-orthogonal complement of the ideal part inside C
        G = RationalMatrix(
            [[sum((a * b for a, b in zip(f, g)), Fraction(0)) for f in flat] for g in ideal], len(C)
        )
        comp = nullspace(G)
    else:
        comp = [tuple(Fraction(int(i == j)) for j in range(len(C))) for i in range(len(C))]
    movers = canonical_basis(
        [[sum((c * f[t] for c, f in zip(cv, flat)), Fraction(0)) for t in range(size)] for cv in comp], size
    )
    return [_to_matrix(v, n) for v in ideal], [_to_matrix(v, n) for v in movers]


def analyze(A, N: int) -> StructureReport:
    A = require_semisimple(A)
    invs = invariant_generators(A, N)
    ideal, movers = _adapted_centralizer(A, invs)
    basis = ideal + movers
    series = dcs(basis) if basis else CentralSeries([[]], True)
    report = StructureReport(
        A=A,
        degree=N,
        centralizer_basis=basis,
        invariant_generators=invs,
        quasi_linear=quasi_linear_check(A, N),
        ideal_indices=list(range(len(ideal))),
        mover_indices=list(range(len(ideal), len(basis))),
        dcs_chain=series.chain,
        nilpotent=series.nilpotent,
    )
    return report


class StructureContext:
    """Per-(A, N) cache of graded data used by the reduction engine."""

    def __init__(self, A, N: int):
        self.A = require_semisimple(A)
        self.n = self.A.nrows
        self.N = N
        self._ops: dict[int, HomologicalOperator] = {}
        self._kernels: dict[int, list[PolyVectorField]] = {}
        self._report: StructureReport | None = None
        self._modules: dict[int, tuple] = {}

    def operator(self, k: int) -> HomologicalOperator:
        if k not in self._ops:
            self._ops[k] = HomologicalOperator(self.A, k)
        return self._ops[k]

    def kernel(self, k: int) -> list[PolyVectorField]:
        if k not in self._kernels:
            self._kernels[k] = self.operator(k).kernel_fields()
        return self._kernels[k]

    @property
    def report(self) -> StructureReport:
        if self._report is None:
            self._report = analyze(self.A, self.N)
        return self._report

    def modules(self, k: int) -> tuple[list[PolyVectorField], list[PolyVectorField]]:
        """(mover basis, ideal basis) of the resonant fields at grade ``k``."""
        if k not in self._modules:
            rep = self.report
            self._modules[k] = (module_span(self.A, k, rep.movers), module_span(self.A, k, rep.ideal))
        return self._modules[k]

    def check_direct_sum(self, k: int) -> bool:
        mov, ide = self.modules(k)
        return len(canonical_fields(mov + ide, self.n)) == len(mov) + len(ide) == len(self.kernel(k))

    def split_modules(self, w: PolyVectorField, k: int) -> tuple[PolyVectorField, PolyVectorField]:
        """Mover and ideal components of a resonant grade-``k`` field."""
        mov, ide = self.modules(k)
        if not w:
            return w, w
        basis = mov + ide
        keys = sorted({key for f in basis for key in f.terms} | set(w.terms))
        M = RationalMatrix([[f.terms.get(key, Fraction(0)) for f in basis] for key in keys], len(basis))
        c = solve(M, [w.terms.get(key, Fraction(0)) for key in keys])
        if c is None:
            raise ValueError(f"field is not resonant at grade {k}")
        m = linear_combination(c[: len(mov)], mov, self.n)
        return m, w - m
