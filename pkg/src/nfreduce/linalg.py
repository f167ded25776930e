"""Exact rational dense linear algebra.

Elimination runs fraction-free (Bareiss) on integer rows obtained by clearing
denominators; results are returned as Fractions in reduced row echelon form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .fields import Key, as_fraction, grade_basis

Vector = tuple[Fraction, ...]


class RationalMatrix:
    """Dense exact-rational matrix stored row-major."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        rows = tuple(tuple(as_fraction(v) for v in row) for row in rows)
        if ncols is None:
            if not rows:
                raise ValueError("ncols required for an empty matrix")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, r: int, c: int) -> "RationalMatrix":
        return cls([[0] * c for _ in range(r)], c)

    @classmethod
    def diag(cls, values: Sequence) -> "RationalMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "RationalMatrix":
        return cls([[col[i] for col in columns] for i in range(nrows)], len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self.rows), self.nrows) if self.nrows else RationalMatrix([], 0)

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.ncols)]

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.shape, self.rows))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(v) for v in r) for r in self.rows)
        return f"RationalMatrix([{body}])"

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        _same_shape(self, other)
        return RationalMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols
        )

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        _same_shape(self, other)
        return RationalMatrix(
            [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols
        )

    def scale(self, c) -> "RationalMatrix":
        c = as_fraction(c)
        return RationalMatrix([[c * v for v in r] for r in self.rows], self.ncols)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = other.columns()
            return RationalMatrix(
                [[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self.rows],
                other.ncols,
            )
        v = tuple(other)
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum((a * b for a, b in zip(r, v)), Fraction(0)) for r in self.rows)

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    def flatten(self) -> Vector:
        return tuple(v for r in self.rows for v in r)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self.rows]


def _same_shape(a: RationalMatrix, b: RationalMatrix) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")


def as_matrix(M) -> RationalMatrix:
    return M if isinstance(M, RationalMatrix) else RationalMatrix(M)


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for r in rows:
        den = lcm(*(v.denominator for v in r)) if r else 1
        out.append([int(v * den) for v in r])
    return out


def _bareiss(rows: list[list[int]], ncols: int) -> list[int]:
    """In-place fraction-free forward elimination; returns pivot columns."""
    nrows = len(rows)
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        prow = rows[r]
        for i in range(r + 1, nrows):
            row = rows[i]
            a = row[c]
            if a:
                for j in range(c + 1, ncols):
                    q, rem = divmod(piv * row[j] - a * prow[j], prev)
                    assert rem == 0, "Bareiss division not exact"
                    row[j] = q
            else:
                for j in range(c + 1, ncols):
                    q, rem = divmod(piv * row[j], prev)
                    assert rem == 0, "Bareiss division not exact"
                    row[j] = q
            row[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def rref(M) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns."""
    M = as_matrix(M)
    if not M.nrows or not M.ncols:
        return [], []
    rows = _integer_rows(M.rows)
    pivots = _bareiss(rows, M.ncols)
    R = [[Fraction(v) for v in rows[i]] for i in range(len(pivots))]
    for i in range(len(pivots) - 1, -1, -1):
        c = pivots[i]
        piv = R[i][c]
        R[i] = [v / piv for v in R[i]]
        for k in range(i):
            a = R[k][c]
            if a:
                R[k] = [x - a * y for x, y in zip(R[k], R[i])]
    return R, pivots


def rank(M) -> int:
    return len(rref(M)[1])


def nullspace(M) -> list[Vector]:
    """Canonical basis of ``{v : M v = 0}`` (itself in reduced echelon form)."""
    M = as_matrix(M)
    n = M.ncols
    R, pivots = rref(M)
    free = [j for j in range(n) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -R[i][f]
        basis.append(v)
    return canonical_basis(basis, n)


def canonical_basis(vectors: Sequence[Sequence], size: int) -> list[Vector]:
    """RREF of the span of ``vectors`` (rows), as tuples."""
    vectors = [v for v in vectors]
    if not vectors:
        return []
    R, _ = rref(RationalMatrix(vectors, size))
    return [tuple(r) for r in R]


def image(M) -> "GradedSubspace":
    """Column space of ``M`` in canonical form."""
    M = as_matrix(M)
    return GradedSubspace(M.nrows, M.columns())


def solve(M, b) -> Vector | None:
    """Some solution of ``M x = b``; ``None`` when inconsistent."""
    M = as_matrix(M)
    b = tuple(as_fraction(v) for v in b)
    if len(b) != M.nrows:
        raise ValueError("right-hand side length mismatch")
    if M.ncols == 0:
        return () if not any(b) else None
    aug = RationalMatrix([list(r) + [bv] for r, bv in zip(M.rows, b)], M.ncols + 1)
    R, pivots = rref(aug)
    if pivots and pivots[-1] == M.ncols:
        return None
    x = [Fraction(0)] * M.ncols
    for i, c in enumerate(pivots):
        x[c] = R[i][-1]
    return tuple(x)


def _gram_apply(G: RationalMatrix, v: Sequence) -> Vector:
    return G @ v


def _dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def solve_min_norm(M, b, G) -> Vector | None:
    """Solution of ``M x = b`` that is G-orthogonal to ``Ker(M)``.

    ``G`` is the positive definite Gram matrix of the domain. Returns ``None``
    when the system is inconsistent.
    """
    M, G = as_matrix(M), as_matrix(G)
    if G.shape != (M.ncols, M.ncols):
        raise ValueError(f"Gram matrix shape {G.shape} does not match {M.ncols} unknowns")
    x0 = solve(M, b)
    if x0 is None:
        return None
    K = nullspace(M)
    if not K:
        return x0
    GK = [_gram_apply(G, k) for k in K]
    gram = RationalMatrix([[_dot(ki, gkj) for gkj in GK] for ki in K], len(K))
    rhs = [_dot(gk, x0) for gk in GK]
    c = solve(gram, rhs)
    return tuple(x - sum((ci * k[j] for ci, k in zip(c, K)), Fraction(0)) for j, x in enumerate(x0))


def project(basis: Sequence[Sequence], w: Sequence, gram_diag: Sequence) -> Vector:
    """Orthogonal projection of ``w`` onto span(basis) for a diagonal inner product."""
    if not basis:
        return tuple(Fraction(0) for _ in w)
    Gb = [[g * v for g, v in zip(gram_diag, b)] for b in basis]
    gram = RationalMatrix([[_dot(bi, gbj) for gbj in Gb] for bi in basis], len(basis))
    c = solve(gram, [_dot(gb, w) for gb in Gb])
    return tuple(sum((ci * b[j] for ci, b in zip(c, basis)), Fraction(0)) for j in range(len(w)))


@dataclass(frozen=True)
class Ambient:
    """Descriptor of V_k: dimension, grade and ordered monomial-vector basis."""

    dim: int
    grade: int
    keys: tuple[Key, ...] = field(repr=False)

    @classmethod
    def of(cls, dim: int, grade: int) -> "Ambient":
        return cls(dim, grade, tuple(grade_basis(dim, grade)))

    @property
    def size(self) -> int:
        return len(self.keys)


class GradedSubspace:
    """Subspace of a coordinate space, stored as a canonical RREF basis.

    ``ambient`` is either an :class:`Ambient` (a graded component V_k) or a
    plain integer size for bare coordinate spaces.
    """

    __slots__ = ("ambient", "basis")

    def __init__(self, ambient, vectors: Iterable[Sequence] = ()):
        self.ambient = ambient
        size = self.size
        vecs = [tuple(as_fraction(v) for v in vec) for vec in vectors]
        if any(len(v) != size for v in vecs):
            raise ValueError("vector length does not match ambient size")
        self.basis = tuple(canonical_basis(vecs, size))

    @property
    def size(self) -> int:
        return self.ambient.size if isinstance(self.ambient, Ambient) else int(self.ambient)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def full(cls, ambient) -> "GradedSubspace":
        obj = cls(ambient)
        n = obj.size
        obj.basis = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
        return obj

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedSubspace):
            return NotImplemented
        return self.ambient == other.ambient and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient, self.basis))

    def __repr__(self) -> str:
        return f"GradedSubspace(size={self.size}, dim={self.dim})"

    def contains(self, v: Sequence) -> bool:
        return rank(list(self.basis) + [tuple(v)]) == self.dim if self.basis else not any(v)

    def vectors_as_fields(self):
        """Basis vectors as fields (requires an :class:`Ambient`)."""
        from .fields import PolyVectorField

        amb = self.ambient
        return [
            PolyVectorField._raw(amb.dim, {k: c for k, c in zip(amb.keys, v) if c}) for v in self.basis
        ]


def intersect(U: GradedSubspace, V: GradedSubspace) -> GradedSubspace:
    if U.ambient != V.ambient:
        raise ValueError("ambient mismatch")
    if not U.basis or not V.basis:
        return GradedSubspace(U.ambient)
    # u = sum a_i U_i = sum b_j V_j  <=>  [U^T | -V^T] (a, b) = 0
    size = U.size
    cols = list(U.basis) + [tuple(-x for x in v) for v in V.basis]
    M = RationalMatrix.from_columns(cols, size)
    vecs = []
    for sol in nullspace(M):
        a = sol[: U.dim]
        vecs.append(tuple(sum((ai * u[j] for ai, u in zip(a, U.basis)), Fraction(0)) for j in range(size)))
    return GradedSubspace(U.ambient, vecs)


def subspace_sum(U: GradedSubspace, V: GradedSubspace) -> GradedSubspace:
    if U.ambient != V.ambient:
        raise ValueError("ambient mismatch")
    return GradedSubspace(U.ambient, list(U.basis) + list(V.basis))


# univariate polynomials: coefficient lists, lowest degree first


def _poly_trim(p: list[Fraction]) -> list[Fraction]:
    while p and not p[-1]:
        p.pop()
    return p


def _poly_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    while len(a) >= len(b) and a:
        q = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= q * c
        _poly_trim(a)
    return a


def poly_gcd(a: Sequence, b: Sequence) -> list[Fraction]:
    a = _poly_trim([as_fraction(v) for v in a])
    b = _poly_trim([as_fraction(v) for v in b])
    while b:
        a, b = b, _poly_rem(a, b)
    if a:
        a = [c / a[-1] for c in a]
    return a


def minimal_polynomial(A) -> list[Fraction]:
    """Monic minimal polynomial of a square matrix (lowest degree first)."""
    A = as_matrix(A)
    n = A.nrows
    if A.ncols != n:
        raise ValueError("matrix must be square")
    powers = [RationalMatrix.identity(n)]
    for d in range(1, n + 1):
        powers.append(powers[-1] @ A)
        cols = [P.flatten() for P in powers]
        ker = nullspace(RationalMatrix.from_columns(cols, n * n))
        if ker:
            v = list(ker[-1])
            _poly_trim(v)
            return [c / v[-1] for c in v]
    raise AssertionError("Cayley-Hamilton violated")


def is_semisimple(A) -> bool:
    """True iff the minimal polynomial of ``A`` is squarefree over Q."""
    A = as_matrix(A)
    if A.nrows != A.ncols:
        raise ValueError("matrix must be square")
    m = minimal_polynomial(A)
    dm = [i * c for i, c in enumerate(m)][1:]
    return len(poly_gcd(m, dm)) == 1
