"""Sparse polynomial vector fields with exact rational coefficients.

A field ``f = f^i(x) d_i`` on R^n is stored as a map ``(component, exponents)
-> Fraction``. Components are 0-based internally; documents and rendered
output use 1-based indices. The grade of a term ``c x^mu d_alpha`` is
``|mu| - 1``, so linear fields have grade 0.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

Exponents = tuple[int, ...]
Key = tuple[int, Exponents]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point coefficients are not accepted")
    return Fraction(value)


def monomials(n: int, degree: int) -> list[Exponents]:
    """All exponent tuples of total ``degree`` in ``n`` variables, lex ascending."""
    if degree < 0:
        return []
    out = []
    for combo in combinations_with_replacement(range(n), degree):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort()
    return out


def grade_basis(n: int, k: int) -> list[Key]:
    """Ordered monomial-vector basis of the grade-``k`` component V_k."""
    mons = monomials(n, k + 1)
    return [(a, m) for a in range(n) for m in mons]


def exponent_factorial(mu: Exponents) -> int:
    out = 1
    for m in mu:
        out *= factorial(m)
    return out


def _key_order(key: Key):
    comp, mu = key
    return (sum(mu) - 1, comp, mu)


class PolyVectorField:
    """Immutable sparse polynomial vector field.

    Parameters
    ----------
    dim : int
        Ambient dimension n.
    terms : mapping, optional
        ``(component, exponents) -> coefficient``; zero coefficients are dropped.
    """

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[Key, object] | None = None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        clean: dict[Key, Fraction] = {}
        for (comp, mu), c in (terms or {}).items():
            mu = tuple(int(m) for m in mu)
            if not 0 <= comp < dim:
                raise ValueError(f"component {comp} out of range for dimension {dim}")
            if len(mu) != dim or any(m < 0 for m in mu):
                raise ValueError(f"bad exponent tuple {mu} for dimension {dim}")
            c = as_fraction(c)
            if c:
                clean[(comp, mu)] = c
        self.dim = dim
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, terms: dict[Key, Fraction]) -> "PolyVectorField":
        # trusted constructor: caller guarantees valid keys and no zeros
        obj = cls.__new__(cls)
        obj.dim = dim
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, dim: int) -> "PolyVectorField":
        return cls._raw(dim, {})

    @classmethod
    def monomial(cls, dim: int, component: int, mu: Iterable[int], coeff=1) -> "PolyVectorField":
        return cls(dim, {(component, tuple(mu)): coeff})

    @property
    def terms(self) -> Mapping[Key, Fraction]:
        return MappingProxyType(self._terms)

    def items(self) -> Iterator[tuple[Key, Fraction]]:
        """Terms in canonical order: grade, then component, then exponents."""
        for key in sorted(self._terms, key=_key_order):
            yield key, self._terms[key]

    def coefficient(self, component: int, mu: Iterable[int]) -> Fraction:
        return self._terms.get((component, tuple(mu)), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"PolyVectorField({self.dim}, {format_field(self)!r})"

    def _check_dim(self, other: "PolyVectorField") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return add(self, other)

    def __neg__(self) -> "PolyVectorField":
        return PolyVectorField._raw(self.dim, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return add(self, -other)

    def scale(self, c) -> "PolyVectorField":
        c = as_fraction(c)
        if not c:
            return PolyVectorField.zero(self.dim)
        return PolyVectorField._raw(self.dim, {k: c * v for k, v in self._terms.items()})

    def __mul__(self, c) -> "PolyVectorField":
        return self.scale(c)

    __rmul__ = __mul__

    def grades(self) -> list[int]:
        return sorted({sum(mu) - 1 for _, mu in self._terms})

    def max_grade(self) -> int:
        return max(self.grades(), default=-1)

    def grade(self, k: int) -> "PolyVectorField":
        return grade_project(self, k)

    def truncate(self, max_grade: int) -> "PolyVectorField":
        return PolyVectorField._raw(
            self.dim, {key: c for key, c in self._terms.items() if sum(key[1]) - 1 <= max_grade}
        )

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def linear_part(self) -> "PolyVectorField":
        return grade_project(self, 0)

    def linear_matrix(self) -> list[list[Fraction]]:
        """Jacobian at the origin (entries ``A[i][j] = d f^i / d x^j (0)``)."""
        n = self.dim
        A = [[Fraction(0)] * n for _ in range(n)]
        for (comp, mu), c in self._terms.items():
            if sum(mu) == 1:
                A[comp][mu.index(1)] = c
        return A

    def constant_free(self) -> bool:
        return all(sum(mu) >= 1 for _, mu in self._terms)


def add(f: PolyVectorField, g: PolyVectorField) -> PolyVectorField:
    f._check_dim(g)
    out = dict(f._terms)
    for key, c in g._terms.items():
        v = out.get(key, 0) + c
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return PolyVectorField._raw(f.dim, out)


def field_sum(fields: Iterable[PolyVectorField], dim: int) -> PolyVectorField:
    out: dict[Key, Fraction] = {}
    for f in fields:
        for key, c in f._terms.items():
            out[key] = out.get(key, 0) + c
    return PolyVectorField._raw(dim, {k: v for k, v in out.items() if v})


def linear_combination(coeffs: Iterable, fields: Iterable[PolyVectorField], dim: int) -> PolyVectorField:
    out: dict[Key, Fraction] = {}
    for c, f in zip(coeffs, fields):
        if not c:
            continue
        for key, v in f._terms.items():
            out[key] = out.get(key, 0) + c * v
    return PolyVectorField._raw(dim, {k: v for k, v in out.items() if v})


def _directional(f: PolyVectorField, g: PolyVectorField, out: dict, sign: int, max_deg: int | None) -> None:
    # accumulates sign * (f . grad) g into out
    for (j, mu), c in f._terms.items():
        dmu = sum(mu)
        for (i, nu), d in g._terms.items():
            p = nu[j]
            if not p:
                continue
            if max_deg is not None and dmu + sum(nu) - 1 > max_deg:
                continue
            e = list(nu)
            e[j] -= 1
            for t in range(len(e)):
                e[t] += mu[t]
            key = (i, tuple(e))
            out[key] = out.get(key, 0) + sign * p * c * d


def bracket(f: PolyVectorField, g: PolyVectorField, max_grade: int | None = None) -> PolyVectorField:
    """Component bracket ``{f, g} = (f . grad) g - (g . grad) f``.

    With ``max_grade`` set, terms of grade above it are never formed.
    """
    f._check_dim(g)
    out: dict[Key, Fraction] = {}
    max_deg = None if max_grade is None else max_grade + 1
    _directional(f, g, out, 1, max_deg)
    _directional(g, f, out, -1, max_deg)
    return PolyVectorField._raw(f.dim, {k: v for k, v in out.items() if v})


def grade_project(f: PolyVectorField, k: int) -> PolyVectorField:
    """Part of ``f`` homogeneous of degree ``k + 1``."""
    if k < 0:
        raise ValueError("grade must be non-negative")
    return PolyVectorField._raw(f.dim, {key: c for key, c in f._terms.items() if sum(key[1]) == k + 1})


def _inner_unchecked(f: PolyVectorField, g: PolyVectorField) -> Fraction:
    if len(g._terms) < len(f._terms):
        f, g = g, f
    total = Fraction(0)
    for key, c in f._terms.items():
        d = g._terms.get(key)
        if d is not None:
            total += c * d * exponent_factorial(key[1])
    return total


def bargmann_inner(f: PolyVectorField, g: PolyVectorField) -> Fraction:
    """Bargmann product ``<x^mu e_i, x^nu e_j> = delta_ij delta_mu,nu mu!``.

    Both arguments must be homogeneous of one common grade (zero is allowed).
    """
    f._check_dim(g)
    grades = set(f.grades()) | set(g.grades())
    if len(grades) > 1:
        raise ValueError(f"bargmann_inner needs a single common grade, got {sorted(grades)}")
    return _inner_unchecked(f, g)


def apply_linear(M) -> PolyVectorField:
    """Linear field ``(M x)^i d_i`` for a square matrix ``M``."""
    rows = M.rows if hasattr(M, "rows") else M
    n = len(rows)
    terms = {}
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ValueError("matrix must be square")
        for j, c in enumerate(row):
            c = as_fraction(c)
            if c:
                mu = [0] * n
                mu[j] = 1
                terms[(i, tuple(mu))] = c
    return PolyVectorField._raw(n, terms)


class ScalarPolynomial:
    """Immutable sparse polynomial in ``dim`` variables with rational coefficients."""

    __slots__ = ("dim", "_terms")

    def __init__(self, dim: int, terms: Mapping[Exponents, object] | None = None):
        clean = {}
        for mu, c in (terms or {}).items():
            mu = tuple(int(m) for m in mu)
            if len(mu) != dim or any(m < 0 for m in mu):
                raise ValueError(f"bad exponent tuple {mu} for dimension {dim}")
            c = as_fraction(c)
            if c:
                clean[mu] = c
        self.dim = dim
        self._terms = clean

    @classmethod
    def _raw(cls, dim: int, terms: dict) -> "ScalarPolynomial":
        obj = cls.__new__(cls)
        obj.dim = dim
        obj._terms = terms
        return obj

    @classmethod
    def constant(cls, dim: int, c=1) -> "ScalarPolynomial":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def variable(cls, dim: int, i: int) -> "ScalarPolynomial":
        mu = [0] * dim
        mu[i] = 1
        return cls(dim, {tuple(mu): 1})

    @property
    def terms(self) -> Mapping[Exponents, Fraction]:
        return MappingProxyType(self._terms)

    def items(self):
        for mu in sorted(self._terms, key=lambda m: (sum(m), m)):
            yield mu, self._terms[mu]

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalarPolynomial):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.dim, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"ScalarPolynomial({self.dim}, {format_polynomial(self)!r})"

    def __add__(self, other: "ScalarPolynomial") -> "ScalarPolynomial":
        out = dict(self._terms)
        for mu, c in other._terms.items():
            v = out.get(mu, 0) + c
            if v:
                out[mu] = v
            else:
                out.pop(mu, None)
        return ScalarPolynomial._raw(self.dim, out)

    def __neg__(self) -> "ScalarPolynomial":
        return ScalarPolynomial._raw(self.dim, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other: "ScalarPolynomial") -> "ScalarPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "ScalarPolynomial":
        if not isinstance(other, ScalarPolynomial):
            c = as_fraction(other)
            return ScalarPolynomial._raw(self.dim, {m: c * v for m, v in self._terms.items() if c})
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return ScalarPolynomial._raw(self.dim, {m: v for m, v in out.items() if v})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ScalarPolynomial":
        out = ScalarPolynomial.constant(self.dim)
        for _ in range(k):
            out = out * self
        return out

    def degrees(self) -> list[int]:
        return sorted({sum(m) for m in self._terms})

    def homogeneous_part(self, d: int) -> "ScalarPolynomial":
        return ScalarPolynomial._raw(self.dim, {m: c for m, c in self._terms.items() if sum(m) == d})

    def times_field(self, f: PolyVectorField) -> PolyVectorField:
        """Pointwise product ``p(x) f(x)``."""
        out: dict = {}
        for m1, c1 in self._terms.items():
            for (i, m2), c2 in f._terms.items():
                key = (i, tuple(a + b for a, b in zip(m1, m2)))
                out[key] = out.get(key, 0) + c1 * c2
        return PolyVectorField._raw(f.dim, {k: v for k, v in out.items() if v})


def lie_derivative(f: PolyVectorField, p: ScalarPolynomial) -> ScalarPolynomial:
    """``f^j d_j p``."""
    if f.dim != p.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {p.dim}")
    out: dict = {}
    for (j, mu), c in f._terms.items():
        for nu, d in p._terms.items():
            if not nu[j]:
                continue
            e = list(nu)
            e[j] -= 1
            m = tuple(a + b for a, b in zip(e, mu))
            out[m] = out.get(m, 0) + nu[j] * c * d
    return ScalarPolynomial._raw(f.dim, {m: v for m, v in out.items() if v})


def _var_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def format_monomial(mu: Exponents) -> str:
    parts = []
    for i, m in enumerate(mu):
        if m == 1:
            parts.append(f"x{i + 1}")
        elif m > 1:
            parts.append(f"x{i + 1}^{m}")
    return " ".join(parts) if parts else "1"


def format_field(f: PolyVectorField) -> str:
    """One-line rendering, e.g. ``1 * x1^2 d_1 + -1/2 * x1 x2 d_2``."""
    if not f:
        return "0"
    return " + ".join(f"{c} * {format_monomial(mu)} d_{comp + 1}" for (comp, mu), c in f.items())


def format_polynomial(p: ScalarPolynomial) -> str:
    if not p:
        return "0"
    return " + ".join(f"{c} * {format_monomial(mu)}" for mu, c in p.items())
