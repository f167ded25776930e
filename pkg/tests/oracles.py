"""Independent sympy oracles for brackets and Lie transforms."""
from fractions import Fraction
from math import factorial

import sympy as sp

from nfreduce.fields import PolyVectorField


def symbols(n):
    return sp.symbols(f"x1:{n + 1}")


def to_sympy(f, xs=None):
    xs = xs or symbols(f.dim)
    comps = [sp.Integer(0)] * f.dim
    for (a, mu), c in f.items():
        comps[a] += sp.Rational(c.numerator, c.denominator) * sp.Mul(*[x**m for x, m in zip(xs, mu)])
    return comps


def from_sympy(exprs, xs, n):
    terms = {}
    for a, e in enumerate(exprs):
        for mon, c in sp.Poly(e, *xs).terms():
            terms[(a, tuple(mon))] = Fraction(int(c.p), int(c.q))
    return PolyVectorField(n, terms)


def sympy_bracket(f, g):
    """{f, g} = (f . grad) g - (g . grad) f, componentwise in sympy."""
    xs = symbols(f.dim)
    F, G = to_sympy(f, xs), to_sympy(g, xs)
    out = []
    for i in range(f.dim):
        e = sum(F[j] * sp.diff(G[i], xs[j]) - G[j] * sp.diff(F[i], xs[j]) for j in range(f.dim))
        out.append(sp.expand(e))
    return out


def sympy_lie_transform(f, h, N):
    """exp(ad h) f through nested sympy brackets, truncated at grade N."""
    xs = symbols(f.dim)
    k = h.grades()[0]
    total = [sp.Integer(0)] * f.dim
    term = f
    for s in range(0, N // k + 1):
        total = [t + sp.Rational(1, factorial(s)) * e for t, e in zip(total, to_sympy(term, xs))]
        term = from_sympy(sympy_bracket(h, term), xs, f.dim) if term else term
    return from_sympy([sp.expand(t) for t in total], xs, f.dim).truncate(N)
