"""Independent oracles shared by the test modules.

These deliberately avoid the engine's own computation paths: the residue
oracle inverts and traces inside sympy's univariate arithmetic, and the
elimination oracle is a Sylvester determinant.
"""

from fractions import Fraction

import sympy

from cyclecalc.poly import Poly
from cyclecalc.symbols import _determinant


def sympy_poly(p: Poly, var_index: int = 0, name: str = "x"):
    s = sympy.Symbol(name)
    expr = sympy.Integer(0)
    for e, c in p.terms.items():
        expr += sympy.Rational(c.numerator, c.denominator) * s ** e[var_index]
    return sympy.Poly(expr, s)


def sum_over_roots_residue(h: Poly, g: Poly) -> Fraction:
    """Sum of h(r)/g'(r) over the roots of a squarefree monic g, computed as
    the trace of multiplication by h * (g')^{-1} in QQ[x]/(g)."""
    s = sympy.Symbol("x")
    gp, hp = sympy_poly(g), sympy_poly(h)
    inv = sympy.invert(gp.diff(s).as_expr(), gp.as_expr(), s)
    u = sympy.Poly(sympy.rem(sympy.expand(hp.as_expr() * inv), gp.as_expr(), s), s)
    n = gp.degree()
    trace = sympy.Integer(0)
    for i in range(n):
        col = sympy.Poly(sympy.rem(sympy.expand(u.as_expr() * s**i), gp.as_expr(), s), s)
        trace += col.coeff_monomial(s**i)
    return Fraction(int(sympy.numer(trace)), int(sympy.denom(trace)))


def sylvester_resultant(f: Poly, g: Poly, var: int) -> Poly:
    """Resultant in one variable via the Sylvester determinant."""
    ring = f.ring
    fc, gc = f.coeffs_in(var), g.coeffs_in(var)
    m, n = max(fc), max(gc)
    size = m + n
    rows = []
    for i in range(n):
        row = [ring.zero()] * size
        for k, coeff in fc.items():
            row[i + (m - k)] = coeff
        rows.append(row)
    for i in range(m):
        row = [ring.zero()] * size
        for k, coeff in gc.items():
            row[i + (n - k)] = coeff
        rows.append(row)
    return _determinant(rows, ring)
