"""Univariate helpers backed by sympy: factorization and gcd.

The engine's own arithmetic stays exact; sympy is used only as a univariate
factorization oracle over QQ and F_p (a solved problem we do not rebuild).
"""

from __future__ import annotations

from fractions import Fraction

import sympy

from .errors import EngineError
from .poly import Poly, Ring

_x = sympy.Symbol("x")


def _to_sympy(p: Poly, var_index: int):
    ring = p.ring
    expr = sympy.Integer(0)
    for e, c in p.terms.items():
        if any(k for i, k in enumerate(e) if i != var_index):
            raise EngineError(f"not univariate in {ring.vars[var_index]}: {p}")
        if isinstance(c, Fraction):
            coeff = sympy.Rational(c.numerator, c.denominator)
        else:
            coeff = sympy.Integer(c)
        expr += coeff * _x ** e[var_index]
    return expr


def _from_sympy(expr, ring: Ring, var_index: int) -> Poly:
    poly = sympy.Poly(expr, _x)
    out = ring.zero()
    for (k,), c in poly.terms():
        if ring.characteristic:
            coeff = int(c) % ring.characteristic
        else:
            coeff = Fraction(int(sympy.numer(c)), int(sympy.denom(c)))
        out = out + ring.monomial(tuple(k if i == var_index else 0 for i in range(ring.nvars)), coeff)
    return out


def factor_univariate(p: Poly, var_index: int):
    """Monic irreducible factorization: (leading coefficient, [(factor, mult)])."""
    if p.is_zero():
        raise EngineError("factoring the zero polynomial")
    ring = p.ring
    expr = _to_sympy(p, var_index)
    char = ring.characteristic
    if char:
        content, factors = sympy.factor_list(expr, _x, modulus=char)
    else:
        content, factors = sympy.factor_list(expr, _x)
    lead = ring.field.coerce(
        Fraction(int(sympy.numer(content)), int(sympy.denom(content)))
        if not char
        else int(content)
    )
    out = []
    for fac, mult in sorted(factors, key=lambda fm: (sympy.Poly(fm[0], _x).degree(), str(fm[0]))):
        q = _from_sympy(fac, ring, var_index)
        # normalize monic; fold the leading unit into `lead`
        lc = q.terms[max(q.terms, key=lambda e: e[var_index])]
        if lc != ring.field.one:
            from .poly import pow_scalar

            lead = ring.field.mul(lead, pow_scalar(ring.field, lc, mult))
            q = q.monic_by(lc)
        out.append((q, int(mult)))
    return lead, out


def gcd_univariate(p: Poly, q: Poly, var_index: int) -> Poly:
    """Monic gcd of two univariate polynomials."""
    if p.is_zero():
        return q
    if q.is_zero():
        return p
    ring = p.ring
    char = ring.characteristic
    a, b = _to_sympy(p, var_index), _to_sympy(q, var_index)
    g = sympy.gcd(sympy.Poly(a, _x, modulus=char) if char else sympy.Poly(a, _x),
                  sympy.Poly(b, _x, modulus=char) if char else sympy.Poly(b, _x))
    out = _from_sympy(sympy.Poly(g, _x).as_expr(), ring, var_index)
    lc = out.terms[max(out.terms, key=lambda e: e[var_index])]
    return out.monic_by(lc)


def order_at_zero(p: Poly, var_index: int) -> int:
    """Vanishing order at the origin of a univariate polynomial."""
    if p.is_zero():
        raise EngineError("order of the zero polynomial")
    return min(e[var_index] for e in p.terms)
