"""Buchberger Gröbner engine.

Provides reduced bases with cofactor tracking, normal forms, elimination,
saturation, Krull dimension, and radical membership.  Pair selection uses the
sugar strategy with Gebauer-Möller pruning; budgets on pair count and lcm
degree are explicit and raise BudgetExceeded, never silently truncate.

The reduced basis for a fixed (generator tuple, order) is unique, so every
result here is reproducible across runs; results are memoized on that key.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BudgetExceeded, EngineError, RingMismatch
from .orders import (
    MonomialOrder,
    block_order,
    degrevlex,
    exp_add,
    exp_divides,
    exp_lcm,
    exp_sub,
)
from .poly import Poly, Ring


@dataclass(frozen=True)
class Budget:
    """Resource limits for a single Gröbner run."""

    max_pairs: int = 50_000
    max_degree: int = 120

    def check_pairs(self, n: int):
        if n > self.max_pairs:
            raise BudgetExceeded("S-pair count", self.max_pairs)

    def check_degree(self, d: int):
        if d > self.max_degree:
            raise BudgetExceeded("S-pair lcm degree", self.max_degree)


DEFAULT_BUDGET = Budget()


class Ideal:
    """An ideal presented by a generator sequence (order of gens is kept:
    cofactor lifts are expressed against exactly this sequence)."""

    __slots__ = ("ring", "gens", "_hash")

    def __init__(self, ring: Ring, gens: Iterable[Poly]):
        self.ring = ring
        cleaned = []
        for g in gens:
            if g.ring != ring:
                raise RingMismatch("generator in wrong ring")
            cleaned.append(g)
        self.gens = tuple(cleaned)
        self._hash = None

    def nonzero_gens(self) -> tuple:
        return tuple(g for g in self.gens if not g.is_zero())

    def __eq__(self, other):
        return (
            isinstance(other, Ideal)
            and self.ring == other.ring
            and self.gens == other.gens
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, self.gens))
        return self._hash

    def __repr__(self):
        return f"Ideal({', '.join(map(str, self.gens))})"


def ideal(ring: Ring, *gens) -> Ideal:
    return Ideal(ring, gens)


# ---------------------------------------------------------------------------
# leading terms and division

def leading(poly: Poly, order: MonomialOrder):
    """(exponent, coefficient) of the leading term."""
    if poly.is_zero():
        raise EngineError("leading term of zero")
    e = max(poly.terms, key=order.key)
    return e, poly.terms[e]


def _mul_monomial(p: Poly, exp, coeff) -> Poly:
    fld = p.ring.field
    return Poly(
        p.ring,
        {exp_add(e, exp): fld.mul(c, coeff) for e, c in p.terms.items()},
    )


def divide(f: Poly, basis: Sequence[Poly], order: MonomialOrder):
    """Multivariate division: f = sum(q_i * basis_i) + r.

    Returns (r, [q_i]); no term of r is divisible by any leading term of the
    basis.  Deterministic: always reduces by the first divisor in basis order.
    """
    ring = f.ring
    fld = ring.field
    lead = [leading(g, order) for g in basis]
    quots: list[dict] = [dict() for _ in basis]
    rem: dict = {}
    work = dict(f.terms)
    while work:
        e = max(work, key=order.key)
        c = work.pop(e)
        for i, (le, lc) in enumerate(lead):
            if exp_divides(le, e):
                q_exp = exp_sub(e, le)
                q_coeff = fld.div(c, lc)
                quots[i][q_exp] = fld.add(quots[i].get(q_exp, fld.zero), q_coeff)
                if quots[i][q_exp] == fld.zero:
                    del quots[i][q_exp]
                # work -= q * g  (the leading term cancels by construction)
                for ge, gc in basis[i].terms.items():
                    if ge == le:
                        continue
                    te = exp_add(ge, q_exp)
                    v = fld.sub(work.get(te, fld.zero), fld.mul(gc, q_coeff))
                    if v == fld.zero:
                        work.pop(te, None)
                    else:
                        work[te] = v
                break
        else:
            rem[e] = c
    return Poly(ring, rem), [Poly(ring, q) for q in quots]


# ---------------------------------------------------------------------------
# Buchberger with cofactor tracking

class _Tracked:
    """A polynomial together with its expression over the original gens."""

    __slots__ = ("poly", "rep", "sugar")

    def __init__(self, poly: Poly, rep: list, sugar: int):
        self.poly = poly
        self.rep = rep
        self.sugar = sugar


def _reduce_tracked(h: _Tracked, against: list, order: MonomialOrder) -> _Tracked:
    r, quots = divide(h.poly, [t.poly for t in against], order)
    rep = list(h.rep)
    sugar = h.sugar
    for q, t in zip(quots, against):
        if q.is_zero():
            continue
        sugar = max(sugar, q.total_degree() + t.sugar)
        for j in range(len(rep)):
            if not t.rep[j].is_zero():
                rep[j] = rep[j] - q * t.rep[j]
    return _Tracked(r, rep, sugar)


def _update_pairs(G: list, P: set, t: _Tracked, order: MonomialOrder):
    """Gebauer-Möller pair update when t joins the basis G."""
    lmG = [leading(g.poly, order)[0] for g in G]
    lmf = leading(t.poly, order)[0]
    k = len(G)

    P = {
        p
        for p in P
        if (
            not exp_divides(lmf, exp_lcm(lmG[p[0]], lmG[p[1]]))
            or exp_lcm(lmG[p[0]], lmG[p[1]]) == exp_lcm(lmG[p[0]], lmf)
            or exp_lcm(lmG[p[0]], lmG[p[1]]) == exp_lcm(lmG[p[1]], lmf)
        )
    }

    lcm_groups: dict = {}
    for i in range(k):
        lcm_groups.setdefault(exp_lcm(lmG[i], lmf), []).append(i)
    kept = []
    for L in sorted(lcm_groups, key=order.key):
        if all(not exp_divides(L2, L) for L2 in kept):
            kept.append(L)
    new_pairs = set()
    for L in kept:
        # product criterion: skip coprime leading monomials
        if any(L == exp_add(lmG[i], lmf) for i in lcm_groups[L]):
            continue
        new_pairs.add((min(lcm_groups[L]), k))

    G.append(t)
    return G, P | new_pairs


class GBasis:
    """A reduced Gröbner basis with its leading data and cofactor matrix.

    basis[i] == sum_j reps[i][j] * ideal.gens[j] holds exactly; the basis is
    monic, auto-reduced, and canonically sorted, hence unique for
    (ideal.gens, order).
    """

    __slots__ = ("ideal", "order", "basis", "reps", "lead_exps")

    def __init__(self, ideal_: Ideal, order: MonomialOrder, basis, reps):
        self.ideal = ideal_
        self.order = order
        self.basis = list(basis)
        self.reps = [list(r) for r in reps]
        self.lead_exps = [leading(g, order)[0] for g in self.basis]

    @property
    def ring(self) -> Ring:
        return self.ideal.ring

    def is_unit(self) -> bool:
        return len(self.basis) == 1 and self.basis[0].is_constant() and not self.basis[0].is_zero()

    def normal_form(self, f: Poly) -> Poly:
        if not self.basis:
            return f
        r, _ = divide(f, self.basis, self.order)
        return r

    def contains(self, f: Poly) -> bool:
        return self.normal_form(f).is_zero()

    def __repr__(self):
        return f"GBasis[{', '.join(map(str, self.basis))}]"


_gb_cache: dict = {}

# When enabled, every basis computed is recorded for the suite-wide
# Buchberger zero-reduction audit.
_audit_enabled = False
_audit_log: list = []


def set_audit(enabled: bool):
    global _audit_enabled
    _audit_enabled = enabled
    if not enabled:
        _audit_log.clear()


def audit_log() -> list:
    return list(_audit_log)


def buchberger_audit(gb: GBasis) -> bool:
    """Post-hoc Buchberger criterion: every S-polynomial reduces to zero."""
    n = len(gb.basis)
    fld = gb.ring.field
    for i in range(n):
        for j in range(i + 1, n):
            ei, ci = leading(gb.basis[i], gb.order)
            ej, cj = leading(gb.basis[j], gb.order)
            L = exp_lcm(ei, ej)
            s = _mul_monomial(gb.basis[i], exp_sub(L, ei), fld.inv(ci)) - _mul_monomial(
                gb.basis[j], exp_sub(L, ej), fld.inv(cj)
            )
            if not gb.normal_form(s).is_zero():
                return False
    return True


def groebner(I: Ideal, order: MonomialOrder | None = None, budget: Budget = DEFAULT_BUDGET) -> GBasis:
    """Reduced Gröbner basis of I; deterministic for (gens, order)."""
    if order is None:
        order = degrevlex(I.ring.nvars)
    key = (I.ring, I.gens, order)
    hit = _gb_cache.get(key)
    if hit is not None:
        return hit

    ring = I.ring
    fld = ring.field
    ngens = len(I.gens)

    def unit_rep(i):
        return [ring.one() if j == i else ring.zero() for j in range(ngens)]

    G: list = []
    P: set = set()
    for i, g in enumerate(I.gens):
        if g.is_zero():
            continue
        t = _Tracked(g, unit_rep(i), max(g.total_degree(), 0))
        t = _reduce_tracked(t, G, order) if G else t
        if t.poly.is_zero():
            continue
        G, P = _update_pairs(G, P, t, order)

    processed = 0
    while P:
        def pair_key(p):
            L = exp_lcm(
                leading(G[p[0]].poly, order)[0], leading(G[p[1]].poly, order)[0]
            )
            sugar = max(
                G[p[0]].sugar + sum(exp_sub(L, leading(G[p[0]].poly, order)[0])),
                G[p[1]].sugar + sum(exp_sub(L, leading(G[p[1]].poly, order)[0])),
            )
            return (sugar, order.key(L), p)

        p = min(P, key=pair_key)
        P.discard(p)
        processed += 1
        budget.check_pairs(processed)

        gi, gj = G[p[0]], G[p[1]]
        ei, ci = leading(gi.poly, order)
        ej, cj = leading(gj.poly, order)
        L = exp_lcm(ei, ej)
        budget.check_degree(sum(L))
        mi, mj = exp_sub(L, ei), exp_sub(L, ej)
        s_poly = _mul_monomial(gi.poly, mi, fld.inv(ci)) - _mul_monomial(
            gj.poly, mj, fld.inv(cj)
        )
        rep = [
            _mul_monomial(a, mi, fld.inv(ci)) - _mul_monomial(b, mj, fld.inv(cj))
            if not (a.is_zero() and b.is_zero())
            else ring.zero()
            for a, b in zip(gi.rep, gj.rep)
        ]
        sugar = max(gi.sugar + sum(mi), gj.sugar + sum(mj))
        t = _reduce_tracked(_Tracked(s_poly, rep, sugar), G, order)
        if not t.poly.is_zero():
            G, P = _update_pairs(G, P, t, order)

    gb = _finalize(I, order, G)
    _gb_cache[key] = gb
    if _audit_enabled:
        _audit_log.append(gb)
    return gb


def _finalize(I: Ideal, order: MonomialOrder, G: list) -> GBasis:
    ring = I.ring
    fld = ring.field
    ngens = len(I.gens)
    if not G:
        return GBasis(I, order, [], [])

    # minimalize: drop elements whose LM is divisible by another LM
    G_sorted = sorted(G, key=lambda t: order.key(leading(t.poly, order)[0]))
    minimal: list = []
    for t in G_sorted:
        lm = leading(t.poly, order)[0]
        if all(not exp_divides(leading(u.poly, order)[0], lm) for u in minimal):
            minimal.append(t)

    # interreduce and normalize to monic
    reduced: list = []
    for i, t in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1 :]
        r, quots = divide(t.poly, [u.poly for u in others], order)
        rep = list(t.rep)
        for q, u in zip(quots, others):
            if q.is_zero():
                continue
            for j in range(ngens):
                if not u.rep[j].is_zero():
                    rep[j] = rep[j] - q * u.rep[j]
        lc = leading(r, order)[1]
        inv = fld.inv(lc)
        r = r.scale(inv)
        rep = [c.scale(inv) for c in rep]
        reduced.append((r, rep))

    reduced.sort(key=lambda pair: order.key(leading(pair[0], order)[0]))
    return GBasis(I, order, [p for p, _ in reduced], [r for _, r in reduced])


# ---------------------------------------------------------------------------
# derived operations

def normal_form(f: Poly, I: Ideal, order: MonomialOrder | None = None, budget: Budget = DEFAULT_BUDGET) -> Poly:
    return groebner(I, order, budget).normal_form(f)


def member(f: Poly, I: Ideal, budget: Budget = DEFAULT_BUDGET) -> bool:
    return normal_form(f, I, None, budget).is_zero()


def cofactor_lift(f: Poly, I: Ideal, budget: Budget = DEFAULT_BUDGET) -> list:
    """Write f = sum(c_j * I.gens[j]); error if f is not in I."""
    gb = groebner(I, None, budget)
    if not gb.basis:
        if f.is_zero():
            return [I.ring.zero() for _ in I.gens]
        raise EngineError(f"{f} is not a member of the zero ideal")
    r, quots = divide(f, gb.basis, gb.order)
    if not r.is_zero():
        raise EngineError(f"{f} is not a member of the ideal")
    cof = [I.ring.zero() for _ in I.gens]
    for q, rep in zip(quots, gb.reps):
        if q.is_zero():
            continue
        for j in range(len(cof)):
            if not rep[j].is_zero():
                cof[j] = cof[j] + q * rep[j]
    return cof


def is_unit_ideal(I: Ideal, budget: Budget = DEFAULT_BUDGET) -> bool:
    for g in I.gens:
        if not g.is_zero() and g.is_constant():
            return True
    return groebner(I, None, budget).is_unit()


def _fresh_names(ring: Ring, count: int, stem: str = "_z") -> list:
    names = []
    k = 0
    taken = set(ring.vars)
    while len(names) < count:
        cand = f"{stem}{k}"
        if cand not in taken:
            names.append(cand)
            taken.add(cand)
        k += 1
    return names


def eliminate(I: Ideal, drop: Iterable[str], budget: Budget = DEFAULT_BUDGET) -> Ideal:
    """I ∩ k[vars - drop], computed with a block order."""
    ring = I.ring
    drop_set = set(drop)
    for v in drop_set:
        ring.index(v)  # validate
    drop_idx = [i for i, v in enumerate(ring.vars) if v in drop_set]
    keep_idx = [i for i, v in enumerate(ring.vars) if v not in drop_set]
    if not drop_idx:
        return I
    order = block_order(drop_idx, keep_idx)
    gb = groebner(I, order, budget)
    sub = ring.drop(drop_set)
    index_map = {i: sub.index(ring.vars[i]) for i in keep_idx}
    kept = []
    for g in gb.basis:
        if all(all(e[i] == 0 for i in drop_idx) for e in g.terms):
            kept.append(g.inject(sub, index_map))
    return Ideal(sub, kept)


def saturate_poly(I: Ideal, g: Poly, budget: Budget = DEFAULT_BUDGET) -> Ideal:
    """(I : g^inf) by the tag-variable method."""
    ring = I.ring
    if g.is_zero():
        return Ideal(ring, [ring.one()])
    if g.is_constant():
        return I
    (tag,) = _fresh_names(ring, 1)
    ext = ring.extend([tag])
    idx = {i: i for i in range(ring.nvars)}
    gens = [p.inject(ext, idx) for p in I.gens]
    gens.append(ext.one() - ext.var(tag) * g.inject(ext, idx))
    J = eliminate(Ideal(ext, gens), [tag], budget)
    # eliminate() returns the ideal in a ring with the same remaining vars
    back = {i: i for i in range(ring.nvars)}
    return Ideal(ring, [p.inject(ring, back) for p in J.gens])


def ideal_intersect(A: Ideal, B: Ideal, budget: Budget = DEFAULT_BUDGET) -> Ideal:
    ring = A.ring
    if ring != B.ring:
        raise RingMismatch("intersection across rings")
    (tag,) = _fresh_names(ring, 1, "_w")
    ext = ring.extend([tag])
    idx = {i: i for i in range(ring.nvars)}
    t = ext.var(tag)
    gens = [t * a.inject(ext, idx) for a in A.nonzero_gens()]
    gens += [(ext.one() - t) * b.inject(ext, idx) for b in B.nonzero_gens()]
    J = eliminate(Ideal(ext, gens), [tag], budget)
    back = {i: i for i in range(ring.nvars)}
    return Ideal(ring, [p.inject(ring, back) for p in J.gens])


def saturate(I: Ideal, J: Ideal, budget: Budget = DEFAULT_BUDGET) -> Ideal:
    """(I : J^inf) = intersection of (I : g^inf) over generators g of J."""
    gens = J.nonzero_gens()
    if not gens:
        return Ideal(I.ring, [I.ring.one()])
    parts = [saturate_poly(I, g, budget) for g in gens]
    out = parts[0]
    for p in parts[1:]:
        out = ideal_intersect(out, p, budget)
    return out


def krull_dim(I: Ideal, budget: Budget = DEFAULT_BUDGET) -> int:
    """Krull dimension of ring/I via maximal LT-independent variable sets."""
    gb = groebner(I, None, budget)
    if gb.is_unit():
        raise EngineError("dimension of the unit ideal")
    n = I.ring.nvars
    if not gb.basis:
        return n
    supports = [frozenset(i for i, k in enumerate(e) if k) for e in gb.lead_exps]
    from itertools import combinations

    for size in range(n, -1, -1):
        for S in combinations(range(n), size):
            Sset = set(S)
            if all(not supp <= Sset for supp in supports):
                return size
    return 0


def max_independent_set(I: Ideal, within: Iterable[int] | None = None, budget: Budget = DEFAULT_BUDGET) -> tuple:
    """A maximum LT-independent variable set, optionally inside `within`.

    Deterministic: lexicographically first among maximum-size sets.
    """
    gb = groebner(I, None, budget)
    if gb.is_unit():
        raise EngineError("independent set of the unit ideal")
    pool = tuple(sorted(within)) if within is not None else tuple(range(I.ring.nvars))
    supports = [frozenset(i for i, k in enumerate(e) if k) for e in gb.lead_exps]
    from itertools import combinations

    for size in range(len(pool), -1, -1):
        for S in combinations(pool, size):
            Sset = set(S)
            if all(not supp <= Sset for supp in supports):
                return S
    return ()


def radical_member(f: Poly, I: Ideal, budget: Budget = DEFAULT_BUDGET) -> bool:
    """f in sqrt(I), by the Rabinowitsch trick."""
    if f.is_zero():
        return True
    ring = I.ring
    (tag,) = _fresh_names(ring, 1, "_r")
    ext = ring.extend([tag])
    idx = {i: i for i in range(ring.nvars)}
    gens = [p.inject(ext, idx) for p in I.gens]
    gens.append(ext.one() - ext.var(tag) * f.inject(ext, idx))
    return is_unit_ideal(Ideal(ext, gens), budget)


def ideal_sum(A: Ideal, B: Ideal) -> Ideal:
    if A.ring != B.ring:
        raise RingMismatch("sum across rings")
    return Ideal(A.ring, A.gens + B.gens)


def ideal_product(A: Ideal, B: Ideal) -> Ideal:
    if A.ring != B.ring:
        raise RingMismatch("product across rings")
    gens = [a * b for a in A.nonzero_gens() for b in B.nonzero_gens()]
    if not gens:
        gens = [A.ring.zero()]
    return Ideal(A.ring, gens)


def ideal_equal(A: Ideal, B: Ideal, budget: Budget = DEFAULT_BUDGET) -> bool:
    if A.ring != B.ring:
        raise RingMismatch("comparison across rings")
    ga = groebner(A, None, budget)
    gb = groebner(B, None, budget)
    return ga.basis == gb.basis


def ideal_contains(A: Ideal, B: Ideal, budget: Budget = DEFAULT_BUDGET) -> bool:
    """A ⊇ B as ideals."""
    ga = groebner(A, None, budget)
    return all(ga.normal_form(g).is_zero() for g in B.gens)


def fiber_staircase(
    I: Ideal, fiber_idx: Sequence[int], budget: Budget = DEFAULT_BUDGET
) -> list | None:
    """Monomial basis of ring/I over the fraction field of the other variables.

    Under a block order with the fiber variables dominant, a Gröbner basis of
    I is one for the extension of I over k(base); the staircase in the fiber
    variables is the requested basis.  Returns the list of fiber exponent
    tuples (empty when the extended ideal is the unit ideal), or None when the
    staircase is infinite (the fiber is not finite over the base).
    """
    ring = I.ring
    fiber = list(fiber_idx)
    base = [i for i in range(ring.nvars) if i not in set(fiber)]
    if not fiber:
        return [()]
    order = block_order(fiber, base) if base else None
    gb = groebner(I, order, budget)
    if not gb.basis:
        return None
    fparts = []
    for e in gb.lead_exps:
        fp = tuple(e[i] for i in fiber)
        if not any(fp):
            # a nonzero element of I lies in the base ring: unit over k(base)
            return []
        fparts.append(fp)
    bounds = []
    for pos in range(len(fiber)):
        pure = [
            fp[pos]
            for fp in fparts
            if fp[pos] > 0 and all(fp[q] == 0 for q in range(len(fiber)) if q != pos)
        ]
        if not pure:
            return None
        bounds.append(min(pure))
    from itertools import product as iproduct

    out = []
    for mono in iproduct(*[range(b) for b in bounds]):
        if all(any(m < f for m, f in zip(mono, fp)) for fp in fparts):
            out.append(tuple(mono))
    return out
