"""Families of supports and the morphism side-conditions.

A family is always finitely generated: it is the smallest collection of
closed sets containing the declared generators and closed under finite unions
and passage to closed subsets.  Membership of Z therefore reduces to one
containment: Z inside the union of the generators.
"""

from __future__ import annotations

from typing import Iterable

from .errors import EngineError, PolicyReject, RingMismatch
from .geometry import (
    ClosedSet,
    Morphism,
    ProductStructure,
    Space,
    empty_set,
    image_closure,
    morphism_proper_on,
    preimage,
    projection_proper_certificate,
    whole_space,
)
from .groebner import Budget, DEFAULT_BUDGET, Ideal, ideal_product
from .verdicts import Verdict


class SupportFamily:
    """The family generated by finitely many closed subsets of one space."""

    __slots__ = ("space", "generators")

    def __init__(self, space: Space, generators: Iterable[ClosedSet]):
        self.space = space
        gens = []
        for g in generators:
            if g.space != space:
                raise RingMismatch("family generator in the wrong space")
            if not g.is_empty():
                gens.append(g)
        self.generators = tuple(gens)

    @staticmethod
    def full(space: Space) -> "SupportFamily":
        return SupportFamily(space, [whole_space(space)])

    @staticmethod
    def empty_only(space: Space) -> "SupportFamily":
        return SupportFamily(space, [])

    def union_set(self, budget: Budget = DEFAULT_BUDGET) -> ClosedSet:
        """The union of the generators, as one closed set.

        Uses the product ideal: same locus as the intersection of the ideals,
        cheaper to form, and only set-level questions are asked of it.
        """
        if not self.generators:
            return empty_set(self.space)
        I = self.generators[0].ideal
        for g in self.generators[1:]:
            I = ideal_product(I, g.ideal)
        return ClosedSet(self.space, I, presaturated=True, budget=budget)

    def member(self, Z: ClosedSet, budget: Budget = DEFAULT_BUDGET) -> bool:
        """Z in the family, i.e. Z inside the union of the generators."""
        if Z.space != self.space:
            raise RingMismatch("membership test across spaces")
        if Z.is_empty():
            return True
        return self.union_set(budget).contains(Z, budget)

    def subfamily_of(self, other: "SupportFamily", budget: Budget = DEFAULT_BUDGET) -> bool:
        return all(other.member(g, budget) for g in self.generators)

    def __repr__(self):
        return f"Family({', '.join(map(repr, self.generators))})"


def preimage_family(f: Morphism, psi: SupportFamily, budget: Budget = DEFAULT_BUDGET) -> SupportFamily:
    """Family generated by the preimages of the generators."""
    if psi.space != f.target:
        raise RingMismatch("family not on the target of f")
    return SupportFamily(f.source, [preimage(f, g, budget) for g in psi.generators])


def product_family(
    phi: SupportFamily, psi: SupportFamily, prod: ProductStructure, budget: Budget = DEFAULT_BUDGET
) -> SupportFamily:
    """Family on the product generated by pairwise products of generators."""
    if prod.factors[0] != phi.space or prod.factors[1] != psi.space:
        raise RingMismatch("product structure does not match the families")
    gens = []
    for a in phi.generators:
        for b in psi.generators:
            I = Ideal(
                prod.space.ring,
                list(prod.inject_ideal(0, a.ideal).gens)
                + list(prod.inject_ideal(1, b.ideal).gens),
            )
            gens.append(ClosedSet(prod.space, I, budget=budget))
    return SupportFamily(prod.space, gens)


def in_P_family(
    Z: ClosedSet,
    phi: SupportFamily,
    psi: SupportFamily,
    prod: ProductStructure,
    budget: Budget = DEFAULT_BUDGET,
) -> Verdict:
    """Membership in P(phi, psi) on the product X x Y.

    Z must be closed with pr2|Z proper (policy), and Z ∩ pr1^{-1}(W) must lie
    in pr2^{-1}(psi) for every generator W of phi.
    """
    if Z.space != prod.space:
        raise RingMismatch("Z not on the product space")
    if Z.is_empty():
        return Verdict.YES
    try:
        projection_proper_certificate(Z, {1}, prod, budget)
    except PolicyReject:
        return Verdict.REJECT

    # pr2^{-1}(psi) is generated by X x V
    pulled = SupportFamily(
        prod.space,
        [
            ClosedSet(prod.space, prod.inject_ideal(1, v.ideal), budget=budget)
            for v in psi.generators
        ],
    )
    for w in phi.generators:
        cap = ClosedSet(
            prod.space,
            Ideal(
                prod.space.ring,
                list(Z.ideal.gens) + list(prod.inject_ideal(0, w.ideal).gens),
            ),
            budget=budget,
        )
        if not pulled.member(cap, budget):
            return Verdict.NO
    return Verdict.YES


def check_Vstar_morphism(
    f: Morphism,
    phi: SupportFamily,
    psi: SupportFamily,
    variance: str,
    budget: Budget = DEFAULT_BUDGET,
) -> Verdict:
    """Side conditions for f to act on supported classes.

    variance='push': f restricted to each generator of phi is proper (policy)
    and its image lies in psi.  variance='pull': the preimage family of psi is
    contained in phi.
    """
    if variance == "push":
        if phi.space != f.source or psi.space != f.target:
            raise RingMismatch("families do not match the morphism")
        for w in phi.generators:
            try:
                morphism_proper_on(f, w, budget)
            except PolicyReject:
                return Verdict.REJECT
            if not psi.member(image_closure(f, w, budget), budget):
                return Verdict.NO
        return Verdict.YES
    if variance == "pull":
        if phi.space != f.source or psi.space != f.target:
            raise RingMismatch("families do not match the morphism")
        return Verdict.of(preimage_family(f, psi, budget).subfamily_of(phi, budget))
    raise EngineError(f"unknown variance {variance!r}")
