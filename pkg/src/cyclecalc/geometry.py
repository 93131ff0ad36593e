"""Embedded geometry: spaces, closed sets, morphisms.

A Space is an ordered list of affine and projective blocks with globally
distinct variable names.  Closed sets are multihomogeneous ideals, kept
saturated with respect to every irrelevant ideal so that equality of closed
sets is equality of ideals.  Morphisms are polynomial coordinate tuples,
homogeneous of one multidegree on each projective target block.

The properness policy lives here: a projection is certified proper on Z when
every eliminated block is projective, or when each eliminated affine variable
admits a monic eliminant along Z.  Nothing else is ever silently assumed;
uncertifiable questions raise PolicyReject.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EngineError, PolicyReject, RingMismatch
from .fields import field_of_characteristic
from .groebner import (
    Budget,
    DEFAULT_BUDGET,
    Ideal,
    eliminate,
    groebner,
    ideal_intersect,
    is_unit_ideal,
    krull_dim,
    radical_member,
    saturate,
)
from .orders import block_order
from .poly import Poly, Ring


@dataclass(frozen=True)
class Block:
    kind: str  # 'affine' | 'proj'
    names: tuple

    def __post_init__(self):
        if self.kind not in ("affine", "proj"):
            raise EngineError(f"unknown block kind {self.kind}")
        if self.kind == "proj" and len(self.names) < 2:
            raise EngineError("projective block needs at least 2 coordinates")

    @property
    def dim(self) -> int:
        return len(self.names) - (1 if self.kind == "proj" else 0)


def affine(*names: str) -> Block:
    return Block("affine", tuple(names))


def proj(*names: str) -> Block:
    return Block("proj", tuple(names))


class Space:
    """Product of affine and projective blocks over one characteristic."""

    __slots__ = ("blocks", "characteristic", "ring", "_block_index")

    def __init__(self, blocks: Sequence[Block], characteristic: int = 0):
        self.blocks = tuple(blocks)
        self.characteristic = characteristic
        names = [n for b in self.blocks for n in b.names]
        self.ring = Ring(names, field_of_characteristic(characteristic))
        self._block_index = []
        pos = 0
        for b in self.blocks:
            self._block_index.append(tuple(range(pos, pos + len(b.names))))
            pos += len(b.names)

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    @property
    def n_proj_blocks(self) -> int:
        return sum(1 for b in self.blocks if b.kind == "proj")

    def block_var_indices(self, k: int) -> tuple:
        return self._block_index[k]

    def proj_block_indices(self) -> list:
        return [self._block_index[k] for k, b in enumerate(self.blocks) if b.kind == "proj"]

    def irrelevant_ideals(self) -> list:
        out = []
        for k, b in enumerate(self.blocks):
            if b.kind == "proj":
                out.append(Ideal(self.ring, [self.ring.var(i) for i in self._block_index[k]]))
        return out

    def multidegree(self, p: Poly) -> tuple | None:
        """Per-projective-block degree when p is multihomogeneous, else None."""
        degs = []
        for idx in self.proj_block_indices():
            block_degs = {sum(e[i] for i in idx) for e in p.terms}
            if len(block_degs) > 1:
                return None
            degs.append(block_degs.pop() if block_degs else 0)
        return tuple(degs)

    def is_multihomogeneous(self, p: Poly) -> bool:
        return self.multidegree(p) is not None

    def __eq__(self, other):
        return (
            isinstance(other, Space)
            and self.blocks == other.blocks
            and self.characteristic == other.characteristic
        )

    def __hash__(self):
        return hash((self.blocks, self.characteristic))

    def __repr__(self):
        bits = []
        for b in self.blocks:
            tag = "A" if b.kind == "affine" else "P"
            bits.append(f"{tag}({','.join(b.names)})")
        return " x ".join(bits) if bits else "point"


@dataclass
class ProductStructure:
    """A product space plus the variable embeddings of its factors."""

    space: Space
    factors: tuple
    embeddings: tuple  # per factor: dict factor var index -> product var index

    def factor_var_indices(self, k: int) -> set:
        return set(self.embeddings[k].values())

    def inject_ideal(self, k: int, I: Ideal) -> Ideal:
        emb = self.embeddings[k]
        return Ideal(
            self.space.ring,
            [g.inject(self.space.ring, emb) for g in I.gens],
        )


def product_space(
    spaces: Sequence[Space], tags: Sequence[str] | None = None, force_tags: bool = False
) -> ProductStructure:
    """Concatenate block lists; colliding variable names get factor tags."""
    chars = {s.characteristic for s in spaces}
    if len(chars) != 1:
        raise EngineError("product across characteristics")
    if tags is None:
        tags = [str(k + 1) for k in range(len(spaces))]
    all_names = [n for s in spaces for b in s.blocks for n in b.names]
    collide = force_tags or len(set(all_names)) != len(all_names)
    blocks = []
    embeddings = []
    pos = 0
    for k, s in enumerate(spaces):
        emb = {}
        for b in s.blocks:
            names = tuple(f"{n}@{tags[k]}" if collide else n for n in b.names)
            blocks.append(Block(b.kind, names))
            for j in range(len(names)):
                emb[len(emb)] = pos
                pos += 1
        embeddings.append(emb)
    space = Space(blocks, spaces[0].characteristic)
    return ProductStructure(space, tuple(spaces), tuple(embeddings))


class ClosedSet:
    """A saturated multihomogeneous ideal in a Space."""

    __slots__ = ("space", "ideal", "_dim", "_gb")

    def __init__(self, space: Space, I: Ideal, presaturated: bool = False, budget: Budget = DEFAULT_BUDGET):
        if I.ring != space.ring:
            raise RingMismatch("ideal not in the space's coordinate ring")
        for g in I.gens:
            if not space.is_multihomogeneous(g):
                raise EngineError(
                    f"generator not multihomogeneous in projective blocks: {g}"
                )
        if not presaturated:
            for irr in space.irrelevant_ideals():
                I = saturate(I, irr, budget)
        self.space = space
        self.ideal = I
        self._dim = None
        self._gb = None

    # -- basics -------------------------------------------------------------

    def gb(self):
        if self._gb is None:
            self._gb = groebner(self.ideal)
        return self._gb

    def is_empty(self) -> bool:
        return self.gb().is_unit()

    def is_whole_space(self) -> bool:
        return not [g for g in self.ideal.gens if not g.is_zero()]

    @property
    def dim(self) -> int:
        """Geometric dimension (cone dimension minus one per projective block)."""
        if self._dim is None:
            if self.is_empty():
                self._dim = -1
            else:
                self._dim = krull_dim(self.ideal) - self.space.n_proj_blocks
        return self._dim

    @property
    def codim(self) -> int:
        return self.space.dim - self.dim

    def cone_codim(self) -> int:
        if self.is_empty():
            raise EngineError("codimension of the empty set")
        return self.space.ring.nvars - krull_dim(self.ideal)

    # -- set operations -------------------------------------------------------

    def intersect(self, other: "ClosedSet", budget: Budget = DEFAULT_BUDGET) -> "ClosedSet":
        self._same_space(other)
        return ClosedSet(self.space, Ideal(self.space.ring, self.ideal.gens + other.ideal.gens), budget=budget)

    def union(self, other: "ClosedSet", budget: Budget = DEFAULT_BUDGET) -> "ClosedSet":
        self._same_space(other)
        return ClosedSet(self.space, ideal_intersect(self.ideal, other.ideal, budget), budget=budget)

    def minus_closure(self, other: "ClosedSet", budget: Budget = DEFAULT_BUDGET) -> "ClosedSet":
        """Closure of self minus other, via saturation."""
        self._same_space(other)
        return ClosedSet(self.space, saturate(self.ideal, other.ideal, budget), budget=budget)

    def contains(self, other: "ClosedSet", budget: Budget = DEFAULT_BUDGET) -> bool:
        """Set-theoretic containment: other ⊆ self."""
        self._same_space(other)
        if other.is_empty():
            return True
        return all(
            radical_member(g, other.ideal, budget) for g in self.ideal.gens
        )

    def same_locus(self, other: "ClosedSet", budget: Budget = DEFAULT_BUDGET) -> bool:
        return self.contains(other, budget) and other.contains(self, budget)

    def _same_space(self, other: "ClosedSet"):
        if self.space != other.space:
            raise RingMismatch("closed sets in different spaces")

    def __eq__(self, other):
        if not isinstance(other, ClosedSet):
            return NotImplemented
        if self.space != other.space:
            return False
        from .groebner import ideal_equal

        return ideal_equal(self.ideal, other.ideal)

    def __hash__(self):
        # hash by reduced GB so equal closed sets collide
        return hash((self.space, tuple(self.gb().basis)))

    def __repr__(self):
        gens = ", ".join(str(g) for g in self.ideal.gens) or "0"
        return f"V({gens})"


def closed_set(space: Space, *gens: Poly) -> ClosedSet:
    return ClosedSet(space, Ideal(space.ring, list(gens)))


def whole_space(space: Space) -> ClosedSet:
    return ClosedSet(space, Ideal(space.ring, []), presaturated=True)


def empty_set(space: Space) -> ClosedSet:
    return ClosedSet(space, Ideal(space.ring, [space.ring.one()]), presaturated=True)


def point_set(space: Space, coords: Mapping[str, object]) -> ClosedSet:
    """The reduced point with the given affine coordinates (affine blocks only)."""
    gens = []
    ring = space.ring
    for b, idxs in zip(space.blocks, [space.block_var_indices(k) for k in range(len(space.blocks))]):
        if b.kind != "affine":
            raise EngineError("point_set supports affine blocks only; use ideals for projective points")
        for i in idxs:
            gens.append(ring.var(i) - ring.const(coords[ring.vars[i]]))
    return ClosedSet(space, Ideal(ring, gens), presaturated=True)


class Morphism:
    """A polynomial map between spaces.

    `coords` holds one tuple of source-ring polynomials per target block; on
    projective target blocks the tuple must be multihomogeneous of one shared
    multidegree.  `domain` optionally restricts the source.  The base locus
    (common zeros of a projective block's tuple) is computed; morphisms with
    nonempty base locus act as rational maps and are accepted only by the
    graph/closure operations.
    """

    __slots__ = ("source", "target", "coords", "domain", "_base_locus")

    def __init__(
        self,
        source: Space,
        target: Space,
        coords: Sequence[Sequence[Poly]],
        domain: ClosedSet | None = None,
    ):
        self.source = source
        self.target = target
        if len(coords) != len(target.blocks):
            raise EngineError("one coordinate tuple per target block required")
        coords = tuple(tuple(c) for c in coords)
        for block, tup in zip(target.blocks, coords):
            if len(tup) != len(block.names):
                raise EngineError(f"coordinate tuple arity mismatch for block {block}")
            for p in tup:
                if p.ring != source.ring:
                    raise RingMismatch("coordinate polynomial not in source ring")
                if not source.is_multihomogeneous(p):
                    raise EngineError(f"coordinate not multihomogeneous: {p}")
            if block.kind == "proj":
                degs = {source.multidegree(p) for p in tup if not p.is_zero()}
                if len(degs) != 1:
                    raise EngineError(
                        "projective coordinates must share one multidegree"
                    )
        self.coords = coords
        if domain is not None and domain.space != source:
            raise RingMismatch("domain restriction lives in the wrong space")
        self.domain = domain
        self._base_locus = None

    # -- derived data --------------------------------------------------------

    def base_locus(self) -> ClosedSet:
        """Locus (within the domain) where some projective tuple vanishes."""
        if self._base_locus is None:
            ring = self.source.ring
            total = empty_set(self.source)
            for block, tup in zip(self.target.blocks, self.coords):
                if block.kind != "proj":
                    continue
                gens = list(tup)
                if self.domain is not None:
                    gens += list(self.domain.ideal.gens)
                bl = ClosedSet(self.source, Ideal(ring, gens))
                total = total.union(bl)
            self._base_locus = total
        return self._base_locus

    def is_regular(self) -> bool:
        return self.base_locus().is_empty()

    def coordinate_images(self) -> dict:
        """Target ring var index -> Poly in source ring (all blocks)."""
        images = {}
        pos = 0
        for block, tup in zip(self.target.blocks, self.coords):
            for j, p in enumerate(tup):
                images[pos + j] = p
            pos += len(block.names)
        return images

    def compose(self, other: "Morphism") -> "Morphism":
        """self ∘ other (apply other first).

        The outer morphism must be total; a domain restriction or base locus
        on `other` carries over to the composite.
        """
        if other.target != self.source:
            raise RingMismatch("composition type mismatch")
        images = other.coordinate_images()
        new_coords = []
        for tup in self.coords:
            new_coords.append(
                tuple(p.substitute(images, other.source.ring) for p in tup)
            )
        return Morphism(other.source, self.target, new_coords, other.domain)

    def __repr__(self):
        bits = []
        for tup in self.coords:
            bits.append("(" + ", ".join(map(str, tup)) + ")")
        return f"Morphism[{' ,'.join(bits)}]"


def identity_morphism(space: Space) -> Morphism:
    coords = []
    for k, b in enumerate(space.blocks):
        coords.append(tuple(space.ring.var(i) for i in space.block_var_indices(k)))
    return Morphism(space, space, coords)


# ---------------------------------------------------------------------------
# graphs, images, preimages

def graph_relations(f: Morphism, prod: ProductStructure) -> list:
    """Graph equations of f inside prod = source x target."""
    ring = prod.space.ring
    src_emb, tgt_emb = prod.embeddings[0], prod.embeddings[1]
    gens = []
    pos = 0
    for block, tup in zip(f.target.blocks, f.coords):
        n = len(block.names)
        fs = [p.inject(ring, src_emb) for p in tup]
        ys = [ring.var(tgt_emb[pos + j]) for j in range(n)]
        if block.kind == "affine":
            gens += [y - fp for y, fp in zip(ys, fs)]
        else:
            for i in range(n):
                for j in range(i + 1, n):
                    gens.append(ys[i] * fs[j] - ys[j] * fs[i])
        pos += n
    return gens


def graph_product(f: Morphism) -> ProductStructure:
    return product_space([f.source, f.target], tags=("src", "tgt"))


def graph_closure(
    f: Morphism,
    over: ClosedSet | None = None,
    budget: Budget = DEFAULT_BUDGET,
    prod: ProductStructure | None = None,
):
    """Closure of the graph of f over `over` (default: the whole source).

    Components over the base locus / outside the domain are saturated away, so
    this is the right construction for rational maps as well.

    Returns (ClosedSet in the product space, ProductStructure).  A product
    structure for [source, target] may be supplied to control naming.
    """
    if prod is None:
        prod = graph_product(f)
    ring = prod.space.ring
    gens = list(graph_relations(f, prod))
    src_emb = prod.embeddings[0]
    if over is not None:
        if over.space != f.source:
            raise RingMismatch("`over` must live in the source")
        gens += [g.inject(ring, src_emb) for g in over.ideal.gens]
    if f.domain is not None:
        gens += [g.inject(ring, src_emb) for g in f.domain.ideal.gens]
    I = Ideal(ring, gens)
    bl = f.base_locus()
    if not bl.is_empty():
        I = saturate(I, prod.inject_ideal(0, bl.ideal), budget)
    cs = ClosedSet(prod.space, I, budget=budget)
    if cs.is_empty():
        raise EngineError("graph closure is empty (restriction misses the domain)")
    return cs, prod


def image_closure(f: Morphism, Z: ClosedSet, budget: Budget = DEFAULT_BUDGET) -> ClosedSet:
    """Zariski closure of f(Z)."""
    if Z.space != f.source:
        raise RingMismatch("Z not in the source of f")
    graph, prod = graph_closure(f, over=Z, budget=budget)
    src_names = [prod.space.ring.vars[i] for i in sorted(prod.factor_var_indices(0))]
    J = eliminate(graph.ideal, src_names, budget)
    # re-interpret the eliminated ideal in the target space's ring
    tgt_emb = prod.embeddings[1]
    tgt_ring = f.target.ring
    back = {}
    for tgt_i, prod_i in tgt_emb.items():
        name = prod.space.ring.vars[prod_i]
        back[J.ring.index(name)] = tgt_i
    gens = [g.inject(tgt_ring, back) for g in J.gens]
    return ClosedSet(f.target, Ideal(tgt_ring, gens), budget=budget)


def pullback_form(f: Morphism, w, budget: Budget = DEFAULT_BUDGET):
    """Pull a differential form on the target back along f.

    Coordinates substitute as polynomials and d commutes with the
    substitution, so d(f*g) = f*(dg) holds by construction.
    """
    if w.ring != f.target.ring:
        raise RingMismatch("form does not live on the target of f")
    return w.pullback(f.coordinate_images(), f.source.ring)


def preimage(f: Morphism, W: ClosedSet, budget: Budget = DEFAULT_BUDGET) -> ClosedSet:
    """Scheme-theoretic preimage ideal (then ambient saturation)."""
    if W.space != f.target:
        raise RingMismatch("W not in the target of f")
    images = f.coordinate_images()
    gens = [g.substitute(images, f.source.ring) for g in W.ideal.gens]
    if f.domain is not None:
        gens += list(f.domain.ideal.gens)
    return ClosedSet(f.source, Ideal(f.source.ring, gens), budget=budget)


# ---------------------------------------------------------------------------
# properness policy

def _projection_finiteness_gap(
    I: Ideal, drop_affine_idx: Sequence[int], budget: Budget = DEFAULT_BUDGET
) -> list:
    """Dropped affine variables lacking a monic eliminant (empty = finite)."""
    if not drop_affine_idx:
        return []
    ring = I.ring
    keep = [i for i in range(ring.nvars) if i not in set(drop_affine_idx)]
    order = block_order(list(drop_affine_idx), keep)
    gb = groebner(I, order, budget)
    missing = []
    for i in drop_affine_idx:
        ok = False
        for e in gb.lead_exps:
            if e[i] > 0 and all(e[j] == 0 for j in range(len(e)) if j != i):
                ok = True
                break
        if not ok:
            missing.append(i)
    return missing


def projection_proper_certificate(
    Z: ClosedSet, keep_factor: set, prod: ProductStructure, budget: Budget = DEFAULT_BUDGET
) -> bool:
    """Certify that projecting Z onto the given factors is proper.

    keep_factor: indices of prod factors retained by the projection.  The
    eliminated projective blocks are universally proper; eliminated affine
    variables must be integral along Z (after eliminating the projective
    directions).  Returns True when certified; raises PolicyReject otherwise.
    """
    space = Z.space
    keep_vars: set = set()
    for k in keep_factor:
        keep_vars |= prod.factor_var_indices(k)
    drop_proj: list = []
    drop_affine: list = []
    for k, b in enumerate(space.blocks):
        idxs = space.block_var_indices(k)
        if set(idxs) <= keep_vars:
            continue
        if set(idxs) & keep_vars:
            raise EngineError("projection must drop whole blocks")
        if b.kind == "proj":
            drop_proj += list(idxs)
        else:
            drop_affine += list(idxs)

    ring = space.ring
    if drop_proj:
        names = [ring.vars[i] for i in drop_proj]
        J = eliminate(Z.ideal, names, budget)
        work_ring = J.ring
        drop_affine_work = [work_ring.index(ring.vars[i]) for i in drop_affine]
    else:
        J = Z.ideal
        work_ring = ring
        drop_affine_work = list(drop_affine)
    missing = _projection_finiteness_gap(J, drop_affine_work, budget)
    if missing:
        raise PolicyReject(
            "no monic eliminant for eliminated affine variable(s): "
            + ", ".join(work_ring.vars[i] for i in missing)
        )
    return True


def is_finite_over(Z: ClosedSet, f: Morphism, budget: Budget = DEFAULT_BUDGET) -> bool:
    """Is Z finite over the target along f (monic-eliminant certificate)?

    Returns True/False for affine sources; projective source blocks cannot be
    certified finite by this test and raise PolicyReject.
    """
    if Z.space != f.source:
        raise RingMismatch("Z not in the source of f")
    if any(b.kind == "proj" for b in f.source.blocks):
        raise PolicyReject("finiteness test requires an affine source")
    graph, prod = graph_closure(f, over=Z, budget=budget)
    drop = sorted(prod.factor_var_indices(0))
    missing = _projection_finiteness_gap(graph.ideal, drop, budget)
    return not missing


def morphism_proper_on(f: Morphism, Z: ClosedSet, budget: Budget = DEFAULT_BUDGET) -> bool:
    """Certify f|Z proper via the graph projection.  True or PolicyReject."""
    if Z.is_empty():
        return True
    graph, prod = graph_closure(f, over=Z, budget=budget)
    return projection_proper_certificate(graph, {1}, prod, budget)


# ---------------------------------------------------------------------------
# witnesses

def jacobian_matrix(gens: Sequence[Poly], ring: Ring) -> list:
    return [[g.derivative(i) for i in range(ring.nvars)] for g in gens]


def evaluate_matrix(mat, point_by_index: Mapping[int, object], ring: Ring):
    return [[p.eval_point(point_by_index) for p in row] for row in mat]


def matrix_rank(rows, field) -> int:
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c] != field.zero:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = field.inv(rows[r][c])
        rows[r] = [field.mul(x, inv) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != field.zero:
                factor = rows[i][c]
                rows[i] = [
                    field.sub(x, field.mul(factor, y)) for x, y in zip(rows[i], rows[r])
                ]
        r += 1
        rank += 1
        if r == len(rows):
            break
    return rank


def point_by_name_to_index(ring: Ring, point: Mapping[str, object]) -> dict:
    return {ring.index(name): ring.field.coerce(v) for name, v in point.items()}


def lies_on(cs: ClosedSet, point: Mapping[str, object]) -> bool:
    pt = point_by_name_to_index(cs.space.ring, point)
    return all(g.eval_point(pt) == cs.space.ring.field.zero for g in cs.ideal.gens)


def smooth_at(cs: ClosedSet, point: Mapping[str, object], budget: Budget = DEFAULT_BUDGET) -> bool:
    """Jacobian-rank smoothness certificate at a declared rational point."""
    ring = cs.space.ring
    if not lies_on(cs, point):
        raise EngineError("witness point does not lie on the closed set")
    pt = point_by_name_to_index(ring, point)
    mat = evaluate_matrix(jacobian_matrix(cs.ideal.gens, ring), pt, ring)
    return matrix_rank(mat, ring.field) == cs.cone_codim()


# ---------------------------------------------------------------------------
# declared-prime components

class PrimeComponent:
    """A closed set declared irreducible, with a documented sanity screen.

    The screen is not a primality proof: it rejects the unit ideal, dimension
    mismatches, and principal generators that are visibly non-reduced (the
    singular locus fails to drop dimension).  Scenario authors own the
    declaration; the engine owns these checks.
    """

    __slots__ = ("closed_set", "label")

    def __init__(self, closed_set_: ClosedSet, label: str = "", screen: bool = True):
        self.closed_set = closed_set_
        self.label = label or repr(closed_set_)
        if screen:
            self.sanity_screen()

    @property
    def space(self) -> Space:
        return self.closed_set.space

    @property
    def dim(self) -> int:
        return self.closed_set.dim

    def sanity_screen(self):
        cs = self.closed_set
        if cs.is_empty():
            raise EngineError(f"declared-prime component {self.label} is empty")
        gens = [g for g in cs.ideal.gens if not g.is_zero()]
        if len(gens) == 1:
            g = gens[0]
            ring = cs.space.ring
            derivs = [g.derivative(i) for i in range(ring.nvars)]
            sing = Ideal(ring, [g] + derivs)
            if not is_unit_ideal(sing):
                if krull_dim(sing) >= krull_dim(cs.ideal):
                    raise EngineError(
                        f"declared-prime component {self.label} fails the screen: "
                        "singular locus does not drop dimension (non-reduced?)"
                    )

    def __eq__(self, other):
        return isinstance(other, PrimeComponent) and self.closed_set == other.closed_set

    def __hash__(self):
        return hash(self.closed_set)

    def __repr__(self):
        return f"[{self.label}]"
