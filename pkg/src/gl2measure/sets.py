"""The ring of measurable subsets of GL_2(F).

Measurable sets are ddd-sets: disjoint unions of dd-sets, where a dd-set
is (a disjoint union of distinguished sets) minus (a contained disjoint
union of distinguished sets).  The positive shells are called big shells,
the subtracted ones small shells.  The class is closed under union,
intersection and difference, every operation here reducing to the coset
intersection trichotomy.

Emptiness (and hence set equality) is decidable by finite coset
enumeration: a big shell can only be exhausted by small shells of the
same second level, in which case enumerating cosets at the finest small
level settles coverage.  All enumerations are capped by an explicit
budget.

``common_refinement`` implements the four-step rewriting algorithm that,
given two reduced presentations of the same set, produces a presentation
refining both; it is the key to the measure being well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import (
    BudgetExceeded,
    InvalidSet,
    NotEqualSets,
    NotReduced,
    NotRepresentable,
)
from .field import Level
from .matrices import (
    Coset,
    CosetRelation,
    Mat2,
    coset_compare,
    cosets_equal,
    enumerate_K_mod_K10,
    enumerate_cosets,
    in_K,
    intersect_cosets,
)

DEFAULT_BUDGET = 100_000

_EQ = CosetRelation.EQUAL
_LCR = CosetRelation.LEFT_CONTAINS_RIGHT
_RCL = CosetRelation.RIGHT_CONTAINS_LEFT
_DISJ = CosetRelation.DISJOINT


def _maximal(cosets: Iterable[Coset]) -> tuple[Coset, ...]:
    """Drop every coset contained in (or equal to) an earlier-kept one."""
    kept: list[Coset] = []
    for c in cosets:
        absorbed = False
        survivors = []
        for k in kept:
            rel = coset_compare(c, k)
            if rel in (_EQ, _RCL):  # k contains or equals c
                absorbed = True
                survivors.append(k)
            elif rel is _LCR:  # c strictly contains k
                continue
            else:
                survivors.append(k)
        if not absorbed:
            survivors.append(c)
        kept = survivors
    return tuple(kept)


class DDSet:
    """One dd-component: disjoint big shells minus contained small shells."""

    __slots__ = ("bigs", "smalls")

    def __init__(
        self,
        bigs: Sequence[Coset],
        smalls: Sequence[Coset] = (),
        validate: bool = True,
    ) -> None:
        bigs = tuple(bigs)
        smalls = _maximal(smalls)
        if validate:
            for i in range(len(bigs)):
                for k in range(i + 1, len(bigs)):
                    if coset_compare(bigs[i], bigs[k]) is not _DISJ:
                        raise InvalidSet("big shells must be pairwise disjoint")
            for s in smalls:
                if not any(coset_compare(s, b) in (_EQ, _RCL) for b in bigs):
                    raise InvalidSet("every small shell must lie inside a big shell")
        object.__setattr__(self, "bigs", bigs)
        object.__setattr__(self, "smalls", smalls)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("DDSet is immutable")

    def smalls_inside(self, big: Coset) -> list[Coset]:
        return [s for s in self.smalls if coset_compare(s, big) in (_EQ, _RCL)]

    def contains_point(self, x: Mat2) -> bool:
        return any(b.contains_point(x) for b in self.bigs) and not any(
            s.contains_point(x) for s in self.smalls
        )

    def __repr__(self) -> str:
        return f"DDSet(bigs={list(self.bigs)!r}, smalls={list(self.smalls)!r})"


class DDDSet:
    """A disjoint union of dd-components; the general measurable set."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[DDSet] = ()) -> None:
        object.__setattr__(self, "components", tuple(components))

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("DDDSet is immutable")

    @classmethod
    def empty(cls) -> "DDDSet":
        return cls(())

    @classmethod
    def single(cls, coset: Coset) -> "DDDSet":
        return cls((DDSet((coset,), ()),))

    def all_bigs(self) -> list[Coset]:
        return [b for comp in self.components for b in comp.bigs]

    def all_smalls(self) -> list[Coset]:
        return [s for comp in self.components for s in comp.smalls]

    def contains_point(self, x: Mat2) -> bool:
        return any(comp.contains_point(x) for comp in self.components)

    def __repr__(self) -> str:
        return f"DDDSet({list(self.components)!r})"


# -- boolean operations ------------------------------------------------


def dd_intersect(e1: DDSet, e2: DDSet) -> DDSet:
    """Intersection of two dd-components, itself a dd-component."""
    pieces: list[Coset] = []
    for a in e1.bigs:
        for c in e2.bigs:
            inter = intersect_cosets(a, c)
            if inter is not None:
                pieces.append(inter)
    smalls: list[Coset] = []
    for g in pieces:
        for s in list(e1.smalls) + list(e2.smalls):
            si = intersect_cosets(s, g)
            if si is not None:
                smalls.append(si)
    return DDSet(tuple(pieces), _maximal(smalls))


def _dd_difference_one(e1: DDSet, e2: DDSet) -> list[DDSet]:
    """e1 minus e2 as a list of disjoint dd-components."""
    out: list[DDSet] = []
    # the part of e1 outside e2's big shells
    carved: list[Coset] = list(e1.smalls)
    for a in e1.bigs:
        for c in e2.bigs:
            inter = intersect_cosets(a, c)
            if inter is not None:
                carved.append(inter)
    if e1.bigs:
        out.append(DDSet(e1.bigs, _maximal(carved)))
    # the part of e1 inside e2's small shells (those are outside e2)
    for d in e2.smalls:
        piece = dd_intersect(e1, DDSet((d,), (), validate=False))
        if piece.bigs:
            out.append(piece)
    return out


def ddd_intersect(a: DDDSet, b: DDDSet) -> DDDSet:
    comps = []
    for e1 in a.components:
        for e2 in b.components:
            piece = dd_intersect(e1, e2)
            if piece.bigs:
                comps.append(piece)
    return DDDSet(tuple(comps))


def ddd_difference(a: DDDSet, b: DDDSet) -> DDDSet:
    comps = [c for c in a.components if c.bigs]
    for e2 in b.components:
        nxt: list[DDSet] = []
        for c in comps:
            nxt.extend(_dd_difference_one(c, e2))
        comps = nxt
    return DDDSet(tuple(comps))


def ddd_union(a: DDDSet, b: DDDSet) -> DDDSet:
    rest = ddd_difference(b, a)
    return DDDSet(tuple(c for c in a.components if c.bigs) + rest.components)


def ddd_ops(a: DDDSet, b: DDDSet, op: str) -> DDDSet:
    if op == "union":
        return ddd_union(a, b)
    if op == "intersect":
        return ddd_intersect(a, b)
    if op == "difference":
        return ddd_difference(a, b)
    raise ValueError(f"unknown operation {op!r}")


# -- reduction ----------------------------------------------------------


def _is_trivial_component(comp: DDSet) -> bool:
    """True when big shells match small shells bijectively as cosets."""
    if not comp.bigs or len(comp.bigs) != len(comp.smalls):
        return False
    remaining = list(comp.smalls)
    for b in comp.bigs:
        hit = next((k for k, s in enumerate(remaining) if cosets_equal(s, b)), None)
        if hit is None:
            return False
        remaining.pop(hit)
    return True


def reduce(a: DDDSet) -> DDDSet:
    """Remove components of the form B \\ B (and structurally empty ones)."""
    return DDDSet(
        tuple(
            comp
            for comp in a.components
            if comp.bigs and not _is_trivial_component(comp)
        )
    )


def is_reduced(a: DDDSet) -> bool:
    return all(comp.bigs and not _is_trivial_component(comp) for comp in a.components)


# -- emptiness and equality ---------------------------------------------


def _component_witness(comp: DDSet, *, budget: int = DEFAULT_BUDGET) -> Optional[Coset]:
    """A distinguished set meeting the component, or None when it is empty.

    For each big shell, small shells of a different second level can never
    exhaust it (finite disjoint decompositions of a distinguished set have
    all-finite indices), so coverage is decided by enumerating cosets at
    the finest same-level small shell.
    """
    for big in comp.bigs:
        inside = comp.smalls_inside(big)
        if any(coset_compare(s, big) is _EQ for s in inside):
            continue
        if not inside:
            return big
        same_j = [s for s in inside if s.level.j == big.level.j]
        mixed = [s for s in inside if s.level.j != big.level.j]
        if not same_j:
            return big
        q = big.q
        finest = max(s.level.i for s in same_j)
        count = q ** (4 * (finest - big.level.i))
        if count > budget:
            raise BudgetExceeded(
                f"emptiness check needs {count} cosets, budget is {budget}"
            )
        level = Level(finest, big.level.j)
        for r in enumerate_cosets(q, big.level, level, budget=budget):
            sub = Coset(big.rep @ r, level)
            if not any(coset_compare(sub, s) in (_EQ, _RCL) for s in same_j):
                return sub
        if mixed:
            # same-level shells cover the big shell, yet a disjoint shell
            # of another level was also inside it: invariants are broken
            raise InvalidSet("small shells overlap inside a big shell")
    return None


def emptiness_witness(a: DDDSet, *, budget: int = DEFAULT_BUDGET) -> Optional[Coset]:
    for comp in a.components:
        w = _component_witness(comp, budget=budget)
        if w is not None:
            return w
    return None


def is_empty(a: DDDSet, *, budget: int = DEFAULT_BUDGET) -> bool:
    return emptiness_witness(a, budget=budget) is None


def equality_witness(a: DDDSet, b: DDDSet, *, budget: int = DEFAULT_BUDGET) -> Optional[Coset]:
    w = emptiness_witness(ddd_difference(a, b), budget=budget)
    if w is not None:
        return w
    return emptiness_witness(ddd_difference(b, a), budget=budget)


def set_equal(a: DDDSet, b: DDDSet, *, budget: int = DEFAULT_BUDGET) -> bool:
    return equality_witness(a, b, budget=budget) is None


def validate_ddd(a: DDDSet, *, budget: int = DEFAULT_BUDGET) -> None:
    """Full invariant check including pairwise disjointness of components."""
    comps = a.components
    for i in range(len(comps)):
        for k in range(i + 1, len(comps)):
            inter = dd_intersect(comps[i], comps[k])
            if inter.bigs and _component_witness(inter, budget=budget) is not None:
                raise InvalidSet(f"components {i} and {k} overlap")


# -- refinements ---------------------------------------------------------


def is_refinement(a: DDDSet, r: DDDSet, *, budget: int = DEFAULT_BUDGET) -> bool:
    """Whether r re-presents a while keeping all of a's shells."""
    if not set_equal(a, r, budget=budget):
        return False
    r_bigs = r.all_bigs()
    r_smalls = r.all_smalls()
    for b in a.all_bigs():
        if not any(cosets_equal(b, x) for x in r_bigs):
            return False
    for s in a.all_smalls():
        if not any(cosets_equal(s, x) for x in r_smalls):
            return False
    return True


_Comp = tuple[Coset, list[Coset]]


def _single_big_components(a: DDDSet) -> list[_Comp]:
    """Normalize to one big shell per component; shell lists are unchanged."""
    out: list[_Comp] = []
    for comp in a.components:
        for big in comp.bigs:
            out.append((big, comp.smalls_inside(big)))
    return out


def _minimal_container(containers: list[tuple[int, Coset]]) -> tuple[int, Coset]:
    best_idx, best = containers[0]
    for idx, big in containers[1:]:
        if coset_compare(big, best) is _RCL:
            best_idx, best = idx, big
    return best_idx, best


def _splittable(smalls: list[Coset], target: Coset) -> bool:
    """Whether each small shell is strictly inside or disjoint from target."""
    return all(coset_compare(s, target) in (_RCL, _DISJ) for s in smalls)


def _append_empty_component(
    s_comps: list[_Comp],
    target: Coset,
    b_comps: list[_Comp],
    budget: int,
) -> None:
    """Add target as a new big shell whose piece must be empty.

    The cover is assembled from every shell already in play that fits
    inside target: big shells of the working presentation strictly inside
    it, and small shells of either presentation inside or equal to it.
    Extra small shells never hurt a refinement; emptiness of the new
    component is certified exactly before it is installed.
    """
    cands = [big for big, _ in s_comps if coset_compare(big, target) is _RCL]
    for _, smalls in s_comps + b_comps:
        cands.extend(
            s for s in smalls if coset_compare(s, target) in (_RCL, _EQ)
        )
    cover = list(_maximal(cands))
    piece = DDSet((target,), tuple(cover))
    if _component_witness(piece, budget=budget) is not None:
        raise InvalidSet(
            "refinement failed: presentations are not equal as sets "
            f"(uncovered part of {target!r})"
        )
    s_comps.append((target, cover))


def common_refinement(
    a: DDDSet, b: DDDSet, *, budget: int = DEFAULT_BUDGET
) -> DDDSet:
    """A presentation refining both a and b (which must be equal as sets).

    Works on single-big components.  Each pass locates one shell of b
    missing from the working presentation and installs it: a missing big
    shell is carved out of the minimal big shell containing it (or added
    as an empty component assembled from shells below it); a missing
    small shell is carved the same way.  Each pass adds one missing shell
    and removes none, so the loop terminates.
    """
    for name, x in (("first", a), ("second", b)):
        if not is_reduced(x):
            raise NotReduced(f"{name} argument is not reduced")
    if not set_equal(a, b, budget=budget):
        witness = equality_witness(a, b, budget=budget)
        raise NotEqualSets(f"presentations differ near {witness!r}")

    s_comps = _single_big_components(a)
    b_comps = _single_big_components(b)
    b_bigs = [big for big, _ in b_comps]
    b_smalls = [s for _, smalls in b_comps for s in smalls]

    max_iter = 2 * (len(b_bigs) + len(b_smalls)) + 8
    for _ in range(max_iter):
        s_bigs = [big for big, _ in s_comps]
        s_smalls = [s for _, smalls in s_comps for s in smalls]
        missing_big = next(
            (c for c in b_bigs if not any(cosets_equal(c, x) for x in s_bigs)), None
        )
        if missing_big is not None:
            _install_big(s_comps, missing_big, b_comps, budget)
            continue
        missing_small = next(
            (d for d in b_smalls if not any(cosets_equal(d, x) for x in s_smalls)),
            None,
        )
        if missing_small is None:
            break
        _install_small(s_comps, missing_small, b_comps, budget)
    else:  # pragma: no cover - termination is structural
        raise InvalidSet("refinement did not terminate")

    _drop_spare_trivial(s_comps, a, b)
    return DDDSet(tuple(DDSet((big,), tuple(smalls)) for big, smalls in s_comps))


def _install_big(
    s_comps: list[_Comp], target: Coset, b_comps: list[_Comp], budget: int
) -> None:
    containers = [
        (idx, big)
        for idx, (big, _) in enumerate(s_comps)
        if coset_compare(big, target) is _LCR
    ]
    if not containers:
        _append_empty_component(s_comps, target, b_comps, budget)
        return
    _, c_min = _minimal_container(containers)
    for idx, (big, smalls) in enumerate(s_comps):
        if cosets_equal(big, c_min) and _splittable(smalls, target):
            inside = [s for s in smalls if coset_compare(s, target) is _RCL]
            disjoint = [s for s in smalls if coset_compare(s, target) is _DISJ]
            s_comps[idx] = (big, disjoint + [target])
            s_comps.insert(idx + 1, (target, inside))
            return
    # every candidate component has a shell equal to or containing target,
    # so target's content is assembled from deeper components instead
    _append_empty_component(s_comps, target, b_comps, budget)


def _install_small(
    s_comps: list[_Comp], target: Coset, b_comps: list[_Comp], budget: int
) -> None:
    containers = [
        (idx, big)
        for idx, (big, _) in enumerate(s_comps)
        if coset_compare(big, target) in (_LCR, _EQ)
    ]
    if not containers:
        _append_empty_component(s_comps, target, b_comps, budget)
        return
    equal = next((pair for pair in containers if cosets_equal(pair[1], target)), None)
    if equal is not None:
        idx, big = equal
        _, smalls = s_comps[idx]
        s_comps[idx] = (big, [target])
        s_comps.insert(idx + 1, (target, smalls))
        return
    _, c_min = _minimal_container(containers)
    for idx, (big, smalls) in enumerate(s_comps):
        if cosets_equal(big, c_min) and _splittable(smalls, target):
            inside = [s for s in smalls if coset_compare(s, target) is _RCL]
            disjoint = [s for s in smalls if coset_compare(s, target) is _DISJ]
            s_comps[idx] = (big, disjoint + [target])
            s_comps.insert(idx + 1, (target, inside))
            return
    # fall back: realise target as a big shell first; the equal-container
    # branch above will carve it as a small shell on the next pass
    _append_empty_component(s_comps, target, b_comps, budget)


def _drop_spare_trivial(s_comps: list[_Comp], a: DDDSet, b: DDDSet) -> None:
    """Remove trivial (C, [C]) components whose shells survive elsewhere."""
    needed_bigs = a.all_bigs() + b.all_bigs()
    needed_smalls = a.all_smalls() + b.all_smalls()
    changed = True
    while changed:
        changed = False
        for idx, (big, smalls) in enumerate(s_comps):
            if len(smalls) != 1 or not cosets_equal(smalls[0], big):
                continue
            others_bigs = [bb for k, (bb, _) in enumerate(s_comps) if k != idx]
            others_smalls = [
                s for k, (_, ss) in enumerate(s_comps) if k != idx for s in ss
            ]
            big_ok = not any(cosets_equal(big, x) for x in needed_bigs) or any(
                cosets_equal(big, x) for x in others_bigs
            )
            small_ok = not any(cosets_equal(smalls[0], x) for x in needed_smalls) or any(
                cosets_equal(smalls[0], x) for x in others_smalls
            )
            if big_ok and small_ok:
                del s_comps[idx]
                changed = True
                break


# -- concrete sets -------------------------------------------------------


def full_K(q: int, *, budget: int = DEFAULT_BUDGET) -> DDDSet:
    """GL_2(O_F) as a ddd-set: the disjoint union of its K_{1,0}-cosets."""
    level = Level(1, 0)
    return DDDSet(
        tuple(
            DDSet((Coset(rep, level),), (), validate=False)
            for rep in enumerate_K_mod_K10(q, budget=budget)
        )
    )


def translate_ddd(a: DDDSet, g: Mat2, side: str = "left") -> DDDSet:
    """Translate a measurable set by g; right translation needs g in K."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if side == "right" and not in_K(g):
        raise NotRepresentable("right translation by an element outside K leaves the set ring")
    move = (lambda c: c.translate_left(g)) if side == "left" else (lambda c: c.translate_right(g))
    return DDDSet(
        tuple(
            DDSet(
                tuple(move(b) for b in comp.bigs),
                tuple(move(s) for s in comp.smalls),
                validate=False,
            )
            for comp in a.components
        )
    )
