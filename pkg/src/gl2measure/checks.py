"""Randomised generators and property suites.

The suites here back both the test-suite and the CLI ``check`` command:
normality of the congruence subgroups, the intersection trichotomy
against membership sampling, presentation independence of the measure
through common refinements, the matrix-coordinate factorization oracle,
and order independence of iterated coordinate integrals.

Generators draw coset representatives as (enumerated class rep) times
(random congruence-subgroup element) so that samples land on both sides
of membership boundaries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import GL2MeasureError
from .field import FieldElem, Level
from .field_integration import (
    ECoset,
    EStepFn,
    FDDSet,
    FIdealCoset,
    FSimpleFn,
    e_coset_compare,
    f_coset_compare,
    f_integrate,
    factor_rhs,
    haar_integral_E,
    iterated_product_integral,
    lift_integral,
    lift_step_fn,
)
from .integration import SimpleFn, integrate, translate_fn
from .matrices import (
    Coset,
    CosetRelation,
    Mat2,
    coset_compare,
    cosets_equal,
    enumerate_K_mod_K10,
    enumerate_cosets,
    in_Kij,
    mat_inv,
    right_quotient_in_Kij,
)
from .measure import mu, mu_distinguished
from .sets import (
    DDDSet,
    DDSet,
    common_refinement,
    is_refinement,
    reduce as reduce_ddd,
    translate_ddd,
)
from .values import GlobalParams, ValueElem

_ITERTOOLS_PERMS = [
    (a, b, c, d)
    for a in range(4)
    for b in range(4)
    for c in range(4)
    for d in range(4)
    if len({a, b, c, d}) == 4
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f": {self.detail}" if self.detail else ""
        return f"{status} {self.name} ({self.cases} cases){extra}"


# -- element generators -----------------------------------------------------


def random_of_elem(rng: random.Random, q: int, *, allow_zero: bool = True) -> FieldElem:
    """A random rank-two integer: right-lex valuation >= (0, 0)."""
    terms: dict[tuple[int, int], int] = {}
    for _ in range(rng.randint(0 if allow_zero else 1, 3)):
        if rng.random() < 0.6:
            key = (rng.randint(0, 3), 0)
        else:
            key = (rng.randint(-2, 3), rng.randint(1, 2))
        terms[key] = rng.randint(1, q - 1)
    if not allow_zero and not terms:
        terms[(0, 0)] = 1
    return FieldElem(q, terms)


def random_unit(rng: random.Random, q: int) -> FieldElem:
    terms: dict[tuple[int, int], int] = {(0, 0): rng.randint(1, q - 1)}
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.5:
            key = (rng.randint(1, 3), 0)
        else:
            key = (rng.randint(-2, 3), rng.randint(1, 2))
        terms[key] = rng.randint(1, q - 1)
    return FieldElem(q, terms)


def random_field_elem(
    rng: random.Random, q: int, *, nonzero: bool = False
) -> FieldElem:
    terms: dict[tuple[int, int], int] = {}
    for _ in range(rng.randint(0, 4)):
        terms[(rng.randint(-3, 3), rng.randint(-2, 2))] = rng.randint(1, q - 1)
    if nonzero and not terms:
        terms[(rng.randint(-2, 2), rng.randint(-1, 1))] = 1
    return FieldElem(q, terms)


def random_subgroup_level(
    rng: random.Random, q: int, *, max_i: int = 3, max_j: int = 2, min_i: int = -2
) -> Level:
    j = rng.randint(0, max_j)
    if j == 0:
        return Level(rng.randint(1, max_i), 0)
    return Level(rng.randint(min_i, max_i), j)


def random_kij_elem(rng: random.Random, q: int, level: Level) -> Mat2:
    """A random element of K_{level}: the identity plus a shifted integral matrix."""
    shift = FieldElem.monomial(q, level.i, level.j)
    bump = Mat2(
        random_of_elem(rng, q),
        random_of_elem(rng, q),
        random_of_elem(rng, q),
        random_of_elem(rng, q),
    ).scale(shift)
    return Mat2.identity(q) + bump


_K_CLASS_CACHE: dict[int, list[Mat2]] = {}


def _k_classes(q: int) -> list[Mat2]:
    if q not in _K_CLASS_CACHE:
        _K_CLASS_CACHE[q] = enumerate_K_mod_K10(q)
    return _K_CLASS_CACHE[q]


def random_k_elem(rng: random.Random, q: int) -> Mat2:
    return rng.choice(_k_classes(q)) @ random_kij_elem(rng, q, Level(1, 0))


def random_elementary_factor(rng: random.Random, q: int) -> Mat2:
    kind = rng.choice(("diag_a", "diag_d", "upper", "lower", "swap"))
    if kind == "swap":
        return Mat2.swap(q)
    if kind in ("diag_a", "diag_d"):
        x = FieldElem.monomial(
            q, rng.randint(-2, 2), rng.randint(-2, 2), rng.randint(1, q - 1)
        )
        if rng.random() < 0.5:
            x = x * random_unit(rng, q)
        return Mat2.diag(x, FieldElem.one(q)) if kind == "diag_a" else Mat2.diag(
            FieldElem.one(q), x
        )
    u = random_field_elem(rng, q)
    return Mat2.upper(u) if kind == "upper" else Mat2.lower(u)


def random_gl2_elem(rng: random.Random, q: int, *, max_factors: int = 5) -> Mat2:
    g = Mat2.identity(q)
    for _ in range(rng.randint(1, max_factors)):
        g = g @ random_elementary_factor(rng, q)
    return g


# -- set generators -----------------------------------------------------------


def random_coset(
    rng: random.Random,
    q: int,
    *,
    general_rep: bool = False,
    max_i: int = 3,
    max_j: int = 1,
) -> Coset:
    level = random_subgroup_level(rng, q, max_i=max_i, max_j=max_j)
    rep = random_gl2_elem(rng, q) if general_rep else random_k_elem(rng, q)
    return Coset(rep, level)


def random_point_in(rng: random.Random, coset: Coset) -> Mat2:
    return coset.rep @ random_kij_elem(rng, coset.q, coset.level)


def random_ddd(
    rng: random.Random,
    q: int,
    *,
    max_comps: int = 2,
    general_rep: bool = False,
) -> DDDSet:
    comps: list[DDSet] = []
    chosen_bigs: list[Coset] = []
    for _ in range(rng.randint(1, max_comps)):
        big = None
        for _ in range(30):
            cand = random_coset(rng, q, general_rep=general_rep, max_i=2, max_j=1)
            if all(
                coset_compare(cand, other) is CosetRelation.DISJOINT
                for other in chosen_bigs
            ):
                big = cand
                break
        if big is None:
            continue
        chosen_bigs.append(big)
        smalls: list[Coset] = []
        for _ in range(rng.randint(0, 2)):
            di = 2 if rng.random() < 0.25 else 1
            dj = 1 if rng.random() < 0.25 else 0
            level = Level(big.level.i + di, big.level.j + dj)
            cand = Coset(big.rep @ random_kij_elem(rng, q, big.level), level)
            if all(
                coset_compare(cand, s) is CosetRelation.DISJOINT for s in smalls
            ):
                smalls.append(cand)
        comps.append(DDSet((big,), tuple(smalls)))
    if not comps:
        comps.append(DDSet((random_coset(rng, q),), ()))
    return DDDSet(tuple(comps))


def _split_big(rng: random.Random, a: DDDSet, *, budget: int) -> Optional[DDDSet]:
    candidates = [
        (ci, bi)
        for ci, comp in enumerate(a.components)
        for bi, b in enumerate(comp.bigs)
        if b.q ** 4 <= budget
    ]
    if not candidates:
        return None
    ci, bi = rng.choice(candidates)
    comp = a.components[ci]
    big = comp.bigs[bi]
    if any(cosets_equal(s, big) for s in comp.smalls):
        # splitting a fully-removed shell would orphan the equal small
        return None
    q = big.q
    child_level = Level(big.level.i + 1, big.level.j)
    children = [
        Coset(big.rep @ r, child_level)
        for r in enumerate_cosets(q, big.level, child_level, budget=budget)
    ]
    # every small inside the split shell fits in exactly one child
    new_bigs = [b for k, b in enumerate(comp.bigs) if k != bi] + children
    new_comp = DDSet(tuple(new_bigs), comp.smalls)
    comps = list(a.components)
    comps[ci] = new_comp
    return DDDSet(tuple(comps))


def _split_small(rng: random.Random, a: DDDSet, *, budget: int) -> Optional[DDDSet]:
    candidates = [
        (ci, si)
        for ci, comp in enumerate(a.components)
        for si, s in enumerate(comp.smalls)
        if s.q ** 4 <= budget
    ]
    if not candidates:
        return None
    ci, si = rng.choice(candidates)
    comp = a.components[ci]
    small = comp.smalls[si]
    q = small.q
    child_level = Level(small.level.i + 1, small.level.j)
    children = [
        Coset(small.rep @ r, child_level)
        for r in enumerate_cosets(q, small.level, child_level, budget=budget)
    ]
    new_smalls = [s for k, s in enumerate(comp.smalls) if k != si] + children
    comps = list(a.components)
    comps[ci] = DDSet(comp.bigs, tuple(new_smalls))
    return DDDSet(tuple(comps))


def _carve(rng: random.Random, a: DDDSet, *, budget: int) -> Optional[DDDSet]:
    if not a.components:
        return None
    ci = rng.randrange(len(a.components))
    comp = a.components[ci]
    if not comp.bigs:
        return None
    big = rng.choice(comp.bigs)
    q = big.q
    di = rng.randint(1, 2)
    dj = 1 if rng.random() < 0.2 else 0
    level = Level(big.level.i + di, big.level.j + dj)
    carved = Coset(big.rep @ random_kij_elem(rng, q, big.level), level)
    inside, disjoint, other = [], [], []
    for s in comp.smalls:
        if coset_compare(s, big) not in (CosetRelation.RIGHT_CONTAINS_LEFT, CosetRelation.EQUAL):
            other.append(s)
            continue
        rel = coset_compare(s, carved)
        if rel in (CosetRelation.EQUAL, CosetRelation.LEFT_CONTAINS_RIGHT):
            return None  # carved piece nested inside a removed shell; try again
        (inside if rel is CosetRelation.RIGHT_CONTAINS_LEFT else disjoint).append(s)
    comps = list(a.components)
    comps[ci] = DDSet(comp.bigs, tuple(other + disjoint + [carved]))
    comps.append(DDSet((carved,), tuple(inside)))
    return DDDSet(tuple(comps))


def _shuffle(rng: random.Random, a: DDDSet) -> DDDSet:
    comps = []
    for comp in a.components:
        bigs = list(comp.bigs)
        smalls = list(comp.smalls)
        rng.shuffle(bigs)
        rng.shuffle(smalls)
        comps.append(DDSet(tuple(bigs), tuple(smalls)))
    rng.shuffle(comps)
    return DDDSet(tuple(comps))


def random_rewrite(rng: random.Random, a: DDDSet, *, budget: int) -> DDDSet:
    # splits multiply shell counts by q^4; keep them rarer than carves
    ops = (_split_big, _split_small, _carve, _carve, _shuffle, _shuffle)
    for _ in range(12):
        op = rng.choice(ops)
        out = op(rng, a) if op is _shuffle else op(rng, a, budget=budget)
        if out is not None:
            return out
    return a


def random_equal_pair(
    rng: random.Random, q: int, *, rewrites: int = 3, budget: int = 100_000
) -> tuple[DDDSet, DDDSet]:
    """Two reduced presentations of the same set, built by valid rewrites."""
    base = random_ddd(rng, q)
    a = base
    for _ in range(rng.randint(0, 1)):
        a = random_rewrite(rng, a, budget=budget)
    b = base
    for _ in range(rng.randint(1, rewrites)):
        b = random_rewrite(rng, b, budget=budget)
    return reduce_ddd(a), reduce_ddd(b)


# -- field-side generators ------------------------------------------------------


def random_f_coset(rng: random.Random, q: int) -> FIdealCoset:
    return FIdealCoset(
        random_field_elem(rng, q), Level(rng.randint(-2, 3), rng.randint(-2, 2))
    )


def random_fsimple(rng: random.Random, q: int) -> FSimpleFn:
    terms = []
    chosen: list[FIdealCoset] = []
    for _ in range(rng.randint(1, 2)):
        coset = None
        for _ in range(20):
            cand = random_f_coset(rng, q)
            if all(f_coset_compare(cand, other) == "disjoint" for other in chosen):
                coset = cand
                break
        if coset is None:
            continue
        chosen.append(coset)
        smalls = []
        if rng.random() < 0.3:
            smalls.append(
                FIdealCoset(
                    coset.center
                    + FieldElem.monomial(q, coset.level.i, coset.level.j)
                    * random_of_elem(rng, q),
                    Level(coset.level.i + rng.randint(1, 2), coset.level.j),
                )
            )
        coeff = ValueElem.monomial(
            rng.randint(-1, 2), Fraction(rng.randint(1, 4), rng.randint(1, 3))
        )
        terms.append((coeff, FDDSet((coset,), tuple(smalls))))
    if not terms:
        terms.append((ValueElem.one(), FDDSet((random_f_coset(rng, q),), ())))
    return FSimpleFn(tuple(terms))


def random_estep(rng: random.Random, q: int) -> EStepFn:
    terms = []
    chosen: list[ECoset] = []
    for _ in range(rng.randint(1, 3)):
        support = None
        for _ in range(20):
            center_terms = {
                (rng.randint(-2, 2), 0): rng.randint(1, q - 1)
                for _ in range(rng.randint(0, 2))
            }
            cand = ECoset(FieldElem(q, center_terms), rng.randint(-1, 3))
            if all(e_coset_compare(cand, other) == "disjoint" for other in chosen):
                support = cand
                break
        if support is None:
            continue
        chosen.append(support)
        coeff = Fraction(rng.choice([-2, -1, 1, 2, 3]), rng.randint(1, 3))
        terms.append((coeff, support))
    return EStepFn(tuple(terms))


def random_simple_fn(rng: random.Random, q: int) -> SimpleFn:
    base = random_ddd(rng, q, max_comps=2)
    terms = []
    for comp in base.components:
        coeff = ValueElem.monomial(
            rng.randint(0, 2), Fraction(rng.randint(1, 5), rng.randint(1, 3))
        )
        terms.append((coeff, comp))
    return SimpleFn(tuple(terms))


# -- property suites --------------------------------------------------------------


def check_normality(params: GlobalParams, rng: random.Random, count: int) -> CheckResult:
    """g k g^{-1} stays in K_{i,j} for g in K; checked without division,
    and additionally through the windowed inverse where certifiable."""
    q = params.q
    for n in range(count):
        g = random_k_elem(rng, q)
        level = random_subgroup_level(rng, q)
        k = random_kij_elem(rng, q, level)
        if not right_quotient_in_Kij(g @ k, g, level):
            return CheckResult(
                "normality", False, n + 1, f"g={g!r} k={k!r} level={level}"
            )
        if level.j == 0:
            conj = g @ k @ mat_inv(g)
            if not in_Kij(conj, level):
                return CheckResult(
                    "normality", False, n + 1, f"windowed conjugate failed at {level}"
                )
    return CheckResult("normality", True, count)


def check_trichotomy(params: GlobalParams, rng: random.Random, count: int) -> CheckResult:
    """coset_compare verdicts agree with membership sampling."""
    q = params.q
    for n in range(count):
        a = random_coset(rng, q, general_rep=rng.random() < 0.4)
        b = random_coset(rng, q, general_rep=rng.random() < 0.4)
        rel = coset_compare(a, b)
        a_pts = [random_point_in(rng, a) for _ in range(3)]
        b_pts = [random_point_in(rng, b) for _ in range(3)]
        ok = True
        if rel is CosetRelation.EQUAL:
            ok = all(b.contains_point(x) for x in a_pts) and all(
                a.contains_point(x) for x in b_pts
            )
        elif rel is CosetRelation.LEFT_CONTAINS_RIGHT:
            ok = all(a.contains_point(x) for x in b_pts)
        elif rel is CosetRelation.RIGHT_CONTAINS_LEFT:
            ok = all(b.contains_point(x) for x in a_pts)
        else:
            ok = not any(b.contains_point(x) for x in a_pts) and not any(
                a.contains_point(x) for x in b_pts
            )
        if not ok:
            return CheckResult(
                "trichotomy", False, n + 1, f"{rel.value} inconsistent for {a!r} vs {b!r}"
            )
    return CheckResult("trichotomy", True, count)


def check_presentation_independence(
    params: GlobalParams, rng: random.Random, count: int
) -> CheckResult:
    """Equal presentations measure equally and admit a common refinement
    that both presentations recognise and that preserves the measure."""
    q = params.q
    budget = params.coset_budget
    for n in range(count):
        a, b = random_equal_pair(rng, q, budget=budget)
        try:
            if mu(a) != mu(b):
                return CheckResult(
                    "presentation-independence", False, n + 1, f"mu differs: {a!r} vs {b!r}"
                )
            refined = common_refinement(a, b, budget=budget)
            if not is_refinement(a, refined, budget=budget):
                return CheckResult(
                    "presentation-independence", False, n + 1, f"not a refinement of A: {a!r}"
                )
            if not is_refinement(b, refined, budget=budget):
                return CheckResult(
                    "presentation-independence", False, n + 1, f"not a refinement of B: {b!r}"
                )
            if mu(refined) != mu(a):
                return CheckResult(
                    "presentation-independence", False, n + 1, "refinement changed the measure"
                )
        except GL2MeasureError as exc:
            return CheckResult(
                "presentation-independence", False, n + 1, f"{exc} on {a!r} vs {b!r}"
            )
    return CheckResult("presentation-independence", True, count)


def check_factorization(params: GlobalParams, rng: random.Random, count: int) -> CheckResult:
    """The coordinate-integral evaluation equals the group measure."""
    q = params.q
    for n in range(count):
        h = random_gl2_elem(rng, q)
        level = random_subgroup_level(rng, q)
        expected = mu_distinguished(Coset(h, level))
        got = factor_rhs(h, level)
        if got != expected:
            return CheckResult(
                "factorization-oracle",
                False,
                n + 1,
                f"h={h!r} level={level}: {got!r} != {expected!r}",
            )
    return CheckResult("factorization-oracle", True, count)


def check_fubini(params: GlobalParams, rng: random.Random, count: int) -> CheckResult:
    """All 24 elimination orders agree on product integrands."""
    q = params.q
    for n in range(count):
        factors = [random_fsimple(rng, q) for _ in range(4)]
        values = {
            iterated_product_integral(factors, order) for order in _ITERTOOLS_PERMS
        }
        if len(values) != 1:
            return CheckResult(
                "fubini-orders", False, n + 1, f"orders disagree on {factors!r}"
            )
    return CheckResult("fubini-orders", True, count)


def check_lift(params: GlobalParams, rng: random.Random, count: int) -> CheckResult:
    """Lifted step functions integrate to X^n times their Haar integral."""
    q = params.q
    for n in range(count):
        g = random_estep(rng, q)
        a = random_field_elem(rng, q)
        shift = rng.randint(-2, 3)
        via_lift = f_integrate(lift_step_fn(g, a, shift))
        direct = lift_integral(g, a, shift)
        expected = ValueElem.monomial(shift, haar_integral_E(g))
        if via_lift != direct or direct != expected:
            return CheckResult(
                "lift-agreement", False, n + 1, f"g={g.terms!r} n={shift}"
            )
    return CheckResult("lift-agreement", True, count)


def check_invariance(params: GlobalParams, rng: random.Random, count: int) -> CheckResult:
    """Left invariance under GL_2(F), right invariance under K."""
    q = params.q
    for n in range(count):
        a = random_ddd(rng, q)
        f = random_simple_fn(rng, q)
        g = random_gl2_elem(rng, q)
        k = random_k_elem(rng, q)
        if mu(translate_ddd(a, g, "left")) != mu(a):
            return CheckResult("invariance", False, n + 1, f"left measure: g={g!r}")
        if integrate(translate_fn(f, g, "left")) != integrate(f):
            return CheckResult("invariance", False, n + 1, f"left integral: g={g!r}")
        if mu(translate_ddd(a, k, "right")) != mu(a):
            return CheckResult("invariance", False, n + 1, f"right measure: k={k!r}")
        if integrate(translate_fn(f, k, "right")) != integrate(f):
            return CheckResult("invariance", False, n + 1, f"right integral: k={k!r}")
    return CheckResult("invariance", True, count)


SUITES: dict[str, list[Callable[[GlobalParams, random.Random, int], CheckResult]]] = {
    "invariants": [check_normality, check_trichotomy, check_presentation_independence],
    "oracle": [check_factorization, check_fubini],
}


def run_checks(
    kind: str,
    params: GlobalParams,
    seed: int,
    count: int,
    *,
    parallel: bool = False,
) -> list[CheckResult]:
    if kind == "all":
        suites = SUITES["invariants"] + SUITES["oracle"]
    elif kind in SUITES:
        suites = SUITES[kind]
    else:
        raise ValueError(f"unknown check kind {kind!r}")

    def run_one(fn) -> CheckResult:
        rng = random.Random(f"{seed}:{fn.__name__}")
        return fn(params, rng, count)

    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            return list(pool.map(run_one, suites))
    return [run_one(fn) for fn in suites]
