"""2x2 matrices over the field, the congruence subgroups, and cosets.

K = GL_2(O_F) and, for (i, j) > (0, 0), K_{i,j} = I_2 + t1^i t2^j M_2(O_F).
A distinguished set is a left coset g K_{i,j}; the trichotomy lemma (two
such cosets intersect in the empty set or in the smaller one) is what every
set-algebra decision below reduces to.

Coset membership questions about quotients (is g^{-1} h in K_{i,j}?) are
decided without dividing: g^{-1} h = I + t1^i t2^j M with M integral is
equivalent to every entry of adj(g) (h - g) lying in
t1^i t2^j det(g) O_F, which is a pure valuation test on exact polynomials.
This keeps the decisions exact even where an explicit inverse would carry
a truncated tail.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from .errors import (
    BudgetExceeded,
    InvalidLevel,
    NotInvertible,
    PrecisionExhausted,
    ZeroValue,
)
from .field import FieldElem, Level, LEVEL_ZERO, in_ideal, field_inv, valuation


class Mat2:
    """A 2x2 matrix over F, row-major entries (a, b; c, d)."""

    __slots__ = ("a", "b", "c", "d", "_hash", "_det", "_adj")

    def __init__(self, a: FieldElem, b: FieldElem, c: FieldElem, d: FieldElem) -> None:
        if not (a.q == b.q == c.q == d.q):
            raise ValueError("matrix entries must share the residue size")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_det", None)
        object.__setattr__(self, "_adj", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("Mat2 is immutable")

    @property
    def q(self) -> int:
        return self.a.q

    @property
    def entries(self) -> tuple[FieldElem, FieldElem, FieldElem, FieldElem]:
        return (self.a, self.b, self.c, self.d)

    @property
    def is_exact(self) -> bool:
        return all(e.is_exact for e in self.entries)

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, q: int) -> "Mat2":
        one = FieldElem.one(q)
        zero = FieldElem.zero(q)
        return cls(one, zero, zero, one)

    @classmethod
    def swap(cls, q: int) -> "Mat2":
        one = FieldElem.one(q)
        zero = FieldElem.zero(q)
        return cls(zero, one, one, zero)

    @classmethod
    def diag(cls, x: FieldElem, y: FieldElem) -> "Mat2":
        zero = FieldElem.zero(x.q)
        return cls(x, zero, zero, y)

    @classmethod
    def upper(cls, u: FieldElem) -> "Mat2":
        one = FieldElem.one(u.q)
        zero = FieldElem.zero(u.q)
        return cls(one, u, zero, one)

    @classmethod
    def lower(cls, u: FieldElem) -> "Mat2":
        one = FieldElem.one(u.q)
        zero = FieldElem.zero(u.q)
        return cls(one, zero, u, one)

    # -- algebra --------------------------------------------------------

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def scale(self, x: FieldElem) -> "Mat2":
        return Mat2(self.a * x, self.b * x, self.c * x, self.d * x)

    def det(self) -> FieldElem:
        if self._det is None:
            object.__setattr__(self, "_det", self.a * self.d - self.b * self.c)
        return self._det

    def adjugate(self) -> "Mat2":
        if self._adj is None:
            object.__setattr__(self, "_adj", Mat2(self.d, -self.b, -self.c, self.a))
        return self._adj

    def inverse(self) -> "Mat2":
        try:
            det_inv = field_inv(self.det())
        except ZeroValue:
            raise NotInvertible("matrix determinant is zero") from None
        return self.adjugate().scale(det_inv)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat2):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.entries))
        return self._hash

    def __repr__(self) -> str:
        return f"[[{self.a!r}, {self.b!r}], [{self.c!r}, {self.d!r}]]"


def mat_inv(x: Mat2) -> Mat2:
    return x.inverse()


def det(x: Mat2) -> FieldElem:
    return x.det()


def _require_subgroup_level(level: Level) -> None:
    if not level > LEVEL_ZERO:
        raise InvalidLevel(f"level {level} is not > (0,0)")


def in_K(g: Mat2) -> bool:
    """Whether g lies in GL_2(O_F): integral entries and unit determinant."""
    if not all(in_ideal(e, LEVEL_ZERO) for e in g.entries):
        return False
    d = g.det()
    if d.is_zero:
        return False
    return valuation(d) == LEVEL_ZERO


def in_Kij(g: Mat2, level: Level) -> bool:
    """Whether g lies in K_{i,j} = I_2 + t1^i t2^j M_2(O_F)."""
    _require_subgroup_level(level)
    diff = g - Mat2.identity(g.q)
    return all(in_ideal(e, level) for e in diff.entries)


def _clip_t2(e: FieldElem, j_max: int) -> FieldElem:
    """Drop monomials above t2-level j_max; sound for decisions at that level.

    Every dropped monomial can only contribute products of t2-level above
    j_max, which compare >= any target level with second component j_max.
    """
    if e.window is not None or all(b <= j_max for _, b in e.coeffs):
        return e
    out = FieldElem.__new__(FieldElem)
    object.__setattr__(out, "q", e.q)
    object.__setattr__(
        out, "coeffs", {k: c for k, c in e.coeffs.items() if k[1] <= j_max}
    )
    object.__setattr__(out, "window", None)
    object.__setattr__(out, "_hash", None)
    return out


def _clipped_product_in_ideal(left: Mat2, right: Mat2, target: Level) -> bool:
    j = target.j
    la, lb, lc, ld = (_clip_t2(e, j) for e in left.entries)
    ra, rb, rc, rd = (_clip_t2(e, j) for e in right.entries)
    return (
        in_ideal(la * ra + lb * rc, target)
        and in_ideal(la * rb + lb * rd, target)
        and in_ideal(lc * ra + ld * rc, target)
        and in_ideal(lc * rb + ld * rd, target)
    )


def quotient_in_Kij(g: Mat2, h: Mat2, level: Level) -> bool:
    """Whether g^{-1} h lies in K_{level}, decided without division."""
    _require_subgroup_level(level)
    d = g.det()
    if d.is_zero:
        raise NotInvertible("coset representative has zero determinant")
    dv = valuation(d)
    target = level.add(dv)
    return _clipped_product_in_ideal(g.adjugate(), h - g, target)


def right_quotient_in_Kij(x: Mat2, g: Mat2, level: Level) -> bool:
    """Whether x g^{-1} lies in K_{level}, decided without division."""
    _require_subgroup_level(level)
    d = g.det()
    if d.is_zero:
        raise NotInvertible("coset representative has zero determinant")
    dv = valuation(d)
    target = level.add(dv)
    return _clipped_product_in_ideal(x - g, g.adjugate(), target)


class CosetRelation(Enum):
    EQUAL = "Equal"
    LEFT_CONTAINS_RIGHT = "LeftContainsRight"
    RIGHT_CONTAINS_LEFT = "RightContainsLeft"
    DISJOINT = "Disjoint"


class Coset:
    """A distinguished set g K_{i,j}; rep must be invertible, level > (0,0)."""

    __slots__ = ("rep", "level", "_hash")

    def __init__(self, rep: Mat2, level: Level) -> None:
        _require_subgroup_level(level)
        if not rep.is_exact:
            raise PrecisionExhausted("coset representatives must be exact")
        if rep.det().is_zero:
            raise NotInvertible("coset representative has zero determinant")
        object.__setattr__(self, "rep", rep)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("Coset is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Coset):
            return NotImplemented
        return self.level == other.level and self.rep == other.rep

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.rep, self.level)))
        return self._hash

    @property
    def q(self) -> int:
        return self.rep.q

    def translate_left(self, g: Mat2) -> "Coset":
        return Coset(g @ self.rep, self.level)

    def translate_right(self, g: Mat2) -> "Coset":
        return Coset(self.rep @ g, self.level)

    def contains_point(self, x: Mat2) -> bool:
        return quotient_in_Kij(self.rep, x, self.level)

    def __repr__(self) -> str:
        return f"Coset(level={self.level}, rep={self.rep!r})"


@lru_cache(maxsize=1 << 18)
def coset_compare(A: Coset, B: Coset) -> CosetRelation:
    """The intersection trichotomy for two distinguished sets."""
    if A.level == B.level:
        if quotient_in_Kij(A.rep, B.rep, A.level):
            return CosetRelation.EQUAL
        return CosetRelation.DISJOINT
    if A.level < B.level:
        # K_{B.level} is the smaller subgroup
        if quotient_in_Kij(A.rep, B.rep, A.level):
            return CosetRelation.LEFT_CONTAINS_RIGHT
        return CosetRelation.DISJOINT
    if quotient_in_Kij(B.rep, A.rep, B.level):
        return CosetRelation.RIGHT_CONTAINS_LEFT
    return CosetRelation.DISJOINT


def cosets_equal(A: Coset, B: Coset) -> bool:
    return coset_compare(A, B) is CosetRelation.EQUAL


def intersect_cosets(A: Coset, B: Coset) -> Optional[Coset]:
    """The intersection of two distinguished sets: None (empty) or the smaller."""
    rel = coset_compare(A, B)
    if rel is CosetRelation.DISJOINT:
        return None
    if rel is CosetRelation.LEFT_CONTAINS_RIGHT:
        return B
    return A if rel is CosetRelation.RIGHT_CONTAINS_LEFT else B


Index = Union[int, float]  # exact power of q, or math.inf


def index(q: int, level_a: Level, level_b: Level) -> Index:
    """|g K_{level_a} : h K_{level_b}|: q^{4(m-i)} when j == n, else infinite."""
    _require_subgroup_level(level_a)
    _require_subgroup_level(level_b)
    if not level_a <= level_b:
        raise InvalidLevel(f"{level_a} must be <= {level_b}")
    if level_a.j != level_b.j:
        return math.inf
    return q ** (4 * (level_b.i - level_a.i))


def index_in_K(q: int, level: Level) -> Index:
    """|K : K_{i,j}|: q^{4i-3}(q^2-1)(q-1) for j == 0, infinite for j > 0."""
    _require_subgroup_level(level)
    if level.j != 0:
        return math.inf
    i = level.i
    return q ** (4 * i - 3) * (q * q - 1) * (q - 1)


def _of_polynomials(q: int, degree: int) -> list[FieldElem]:
    """All polynomials in t1 of degree < degree over F_q, as field elements."""
    elems = []
    for coeffs in itertools.product(range(q), repeat=degree):
        elems.append(FieldElem(q, {(k, 0): c for k, c in enumerate(coeffs) if c}))
    return elems


def enumerate_cosets(
    q: int, level_a: Level, level_b: Level, *, budget: int = 100_000
) -> tuple[Mat2, ...]:
    """Complete, pairwise-inequivalent representatives of K_{level_a}/K_{level_b}.

    Requires equal second components; representatives are I_2 + t1^i t2^j P
    with P running over polynomial matrices of t1-degree < (m - i).  The
    returned tuple is cached and shared; treat it as read-only.
    """
    _require_subgroup_level(level_a)
    _require_subgroup_level(level_b)
    if not level_a <= level_b or level_a.j != level_b.j:
        raise InvalidLevel(f"cosets of {level_b} in {level_a} do not have finite index")
    depth = level_b.i - level_a.i
    count = q ** (4 * depth)
    if count > budget:
        raise BudgetExceeded(f"{count} cosets exceed budget {budget}")
    return _enumerate_cosets_cached(q, level_a, depth)


@lru_cache(maxsize=64)
def _enumerate_cosets_cached(q: int, level_a: Level, depth: int) -> tuple[Mat2, ...]:
    if depth == 0:
        return (Mat2.identity(q),)
    shift = FieldElem.monomial(q, level_a.i, level_a.j)
    polys = _of_polynomials(q, depth)
    reps = []
    identity = Mat2.identity(q)
    for pa, pb, pc, pd in itertools.product(polys, repeat=4):
        bump = Mat2(pa, pb, pc, pd).scale(shift)
        reps.append(identity + bump)
    return tuple(reps)


def enumerate_K_mod_K10(q: int, *, budget: int = 100_000) -> tuple[Mat2, ...]:
    """Lifts of all of GL_2(F_q): a full system of representatives of K/K_{1,0}."""
    order = (q * q - 1) * (q * q - q)
    if order > budget:
        raise BudgetExceeded(f"{order} representatives exceed budget {budget}")
    return _enumerate_k_classes_cached(q)


@lru_cache(maxsize=8)
def _enumerate_k_classes_cached(q: int) -> tuple[Mat2, ...]:
    reps = []
    for a, b, c, d in itertools.product(range(q), repeat=4):
        if (a * d - b * c) % q == 0:
            continue
        reps.append(
            Mat2(
                FieldElem.constant(q, a),
                FieldElem.constant(q, b),
                FieldElem.constant(q, c),
                FieldElem.constant(q, d),
            )
        )
    assert len(reps) == (q * q - 1) * (q * q - q)
    return tuple(reps)


@dataclass(frozen=True)
class ElementaryFactor:
    """One factor of an elementary decomposition.

    kind is one of "diag_a" (diag(x,1)), "diag_d" (diag(1,x)),
    "upper" / "lower" (unipotents), "swap"; x is None exactly for "swap".
    """

    kind: str
    x: Optional[FieldElem] = None

    def to_matrix(self, q: int) -> Mat2:
        if self.kind == "swap":
            return Mat2.swap(q)
        assert self.x is not None
        if self.kind == "diag_a":
            return Mat2.diag(self.x, FieldElem.one(q))
        if self.kind == "diag_d":
            return Mat2.diag(FieldElem.one(q), self.x)
        if self.kind == "upper":
            return Mat2.upper(self.x)
        if self.kind == "lower":
            return Mat2.lower(self.x)
        raise ValueError(f"unknown factor kind {self.kind}")


def elementary_decompose(h: Mat2) -> list[ElementaryFactor]:
    """Factor h into diagonal, unipotent, and swap matrices.

    Deterministic: the pivot is the first-column entry of minimal
    valuation (t2 first, then t1), rows swapped when the lower entry wins.
    The ordered product of the returned factors equals h.
    """
    if not h.is_exact:
        raise PrecisionExhausted("decomposition requires exact entries")
    if h.det().is_zero:
        raise NotInvertible("matrix determinant is zero")
    q = h.q
    factors: list[ElementaryFactor] = []
    a, b, c, d = h.entries
    use_swap = a.is_zero or (not c.is_zero and valuation(c) < valuation(a))
    if use_swap:
        factors.append(ElementaryFactor("swap"))
        a, b, c, d = c, d, a, b
    det_cur = a * d - b * c
    inv_a = field_inv(a)
    one = FieldElem.one(q)
    if not c.is_zero:
        factors.append(ElementaryFactor("lower", c * inv_a))
    if a != one:
        factors.append(ElementaryFactor("diag_a", a))
    e = det_cur * inv_a
    if e != one:
        factors.append(ElementaryFactor("diag_d", e))
    if not b.is_zero:
        factors.append(ElementaryFactor("upper", b * inv_a))
    return factors


def product_of_factors(factors: Sequence[ElementaryFactor], q: int) -> Mat2:
    result = Mat2.identity(q)
    for f in factors:
        result = result @ f.to_matrix(q)
    return result
