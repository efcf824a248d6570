"""Measure and integration on the field F itself, and the factorization oracle.

The field-level measure assigns mu_F(alpha + t1^i t2^j O_F) = q^(-i) X^j
and extends additively to the one-dimensional analogue of dd-sets.  On top
of it live:

* simple-function integration on F,
* iterated product-form integrals over four coordinates, computable in
  any order of elimination,
* step-function lifts from the first residue field E = F_q((u)) to F,
  whose integral is X^n times the Haar integral downstairs, and
* ``factor_rhs``: the matrix-coordinate factorization of the group
  integral.  For an indicator of h K_{i,j} the group in tegral equals

      lambda * Int Int Int Int |det|^(-2) [indicator] d(alpha..delta),

  and the right-hand side is evaluated by peeling an elementary
  decomposition of h: diagonal factors contribute squared modules to the
  coordinate differentials, the determinant weight contributes the
  inverse square of |det h|, unipotent factors shift additively (the
  field measure is translation invariant), and the swap permutes the
  order of integration (harmless by order independence).  The result is
  an independent recomputation of mu(h K_{i,j}).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InvalidLevel, InvalidSet
from .field import FieldElem, Level, LEVEL_ZERO, in_ideal, module_of
from .matrices import Mat2, elementary_decompose
from .measure import lambda_constant
from .values import ValueElem


@dataclass(frozen=True)
class FIdealCoset:
    """The set center + t1^i t2^j O_F inside F."""

    center: FieldElem
    level: Level

    @property
    def q(self) -> int:
        return self.center.q

    def contains(self, x: FieldElem) -> bool:
        return in_ideal(x - self.center, self.level)

    def __repr__(self) -> str:
        return f"FIdealCoset({self.center!r} + t^{self.level})"


def f_coset_compare(a: FIdealCoset, b: FIdealCoset) -> str:
    """One-dimensional trichotomy: 'equal', 'left', 'right', or 'disjoint'.

    'left' means a contains b.
    """
    if a.level == b.level:
        return "equal" if in_ideal(b.center - a.center, a.level) else "disjoint"
    if a.level < b.level:
        return "left" if in_ideal(b.center - a.center, a.level) else "disjoint"
    return "right" if in_ideal(a.center - b.center, b.level) else "disjoint"


def f_intersect(a: FIdealCoset, b: FIdealCoset) -> Optional[FIdealCoset]:
    rel = f_coset_compare(a, b)
    if rel == "disjoint":
        return None
    return b if rel == "left" else a


def _f_maximal(cosets: Sequence[FIdealCoset]) -> tuple[FIdealCoset, ...]:
    kept: list[FIdealCoset] = []
    for c in cosets:
        absorbed = False
        survivors = []
        for k in kept:
            rel = f_coset_compare(c, k)
            if rel in ("equal", "right"):
                absorbed = True
                survivors.append(k)
            elif rel == "left":
                continue
            else:
                survivors.append(k)
        if not absorbed:
            survivors.append(c)
        kept = survivors
    return tuple(kept)


class FDDSet:
    """Big ideal-cosets minus contained small ideal-cosets, inside F."""

    __slots__ = ("bigs", "smalls")

    def __init__(
        self,
        bigs: Sequence[FIdealCoset],
        smalls: Sequence[FIdealCoset] = (),
        validate: bool = True,
    ) -> None:
        bigs = tuple(bigs)
        smalls = _f_maximal(smalls)
        if validate:
            for i in range(len(bigs)):
                for k in range(i + 1, len(bigs)):
                    if f_coset_compare(bigs[i], bigs[k]) != "disjoint":
                        raise InvalidSet("big shells must be pairwise disjoint")
            for s in smalls:
                if not any(f_coset_compare(s, b) in ("equal", "right") for b in bigs):
                    raise InvalidSet("every small shell must lie inside a big shell")
        object.__setattr__(self, "bigs", bigs)
        object.__setattr__(self, "smalls", smalls)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("FDDSet is immutable")

    def contains(self, x: FieldElem) -> bool:
        return any(b.contains(x) for b in self.bigs) and not any(
            s.contains(x) for s in self.smalls
        )

    def __repr__(self) -> str:
        return f"FDDSet(bigs={list(self.bigs)!r}, smalls={list(self.smalls)!r})"


def f_mu_coset(c: FIdealCoset) -> ValueElem:
    return ValueElem.monomial(c.level.j, Fraction(c.q) ** (-c.level.i))


def f_mu(s: FDDSet) -> ValueElem:
    total = ValueElem.zero()
    for b in s.bigs:
        total = total + f_mu_coset(b)
    for sm in s.smalls:
        total = total - f_mu_coset(sm)
    return total


class FSimpleFn:
    """A simple function on F: disjoint F-dd supports with value coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[tuple[ValueElem, FDDSet]]) -> None:
        object.__setattr__(
            self, "terms", tuple((c, s) for c, s in terms if not c.is_zero)
        )

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("FSimpleFn is immutable")

    @classmethod
    def zero(cls) -> "FSimpleFn":
        return cls(())

    @classmethod
    def indicator(cls, support: FDDSet) -> "FSimpleFn":
        return cls(((ValueElem.one(), support),))

    @classmethod
    def indicator_coset(cls, coset: FIdealCoset) -> "FSimpleFn":
        return cls.indicator(FDDSet((coset,), (), validate=False))

    def __repr__(self) -> str:
        return f"FSimpleFn({list(self.terms)!r})"


def f_integrate(f: FSimpleFn) -> ValueElem:
    total = ValueElem.zero()
    for coeff, support in f.terms:
        total = total + coeff * f_mu(support)
    return total


def iterated_product_integral(
    factors: Sequence[FSimpleFn], order: Sequence[int]
) -> ValueElem:
    """Integrate a separated-variables product, one coordinate at a time.

    ``factors`` are the four one-variable functions and ``order`` the
    elimination order (a permutation of 0..3).  Each step integrates out
    one variable and multiplies the accumulated constant; the lemma that
    the result does not depend on the order is exercised by the tests.
    """
    if sorted(order) != list(range(len(factors))):
        raise ValueError(f"order {order!r} is not a permutation of the factors")
    total = ValueElem.one()
    for idx in order:
        total = total * f_integrate(factors[idx])
    return total


# -- residue-field step functions and lifts -------------------------------


@dataclass(frozen=True)
class ECoset:
    """The set center + u^k O_E in the residue field E = F_q((u)).

    Elements of E are represented by field elements supported on t2-level
    zero, with t1 playing the role of u.
    """

    center: FieldElem
    k: int

    def __post_init__(self) -> None:
        if any(b != 0 for _, b in self.center.coeffs):
            raise InvalidSet("residue-field elements live at second level zero")

    @property
    def q(self) -> int:
        return self.center.q

    def contains(self, x: FieldElem) -> bool:
        return in_ideal(x - self.center, Level(self.k, 0))


def e_coset_compare(a: ECoset, b: ECoset) -> str:
    if a.k == b.k:
        return "equal" if in_ideal(b.center - a.center, Level(a.k, 0)) else "disjoint"
    if a.k < b.k:
        return "left" if in_ideal(b.center - a.center, Level(a.k, 0)) else "disjoint"
    return "right" if in_ideal(a.center - b.center, Level(b.k, 0)) else "disjoint"


class EStepFn:
    """A step function on E: rational coefficients on disjoint ball supports."""

    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[tuple[Fraction, ECoset]], validate: bool = True) -> None:
        terms = tuple((Fraction(c), s) for c, s in terms if c)
        if validate:
            for i in range(len(terms)):
                for k in range(i + 1, len(terms)):
                    if e_coset_compare(terms[i][1], terms[k][1]) != "disjoint":
                        raise InvalidSet("step-function supports must be disjoint")
        object.__setattr__(self, "terms", terms)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("EStepFn is immutable")

    @classmethod
    def zero(cls) -> "EStepFn":
        return cls(())


def haar_integral_E(g: EStepFn) -> Fraction:
    """Haar integral on E normalised by mu(O_E) = 1."""
    total = Fraction(0)
    for coeff, support in g.terms:
        total += coeff * Fraction(1, support.q**support.k)
    return total


def lift_step_fn(g: EStepFn, a: FieldElem, n: int) -> FSimpleFn:
    """The explicit lift of g at (a, n) as a simple function on F.

    The lift is supported on a + t2^n O_F^(rank-one) and evaluates g on
    the residue of (x - a) t2^(-n); each ball center + u^k O_E pulls back
    to the single F-coset (a + center*t2^n) + t1^k t2^n O_F.
    """
    q = a.q
    t2n = FieldElem.monomial(q, 0, n)
    terms = []
    for coeff, support in g.terms:
        center = a + support.center * t2n
        fcoset = FIdealCoset(center, Level(support.k, n))
        terms.append((ValueElem.from_rational(coeff), FDDSet((fcoset,), (), validate=False)))
    return FSimpleFn(terms)


def lift_integral(g: EStepFn, a: FieldElem, n: int) -> ValueElem:
    """Integral over F of the lift of g at (a, n): X^n times the Haar integral."""
    return ValueElem.monomial(n, haar_integral_E(g))


# -- the factorization oracle ---------------------------------------------


def kij_coordinate_factors(q: int, level: Level) -> list[FSimpleFn]:
    """The four coordinate indicators of K_{i,j}: (1+t^L O, t^L O, t^L O, 1+t^L O)."""
    unit_coset = FIdealCoset(FieldElem.one(q), level)
    ideal_coset = FIdealCoset(FieldElem.zero(q), level)
    unit_fn = FSimpleFn.indicator_coset(unit_coset)
    ideal_fn = FSimpleFn.indicator_coset(ideal_coset)
    return [unit_fn, ideal_fn, ideal_fn, unit_fn]


def factor_rhs(h: Mat2, level: Level) -> ValueElem:
    """Evaluate the coordinate-side of the factorization for f = 1_{h K_{level}}.

    Decomposes h into elementary factors and applies the change-of-variables
    rules factor by factor; the return value must coincide with
    mu(h K_{level}) computed by the measure module, which is what makes
    this an independent oracle.
    """
    if not level > LEVEL_ZERO:
        raise InvalidLevel(f"level {level} is not > (0,0)")
    q = h.q
    factors = elementary_decompose(h)
    jacobian = ValueElem.one()
    perm = (0, 1, 2, 3)
    for f in factors:
        if f.kind in ("diag_a", "diag_d"):
            m = module_of(f.x)
            jacobian = jacobian * m * m
        elif f.kind == "swap":
            perm = (perm[2], perm[3], perm[0], perm[1])
        # unipotent factors only shift coordinates additively
    det_module = module_of(h.det())
    det_weight_inv = (det_module * det_module).invert_monomial()
    base = iterated_product_integral(kij_coordinate_factors(q, level), perm)
    return ValueElem.from_rational(lambda_constant(q)) * jacobian * det_weight_inv * base
