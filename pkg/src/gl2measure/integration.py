"""Integration of simple functions on GL_2(F).

A simple function is a finite combination of indicators of disjoint
dd-sets with value-ring coefficients, plus an optional finite exceptional
set (overridden points, which contribute nothing to integrals).  The
integral is the coefficient-weighted sum of the measures of the supports.

``convolve_K`` realises the convolution of functions supported on single
cosets a K_{i,j} with a in K, where normality makes products of cosets
cosets again: 1_{aH} * 1_{bH} = mu(H) 1_{abH}, extended bilinearly.  For
level (i, 0) supports the cosets are classified exactly by the matrix
entries modulo t1^i, which the implementation packs into machine integers
so that large decompositions of 1_K multiply out vectorised.

``family_integral`` evaluates the determinant-power integrals over the
large circle families (punctured disc, quarter planes, triangle), whose
circles have unit measure each; the disc itself diverges and is reported
as such.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    DivergentSeries,
    NotRepresentable,
    UnsupportedSupport,
)
from .field import FieldElem, Level
from .matrices import Coset, Mat2, cosets_equal, in_K
from .measure import mu, mu_distinguished
from .sets import DDDSet, DDSet, ddd_intersect, translate_ddd
from .values import ValueElem, geometric_closed_form


class SimpleFn:
    """A simple function: disjoint dd-set supports with value coefficients."""

    __slots__ = ("terms", "exceptional")

    def __init__(
        self,
        terms: Sequence[tuple[ValueElem, DDSet]],
        exceptional: Sequence[Mat2] = (),
    ) -> None:
        object.__setattr__(
            self, "terms", tuple((c, s) for c, s in terms if not c.is_zero)
        )
        object.__setattr__(self, "exceptional", tuple(exceptional))

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("SimpleFn is immutable")

    @classmethod
    def zero(cls) -> "SimpleFn":
        return cls(())

    @classmethod
    def indicator(cls, support: DDDSet) -> "SimpleFn":
        return cls(tuple((ValueElem.one(), comp) for comp in support.components))

    @classmethod
    def indicator_coset(cls, coset: Coset) -> "SimpleFn":
        return cls(((ValueElem.one(), DDSet((coset,), (), validate=False)),))

    def scale(self, coeff) -> "SimpleFn":
        return SimpleFn(
            tuple((c * coeff, s) for c, s in self.terms), self.exceptional
        )

    def __add__(self, other: "SimpleFn") -> "SimpleFn":
        # callers are responsible for keeping supports disjoint
        return SimpleFn(self.terms + other.terms, self.exceptional + other.exceptional)

    def __repr__(self) -> str:
        return f"SimpleFn({list(self.terms)!r}, exceptional={len(self.exceptional)})"


def integrate(f: SimpleFn) -> ValueElem:
    """Integral against the group measure: sum of coeff * mu(support)."""
    total = ValueElem.zero()
    for coeff, support in f.terms:
        total = total + coeff * mu(DDDSet((support,)))
    return total


def integrate_over(f: SimpleFn, region: DDDSet) -> ValueElem:
    """Integral of f restricted to a measurable region."""
    total = ValueElem.zero()
    for coeff, support in f.terms:
        clipped = ddd_intersect(DDDSet((support,)), region)
        total = total + coeff * mu(clipped)
    return total


def translate_fn(f: SimpleFn, g: Mat2, side: str = "left") -> SimpleFn:
    """The translate x -> f(g^{-1} x) (left) or x -> f(x g^{-1}) (right).

    Right translation is only representable inside the set ring when g
    lies in K, where normality keeps every support a coset of the same
    subgroup.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    new_terms = []
    for coeff, support in f.terms:
        moved = translate_ddd(DDDSet((support,)), g, side)
        new_terms.append((coeff, moved.components[0]))
    move = (lambda x: g @ x) if side == "left" else (lambda x: x @ g)
    return SimpleFn(tuple(new_terms), tuple(move(x) for x in f.exceptional))


# -- convolution -----------------------------------------------------------


def _single_coset_terms(f: SimpleFn, level: Level) -> list[tuple[ValueElem, Coset]]:
    out = []
    for coeff, support in f.terms:
        if len(support.bigs) != 1 or support.smalls:
            raise UnsupportedSupport("convolution needs single-coset supports")
        coset = support.bigs[0]
        if coset.level != level:
            raise UnsupportedSupport(
                f"support level {coset.level} differs from convolution level {level}"
            )
        if not in_K(coset.rep):
            raise UnsupportedSupport("convolution representatives must lie in K")
        out.append((coeff, coset))
    return out


def _entry_key(e: FieldElem, depth: int) -> int:
    """Pack an O_F element mod t1^depth: base-q digits of the t2-free part."""
    value = 0
    for (a, b), c in e.coeffs.items():
        if b == 0 and 0 <= a < depth:
            value += c * e.q**a
    return value


def _coset_key(rep: Mat2, depth: int) -> tuple[int, int, int, int]:
    return tuple(_entry_key(e, depth) for e in rep.entries)  # type: ignore[return-value]


def _key_matrix(key: tuple[int, int, int, int], q: int, depth: int) -> Mat2:
    def unpack(value: int) -> FieldElem:
        coeffs = {}
        for a in range(depth):
            digit = (value // q**a) % q
            if digit:
                coeffs[(a, 0)] = digit
        return FieldElem(q, coeffs)

    return Mat2(*(unpack(v) for v in key))


def _convolve_level_zero_j(
    f_terms: list[tuple[ValueElem, Coset]],
    h_terms: list[tuple[ValueElem, Coset]],
    level: Level,
    q: int,
) -> dict[tuple[int, int, int, int], ValueElem]:
    """Vectorised bilinear product on the finite quotient K / K_{i,0}.

    Entries mod t1^i are packed into base-64 digit integers; products of
    two packed polynomials then come out as plain integer products with no
    carries, which lets numpy multiply whole term-arrays at once.
    """
    depth = level.i
    base_bits = 6
    base = 1 << base_bits
    assert 2 * depth * (q - 1) ** 2 < base and q**depth <= base

    def pack64(e: FieldElem) -> int:
        value = 0
        for (a, b), c in e.coeffs.items():
            if b == 0 and 0 <= a < depth:
                value += c << (base_bits * a)
        return value

    h_packed = np.array(
        [[pack64(e) for e in coset.rep.entries] for _, coset in h_terms],
        dtype=np.int64,
    )
    h_coeffs = [c for c, _ in h_terms]
    uniform = all(c == h_coeffs[0] for c in h_coeffs) and all(
        c == f_terms[0][0] for c, _ in f_terms
    )

    digit_shifts = [base_bits * k for k in range(2 * depth - 1)]

    def normalise(arr: np.ndarray) -> np.ndarray:
        out = np.zeros_like(arr)
        for k, shift in enumerate(digit_shifts):
            digit = (arr >> shift) & (base - 1)
            if k < depth:
                out |= (digit % q) << shift
        return out

    def compact(arr: np.ndarray) -> np.ndarray:
        # base-64 digits to base-q packed values
        out = np.zeros_like(arr)
        for a in range(depth):
            digit = (arr >> (base_bits * a)) & (base - 1)
            out += digit * q**a
        return out

    ha, hb, hc, hd = (h_packed[:, k] for k in range(4))
    accum: dict[tuple[int, int, int, int], ValueElem] = {}
    combined_chunks = []
    coeff_pairs = []
    for coeff_f, coset in f_terms:
        fa, fb, fc, fd = (pack64(e) for e in coset.rep.entries)
        out_a = normalise(fa * ha + fb * hc)
        out_b = normalise(fa * hb + fb * hd)
        out_c = normalise(fc * ha + fd * hc)
        out_d = normalise(fc * hb + fd * hd)
        comb = (
            compact(out_a)
            + (compact(out_b) << 16)
            + (compact(out_c) << 32)
            + (compact(out_d) << 48)
        )
        if uniform:
            combined_chunks.append(comb)
        else:
            for t_idx, packed in enumerate(comb.tolist()):
                key = (
                    packed & 0xFFFF,
                    (packed >> 16) & 0xFFFF,
                    (packed >> 32) & 0xFFFF,
                    (packed >> 48) & 0xFFFF,
                )
                contrib = coeff_f * h_coeffs[t_idx]
                accum[key] = accum.get(key, ValueElem.zero()) + contrib
    if uniform:
        uniform_coeff = f_terms[0][0] * h_coeffs[0]
        allk = np.concatenate(combined_chunks)
        keys, counts = np.unique(allk, return_counts=True)
        for packed, count in zip(keys.tolist(), counts.tolist()):
            key = (
                packed & 0xFFFF,
                (packed >> 16) & 0xFFFF,
                (packed >> 32) & 0xFFFF,
                (packed >> 48) & 0xFFFF,
            )
            accum[key] = uniform_coeff.scale(count)
    return accum


def convolve_K(
    f: SimpleFn, h: SimpleFn, level: Level, *, budget: int = 10_000_000
) -> SimpleFn:
    """Convolution of K-supported simple functions at a single level.

    Both inputs must be combinations of indicators of cosets a K_{level}
    with a in K; the result is the bilinear extension of
    1_{aH} * 1_{bH} = mu(H) 1_{abH}.
    """
    f_terms = _single_coset_terms(f, level)
    h_terms = _single_coset_terms(h, level)
    if not f_terms or not h_terms:
        return SimpleFn.zero()
    pairs = len(f_terms) * len(h_terms)
    if pairs > budget:
        raise BudgetExceeded(f"convolution needs {pairs} products, budget is {budget}")
    q = f_terms[0][1].q
    measure = mu_distinguished(Coset(Mat2.identity(q), level))

    fast = (
        level.j == 0
        and 2 * level.i * (q - 1) ** 2 < 64
        and q**level.i <= 64
    )
    if fast:
        accum = _convolve_level_zero_j(f_terms, h_terms, level, q)
        terms = []
        for key, coeff in sorted(accum.items()):
            total = coeff * measure
            if total.is_zero:
                continue
            rep = _key_matrix(key, q, level.i)
            terms.append((total, DDSet((Coset(rep, level),), (), validate=False)))
        return SimpleFn(tuple(terms))

    # general path: explicit products, merged by coset equality
    merged: list[tuple[ValueElem, Coset]] = []
    for coeff_f, coset_f in f_terms:
        for coeff_h, coset_h in h_terms:
            product = Coset(coset_f.rep @ coset_h.rep, level)
            contrib = coeff_f * coeff_h * measure
            for idx, (coeff, existing) in enumerate(merged):
                if cosets_equal(existing, product):
                    merged[idx] = (coeff + contrib, existing)
                    break
            else:
                merged.append((contrib, product))
    return SimpleFn(
        tuple(
            (coeff, DDSet((coset,), (), validate=False))
            for coeff, coset in merged
            if not coeff.is_zero
        )
    )


# -- determinant-power series over circle families -------------------------


@dataclass(frozen=True)
class CircleFamily:
    """A family of determinant circles: disc, quarter_plane(m, n), or triangle.

    The circle of index (i, j) consists of the integral matrices whose
    determinant has valuation exactly (i, j); each has measure 1, and the
    determinant-module power |det|^s is constant q^(-is) X^(js) on it.
    """

    kind: str
    s: int
    m: int = 0
    n: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("disc", "quarter_plane", "triangle"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.s < 1:
            raise ValueError("the exponent s must be a positive integer")


def family_integral(fam: CircleFamily, q: int, x_trunc: int) -> ValueElem:
    """Integral of |det|^s over the family, truncated at X^x_trunc.

    The disc needs the full bilateral sum over i at every positive level
    and diverges; quarter planes and the triangle give geometric closed
    forms.
    """
    s = fam.s
    ratio = Fraction(1, q**s)
    if fam.kind == "disc":
        raise DivergentSeries(
            "the inner sum over all integers i of q^(-is) does not converge for any s"
        )
    if fam.kind == "quarter_plane":
        m, n = fam.m, fam.n
        total = ValueElem(({}), truncated_at=x_trunc)
        if n <= 0:
            # level-zero circles need i >= max(m, 0)
            first = max(m, 0)
            total = total + geometric_closed_form(0, ratio**first, ratio, 0)
        j_start = max(n, 1)
        tail_coeff = (ratio**m) / (1 - ratio)
        total = total + geometric_closed_form(j_start * s, tail_coeff, 1, s, x_trunc)
        return total.truncate(x_trunc)
    # triangle: sum over j >= 0 of (sum over i >= j of q^(-is)) X^(js)
    return geometric_closed_form(0, Fraction(1) / (1 - ratio), ratio, s, x_trunc)


def family_integral_bruteforce(
    fam: CircleFamily, q: int, x_trunc: int, *, i_cap: int = 64
) -> ValueElem:
    """Direct lattice sum with exact geometric tails; test oracle for the above."""
    s = fam.s
    ratio = Fraction(1, q**s)

    def row_sum(i_from: int) -> Fraction:
        # sum over i >= i_from of q^(-is), as partial sum plus exact tail
        total = Fraction(0)
        for i in range(i_from, i_from + i_cap):
            total += ratio ** (i - 0) if i >= 0 else Fraction(q**s) ** (-i)
        tail_start = i_from + i_cap
        total += ratio**tail_start / (1 - ratio)
        return total

    terms = {}
    if fam.kind == "quarter_plane":
        m, n = fam.m, fam.n
        if n <= 0:
            terms[0] = row_sum(max(m, 0))
        for j in range(max(n, 1), x_trunc // s + 1):
            terms[j * s] = row_sum(m)
    elif fam.kind == "triangle":
        for j in range(0, x_trunc // s + 1):
            terms[j * s] = row_sum(j)
    else:
        raise DivergentSeries("the disc has no brute-force value either")
    return ValueElem(terms, truncated_at=x_trunc)
