"""The finitely additive, translation-invariant measure on the set ring.

On a distinguished set g K_{i,j} the measure is

    mu(g K_{i,j}) = lambda * q^(-4i) * X^(4j),   lambda = q^3 / ((q^2-1)(q-1)),

the unique left-invariant normalisation with mu(GL_2(O_F)) = 1.  It
extends to dd-sets by (sum over big shells) - (sum over small shells) and
to ddd-sets by summing components; refinement invariance makes the result
independent of the presentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .sets import DDDSet, DDSet
from .matrices import Coset
from .values import GlobalParams, ValueElem


def lambda_constant(q: int) -> Fraction:
    return Fraction(q**3, (q * q - 1) * (q - 1))


@dataclass(frozen=True)
class MeasureContext:
    """Carries the parameters and the normalisation constant lambda."""

    params: GlobalParams = GlobalParams()
    lam: Fraction = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", lambda_constant(self.params.q))

    @property
    def q(self) -> int:
        return self.params.q

    def mu_distinguished(self, c: Optional[Coset]) -> ValueElem:
        if c is None:
            return ValueElem.zero()
        return mu_distinguished(c)

    def mu(self, a: DDDSet) -> ValueElem:
        return mu(a)


def mu_distinguished(c: Optional[Coset]) -> ValueElem:
    """Measure of a distinguished set; the empty set has measure 0."""
    if c is None:
        return ValueElem.zero()
    q = c.q
    coeff = lambda_constant(q) * Fraction(q) ** (-4 * c.level.i)
    return ValueElem.monomial(4 * c.level.j, coeff)


def mu_dd(comp: DDSet) -> ValueElem:
    total = ValueElem.zero()
    for b in comp.bigs:
        total = total + mu_distinguished(b)
    for s in comp.smalls:
        total = total - mu_distinguished(s)
    return total


def mu(a: DDDSet) -> ValueElem:
    total = ValueElem.zero()
    for comp in a.components:
        total = total + mu_dd(comp)
    return total
