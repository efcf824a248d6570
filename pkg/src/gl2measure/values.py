"""Global parameters and exact arithmetic in the value ring.

All measures, modules, and integrals in this library take values in the
two-dimensional archimedean local field R((X)), restricted here to finite
Laurent polynomials in the indeterminate X with rational coefficients.
X behaves like an infinitesimal positive element: dominance between values
is graded by the X-exponent, smallest exponent first.

Infinite series enter only through :func:`geometric_closed_form`, which
either returns an exact rational closed form (real geometric series) or a
truncated polynomial carrying an explicit truncation marker (X-graded
series).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

from .errors import DivergentSeries, ZeroValue

RationalLike = Union[int, Fraction]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class GlobalParams:
    """Global configuration: residue size, precision windows, budgets.

    ``x_trunc`` means series results are reported modulo X^(x_trunc+1).
    ``coset_budget`` caps every coset enumeration in the set algebra.
    """

    q: int = 2
    t1_window: tuple[int, int] = (-16, 16)
    t2_window: tuple[int, int] = (-8, 8)
    x_trunc: int = 8
    coset_budget: int = 100_000

    def __post_init__(self) -> None:
        if not is_prime(self.q):
            raise ValueError(f"q must be prime, got {self.q}")
        if self.t1_window[0] >= self.t1_window[1]:
            raise ValueError(f"t1_window must satisfy lo < hi, got {self.t1_window}")
        if self.t2_window[0] >= self.t2_window[1]:
            raise ValueError(f"t2_window must satisfy lo < hi, got {self.t2_window}")
        if self.x_trunc < 0:
            raise ValueError("x_trunc must be >= 0")
        if self.coset_budget < 1:
            raise ValueError("coset_budget must be >= 1")


DEFAULT_PARAMS = GlobalParams()


class ValueElem:
    """A finite Laurent polynomial in X over the rationals.

    Immutable.  ``truncated_at`` is ``None`` for exact elements; when
    present, the element stands for its class modulo X^(truncated_at+1)
    and no exponent above the marker is stored.
    """

    __slots__ = ("_terms", "truncated_at")

    def __init__(
        self,
        terms: Optional[Mapping[int, RationalLike]] = None,
        truncated_at: Optional[int] = None,
    ) -> None:
        cleaned: dict[int, Fraction] = {}
        for exp, coeff in (terms or {}).items():
            if truncated_at is not None and exp > truncated_at:
                continue
            frac = Fraction(coeff)
            if frac:
                cleaned[int(exp)] = frac
        object.__setattr__(self, "_terms", cleaned)
        object.__setattr__(self, "truncated_at", truncated_at)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("ValueElem is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "ValueElem":
        return cls()

    @classmethod
    def one(cls) -> "ValueElem":
        return cls({0: 1})

    @classmethod
    def monomial(cls, exponent: int, coeff: RationalLike = 1) -> "ValueElem":
        return cls({exponent: coeff})

    @classmethod
    def from_rational(cls, coeff: RationalLike) -> "ValueElem":
        return cls({0: coeff})

    # -- inspection ---------------------------------------------------

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def min_exponent(self) -> int:
        if not self._terms:
            raise ZeroValue("the zero element has no dominant exponent")
        return min(self._terms)

    def coefficient(self, exponent: int) -> Fraction:
        return self._terms.get(exponent, Fraction(0))

    def as_rational(self) -> Fraction:
        """Return the value as a rational; requires no X-dependence."""
        if any(e != 0 for e in self._terms):
            raise ValueError(f"{self!r} is not a rational constant")
        return self._terms.get(0, Fraction(0))

    # -- arithmetic ---------------------------------------------------

    @staticmethod
    def _combine_trunc(a: Optional[int], b: Optional[int]) -> Optional[int]:
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def _coerce(self, other) -> "ValueElem":
        if isinstance(other, ValueElem):
            return other
        if isinstance(other, (int, Fraction)):
            return ValueElem.from_rational(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "ValueElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        merged = dict(self._terms)
        for exp, coeff in other._terms.items():
            merged[exp] = merged.get(exp, Fraction(0)) + coeff
        return ValueElem(merged, self._combine_trunc(self.truncated_at, other.truncated_at))

    __radd__ = __add__

    def __neg__(self) -> "ValueElem":
        return ValueElem({e: -c for e, c in self._terms.items()}, self.truncated_at)

    def __sub__(self, other) -> "ValueElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "ValueElem":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ValueElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        product: dict[int, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exp = e1 + e2
                product[exp] = product.get(exp, Fraction(0)) + c1 * c2
        return ValueElem(product, self._combine_trunc(self.truncated_at, other.truncated_at))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ValueElem":
        if n < 0:
            raise ValueError("negative powers are only defined for monomials; use invert_monomial")
        result = ValueElem.one()
        for _ in range(n):
            result = result * self
        return result

    def scale(self, coeff: RationalLike) -> "ValueElem":
        frac = Fraction(coeff)
        return ValueElem({e: c * frac for e, c in self._terms.items()}, self.truncated_at)

    def invert_monomial(self) -> "ValueElem":
        """Invert a single-term element; raises for anything else."""
        if len(self._terms) != 1:
            raise ValueError(f"cannot invert non-monomial value {self!r}")
        (exp, coeff), = self._terms.items()
        return ValueElem({-exp: Fraction(1) / coeff})

    def truncate(self, at: int) -> "ValueElem":
        return ValueElem(self._terms, self._combine_trunc(self.truncated_at, at))

    # -- comparison / display ------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ValueElem.from_rational(other)
        if not isinstance(other, ValueElem):
            return NotImplemented
        return self._terms == other._terms and self.truncated_at == other.truncated_at

    def __hash__(self) -> int:
        return hash((frozenset(self._terms.items()), self.truncated_at))

    def render(self) -> str:
        """Canonical text form: ascending X-exponents, lowest-term rationals."""
        parts = []
        for exp in sorted(self._terms):
            coeff = self._terms[exp]
            if exp == 0:
                parts.append(str(coeff))
            elif exp == 1:
                parts.append(f"{coeff}*X")
            else:
                parts.append(f"{coeff}*X^{exp}")
        if self.truncated_at is not None:
            parts.append(f"O(X^{self.truncated_at + 1})")
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return self.render()


def dominant_term(a: ValueElem) -> ValueElem:
    """The single term of smallest X-exponent; the infinitesimally leading part."""
    if a.is_zero:
        raise ZeroValue("the zero element has no dominant term")
    exp = a.min_exponent()
    return ValueElem.monomial(exp, a.coefficient(exp))


def geometric_closed_form(
    first_exponent_x: int,
    coeff: RationalLike,
    ratio_coeff: RationalLike,
    ratio_step_x: int,
    x_trunc: Optional[int] = None,
) -> ValueElem:
    """Evaluate sum_{k>=0} coeff * ratio_coeff^k * X^(first + k*step).

    With ``ratio_step_x == 0`` this is a real geometric series: it needs
    |ratio_coeff| < 1 and returns the exact closed form coeff/(1-ratio).
    With ``ratio_step_x > 0`` the series converges in the X-grading for any
    ratio and the result is truncated at X^x_trunc with the marker set.
    """
    coeff = Fraction(coeff)
    ratio = Fraction(ratio_coeff)
    if ratio_step_x < 0:
        raise DivergentSeries("a downward-graded series has no value in the value ring")
    if ratio_step_x == 0:
        if abs(ratio) >= 1:
            raise DivergentSeries(f"real geometric series with ratio {ratio} does not converge")
        return ValueElem.monomial(first_exponent_x, coeff / (1 - ratio))
    if x_trunc is None:
        raise ValueError("x_trunc is required when ratio_step_x > 0")
    terms: dict[int, Fraction] = {}
    k = 0
    power = Fraction(1)
    while first_exponent_x + k * ratio_step_x <= x_trunc:
        exp = first_exponent_x + k * ratio_step_x
        terms[exp] = terms.get(exp, Fraction(0)) + coeff * power
        power *= ratio
        k += 1
    return ValueElem(terms, truncated_at=x_trunc)
