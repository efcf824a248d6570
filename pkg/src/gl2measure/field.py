"""Exact truncated arithmetic in the two-dimensional local field.

The field is modelled concretely as F = F_q((t1))((t2)), equal
characteristic.  Elements are finite double-Laurent polynomials over the
prime field together with an optional rectangular precision window:

* ``window is None`` means the element is exact — its support is exactly
  the stored monomials.
* Otherwise the stored coefficients are exact inside the window and the
  element may carry an unknown tail whose monomials (a, b) satisfy
  ``a >= window.t1_lo`` and ``b >= window.t2_lo`` but lie outside the
  rectangle.  The window's lower corner therefore doubles as a support
  bound, which is what makes valuation and ideal-membership queries
  certifiable.

Operations shrink windows conservatively: a reported coefficient is
always fully determined by in-window input coefficients.  Queries that
cannot be certified raise :class:`PrecisionExhausted` rather than guess.

The rank-two valuation v: F^x -> Z x Z is ordered lexicographically from
the right, so (1, 0) < (0, 1).  O_F denotes the rank-two integers
{v >= (0, 0)}; t1 generates its maximal ideal and t2 the maximal ideal of
the rank-one integers.
"""

from __future__ import annotations

from typing import Iterable, Mapping, NamedTuple, Optional

from .errors import PrecisionExhausted, ZeroValue
from .values import ValueElem

from fractions import Fraction

# exponent sentinel standing in for "unbounded above"
_INF = 10**9

_SERIES_MAX_ITER = 10_000


class Level(NamedTuple):
    """A value-group element (i, j), ordered lexicographically from the right."""

    i: int
    j: int

    def __lt__(self, other) -> bool:  # type: ignore[override]
        return (self.j, self.i) < (other[1], other[0])

    def __le__(self, other) -> bool:  # type: ignore[override]
        return (self.j, self.i) <= (other[1], other[0])

    def __gt__(self, other) -> bool:  # type: ignore[override]
        return (self.j, self.i) > (other[1], other[0])

    def __ge__(self, other) -> bool:  # type: ignore[override]
        return (self.j, self.i) >= (other[1], other[0])

    def add(self, other: "Level") -> "Level":
        return Level(self.i + other[0], self.j + other[1])

    def sub(self, other: "Level") -> "Level":
        return Level(self.i - other[0], self.j - other[1])

    def __repr__(self) -> str:
        return f"({self.i},{self.j})"


LEVEL_ZERO = Level(0, 0)


class Window(NamedTuple):
    """Rectangular precision window [t1_lo, t1_hi] x [t2_lo, t2_hi]."""

    t1_lo: int
    t1_hi: int
    t2_lo: int
    t2_hi: int

    @property
    def is_empty(self) -> bool:
        return self.t1_lo > self.t1_hi or self.t2_lo > self.t2_hi

    def contains(self, a: int, b: int) -> bool:
        return self.t1_lo <= a <= self.t1_hi and self.t2_lo <= b <= self.t2_hi


DEFAULT_WINDOW = Window(-16, 16, -8, 8)


def _cap(x: int) -> int:
    return _INF if x >= _INF // 2 else x


class FieldElem:
    """An element of F_q((t1))((t2)) with optional precision window."""

    __slots__ = ("q", "coeffs", "window", "_hash")

    def __init__(
        self,
        q: int,
        coeffs: Optional[Mapping[tuple[int, int], int]] = None,
        window: Optional[Window] = None,
    ) -> None:
        if q < 2:
            raise ValueError("q must be at least 2")
        if window is not None and window.is_empty:
            raise PrecisionExhausted("empty precision window")
        cleaned: dict[tuple[int, int], int] = {}
        for (a, b), c in (coeffs or {}).items():
            c %= q
            if c == 0:
                continue
            if window is not None and not window.contains(a, b):
                continue
            cleaned[(int(a), int(b))] = c
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "coeffs", cleaned)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("FieldElem is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def _make_exact(q: int, coeffs: dict[tuple[int, int], int]) -> "FieldElem":
        """Fast path for internal results: residues already reduced mod q."""
        out = FieldElem.__new__(FieldElem)
        object.__setattr__(out, "q", q)
        object.__setattr__(out, "coeffs", {k: c for k, c in coeffs.items() if c})
        object.__setattr__(out, "window", None)
        object.__setattr__(out, "_hash", None)
        return out

    @classmethod
    def zero(cls, q: int) -> "FieldElem":
        return cls(q, {})

    @classmethod
    def one(cls, q: int) -> "FieldElem":
        return cls(q, {(0, 0): 1})

    @classmethod
    def monomial(cls, q: int, a: int, b: int, coeff: int = 1) -> "FieldElem":
        return cls(q, {(a, b): coeff})

    @classmethod
    def t1(cls, q: int) -> "FieldElem":
        return cls.monomial(q, 1, 0)

    @classmethod
    def t2(cls, q: int) -> "FieldElem":
        return cls.monomial(q, 0, 1)

    @classmethod
    def constant(cls, q: int, c: int) -> "FieldElem":
        return cls(q, {(0, 0): c})

    # -- inspection ---------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.window is None

    @property
    def is_zero(self) -> bool:
        """True only for the exact zero; an empty inexact element is undecided."""
        return self.window is None and not self.coeffs

    def _bounds(self) -> tuple[int, int, int, int]:
        """Effective (t1_lo, t1_hi, t2_lo, t2_hi); exact support is its own bound."""
        if self.window is not None:
            return self.window
        if not self.coeffs:
            return (_INF, _INF, _INF, _INF)
        return (
            min(a for a, _ in self.coeffs),
            _INF,
            min(b for _, b in self.coeffs),
            _INF,
        )

    def _require_same_field(self, other: "FieldElem") -> None:
        if self.q != other.q:
            raise ValueError(f"mixed residue sizes {self.q} and {other.q}")

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "FieldElem") -> "FieldElem":
        return self._addlike(other, 1)

    def __sub__(self, other: "FieldElem") -> "FieldElem":
        return self._addlike(other, -1)

    def _addlike(self, other: "FieldElem", sign: int) -> "FieldElem":
        self._require_same_field(other)
        merged: dict[tuple[int, int], int] = dict(self.coeffs)
        for key, c in other.coeffs.items():
            merged[key] = (merged.get(key, 0) + sign * c) % self.q
        if self.is_exact and other.is_exact:
            return FieldElem._make_exact(self.q, merged)
        lx1, hx1, lx2, hx2 = self._bounds()
        ly1, hy1, ly2, hy2 = other._bounds()
        window = Window(min(lx1, ly1), min(hx1, hy1), min(lx2, ly2), min(hx2, hy2))
        if window.is_empty:
            raise PrecisionExhausted("addition produced an empty window")
        return FieldElem(self.q, merged, window)

    def __neg__(self) -> "FieldElem":
        if self.window is None:
            return FieldElem._make_exact(
                self.q, {k: (-c) % self.q for k, c in self.coeffs.items()}
            )
        return FieldElem(self.q, {k: -c for k, c in self.coeffs.items()}, self.window)

    def __mul__(self, other: "FieldElem") -> "FieldElem":
        self._require_same_field(other)
        if self.is_zero or other.is_zero:
            return FieldElem.zero(self.q)
        product: dict[tuple[int, int], int] = {}
        for (a1, b1), c1 in self.coeffs.items():
            for (a2, b2), c2 in other.coeffs.items():
                key = (a1 + a2, b1 + b2)
                product[key] = (product.get(key, 0) + c1 * c2) % self.q
        if self.is_exact and other.is_exact:
            return FieldElem._make_exact(self.q, product)
        lx1, hx1, lx2, hx2 = self._bounds()
        ly1, hy1, ly2, hy2 = other._bounds()
        window = Window(
            lx1 + ly1,
            min(_cap(hx1 + ly1), _cap(hy1 + lx1)),
            lx2 + ly2,
            min(_cap(hx2 + ly2), _cap(hy2 + lx2)),
        )
        if window.is_empty:
            raise PrecisionExhausted("multiplication produced an empty window")
        return FieldElem(self.q, product, window)

    def __pow__(self, n: int) -> "FieldElem":
        if n < 0:
            return field_inv(self.__pow__(-n))
        result = FieldElem.one(self.q)
        for _ in range(n):
            result = result * self
        return result

    def __truediv__(self, other: "FieldElem") -> "FieldElem":
        return self * field_inv(other)

    # -- comparison / display -----------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldElem):
            return NotImplemented
        return self.q == other.q and self.coeffs == other.coeffs and self.window == other.window

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(
                self, "_hash", hash((self.q, frozenset(self.coeffs.items()), self.window))
            )
        return self._hash

    def __repr__(self) -> str:
        if not self.coeffs:
            body = "0"
        else:
            body = " + ".join(
                f"{c}*t1^{a}*t2^{b}"
                for (a, b), c in sorted(self.coeffs.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            )
        if self.window is not None:
            body += f" [window t1:{self.window.t1_lo}..{self.window.t1_hi} t2:{self.window.t2_lo}..{self.window.t2_hi}]"
        return body


def valuation(x: FieldElem) -> Level:
    """The rank-two valuation of x, certified within x's window."""
    if not x.coeffs:
        if x.is_exact:
            raise ZeroValue("the zero element has no valuation")
        raise PrecisionExhausted("no known monomials; valuation undetermined")
    lead = min(x.coeffs, key=lambda ab: (ab[1], ab[0]))
    level = Level(lead[0], lead[1])
    if x.window is not None and level.j != x.window.t2_lo:
        # an unknown monomial at a lower t2-level could still lead
        raise PrecisionExhausted(f"leading monomial {level} not certified by window {x.window}")
    return level


def in_ideal(x: FieldElem, level: Level) -> bool:
    """Whether x lies in t1^i t2^j O_F, i.e. x == 0 or v(x) >= (i, j)."""
    i, j = level
    for (a, b) in x.coeffs:
        if (b, a) < (j, i):
            return False
    if x.is_exact:
        return True
    window = x.window
    assert window is not None
    # unknown monomials live in the quadrant above the window corner but
    # outside the rectangle; the decision region must avoid them
    if j < window.t2_lo:
        return True
    if j == window.t2_lo and i <= window.t1_hi + 1:
        return True
    raise PrecisionExhausted(
        f"membership at level {level} not certified by window {window}"
    )


def module_of(x: FieldElem) -> ValueElem:
    """The multiplicative module |x|_F = q^(-i) X^j with (i, j) = v(x); |0|_F = 0."""
    if x.is_zero:
        return ValueElem.zero()
    level = valuation(x)
    return ValueElem.monomial(level.j, Fraction(x.q) ** (-level.i))


def field_inv(x: FieldElem, window: Optional[Window] = None) -> FieldElem:
    """Multiplicative inverse, as a geometric series truncated to ``window``.

    Writes x = t1^a t2^b * u * (1 + m) with u a residue unit and
    v(m) > (0, 0), and sums the alternating powers of m until they leave
    the requested rectangle.  Only exact inputs are supported; inverting
    an element that already carries an unknown tail cannot be certified
    on any useful window.
    """
    if not x.is_exact:
        raise PrecisionExhausted("inverse of a non-exact element is not certifiable")
    if x.is_zero:
        raise ZeroValue("zero is not invertible")
    q = x.q
    v = valuation(x)
    unit = x.coeffs[(v.i, v.j)]
    unit_inv = pow(unit, -1, q)
    # y = unit_inv * t^(-v) * x = 1 + m exactly
    y = FieldElem.monomial(q, -v.i, -v.j, unit_inv) * x
    m = {key: c for key, c in y.coeffs.items() if key != (0, 0)}
    if not m:
        return FieldElem.monomial(q, -v.i, -v.j, unit_inv)
    target = window or DEFAULT_WINDOW
    h2 = target.t2_hi + v.j
    h1 = target.t1_hi + v.i
    if h2 < 0:
        raise PrecisionExhausted("target window cannot hold the inverse's leading level")
    # most negative t1-shift a single t2-climbing factor of m can apply
    neg_shift = min((a for (a, b) in m if b >= 1), default=0)
    neg_shift = min(neg_shift, 0)
    slo1 = min(0, h2 * neg_shift)

    def mul_clip(d1: dict, d2: dict) -> dict:
        out: dict[tuple[int, int], int] = {}
        for (a1, b1), c1 in d1.items():
            for (a2, b2), c2 in d2.items():
                if b1 + b2 > h2:
                    continue
                key = (a1 + a2, b1 + b2)
                out[key] = (out.get(key, 0) + c1 * c2) % q
        return {k: c for k, c in out.items() if c}

    neg_m = {key: (-c) % q for key, c in m.items()}
    series: dict[tuple[int, int], int] = {(0, 0): 1}
    power = dict(neg_m)
    for _ in range(_SERIES_MAX_ITER):
        if not power:
            break
        for key, c in power.items():
            series[key] = (series.get(key, 0) + c) % q
        # stop once no future product can re-enter the rectangle
        if all(a > h1 + (h2 - b) * (-neg_shift) for (a, b) in power):
            break
        power = mul_clip(power, neg_m)
    else:  # pragma: no cover - defensive
        raise PrecisionExhausted("inverse series did not stabilise")

    result = {
        (a - v.i, b - v.j): (c * unit_inv) % q
        for (a, b), c in series.items()
        if c and a <= h1
    }
    out_window = Window(slo1 - v.i, target.t1_hi, -v.j, target.t2_hi)
    if out_window.is_empty:
        raise PrecisionExhausted("inverse window is empty")
    return FieldElem(q, result, out_window)
