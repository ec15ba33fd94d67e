"""Exact integers/rationals and certified real enclosures.

Integers are plain Python ``int`` and rationals are ``fractions.Fraction``.
:class:`CertifiedReal` adds enclosures ``lo <= x <= hi`` with dyadic
endpoints for expressions built from rationals and ``p**(u/v)``.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from numbers import Rational
from typing import Callable, Union

__all__ = [
    "CertifiedReal",
    "RefinementCapError",
    "certified_compare",
    "certified_floor",
    "iroot",
    "parse_rational",
    "pow_rational",
    "precision_cap",
    "rational_str",
    "to_fraction",
]

START_PRECISION = 64
DEFAULT_PRECISION_CAP = 16384

Number = Union[int, Fraction, "CertifiedReal"]


class RefinementCapError(ArithmeticError):
    """Raised when an enclosure cannot decide a question below the precision cap."""


def precision_cap() -> int:
    """Refinement cap in bits; ``RAMLAB_PRECISION_CAP`` overrides the default."""
    raw = os.environ.get("RAMLAB_PRECISION_CAP")
    if not raw:
        return DEFAULT_PRECISION_CAP
    cap = int(raw)
    if cap < START_PRECISION:
        raise ValueError(f"RAMLAB_PRECISION_CAP must be >= {START_PRECISION}")
    return cap


def _precisions():
    cap = precision_cap()
    prec = START_PRECISION
    while prec <= cap:
        yield prec
        prec *= 2


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"not an exact rational: {x!r}")


def rational_str(x) -> str:
    """Encode an exact rational as ``"num/den"`` (or ``"num"`` for integers)."""
    x = to_fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def iroot(n: int, k: int) -> int:
    """Largest integer r with r**k <= n, for n >= 0 and k >= 1."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration from an overestimate.
    r = 1 << -(-n.bit_length() // k)
    while True:
        s = ((k - 1) * r + n // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def _floor_dyadic(x: Fraction, prec: int) -> Fraction:
    return Fraction(math.floor(x * (1 << prec)), 1 << prec)


def _ceil_dyadic(x: Fraction, prec: int) -> Fraction:
    return Fraction(math.ceil(x * (1 << prec)), 1 << prec)


def _magnitude_bits(lo: Fraction, hi: Fraction) -> int:
    bound = max(abs(lo), abs(hi))
    if bound < 1:
        return 0
    return math.ceil(bound).bit_length()


Enclosure = Callable[[int], "tuple[Fraction, Fraction]"]


class CertifiedReal:
    """A real number given by a refinable enclosure.

    ``interval(prec)`` returns dyadic bounds ``lo <= x <= hi`` whose width is
    roughly ``2**-prec``; higher ``prec`` never widens the enclosure.  When
    the value is known to be a rational, ``exact`` holds it and every
    enclosure is the single point.
    """

    __slots__ = ("_enclose", "exact", "_cache", "label")

    def __init__(self, enclose: Enclosure | None = None, exact=None, label: str = ""):
        if exact is None and enclose is None:
            raise ValueError("need an enclosure or an exact value")
        self.exact = None if exact is None else to_fraction(exact)
        self._enclose = enclose
        self._cache: dict[int, tuple[Fraction, Fraction]] = {}
        self.label = label

    @classmethod
    def from_rational(cls, x) -> "CertifiedReal":
        return cls(exact=to_fraction(x))

    @classmethod
    def coerce(cls, x) -> "CertifiedReal":
        if isinstance(x, CertifiedReal):
            return x
        return cls.from_rational(x)

    def interval(self, prec: int = START_PRECISION) -> tuple[Fraction, Fraction]:
        if self.exact is not None:
            return self.exact, self.exact
        hit = self._cache.get(prec)
        if hit is not None:
            return hit
        lo, hi = self._enclose(prec)
        lo, hi = Fraction(lo), Fraction(hi)
        # intersect with the best coarser enclosure so refinement is nested
        coarser = [q for q in self._cache if q < prec]
        if coarser:
            plo, phi = self._cache[max(coarser)]
            lo, hi = max(lo, plo), min(hi, phi)
        if lo > hi:
            raise AssertionError("enclosure is empty; arithmetic bug")
        self._cache[prec] = (lo, hi)
        return lo, hi

    def enclose(self, width) -> tuple[Fraction, Fraction]:
        """Refine until the enclosure is narrower than ``width``."""
        width = to_fraction(width)
        for prec in _precisions():
            lo, hi = self.interval(prec)
            if hi - lo < width:
                return lo, hi
        raise RefinementCapError(f"could not reach width {float(width):g} below the precision cap")

    def approx(self, prec: int = 128) -> float:
        lo, hi = self.interval(prec)
        return float((lo + hi) / 2)

    __float__ = approx

    def __repr__(self):
        if self.exact is not None:
            return f"CertifiedReal(exact={rational_str(self.exact)})"
        lo, hi = self.interval(START_PRECISION)
        tag = f" {self.label}" if self.label else ""
        return f"CertifiedReal({float(lo)!r}..{float(hi)!r}{tag})"

    # arithmetic -----------------------------------------------------------

    def _binary(self, other, op):
        other = CertifiedReal.coerce(other)
        if self.exact is not None and other.exact is not None:
            return CertifiedReal(exact=op(self.exact, other.exact))
        return CertifiedReal(_combine(self, other, op))

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return CertifiedReal.coerce(other) - self

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = CertifiedReal.coerce(other)
        if other.exact is not None and other.exact == 0:
            raise ZeroDivisionError("division by exact zero")
        if self.exact is not None and other.exact is not None:
            return CertifiedReal(exact=self.exact / other.exact)
        return CertifiedReal(_quotient(self, other))

    def __rtruediv__(self, other):
        return CertifiedReal.coerce(other) / self

    def __neg__(self):
        if self.exact is not None:
            return CertifiedReal(exact=-self.exact)
        src = self

        def enclose(prec):
            lo, hi = src.interval(prec)
            return -hi, -lo

        return CertifiedReal(enclose)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = CertifiedReal.from_rational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result


def _combine(x: CertifiedReal, y: CertifiedReal, op) -> Enclosure:
    def enclose(prec):
        # guard bits cover the magnitude blow-up of products
        mx = _magnitude_bits(*x.interval(START_PRECISION))
        my = _magnitude_bits(*y.interval(START_PRECISION))
        work = prec + mx + my + 4
        xlo, xhi = x.interval(work)
        ylo, yhi = y.interval(work)
        corners = [op(a, b) for a in (xlo, xhi) for b in (ylo, yhi)]
        return _floor_dyadic(min(corners), work), _ceil_dyadic(max(corners), work)

    return enclose


def _quotient(x: CertifiedReal, y: CertifiedReal) -> Enclosure:
    def enclose(prec):
        work = prec
        while True:
            ylo, yhi = y.interval(work)
            if ylo > 0 or yhi < 0:
                break
            work *= 2
            if work > 4 * precision_cap():
                raise RefinementCapError("denominator enclosure keeps straddling zero")
        small = min(abs(ylo), abs(yhi))
        # bits needed so x/y error stays near 2**-prec
        inv_bits = max(0, math.ceil(1 / small).bit_length())
        mx = _magnitude_bits(*x.interval(START_PRECISION))
        work = max(work, prec + 2 * inv_bits + mx + 4)
        xlo, xhi = x.interval(work)
        ylo, yhi = y.interval(work)
        corners = [a / b for a in (xlo, xhi) for b in (ylo, yhi)]
        return _floor_dyadic(min(corners), work), _ceil_dyadic(max(corners), work)

    return enclose


def pow_rational(p: int, exponent) -> CertifiedReal:
    """Enclosure of ``p ** exponent`` for an integer ``p >= 2`` and rational exponent."""
    if p < 2:
        raise ValueError("base must be >= 2")
    e = to_fraction(exponent)
    u, v = e.numerator, e.denominator
    if u < 0:
        return CertifiedReal.from_rational(1) / pow_rational(p, -e)
    n = p ** u
    r = iroot(n, v)
    if r ** v == n:
        return CertifiedReal(exact=r)

    def enclose(prec):
        root = iroot(n << (v * prec), v)
        return Fraction(root, 1 << prec), Fraction(root + 1, 1 << prec)

    return CertifiedReal(enclose, label=f"{p}^({rational_str(e)})")


def certified_floor(x) -> int:
    """Floor of ``x``, refining until the enclosure lies inside ``[f, f+1)``."""
    if not isinstance(x, CertifiedReal):
        return math.floor(to_fraction(x))
    if x.exact is not None:
        return math.floor(x.exact)
    for prec in _precisions():
        lo, hi = x.interval(prec)
        f = math.floor(lo)
        if math.floor(hi) == f:
            return f
    raise RefinementCapError(
        "floor undecided at the precision cap; the value may be an integer "
        "that is not known symbolically"
    )


def certified_ceil(x) -> int:
    return -certified_floor(-CertifiedReal.coerce(x))


def certified_compare(x, y) -> int:
    """Return -1, 0 or 1 as ``x <, =, > y``; equality only when both are exact."""
    x = CertifiedReal.coerce(x)
    y = CertifiedReal.coerce(y)
    if x.exact is not None and y.exact is not None:
        return (x.exact > y.exact) - (x.exact < y.exact)
    for prec in _precisions():
        xlo, xhi = x.interval(prec)
        ylo, yhi = y.interval(prec)
        if xhi < ylo:
            return -1
        if xlo > yhi:
            return 1
    raise RefinementCapError("values not separated at the precision cap; possibly equal")
