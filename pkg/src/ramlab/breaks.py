"""Ramification break sequences of Z_p-actions and Hasse-Herbrand functions.

Upper breaks ``a`` and lower breaks ``b`` of a rank-one action are exact
integers related by b_0 = a_0 and b_n = b_{n-1} + p^n (a_n - a_{n-1}).
A lower break b_n is the ramification number i_n = i(sigma^(p^n)) of a
generator sigma.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exactmath import parse_rational, rational_str, to_fraction

__all__ = [
    "DivisibilityError",
    "GxReport",
    "HypothesisFailed",
    "IndexFunction",
    "LowerBreaks",
    "NuSequence",
    "OutOfRange",
    "SlopeReport",
    "UpperBreaks",
    "Validation",
    "breaks_from_json",
    "breaks_to_json",
    "ef_slope",
    "irat_check",
    "lemma_gx_check",
    "lower_to_upper",
    "nu_to_lower",
    "nu_to_upper",
    "phi_eval",
    "psi_eval",
    "synthetic_char0_index",
    "upper_to_lower",
    "validate_upper",
]


class DivisibilityError(ValueError):
    def __init__(self, n: int, p: int, diff: int):
        self.n = n
        super().__init__(f"p^{n} = {p ** n} does not divide b_{n} - b_{n-1} = {diff}")


class OutOfRange(ValueError):
    pass


class HypothesisFailed(ValueError):
    pass


def _check_increasing(values, name):
    if not values:
        raise ValueError(f"{name} must be non-empty")
    if values[0] < 1:
        raise ValueError(f"{name}_0 must be >= 1")
    for n in range(1, len(values)):
        if values[n] <= values[n - 1]:
            raise ValueError(f"{name} must be strictly increasing (fails at index {n})")


@dataclass(frozen=True)
class UpperBreaks:
    p: int
    a: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if self.p < 2:
            raise ValueError("p must be >= 2")
        _check_increasing(self.a, "a")

    def __len__(self):
        return len(self.a)

    def index_function(self) -> "IndexFunction":
        """x -> |G : G^x| for the Z_p-action with these upper breaks."""
        return IndexFunction([(Fraction(x), self.p ** n) for n, x in enumerate(self.a)])


@dataclass(frozen=True)
class LowerBreaks:
    """Lower breaks b_0 < b_1 < ...; ``strict`` enforces b_n = b_{n-1} mod p^n."""

    p: int
    b: tuple
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if self.p < 2:
            raise ValueError("p must be >= 2")
        _check_increasing(self.b, "b")
        if self.strict:
            for n in range(1, len(self.b)):
                diff = self.b[n] - self.b[n - 1]
                if diff % self.p ** n:
                    raise DivisibilityError(n, self.p, diff)

    def __len__(self):
        return len(self.b)

    def lower_index_function(self) -> "IndexFunction":
        """x -> |G : G_x| for the Z_p-action with these lower breaks."""
        return IndexFunction([(Fraction(x), self.p ** n) for n, x in enumerate(self.b)])


@dataclass(frozen=True)
class NuSequence:
    """Increments nu_n with a_n = p a_{n-1} + nu_n; p does not divide nu_0, nu_n in (N \\ pN) u {0}."""

    p: int
    nu: tuple

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(int(x) for x in self.nu))
        if not self.nu:
            raise ValueError("nu must be non-empty")
        if self.nu[0] < 1 or self.nu[0] % self.p == 0:
            raise ValueError("nu_0 must be a positive integer prime to p")
        for n, v in enumerate(self.nu[1:], start=1):
            if v < 0 or (v and v % self.p == 0):
                raise ValueError(f"nu_{n} = {v} must be 0 or a positive integer prime to p")

    def __len__(self):
        return len(self.nu)


class IndexFunction:
    """Left-continuous step function: value ``index_i`` on (x_{i-1}, x_i], with x_{-1} = 0.

    The value on [0, x_0] is ``index_0``.
    """

    __slots__ = ("steps",)

    def __init__(self, steps: Sequence):
        steps = tuple((to_fraction(x), int(v)) for x, v in steps)
        if not steps:
            raise ValueError("index function needs at least one step")
        if steps[0][0] < 0:
            raise ValueError("thresholds must be >= 0")
        if steps[0][1] < 1:
            raise ValueError("first index must be >= 1")
        for i in range(1, len(steps)):
            if steps[i][0] <= steps[i - 1][0]:
                raise ValueError("thresholds must be strictly increasing")
            if steps[i][1] < steps[i - 1][1]:
                raise ValueError("index values must be weakly increasing")
        self.steps = steps

    def __repr__(self):
        return f"IndexFunction({[(rational_str(x), v) for x, v in self.steps]})"

    def __eq__(self, other):
        return isinstance(other, IndexFunction) and self.steps == other.steps

    @property
    def last_threshold(self) -> Fraction:
        return self.steps[-1][0]

    def value(self, x, extrapolate: bool = False) -> int:
        x = to_fraction(x)
        if x < 0:
            raise OutOfRange("x must be >= 0")
        for threshold, v in self.steps:
            if x <= threshold:
                return v
        if extrapolate:
            return self.steps[-1][1]
        raise OutOfRange(f"x = {rational_str(x)} beyond the last threshold {rational_str(self.last_threshold)}")

    __call__ = value

    def integrate(self, x, weight=lambda v: Fraction(v), extrapolate: bool = False) -> Fraction:
        """Exact integral of weight(index(t)) dt over [0, x]."""
        x = to_fraction(x)
        if x < 0:
            raise OutOfRange("x must be >= 0")
        total = Fraction(0)
        prev = Fraction(0)
        for threshold, v in self.steps:
            if x <= threshold:
                return total + (x - prev) * weight(v)
            total += (threshold - prev) * weight(v)
            prev = threshold
        if not extrapolate:
            raise OutOfRange(f"x = {rational_str(x)} beyond the last threshold {rational_str(prev)}")
        return total + (x - prev) * weight(self.steps[-1][1])


@dataclass(frozen=True)
class Validation:
    valid: bool
    index: int | None = None
    condition: str | None = None
    message: str = "valid"

    def __bool__(self):
        return self.valid

    def to_json(self):
        return {"valid": self.valid, "index": self.index, "condition": self.condition, "message": self.message}


def validate_upper(s: UpperBreaks) -> Validation:
    """Criterion for upper breaks of a Z_p-extension in characteristic p.

    p does not divide a_0; a_{n+1} >= p a_n; p does not divide a_{n+1} when a_{n+1} > p a_n.
    """
    p, a = s.p, s.a
    if a[0] % p == 0:
        return Validation(False, 0, "coprime-start", "p | a_0")
    for n in range(len(a) - 1):
        nxt = a[n + 1]
        if nxt < p * a[n]:
            return Validation(False, n + 1, "growth", f"a_{n+1} < p*a_{n} ({nxt} < {p * a[n]})")
        if nxt > p * a[n] and nxt % p == 0:
            return Validation(False, n + 1, "coprime-jump", f"p | a_{n+1} while a_{n+1} > p*a_{n}")
    return Validation(True)


def upper_to_lower(s: UpperBreaks, strict: bool = False) -> LowerBreaks:
    """b_0 = a_0, b_n = b_{n-1} + p^n (a_n - a_{n-1}).

    Invalid upper sequences are converted anyway with a warning unless ``strict``.
    """
    check = validate_upper(s)
    if not check:
        if strict:
            raise ValueError(check.message)
        warnings.warn(f"converting invalid upper breaks: {check.message}", stacklevel=2)
    p = s.p
    b = [s.a[0]]
    for n in range(1, len(s.a)):
        b.append(b[-1] + p ** n * (s.a[n] - s.a[n - 1]))
    return LowerBreaks(p, b)


def lower_to_upper(s) -> UpperBreaks:
    """Inverse of :func:`upper_to_lower`; raises DivisibilityError when some p^n fails to divide."""
    if isinstance(s, LowerBreaks):
        p, b = s.p, s.b
    else:
        p, b = s
    a = [b[0]]
    for n in range(1, len(b)):
        diff = b[n] - b[n - 1]
        q, r = divmod(diff, p ** n)
        if r:
            raise DivisibilityError(n, p, diff)
        a.append(a[-1] + q)
    return UpperBreaks(p, a)


def phi_eval(s: LowerBreaks, x, extrapolate: bool = False) -> Fraction:
    """phi(x) = int_0^x dt / |G : G_t|, exactly."""
    return s.lower_index_function().integrate(x, weight=lambda v: Fraction(1, v), extrapolate=extrapolate)


def psi_eval(s, x, extrapolate: bool = False) -> Fraction:
    """psi(x) = int_0^x |G : G^t| dt for UpperBreaks or an IndexFunction."""
    f = s.index_function() if isinstance(s, UpperBreaks) else s
    return f.integrate(x, extrapolate=extrapolate)


def nu_to_upper(s: NuSequence) -> UpperBreaks:
    a = [s.nu[0]]
    for v in s.nu[1:]:
        a.append(s.p * a[-1] + v)
    return UpperBreaks(s.p, a)


def _nu_closed_form(p: int, nu: Sequence[int], n: int) -> int:
    num = sum((p ** (2 * n + 1 - j) + p ** j) * nu[j] for j in range(n + 1))
    q, r = divmod(num, p + 1)
    if r:
        raise AssertionError("closed form for i_n is not integral")
    return q


def nu_to_lower(s: NuSequence) -> LowerBreaks:
    """Lower breaks from the closed form, cross-checked against the recurrence."""
    closed = [_nu_closed_form(s.p, s.nu, n) for n in range(len(s.nu))]
    chained = upper_to_lower(nu_to_upper(s), strict=True).b
    if tuple(closed) != tuple(chained):
        n = next(k for k in range(len(closed)) if closed[k] != chained[k])
        raise AssertionError(f"closed form and recurrence disagree at n={n}: {closed[n]} != {chained[n]}")
    return LowerBreaks(s.p, closed)


def irat_check(s: NuSequence) -> list[int]:
    """Residuals i_{n+1} - p^2 i_n - (p^{n+1} nu_{n+1} - (p-1) sum_{j<=n} p^j nu_j); all zero."""
    p, nu = s.p, s.nu
    b = nu_to_lower(s).b
    out = []
    for n in range(len(nu) - 1):
        tail = p ** (n + 1) * nu[n + 1] - (p - 1) * sum(p ** j * nu[j] for j in range(n + 1))
        out.append(b[n + 1] - p * p * b[n] - tail)
    return out


@dataclass
class SlopeReport:
    samples: list
    ratios: list
    slope: float
    intercept: float
    tail_start: int

    def to_json(self):
        return {
            "samples": [rational_str(x) for x in self.samples],
            "ratios": self.ratios,
            "slope": self.slope,
            "intercept": self.intercept,
            "tail_start": self.tail_start,
        }


def ef_slope(f: IndexFunction, x_samples: Sequence, p: int, extrapolate: bool = False) -> SlopeReport:
    """log_p|G:G^x| / x at the samples, plus a least-squares slope of log_p|G:G^x| on the tail.

    The tail is the last ceil(len/2) samples.  The slope estimates
    lim log_p|G:G^x| / x = d / e_F from finite data; it is not the limit.
    """
    xs = [to_fraction(x) for x in x_samples]
    if len(xs) < 2:
        raise ValueError("need at least two samples")
    if any(xs[i] >= xs[i + 1] for i in range(len(xs) - 1)) or xs[0] <= 0:
        raise ValueError("samples must be positive and increasing")
    logs = [math.log(f.value(x, extrapolate=extrapolate), p) for x in xs]
    ratios = [lg / float(x) for lg, x in zip(logs, xs)]
    start = len(xs) - (len(xs) + 1) // 2
    tx = [float(x) for x in xs[start:]]
    ty = logs[start:]
    if len(tx) < 2:
        raise ValueError("tail too short for a slope fit")
    mx = sum(tx) / len(tx)
    my = sum(ty) / len(ty)
    sxx = sum((x - mx) ** 2 for x in tx)
    sxy = sum((x - mx) * (y - my) for x, y in zip(tx, ty))
    slope = sxy / sxx
    return SlopeReport(xs, ratios, slope, my - slope * mx, start)


def synthetic_char0_index(p: int, d: int, e_F: int, x_max) -> IndexFunction:
    """|G : G^x| = p^(d * ceil(x / e_F)) up to x_max, the shape forced for char-0 base fields."""
    steps = [(Fraction(0), 1)]
    n = 1
    # stop at the first threshold at or beyond x_max so the whole range is covered
    while n == 1 or steps[-1][0] < to_fraction(x_max):
        steps.append((Fraction(n * e_F), p ** (d * n)))
        n += 1
    return IndexFunction(steps)


@dataclass
class GxReport:
    valid: bool
    checked: list
    violations: list
    skipped: list

    def to_json(self):
        return {
            "valid": self.valid,
            "checked": [rational_str(x) for x in self.checked],
            "violations": [rational_str(x) for x in self.violations],
            "skipped": [rational_str(x) for x in self.skipped],
        }


def lemma_gx_check(i_table: Mapping[str, LowerBreaks], C, lam, d: int, x_samples) -> GxReport:
    """Check |G:G_x| > (x/C)^(d/lam) from break data, given i_n(sigma) < C p^(lam n).

    ``i_table`` holds the lower breaks of generators sigma_1..sigma_d.  For
    d > 1 the lower filtration is rebuilt with the min-rule
    i(prod sigma_j^{a_j}) = min_j i(sigma_j^{a_j}), so G_x has index
    p^(sum_j #{n : i_n(sigma_j) < x}).  Samples past the known breaks are skipped.
    """
    C = to_fraction(C)
    lam = to_fraction(lam)
    if C <= 0 or lam <= 0:
        raise ValueError("C and lambda must be positive")
    if len(i_table) != d:
        raise ValueError(f"need lower breaks for exactly d={d} generators")
    ps = {s.p for s in i_table.values()}
    if len(ps) != 1:
        raise ValueError("all generators must share p")
    (p,) = ps
    u, v = lam.numerator, lam.denominator
    for label, s in i_table.items():
        for n, i_n in enumerate(s.b):
            # i_n < C p^(u n / v)  <=>  (i_n / C)^v < p^(u n)
            if (Fraction(i_n) / C) ** v >= p ** (u * n):
                raise HypothesisFailed(f"{label}: i_{n} = {i_n} >= C*p^(lambda*{n})")
    checked, violations, skipped = [], [], []
    for x in x_samples:
        x = to_fraction(x)
        if any(x > s.b[-1] for s in i_table.values()):
            skipped.append(x)
            continue
        k = sum(sum(1 for i_n in s.b if i_n < x) for s in i_table.values())
        checked.append(x)
        # p^k > (x/C)^(d/lam)  <=>  p^(k u) > (x/C)^(d v)
        if x > 0 and not p ** (k * u) > (x / C) ** (d * v):
            violations.append(x)
    return GxReport(not violations, checked, violations, skipped)


def breaks_to_json(obj) -> dict:
    if isinstance(obj, UpperBreaks):
        return {"p": str(obj.p), "kind": "upper", "values": [str(x) for x in obj.a]}
    if isinstance(obj, LowerBreaks):
        return {"p": str(obj.p), "kind": "lower", "values": [str(x) for x in obj.b]}
    if isinstance(obj, NuSequence):
        return {"p": str(obj.p), "kind": "nu", "values": [str(x) for x in obj.nu]}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def index_to_json(f: IndexFunction, p: int) -> dict:
    return {"p": str(p), "kind": "index", "values": [[rational_str(x), str(v)] for x, v in f.steps]}


def breaks_from_json(data, strict: bool = True):
    """Decode the ``{"p", "kind", "values"}`` encoding back into a break or index object."""
    if isinstance(data, str):
        data = json.loads(data)
    p = int(data["p"])
    kind = data["kind"]
    values = data["values"]
    if kind == "upper":
        return UpperBreaks(p, [int(x) for x in values])
    if kind == "lower":
        return LowerBreaks(p, [int(x) for x in values], strict=strict)
    if kind == "nu":
        return NuSequence(p, [int(x) for x in values])
    if kind == "index":
        return IndexFunction([(parse_rational(str(x)), int(v)) for x, v in values])
    raise ValueError(f"unknown kind {kind!r}")
