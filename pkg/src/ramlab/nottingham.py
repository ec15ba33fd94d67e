"""Truncated power-series automorphisms t -> a_1 t + a_2 t^2 + ... over F_{p^m}.

A series is known modulo t^(N+1).  The group law is composition,
``compose(f, g) = f(g(t))``.  When a series stands for an automorphism
sigma of k((t)) we use sigma(t) = f(t) directly; the opposite convention
(composing inverses) gives the same ramification numbers, since
i(sigma^-1) = i(sigma) and powers commute with inversion.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "CharTwoError",
    "FieldElement",
    "FieldMismatch",
    "FieldSpec",
    "OneUnit",
    "RamResult",
    "Series",
    "WildSeries",
    "comp_inverse",
    "comp_power",
    "compose",
    "conjugate",
    "random_series",
    "random_wild",
    "ram_number",
    "ram_sequence",
    "theta_series",
]


class FieldMismatch(ValueError):
    pass


class CharTwoError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# --- polynomials over F_p, coefficient lists low -> high ---------------------

def _ptrim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, b, p):
    a = _ptrim(x % p for x in a)
    b = _ptrim(x % p for x in b)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        a = _ptrim(a)
    return a


def _pmulmod(a, b, mod, p):
    out = [0] * (len(a) + len(b))
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pmod(out, mod, p)


def _ppowx(e, mod, p):
    """x**e mod (mod, p)."""
    result, base = [1], [0, 1]
    while e:
        if e & 1:
            result = _pmulmod(result, base, mod, p)
        base = _pmulmod(base, base, mod, p)
        e >>= 1
    return result


def _pgcd(a, b, p):
    a, b = _ptrim(a), _ptrim(b)
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    poly = _ptrim(x % p for x in poly)
    m = len(poly) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    if m <= 3:
        # reducible iff it has a linear factor
        return all(sum(c * pow(r, i, p) for i, c in enumerate(poly)) % p for r in range(p))
    # Rabin's test
    xq = _ppowx(p ** m, poly, p)
    if _ptrim(xq) != [0, 1]:
        return False
    for q in _prime_factors(m):
        h = _ppowx(p ** (m // q), poly, p)
        h = h + [0] * (2 - len(h))
        h[1] = (h[1] - 1) % p
        if len(_pgcd(poly, h, p)) != 1:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """F_{p^m} = F_p[y]/(modulus); ``modulus`` is monic, low -> high, length m+1."""

    p: int
    m: int = 1
    modulus: tuple = ()

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"characteristic {self.p} is not prime")
        if self.m < 1:
            raise ValueError("extension degree must be >= 1")
        if self.m == 1:
            object.__setattr__(self, "modulus", ())
            return
        mod = _ptrim(int(c) % self.p for c in self.modulus)
        if len(mod) != self.m + 1:
            raise ValueError(f"need a modulus of degree {self.m}")
        inv = pow(mod[-1], -1, self.p)
        mod = tuple(c * inv % self.p for c in mod)
        if not is_irreducible(mod, self.p):
            raise ValueError(f"modulus {mod} is reducible over F_{self.p}")
        object.__setattr__(self, "modulus", mod)

    @classmethod
    def default(cls, p: int, m: int = 1) -> "FieldSpec":
        """Field with the first monic irreducible modulus in lexicographic order."""
        if m == 1:
            return cls(p)
        import itertools

        for low in itertools.product(range(p), repeat=m):
            mod = tuple(low) + (1,)
            if low[0] and is_irreducible(mod, p):
                return cls(p, m, mod)
        raise AssertionError("no irreducible polynomial found")

    @property
    def order(self) -> int:
        return self.p ** self.m

    @property
    def modulus_array(self):
        if self.m == 1:
            return None
        return np.array(self.modulus, dtype=np.int64)

    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldMismatch("element belongs to another field")
            return value
        if isinstance(value, (int, np.integer)):
            vec = (int(value) % self.p,) + (0,) * (self.m - 1)
        else:
            vec = tuple(int(c) % self.p for c in value)
            if len(vec) != self.m:
                raise ValueError(f"expected {self.m} coordinates, got {len(vec)}")
        return FieldElement(self, vec)

    @property
    def one(self):
        return self.element(1)

    @property
    def zero(self):
        return self.element(0)

    def elements(self):
        import itertools

        for vec in itertools.product(range(self.p), repeat=self.m):
            yield FieldElement(self, tuple(reversed(vec)))

    def to_json(self):
        return {"p": self.p, "m": self.m, "modulus": list(self.modulus)}


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    coeffs: tuple

    def _other(self, other):
        return self.field.element(other)

    def __add__(self, other):
        o = self._other(other)
        p = self.field.p
        return FieldElement(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FieldElement(self.field, tuple(-a % p for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._other(other))

    def __mul__(self, other):
        o = self._other(other)
        fld = self.field
        if fld.m == 1:
            return FieldElement(fld, (self.coeffs[0] * o.coeffs[0] % fld.p,))
        prod = _pmulmod(list(self.coeffs), list(o.coeffs), list(fld.modulus), fld.p)
        return fld.element(prod + [0] * (fld.m - len(prod)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result, base = self.field.one, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("zero has no inverse")
        return self ** (self.field.order - 2)

    def __truediv__(self, other):
        return self * self._other(other).inverse()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        if self.field.m == 1:
            return str(self.coeffs[0])
        return "(" + ",".join(map(str, self.coeffs)) + ")"


@dataclass(frozen=True)
class RamResult:
    """Lower ramification number, or ``value=None`` when it is >= N (Exceeded)."""

    value: int | None

    @property
    def exceeded(self) -> bool:
        return self.value is None

    def __str__(self):
        return "Exceeded" if self.value is None else str(self.value)

    def to_json(self):
        return "Exceeded" if self.value is None else str(self.value)


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    arr.setflags(write=False)
    return arr


class Series:
    """Element a_1 t + a_2 t^2 + ... (a_1 != 0) of the substitution group, mod t^(N+1).

    ``coeffs`` is a read-only int64 array of shape (N+1, m); row d is the
    coefficient of t^d and row 0 is always zero.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FieldSpec, coeffs):
        arr = np.asarray(coeffs, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[1] != field.m:
            raise ValueError("coefficient array must have shape (N+1, m)")
        arr = arr % field.p
        if arr[0].any():
            raise ValueError("constant term must vanish")
        if arr.shape[0] < 2 or not arr[1].any():
            raise ValueError("linear coefficient must be nonzero")
        self.field = field
        self.coeffs = _freeze(arr)
        self._check()

    def _check(self):
        pass

    @classmethod
    def _wrap(cls, field, arr):
        # pick the narrowest class that fits; arr is trusted
        arr = np.asarray(arr, dtype=np.int64)
        one = np.zeros(field.m, dtype=np.int64)
        one[0] = 1
        target = WildSeries if np.array_equal(arr[1], one) and arr.shape[0] > 2 else Series
        obj = object.__new__(target)
        obj.field = field
        obj.coeffs = _freeze(arr)
        return obj

    @classmethod
    def from_coeffs(cls, field: FieldSpec, coeffs: Iterable, N: int | None = None):
        """Build from c_1, c_2, ... (ints or coordinate vectors), zero-padded to N."""
        coeffs = list(coeffs)
        if N is None:
            N = len(coeffs)
        if len(coeffs) > N:
            raise ValueError("more coefficients than the truncation order")
        arr = np.zeros((N + 1, field.m), dtype=np.int64)
        for d, c in enumerate(coeffs, start=1):
            arr[d] = field.element(c).coeffs
        return cls(field, arr)

    @classmethod
    def from_terms(cls, field: FieldSpec, terms: dict, N: int):
        arr = np.zeros((N + 1, field.m), dtype=np.int64)
        for d, c in terms.items():
            if not 1 <= d <= N:
                raise ValueError(f"degree {d} outside 1..{N}")
            arr[d] = field.element(c).coeffs
        return cls(field, arr)

    @classmethod
    def identity(cls, field: FieldSpec, N: int):
        return cls.from_terms(field, {1: 1}, N)

    @property
    def N(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def p(self) -> int:
        return self.field.p

    def coeff(self, d: int) -> FieldElement:
        return FieldElement(self.field, tuple(int(x) for x in self.coeffs[d]))

    def truncate(self, N: int):
        if N > self.N:
            raise ValueError("cannot raise the truncation order")
        return Series._wrap(self.field, self.coeffs[: N + 1])

    def is_identity(self) -> bool:
        return not self.coeffs[2:].any() and np.array_equal(self.coeffs[1], self.field.one.coeffs)

    def terms(self) -> dict:
        return {d: self.coeff(d) for d in range(1, self.N + 1) if self.coeffs[d].any()}

    def __eq__(self, other):
        return (
            isinstance(other, Series)
            and self.field == other.field
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.field, self.coeffs.tobytes()))

    def __repr__(self):
        parts = []
        for d, c in self.terms().items():
            mono = "t" if d == 1 else f"t^{d}"
            parts.append(mono if (self.field.m == 1 and c.coeffs[0] == 1) else f"{c!r}*{mono}")
        return f"{' + '.join(parts) or '0'} + O(t^{self.N + 1})"

    def __matmul__(self, other):
        return compose(self, other)

    def to_json(self) -> dict:
        out = self.field.to_json()
        out["N"] = self.N
        out["coeffs"] = [[int(x) for x in row] for row in self.coeffs[1:]]
        return out

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        field = FieldSpec(int(data["p"]), int(data.get("m", 1)), tuple(data.get("modulus", ())))
        N = int(data["N"])
        coeffs = [c if isinstance(c, (list, tuple)) else [c] for c in data["coeffs"]]
        if len(coeffs) > N:
            raise ValueError("more coefficients than N")
        arr = np.zeros((N + 1, field.m), dtype=np.int64)
        for d, c in enumerate(coeffs, start=1):
            arr[d] = field.element(c).coeffs
        return cls(field, arr)

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


class WildSeries(Series):
    """Series with a_1 = 1, i.e. an automorphism with sigma(t) = t mod t^2."""

    __slots__ = ()

    def _check(self):
        if not np.array_equal(self.coeffs[1], self.field.one.coeffs):
            raise ValueError("wild series need linear coefficient 1")
        if self.N < 2:
            raise ValueError("wild series need truncation N >= 2")


def _same_field(f: Series, g: Series):
    if f.field != g.field:
        raise FieldMismatch(f"series over {f.field} and {g.field}")


def compose(f: Series, g: Series) -> Series:
    """f(g(t)) modulo t^(min(N_f, N_g)+1)."""
    _same_field(f, g)
    N = min(f.N, g.N)
    arr = kernels.compose(f.coeffs[: N + 1], g.coeffs[: N + 1], f.p, f.field.modulus_array)
    return Series._wrap(f.field, arr)


def _scale_argument(f: Series, lam: FieldElement):
    """Coefficients of f(lam * t)."""
    out = np.zeros_like(f.coeffs)
    power = f.field.one
    for d in range(1, f.N + 1):
        power = power * lam
        if f.coeffs[d].any():
            out[d] = (f.coeff(d) * power).coeffs
    return out


def _unit_inverse(w, p, modulus):
    """Inverse of a power series with constant term 1 (Newton iteration)."""
    n = w.shape[0]
    m = w.shape[1]
    inv = np.zeros((1, m), dtype=np.int64)
    inv[0, 0] = 1
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        cur = np.zeros((prec, m), dtype=np.int64)
        cur[: inv.shape[0]] = inv
        wi = kernels.mul_trunc(w[:prec], cur, p, modulus)
        corr = (-wi) % p
        corr[0, 0] = (corr[0, 0] + 2) % p
        inv = kernels.mul_trunc(cur, corr, p, modulus)
    return inv


def _derivative(arr, p):
    n = arr.shape[0]
    out = np.zeros_like(arr)
    k = np.arange(1, n, dtype=np.int64).reshape(-1, 1)
    out[: n - 1] = (arr[1:] * k) % p
    return out


def comp_inverse(f: Series) -> Series:
    """Compositional inverse, by Newton iteration g <- g - (f(g) - t) / f'(g)."""
    field, N, p, mod = f.field, f.N, f.p, f.field.modulus_array
    lam = f.coeff(1)
    if lam != field.one:
        unit = Series._wrap(field, _scale_by(f, lam.inverse()))
        inner = comp_inverse(unit)
        return Series._wrap(field, _scale_argument(inner, lam.inverse()))
    fprime = _derivative(f.coeffs, p)
    g = np.zeros((N + 1, field.m), dtype=np.int64)
    g[1, 0] = 1
    prec = 1  # g is correct mod t^(prec+1)
    while prec < N:
        prec = min(2 * prec + 1, N)
        fg = kernels.compose(f.coeffs[: prec + 1], g[: prec + 1], p, mod)
        err = fg.copy()
        err[1, 0] = (err[1, 0] - 1) % p
        dg = kernels.compose(fprime[: prec + 1], g[: prec + 1], p, mod)
        step = kernels.mul_trunc(err, _unit_inverse(dg, p, mod), p, mod)
        g[: prec + 1] = (g[: prec + 1] - step) % p
    out = Series._wrap(field, g)
    if not compose(f, out).is_identity():
        raise AssertionError("inverse failed to verify")
    return out


def _scale_by(f: Series, c: FieldElement):
    """Coefficients of c * f(t)."""
    out = np.zeros_like(f.coeffs)
    for d in range(1, f.N + 1):
        if f.coeffs[d].any():
            out[d] = (f.coeff(d) * c).coeffs
    return out


def comp_power(f: Series, k: int) -> Series:
    """k-fold composite f o f o ... o f (k >= 0) by binary powering."""
    if k < 0:
        return comp_power(comp_inverse(f), -k)
    result = Series.identity(f.field, f.N)
    base = f
    while k:
        if k & 1:
            result = compose(result, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def conjugate(h: Series, f: Series) -> Series:
    """h o f o h^-1."""
    return compose(compose(h, f), comp_inverse(h))


def ram_number(f: Series) -> RamResult:
    """v(f(t) - t) - 1, or Exceeded when f(t) = t mod t^(N+1)."""
    if not np.array_equal(f.coeffs[1], f.field.one.coeffs):
        raise ValueError("ramification number needs a wild series")
    nz = np.flatnonzero(f.coeffs[2:].any(axis=1))
    if nz.size == 0:
        return RamResult(None)
    return RamResult(int(nz[0]) + 1)


def ram_sequence(f: Series, n_max: int) -> list[RamResult]:
    """(i_0, ..., i_{n_max}) with i_n = i(f^(p^n))."""
    out = []
    g = f
    for n in range(n_max + 1):
        r = ram_number(g)
        out.append(r)
        if r.exceeded:
            out.extend([RamResult(None)] * (n_max - n))
            break
        if n < n_max:
            g = comp_power(g, f.p)
    return out


def definite_prefix(seq: Sequence[RamResult]) -> list[int]:
    out = []
    for r in seq:
        if r.exceeded:
            break
        out.append(r.value)
    return out


def random_wild(field: FieldSpec, N: int, rng: np.random.Generator, pin_i0: int | None = None) -> WildSeries:
    """c_1 = 1 and uniform c_2..c_N; ``pin_i0`` forces i(f) = pin_i0."""
    arr = rng.integers(0, field.p, size=(N + 1, field.m), dtype=np.int64)
    arr[0] = 0
    arr[1] = field.one.coeffs
    if pin_i0 is not None:
        if not 1 <= pin_i0 < N:
            raise ValueError("pinned i_0 must lie in 1..N-1")
        arr[2 : pin_i0 + 1] = 0
        while not arr[pin_i0 + 1].any():
            arr[pin_i0 + 1] = rng.integers(0, field.p, size=field.m)
    return WildSeries(field, arr)


def random_series(field: FieldSpec, N: int, rng: np.random.Generator) -> Series:
    """Uniform element of the substitution group (a_1 != 0) mod t^(N+1)."""
    arr = rng.integers(0, field.p, size=(N + 1, field.m), dtype=np.int64)
    arr[0] = 0
    while not arr[1].any():
        arr[1] = rng.integers(0, field.p, size=field.m)
    return Series._wrap(field, arr)


class OneUnit:
    """Multiplicative 1-unit 1 + b_1 t + b_2 t^2 + ... mod t^(N+1)."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FieldSpec, coeffs):
        arr = np.asarray(coeffs, dtype=np.int64) % field.p
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if not np.array_equal(arr[0], field.one.coeffs):
            raise ValueError("1-units have constant term 1")
        self.field = field
        self.coeffs = _freeze(arr)

    @property
    def N(self):
        return self.coeffs.shape[0] - 1

    def __mul__(self, other: "OneUnit") -> "OneUnit":
        if self.field != other.field:
            raise FieldMismatch("1-units over different fields")
        n = min(self.N, other.N) + 1
        prod = kernels.mul_trunc(self.coeffs[:n], other.coeffs[:n], self.field.p, self.field.modulus_array)
        return OneUnit(self.field, prod)

    def inverse(self) -> "OneUnit":
        return OneUnit(self.field, _unit_inverse(self.coeffs, self.field.p, self.field.modulus_array))

    def at_power(self, j: int) -> "OneUnit":
        """Substitute t -> t^j."""
        out = np.zeros_like(self.coeffs)
        for d in range(0, self.N // j + 1):
            out[d * j] = self.coeffs[d]
        return OneUnit(self.field, out)

    def is_one(self) -> bool:
        return not self.coeffs[1:].any()

    def coeff(self, d):
        return FieldElement(self.field, tuple(int(x) for x in self.coeffs[d]))

    def __eq__(self, other):
        return isinstance(other, OneUnit) and self.field == other.field and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"OneUnit({[self.coeff(d) for d in range(self.N + 1)]})"


def theta_series(field: FieldSpec, scale, N: int) -> OneUnit:
    """theta(X) = (1 + X) / (1 - X) with X = scale * t, mod t^(N+1)."""
    if field.p == 2:
        raise CharTwoError("theta is degenerate in characteristic 2")
    c = field.element(scale)
    num = np.zeros((N + 1, field.m), dtype=np.int64)
    den = np.zeros((N + 1, field.m), dtype=np.int64)
    num[0] = den[0] = field.one.coeffs
    if N >= 1:
        num[1] = c.coeffs
        den[1] = (-c).coeffs
    return OneUnit(field, num) * OneUnit(field, den).inverse()
