"""Explicit break-sequence constructions with self-check reports.

Every constructor returns a :class:`ConstructionReport` holding exact
sequences (indexed n = 0..N) and a list of named checks.  A failing check
raises :class:`ConstructionError` carrying the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import heights as H
from .breaks import (
    IndexFunction,
    LowerBreaks,
    NuSequence,
    UpperBreaks,
    breaks_to_json,
    nu_to_lower,
    nu_to_upper,
    psi_eval,
    upper_to_lower,
    validate_upper,
)
from .exactmath import (
    CertifiedReal,
    certified_compare,
    certified_floor,
    pow_rational,
    rational_str,
    to_fraction,
)
from .nottingham import CharTwoError

__all__ = [
    "CONSTRUCTIONS",
    "Check",
    "ConstructionError",
    "ConstructionReport",
    "ParameterError",
    "construct_ex1",
    "construct_ex_2not1",
    "construct_ex_3not2",
    "construct_h1_synthetic",
    "construct_h2",
    "construct_h_gt2",
]


class ParameterError(ValueError):
    pass


class ConstructionError(RuntimeError):
    def __init__(self, report: "ConstructionReport"):
        self.report = report
        bad = [c.name for c in report.checks if not c.passed]
        super().__init__(f"{report.name}: failed checks {bad}")


@dataclass
class Check:
    name: str
    passed: bool
    witness: str = ""

    def to_json(self):
        return {"name": self.name, "passed": self.passed, "witness": self.witness}


@dataclass
class ConstructionReport:
    name: str
    p: int
    upper: UpperBreaks | None = None
    lower: LowerBreaks | None = None
    nu: NuSequence | None = None
    checks: list = field(default_factory=list)
    target_height: Fraction | None = None
    target_limit: object = None
    generators: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, witness="") -> bool:
        self.checks.append(Check(name, bool(passed), str(witness)))
        return bool(passed)

    def failed(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        out = {"name": self.name, "p": str(self.p)}
        for key in ("upper", "lower", "nu"):
            val = getattr(self, key)
            if val is not None:
                out[key] = breaks_to_json(val)
        if self.generators:
            out["generators"] = {k: breaks_to_json(v) for k, v in self.generators.items()}
        out["checks"] = [c.to_json() for c in self.checks]
        out["target_height"] = None if self.target_height is None else rational_str(self.target_height)
        out["target_limit"] = _limit_json(self.target_limit)
        if self.extra:
            out["extra"] = {k: H._jsonable(v) for k, v in self.extra.items()}
        return out


def _limit_json(x):
    if x is None:
        return None
    if isinstance(x, CertifiedReal):
        if x.exact is not None:
            return rational_str(x.exact)
        lo, hi = x.enclose(Fraction(1, 10 ** 30))
        return [rational_str(lo), rational_str(hi)]
    if isinstance(x, dict):
        return {k: _limit_json(v) for k, v in x.items()}
    return rational_str(x)


def _finish(report: ConstructionReport) -> ConstructionReport:
    if not report.ok:
        raise ConstructionError(report)
    return report


def _window(length: int) -> int:
    return max(2, min(H.DEFAULT_WINDOW, length))


def _limit_contains(verdict: H.Verdict, target) -> tuple[bool, str]:
    if not verdict.consistent or verdict.limit is None:
        return False, f"ht2 {verdict.status} {verdict.reason}".strip()
    lo, hi = verdict.limit
    t = CertifiedReal.coerce(target)
    tlo, thi = t.enclose(Fraction(1, 10 ** 30)) if t.exact is None else (t.exact, t.exact)
    ok = lo <= tlo and thi <= hi
    return ok, f"[{float(lo)!r}, {float(hi)!r}] vs {float(tlo)!r}"


def _common_checks(r: ConstructionReport, char_p: bool = True):
    if r.upper is None:
        return
    v = validate_upper(r.upper)
    r.check("validate_upper", v.valid, v.message)
    if char_p:
        p = r.p
        bad = [n for n, a in enumerate(r.upper.a) if a < p ** n]
        r.check("a_n >= p^n", not bad, f"first failure n={bad[0]}" if bad else "all n")


def _ht2_check(r: ConstructionReport, b: LowerBreaks, h, target, tol=None, upto=None):
    seq = b.b if upto is None else b.b[: upto + 1]
    if len(seq) < 3:
        r.check("ht2 limit", True, "skipped: fewer than 3 terms")
        return None
    v = H.ht2_estimate((b.p, seq), h, _window(len(seq)), tol)
    if v.status == H.INCONCLUSIVE:
        # short data may not settle; that is not evidence against the limit
        ok, wit = True, f"inconclusive at N={len(seq) - 1}"
    else:
        ok, wit = _limit_contains(v, target)
    r.check("ht2 limit", ok, wit)
    r.extra["ht2"] = v.to_json()
    return v


# --- h = 1 (synthetic) -------------------------------------------------------


def construct_h1_synthetic(p: int, e_F: int, c: int, N: int) -> ConstructionReport:
    """Synthetic break data of Sen type for a base field of characteristic 0.

    a_0 = c and a_{n+1} = min(p a_n, a_n + e_F), so the upper breaks grow
    geometrically until a_n >= e_F / (p - 1) and then by e_F each step.
    The lower breaks are then eventually i_n = A + B p^n.  This is break data
    only: no extension or automorphism is constructed.  The characteristic-p
    criterion validate_upper does not apply to such data (its growth clause
    fails on the arithmetic tail) and is not checked.
    """
    if p < 2:
        raise ParameterError("p must be >= 2")
    if e_F < 1 or c < 1:
        raise ParameterError("e_F and c must be positive integers")
    if c % p == 0:
        raise ParameterError(f"p = {p} divides c = {c}")
    if N < 0:
        raise ParameterError("N must be >= 0")
    a = [c]
    for _ in range(N):
        a.append(min(p * a[-1], a[-1] + e_F))
    upper = UpperBreaks(p, a)
    b = [a[0]]
    for n in range(1, len(a)):
        b.append(b[-1] + p ** n * (a[n] - a[n - 1]))
    lower = LowerBreaks(p, b)
    r = ConstructionReport("h1", p, upper, lower, target_height=Fraction(1))
    tail = [n for n in range(1, len(a)) if a[n] - a[n - 1] == e_F]
    onset = tail[0] if tail else None
    r.extra["arithmetic_onset"] = onset
    r.check("sen spacing", all(a[n + 1] == min(p * a[n], a[n] + e_F) for n in range(N)), "a_{n+1} = min(p a_n, a_n + e_F)")
    r.check("eventually constant gaps", onset is not None and all(a[n] - a[n - 1] == e_F for n in range(onset, len(a))),
            f"gap e_F from n={onset}")
    b = lower.b
    if onset is None or len(b) - onset < 3:
        r.check("ht1", True, "skipped: arithmetic tail too short")
        return _finish(r)
    w = _window(len(b) - onset - 2)
    v1 = H.ht1_detect(lower, w)
    r.extra["ht1"] = v1.to_json()
    ok = v1.consistent and v1.h == 1
    r.check("ht1 = 1", ok, f"{v1.status} {v1.reason}".strip())
    if ok:
        ex = H.ht1_extrapolate(lower, v1.details["M"], 1)
        r.extra["A"] = ex.A
        r.extra["B"] = ex.B
        r.target_limit = ex.limit
        r.check("limit B/p^M nonzero", ex.limit != 0, rational_str(ex.limit))
        if len(b) >= 3:
            _ht2_check(r, lower, 1, ex.limit)
    return _finish(r)


# --- h = 2 -------------------------------------------------------------------


def construct_h2(p: int, N: int) -> ConstructionReport:
    """a_n = p^n, with lower breaks b_n = (p^(2n+1) + 1)/(p + 1)."""
    if p < 2 or N < 0:
        raise ParameterError("need p >= 2 and N >= 0")
    upper = UpperBreaks(p, [p ** n for n in range(N + 1)])
    lower = upper_to_lower(upper)
    closed = [(p ** (2 * n + 1) + 1) // (p + 1) for n in range(N + 1)]
    target = Fraction(p, p + 1)
    r = ConstructionReport("h2", p, upper, lower, target_height=Fraction(2), target_limit=target)
    r.check("recurrence = closed form", list(lower.b) == closed, "b_n = (p^(2n+1)+1)/(p+1)")
    _common_checks(r)
    _ht2_check(r, lower, 2, target)
    r.check("admissible height", H.admissible_height(2), "2")
    return _finish(r)


# --- h > 2 -------------------------------------------------------------------


def _geom(p: int, e: Fraction, n: int) -> CertifiedReal:
    """sum_{k=0}^{n} p^(e k) = (p^(e(n+1)) - 1)/(p^e - 1), without cancellation."""
    total = CertifiedReal.from_rational(0)
    for k in range(n + 1):
        total = total + pow_rational(p, e * k)
    return total


def _assume_holds(p: int, h: Fraction, n: int) -> bool:
    # (p^(h-1) - 1)/(p - 1) >= (X - 1)/(X - 2) with X = p^((h-1) n)
    lhs = (pow_rational(p, h - 1) - 1) / (p - 1)
    X = pow_rational(p, (h - 1) * n)
    rhs = (X - 1) / (X - 2)
    return certified_compare(lhs, rhs) >= 0


def construct_h_gt2(p: int, h, N: int, tol: float = 1e-4) -> ConstructionReport:
    """Break sequence with Ht2 = h > 2 (h rational).

    n_0 is the least n >= 1 from which (p^(h-1)-1)/(p-1) >= 1 + 1/(p^((h-1)n) - 2)
    holds.  For n <= n_0 the seed a_n = (p^(n+1)-1)/(p-1) is used; after that
    a_n is the largest integer prime to p below
    a_{n-1} + p^(-n) (S_n - b_{n-1}), with S_n = (p^(h(n+1)) - 1)/(p^h - 1).
    """
    h = to_fraction(h)
    if h <= 2:
        raise ParameterError("h must be > 2")
    if p < 2 or N < 0:
        raise ParameterError("need p >= 2 and N >= 0")
    n0 = 1
    while not _assume_holds(p, h, n0):
        n0 += 1
        if n0 > 10_000:
            raise ParameterError("onset index not found")
    a, b = [], []
    S = [_geom(p, h, n) for n in range(N + 1)]
    bounds = {}
    for n in range(N + 1):
        if n <= n0:
            a.append((p ** (n + 1) - 1) // (p - 1))
            b.append((p ** (2 * (n + 1)) - 1) // (p * p - 1))
            continue
        bound = a[-1] + (S[n] - b[-1]) / p ** n
        an = certified_floor(bound)
        if an % p == 0:
            an -= 1
        bounds[n] = bound
        b.append(b[-1] + p ** n * (an - a[-1]))
        a.append(an)
    upper = UpperBreaks(p, a)
    lower = LowerBreaks(p, b)
    target = CertifiedReal(exact=Fraction(p ** int(h), p ** int(h) - 1)) if h.denominator == 1 else (
        pow_rational(p, h) / (pow_rational(p, h) - 1))
    r = ConstructionReport("hgt2", p, upper, lower, target_height=h, target_limit=target)
    r.extra["n0"] = n0
    r.check("recurrence", list(upper_to_lower(upper).b) == b, "b_n = b_{n-1} + p^n (a_n - a_{n-1})")
    r.check("onset n0", all(_assume_holds(p, h, n) for n in range(n0, max(n0, N) + 1))
            and (n0 == 1 or not _assume_holds(p, h, n0 - 1)), f"n0={n0}")
    bad_low, bad_up, bad_claim, bad_near = [], [], [], []
    for n in range(N + 1):
        if certified_compare(b[n], S[n]) > 0:
            bad_up.append(n)
        if n > n0:
            if certified_compare(S[n] - 2 * p ** n, b[n]) >= 0:
                bad_low.append(n)
            if certified_compare(a[n], bounds[n] - 2) <= 0:
                bad_near.append(n)
        if certified_compare(a[n], _geom(p, h - 1, n)) > 0:
            bad_claim.append(n)
    r.check("b_n lower bound (n > n0)", not bad_low, bad_low or "strict")
    r.check("b_n upper bound", not bad_up, bad_up or "weak")
    r.check("a_n near its bound (n > n0)", not bad_near, bad_near or "a_n > bound - 2")
    r.check("claim a_n <= (p^((h-1)(n+1))-1)/(p^(h-1)-1)", not bad_claim, bad_claim or "all n")
    growth = [n for n in range(N) if not a[n + 1] > p * a[n]]
    r.check("a_{n+1} > p a_n", not growth, growth or "all n")
    _common_checks(r)
    _ht2_check(r, lower, h, target, tol)
    r.check("admissible height", H.admissible_height(h), rational_str(h))
    return _finish(r)


# --- Example: Ht3 defined, Ht2 undefined ------------------------------------


def construct_ex_3not2(p: int, N: int, ht3_tol: float = 1e-3) -> ConstructionReport:
    """nu_n = floor(b_{n-1}/(n p^n) + (p-1) sum_{j<n} p^(j-n) nu_j) + gamma_n, gamma_n in {0, 1}."""
    if p < 2 or N < 0:
        raise ParameterError("need p >= 2 and N >= 0")
    nu, b = [1], [1]
    eps = [None]
    for n in range(1, N + 1):
        x = Fraction(b[-1], n * p ** n) + (p - 1) * sum(Fraction(nu[j], p ** (n - j)) for j in range(n))
        v = x.numerator // x.denominator
        if v % p == 0:
            v += 1
        nu.append(v)
        eps.append(v - x)
        b.append(sum((p ** (2 * n + 1 - j) + p ** j) // (p + 1) * nu[j] for j in range(n + 1)))
    nus = NuSequence(p, nu)
    upper = nu_to_upper(nus)
    lower = nu_to_lower(nus)
    r = ConstructionReport("ex-3not2", p, upper, lower, nus, target_height=Fraction(2))
    r.check("closed form = recurrence", list(lower.b) == b, "closed form and chained conversion agree")
    bad_eps = [n for n in range(1, N + 1) if abs(eps[n]) > 1]
    r.check("|eps_n| <= 1", not bad_eps, bad_eps or f"max |eps| = {float(max((abs(e) for e in eps[1:]), default=0)):.6f}")
    bad_ratio = [n for n in range(1, N + 1)
                if Fraction(b[n], b[n - 1]) != p * p + Fraction(1, n) + p ** n * eps[n] / b[n - 1]]
    r.check("quotient identity", not bad_ratio, bad_ratio or "exact")
    bad_lb = [n for n in range(1, N + 1) if b[n - 1] * (p + 1) < p ** (2 * n - 1) + 1]
    r.check("b_{n-1} >= (p^(2n-1)+1)/(p+1)", not bad_lb, bad_lb or "all n")
    r.extra["eps"] = eps[1:]
    _common_checks(r)
    if N >= 3:
        w = _window(N - 1)
        v3 = H.ht3_estimate(lower, w, ht3_tol)
        r.extra["ht3"] = v3.to_json()
        r.check("ht3 = 2", v3.consistent and abs(v3.estimate - 2) < ht3_tol, f"{v3.status} {v3.estimate}")
        v2 = H.ht2_estimate(lower, 2, w)
        r.extra["ht2"] = v2.to_json()
        r.check("ht2(h=2) diverging", v2.status == H.REFUTED and v2.reason == "diverging", f"{v2.status} {v2.reason}")
    return _finish(r)


# --- Example: Ht2 defined, Ht1 undefined ------------------------------------


def construct_ex_2not1(p: int, N: int) -> ConstructionReport:
    """nu_n = (p^(2n+1) + 1)/(p + 1) + p."""
    if p < 2 or N < 0:
        raise ParameterError("need p >= 2 and N >= 0")
    nus = NuSequence(p, [(p ** (2 * n + 1) + 1) // (p + 1) + p for n in range(N + 1)])
    upper = nu_to_upper(nus)
    lower = nu_to_lower(nus)
    closed = [(p ** (3 * n + 3) - 1) // (p ** 3 - 1) + p * (p ** (2 * n + 2) - 1) // (p * p - 1) for n in range(N + 1)]
    target = Fraction(p ** 3, p ** 3 - 1)
    r = ConstructionReport("ex-2not1", p, upper, lower, nus, target_height=Fraction(3), target_limit=target)
    if list(lower.b) != closed:
        n = next(k for k in range(N + 1) if lower.b[k] != closed[k])
        raise H.MismatchError(n, closed[n], lower.b[n])
    r.check("nu formula = closed form", True, "exact for all n")
    b = lower.b
    bad = [n for n in range(1, N) if Fraction(b[n + 1] - b[n], b[n] - b[n - 1]) != Fraction(p ** n + 1, p ** (n - 1) + 1) * p * p]
    r.check("difference ratio identity", not bad, bad or "exact")
    _common_checks(r)
    _ht2_check(r, lower, 3, target)
    if N + 1 >= 4:
        v1 = H.ht1_detect(lower, _window(N - 1))
        r.extra["ht1"] = v1.to_json()
        r.check("ht1 non-constant-ratio", v1.reason == "non-constant-ratio", f"{v1.status} {v1.reason}")
    return _finish(r)


# --- a Z_p^2 action with heights 7 and 7/2 -----------------------


def ex1_alpha(p: int) -> CertifiedReal:
    """alpha = (p^(5/2) + p)/(p^(5/2) + 1) * p^(3/2)."""
    s = pow_rational(p, Fraction(5, 2))
    return (s + p) / (s + 1) * pow_rational(p, Fraction(3, 2))


def ex1_index_function(p: int, c: list) -> IndexFunction:
    steps = [(Fraction(2), 1)]
    for i, ci in enumerate(c):
        steps.append((Fraction(ci), p ** (3 * i + 1)))
        steps.append((Fraction(p ** (4 * i + 4) + 1), p ** (3 * i + 2)))
    return IndexFunction(steps)


def construct_ex1(p: int, N: int, conv_tol: float = 1e-6) -> ConstructionReport:
    """Two generators: upper breaks p^(4n+4)+1 for sigma_1 and 2, c_0, p^4+1, c_1, ... for sigma_2.

    c_n is the smallest integer prime to p with c_n >= p^(4n) alpha.  The
    lower breaks come from psi for the whole Z_p^2 action, whose index
    function is 1 on [0, 2], p^(3i+1) on (p^(4i)+1, c_i] and p^(3i+2) on
    (c_i, p^(4i+4)+1].  The min-rule for words is taken as given.
    """
    if p == 2:
        raise CharTwoError("the construction needs p > 2")
    if p < 3 or N < 0:
        raise ParameterError("need an odd prime p and N >= 0")
    alpha = ex1_alpha(p)
    r = ConstructionReport("ex1", p, target_height=None)
    lo, hi = alpha.enclose(Fraction(1, 10 ** 20))
    r.extra["alpha"] = [lo, hi]
    r.extra["alpha_width"] = float(hi - lo)
    r.check("p^(3/2) < alpha < p^2",
            certified_compare(pow_rational(p, Fraction(3, 2)), alpha) < 0 and certified_compare(alpha, p * p) < 0,
            f"alpha ~ {float(alpha):.10f}")
    lhs = p ** 6 - p - p * p * alpha + p * alpha
    rhs = (pow_rational(p, Fraction(9, 2)) * alpha - pow_rational(p, Fraction(9, 2)) + pow_rational(p, Fraction(5, 2))
           - pow_rational(p, Fraction(-3, 2)) * alpha)
    dlo, dhi = (lhs - rhs).enclose(Fraction(1, 10 ** 30))
    r.check("alpha solves its linear equation", dlo <= 0 <= dhi, f"|lhs - rhs| <= {float(max(-dlo, dhi)):.3g}")
    c = []
    for n in range(N + 1):
        x = p ** (4 * n) * alpha
        cn = certified_floor(x) + 1  # x is irrational, so ceil = floor + 1
        if cn % p == 0:
            cn += 1
        c.append(cn)
    r.extra["c"] = c
    bad1 = [n for n in range(N + 1) if not _within_one(c[n] - (p ** (4 * n) * alpha + 1))]
    bad2 = [n for n in range(N + 1) if not c[n] > p * (p ** (4 * n) + 1)]
    bad3 = [n for n in range(N + 1) if not p ** (4 * (n + 1)) + 1 > p * c[n]]
    r.check("|c_n - (p^(4n) alpha + 1)| < 1", not bad1, bad1 or "all n")
    r.check("c_n > p(p^(4n)+1)", not bad2, bad2 or "all n")
    r.check("p^(4(n+1))+1 > p c_n", not bad3, bad3 or "all n")
    f = ex1_index_function(p, c)
    psi_hi = [psi_eval(f, p ** (4 * n) + 1) for n in range(N + 2)]  # psi(p^(4n)+1), n = 0..N+1
    psi_c = [psi_eval(f, cn) for cn in c]
    i1 = [int(psi_hi[n + 1]) for n in range(N + 1)]
    i2 = []
    for n in range(N + 1):
        i2 += [int(psi_hi[n]), int(psi_c[n])]
    s1 = LowerBreaks(p, i1, strict=False)
    s2 = LowerBreaks(p, i2, strict=False)
    r.generators = {"sigma1": s1, "sigma2": s2}
    for label, s in r.generators.items():
        bad = [n for n in range(1, len(s.b)) if (s.b[n] - s.b[n - 1]) % p ** n]
        r.check(f"sen congruence {label}", not bad, bad or "i_n = i_{n-1} mod p^n")
    K1 = (p ** 6 - p - p * p * alpha + p * alpha) / (p ** 7 - 1)
    K2 = (pow_rational(p, Fraction(9, 2)) * alpha - pow_rational(p, Fraction(9, 2)) + pow_rational(p, Fraction(5, 2))
          - pow_rational(p, Fraction(-3, 2)) * alpha) / (p ** 7 - 1)
    K1v, K2v = float(K1), float(K2)
    rel1 = [abs(float(Fraction(psi_hi[n], p ** (7 * n))) - K1v) / K1v for n in range(N + 1)]
    rel2 = [abs(float(psi_c[n] / (pow_rational(p, Fraction(7, 2)) ** (2 * n + 1))) - K2v) / K2v for n in range(N + 1)]
    r.extra["K_sigma1"] = K1v
    r.extra["K_sigma2"] = K2v
    r.extra["rel_err_sigma1"] = rel1
    r.extra["rel_err_sigma2"] = rel2
    r.check("psi(p^(4n)+1)/p^(7n) -> K_sigma1", rel1[-1] < conv_tol, f"rel err {rel1[-1]:.3g} at n={N}")
    r.check("psi(c_n)/p^(7(2n+1)/2) -> K_sigma2", rel2[-1] < conv_tol, f"rel err {rel2[-1]:.3g} at n={N}")
    r.target_limit = {"sigma1": K1 * p ** 7, "sigma2": K2}
    if N >= 3:
        h1, v1 = H.derive_height(s1)
        h2, v2 = H.derive_height(s2)
        r.extra["ht2_sigma1"] = v1.to_json()
        r.extra["ht2_sigma2"] = v2.to_json()
        r.extra["derived_heights"] = [h1, h2]
        if (h1 is None or h2 is None) and H.REFUTED not in (v1.status, v2.status):
            r.check("derived Ht2 pair", True, f"inconclusive at N={N}")
        else:
            r.check("derived Ht2 pair", (h1, h2) == (Fraction(7), Fraction(7, 2)), f"({h1}, {h2})")
        if v1.consistent:
            r.check("sigma1 limit", _limit_contains(v1, K1 * p ** 7)[0], _limit_contains(v1, K1 * p ** 7)[1])
        if v2.consistent:
            r.check("sigma2 limit", _limit_contains(v2, K2)[0], _limit_contains(v2, K2)[1])
        if h1 is not None and h2 is not None:
            gs = H.GeneratorSystem([("sigma1", s1), ("sigma2", s2)])
            rows = H.filtration(gs, [Fraction(7, 2), Fraction(7), Fraction(8)], heights=[h1, h2])
            r.extra["filtration"] = [row.to_json() for row in rows]
            r.check("filtration ranks (2, 1, 0)", [row.rank for row in rows] == [2, 1, 0],
                    [row.rank for row in rows])
    return _finish(r)


def _within_one(d: CertifiedReal) -> bool:
    return certified_compare(d, -1) > 0 and certified_compare(d, 1) < 0


CONSTRUCTIONS: dict[str, Callable] = {
    "h1": construct_h1_synthetic,
    "h2": construct_h2,
    "hgt2": construct_h_gt2,
    "ex-3not2": construct_ex_3not2,
    "ex-2not1": construct_ex_2not1,
    "ex1": construct_ex1,
}
