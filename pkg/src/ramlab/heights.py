"""Finite-data verdicts for the heights Ht1, Ht2, Ht3 of a wild automorphism.

Each height is defined by a limit over the lower breaks i_n(sigma).  From
finitely many breaks we can only say that the data are *consistent* with a
height, that they *refute* it (a trend that rules the limit out), or that
they are *inconclusive*.  No verdict asserts a limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .breaks import LowerBreaks
from .exactmath import CertifiedReal, pow_rational, rational_str, to_fraction

__all__ = [
    "CONSISTENT",
    "INCONCLUSIVE",
    "REFUTED",
    "Extrapolation",
    "FiltrationRow",
    "GeneratorSystem",
    "Height",
    "HeightReport",
    "MismatchError",
    "TieError",
    "Verdict",
    "admissible_height",
    "combine",
    "derive_height",
    "filtration",
    "height_report",
    "ht1_detect",
    "ht1_extrapolate",
    "ht2_estimate",
    "ht3_estimate",
]

CONSISTENT = "consistent"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"

DEFAULT_WINDOW = 5
EXACT_TOL = 1e-6
CERTIFIED_TOL = 1e-3


class MismatchError(ValueError):
    def __init__(self, n: int, expected, got):
        self.n = n
        super().__init__(f"closed form fails at n={n}: predicted {expected}, data {got}")


class TieError(ValueError):
    pass


def _breaks(b) -> tuple[int, tuple]:
    if isinstance(b, LowerBreaks):
        return b.p, b.b
    p, seq = b
    return int(p), tuple(int(x) for x in seq)


@dataclass
class Verdict:
    kind: str
    status: str
    window: int
    tol: float
    n_used: int
    h: Fraction | None = None
    estimate: float | None = None
    limit: tuple | None = None
    reason: str = ""
    details: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.status == CONSISTENT

    def to_json(self) -> dict:
        out = {"kind": self.kind, "status": self.status, "window": self.window}
        if self.h is not None:
            out["h"] = rational_str(self.h)
        elif self.estimate is not None:
            out["h"] = repr(self.estimate)
        if self.estimate is not None:
            out["estimate"] = repr(self.estimate)
        if self.limit is not None:
            out["limit"] = [rational_str(self.limit[0]), rational_str(self.limit[1])]
        if self.reason:
            out["reason"] = self.reason
        out["tol"] = repr(self.tol)
        out["n_used"] = self.n_used
        for k, v in self.details.items():
            out[k] = _jsonable(v)
        return out


def _jsonable(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return rational_str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return str(v)


def _log_p(x: Fraction, p: int) -> float:
    x = to_fraction(x)
    return (math.log(x.numerator) - math.log(x.denominator)) / math.log(p)


def _exact_log(r: Fraction, p: int) -> int | None:
    """k with r = p^k if r is an integral power of p, else None."""
    r = to_fraction(r)
    if r <= 0:
        return None
    num, den = r.numerator, r.denominator
    if den != 1:
        if num != 1:
            return None
        k = _exact_log(Fraction(den), p)
        return None if k is None else -k
    k = 0
    while num % p == 0:
        num //= p
        k += 1
    return k if num == 1 else None


# --- Ht1 ---------------------------------------------------------------------


def ht1_detect(b, window: int = DEFAULT_WINDOW) -> Verdict:
    """Is (i_{n+1} - i_n) / (i_n - i_{n-1}) constant on the last ``window`` indices?

    M is the onset of the closed form i_n = A + B r^(n-M): the earliest M
    such that the ratio is constant for every n > M.
    """
    p, seq = _breaks(b)
    base = dict(kind="ht1", window=window, tol=0.0, n_used=len(seq) - 1)
    if len(seq) < window + 2:
        return Verdict(status=INCONCLUSIVE, reason="too-short", **base)
    diffs = [seq[n] - seq[n - 1] for n in range(1, len(seq))]
    # ratios[k] is the ratio at n = k + 1
    ratios = [Fraction(diffs[k + 1], diffs[k]) for k in range(len(diffs) - 1)]
    tail = ratios[-window:]
    r = tail[-1]
    if any(x != r for x in tail):
        return Verdict(
            status=REFUTED, reason="non-constant-ratio", details={"ratios": tail}, **base
        )
    start = len(ratios) - 1
    while start > 0 and ratios[start - 1] == r:
        start -= 1
    M = start  # ratio at n = start + 1 is the first constant one
    k = _exact_log(r, p)
    details = {"ratio": r, "M": M, "p_power": k is not None}
    if r <= 1:
        return Verdict(status=REFUTED, reason="ratio-not-above-1", details=details, **base)
    if k is not None:
        return Verdict(status=CONSISTENT, h=Fraction(k), estimate=float(k), details=details, **base)
    return Verdict(
        status=CONSISTENT, estimate=_log_p(r, p), reason="ratio-not-p-power", details=details, **base
    )


@dataclass
class Extrapolation:
    p: int
    d: int
    M: int
    A: Fraction
    B: Fraction

    @property
    def limit(self) -> Fraction:
        """lim i_n / p^(dn) = B / p^(dM)."""
        return self.B / Fraction(self.p) ** (self.d * self.M)

    def predict(self, n: int) -> Fraction:
        return self.A + self.B * Fraction(self.p) ** (self.d * (n - self.M))

    def to_json(self):
        return {
            "p": str(self.p),
            "d": self.d,
            "M": self.M,
            "A": rational_str(self.A),
            "B": rational_str(self.B),
            "limit": rational_str(self.limit),
        }


def ht1_extrapolate(b, M: int, d: int) -> Extrapolation:
    """Exact A, B with i_n = A + B p^(d(n-M)) for all supplied n >= M."""
    p, seq = _breaks(b)
    if d < 1:
        raise ValueError("d must be >= 1")
    if M < 0 or M + 1 >= len(seq):
        raise ValueError("need i_M and i_{M+1}")
    q = p ** d
    A = Fraction(q * seq[M] - seq[M + 1], q - 1)
    B = seq[M] - A
    ex = Extrapolation(p, d, M, A, B)
    for n in range(M, len(seq)):
        pred = ex.predict(n)
        if pred != seq[n]:
            raise MismatchError(n, pred, seq[n])
    return ex


# --- Ht2 ---------------------------------------------------------------------


def _q_interval(i_n: int, p: int, h: Fraction, n: int, rel: float):
    e = h * n
    if e.denominator == 1:
        q = Fraction(i_n, p ** int(e))
        return q, q
    q = CertifiedReal.from_rational(i_n) / pow_rational(p, e)
    lo, hi = q.interval(64)
    mag = abs(hi) if hi else Fraction(1)
    return q.enclose(mag * Fraction(repr(rel)))


def ht2_estimate(b, h, window: int = DEFAULT_WINDOW, tol: float | None = None) -> Verdict:
    """Verdict on lim i_n / p^(hn) over the last ``window`` terms.

    consistent: the relative spread of q_n over the window is below ``tol``;
    the limit interval widens the observed range by a factor (1 +- tol).
    refuted (diverging): q_n moves monotonically by more than tol and a
    geometric projection of the remaining movement is at least as large as
    what was observed, so the sequence shows no sign of settling.
    refuted (limit-zero): q_n decreases and the projection lands at 0.
    """
    p, seq = _breaks(b)
    h = to_fraction(h)
    if h <= 0:
        raise ValueError("h must be > 0")
    if tol is None:
        tol = EXACT_TOL if h.denominator == 1 else CERTIFIED_TOL
    base = dict(kind="ht2", window=window, tol=tol, n_used=len(seq) - 1, h=h)
    if len(seq) < max(window, 3):
        return Verdict(status=INCONCLUSIVE, reason="too-short", **base)
    first = len(seq) - window
    ivs = [_q_interval(seq[n], p, h, n, tol * 1e-3) for n in range(first, len(seq))]
    lo = min(iv[0] for iv in ivs)
    hi = max(iv[1] for iv in ivs)
    mids = [(a + c) / 2 for a, c in ivs]
    ftol = Fraction(repr(tol))
    details = {"q": [float(m) for m in mids], "first_n": first}
    if lo > 0 and (hi - lo) / lo < ftol:
        limit = (lo * (1 - ftol), hi * (1 + ftol))
        return Verdict(status=CONSISTENT, limit=limit, estimate=float(h), details=details, **base)
    d = [mids[k + 1] - mids[k] for k in range(len(mids) - 1)]
    monotone = all(x > 0 for x in d) or all(x < 0 for x in d)
    drift = abs(mids[-1] - mids[0])
    if monotone and len(d) >= 2:
        k = len(d) - 1
        rho = (abs(float(d[-1])) / abs(float(d[0]))) ** (1.0 / k)
        remaining = math.inf if rho >= 1 else abs(float(d[-1])) * rho / (1 - rho)
        details.update(rho=rho, drift=float(drift), projected_remaining=remaining)
        if drift > ftol * abs(mids[-1]) and remaining >= float(drift):
            return Verdict(status=REFUTED, reason="diverging", details=details, **base)
        if d[-1] < 0 and math.isfinite(remaining):
            projected = float(mids[-1]) - remaining
            details["projected_limit"] = projected
            if abs(projected) < 1e-2 * float(mids[0]):
                return Verdict(status=REFUTED, reason="limit-zero", details=details, **base)
    return Verdict(status=INCONCLUSIVE, reason="not-settled", details=details, **base)


# --- Ht3 ---------------------------------------------------------------------


def ht3_estimate(b, window: int = DEFAULT_WINDOW, tol: float = CERTIFIED_TOL) -> Verdict:
    """Verdict on lim log_p(i_{n+1}/i_n).

    With r_k = log_p(i_{k+1}/i_k) the estimator uses the first-order
    Richardson values R_k = (k+1) r_k - k r_{k-1}, which remove a c/(k+1)
    term from r_k (the slow 1/n drift seen in practice).  The verdict is
    consistent when R_k varies by less than ``tol`` over the window; the
    estimate is their mean.  The raw tail mean and a sandwich check
    p^((h-eps)n) <= i_n <= p^((h+eps)n), eps = 2 tol, are reported as evidence.
    """
    p, seq = _breaks(b)
    base = dict(kind="ht3", window=window, tol=tol, n_used=len(seq) - 1)
    if len(seq) < 3:
        return Verdict(status=INCONCLUSIVE, reason="too-short", **base)
    r = [_log_p(Fraction(seq[k + 1], seq[k]), p) for k in range(len(seq) - 1)]
    R = [(k + 1) * r[k] - k * r[k - 1] for k in range(1, len(r))]
    w = min(window, len(R))
    tail = R[-w:]
    raw_tail = r[-w:]
    details = {"raw_mean": sum(raw_tail) / w, "richardson": tail}
    spread = max(tail) - min(tail)
    details["spread"] = spread
    if w >= 2 and spread < tol:
        est = sum(tail) / w
        eps = 2 * tol
        first = len(seq) - w
        sandwich = all(
            (est - eps) * n <= math.log(seq[n], p) <= (est + eps) * n for n in range(first, len(seq))
        )
        details["sandwich"] = sandwich
        snapped = Fraction(est).limit_denominator(12)
        h = snapped if abs(float(snapped) - est) < tol else None
        if est <= 0:
            return Verdict(status=REFUTED, reason="non-positive", estimate=est, details=details, **base)
        return Verdict(status=CONSISTENT, h=h, estimate=est, details=details, **base)
    inc = [tail[k + 1] - tail[k] for k in range(len(tail) - 1)]
    if len(inc) >= 2 and all(x > 0 for x in inc) and all(inc[k + 1] >= inc[k] for k in range(len(inc) - 1)):
        return Verdict(status=REFUTED, reason="unbounded-ratio", details=details, **base)
    return Verdict(status=INCONCLUSIVE, reason="not-stabilized", details=details, **base)


# --- reports -----------------------------------------------------------------


@dataclass
class HeightReport:
    p: int
    ht1: Verdict
    ht2: Verdict
    ht3: Verdict
    extrapolation: Extrapolation | None = None

    @property
    def height(self) -> Fraction | None:
        """The best-supported height: Ht2 if consistent, else the snapped Ht3 value."""
        if self.ht2.consistent:
            return self.ht2.h
        if self.ht3.consistent:
            return self.ht3.h
        return None

    def to_json(self) -> dict:
        out = {
            "p": str(self.p),
            "ht1": self.ht1.to_json(),
            "ht2": self.ht2.to_json(),
            "ht3": self.ht3.to_json(),
        }
        if self.extrapolation is not None:
            out["extrapolation"] = self.extrapolation.to_json()
        return out


def height_report(b, h=None, window: int = DEFAULT_WINDOW, tol: float | None = None, ht3_tol=None) -> HeightReport:
    """Run all three estimators; Ht2 is tested at ``h`` or at the best detected height."""
    p, seq = _breaks(b)
    v1 = ht1_detect((p, seq), window)
    v3 = ht3_estimate((p, seq), window, CERTIFIED_TOL if ht3_tol is None else ht3_tol)
    ex = None
    if v1.consistent and v1.h is not None:
        ex = ht1_extrapolate((p, seq), v1.details["M"], int(v1.h))
    if h is None:
        h = v1.h if v1.h is not None else v3.h
    if h is None:
        v2 = Verdict(kind="ht2", status=INCONCLUSIVE, window=window, tol=tol or EXACT_TOL,
                     n_used=len(seq) - 1, reason="no-candidate-height")
    else:
        v2 = ht2_estimate((p, seq), h, window, tol)
    return HeightReport(p, v1, v2, v3, ex)


def derive_height(b, window: int = DEFAULT_WINDOW, tol: float | None = None, ht3_tol: float = CERTIFIED_TOL):
    """Snap the Ht3 estimate to a small-denominator rational and confirm it with Ht2.

    Returns (h, ht2 verdict) or (None, last verdict) when no height is supported.
    """
    v3 = ht3_estimate(b, window, ht3_tol)
    if not v3.consistent or v3.h is None:
        return None, v3
    v2 = ht2_estimate(b, v3.h, window, tol)
    return (v3.h if v2.consistent else None), v2


def admissible_height(h) -> bool:
    """h = 1 or h >= 2: the values realized as Ht2 (or Ht3) of a wild automorphism."""
    h = to_fraction(h)
    if h <= 0:
        raise ValueError("h must be > 0")
    return h == 1 or h >= 2


# --- powers, products, filtration --------------------------------------------


@dataclass(frozen=True)
class Height:
    """Ht2 data for a group element: height h (math.inf for the identity) and limit constant."""

    h: object
    limit: object = None

    def to_json(self):
        h = "inf" if self.h == math.inf else rational_str(self.h)
        lim = None
        if isinstance(self.limit, CertifiedReal):
            lo, hi = self.limit.interval(64)
            lim = [rational_str(lo), rational_str(hi)]
        elif self.limit is not None:
            lim = rational_str(self.limit)
        return {"h": h, "limit": lim}


def _scale_limit(limit, p: int, h: Fraction, w: int):
    if limit is None or w == 0:
        return limit
    e = h * w
    if e.denominator == 1:
        return limit * Fraction(p) ** int(e)
    return CertifiedReal.coerce(limit) * pow_rational(p, e)


def combine(p: int, components: Sequence[Height], word: Sequence) -> Height:
    """Height of prod_j sigma_j^(alpha_j) for commuting sigma_j.

    ``word[j]`` is None when alpha_j = 0, otherwise w_j = v_p(alpha_j).  A
    power keeps the height and multiplies the limit by p^(h w) since
    i_n(sigma^alpha) = i_{n+w}(sigma).  A product takes the strictly smallest
    height; a tie at the minimum has no rule and raises TieError.
    Commutativity is the caller's responsibility.
    """
    if len(components) != len(word):
        raise ValueError("word length must match the number of components")
    live = []
    for comp, w in zip(components, word):
        if w is None or comp.h == math.inf:
            continue
        if w < 0:
            raise ValueError("p-adic valuations are >= 0")
        h = to_fraction(comp.h)
        live.append((h, _scale_limit(comp.limit, p, h, int(w))))
    if not live:
        return Height(math.inf, None)
    hmin = min(h for h, _ in live)
    at_min = [x for x in live if x[0] == hmin]
    if len(at_min) > 1:
        raise TieError(f"{len(at_min)} components share the minimal height {rational_str(hmin)}")
    return Height(hmin, at_min[0][1])


class GeneratorSystem:
    """Generators sigma_1..sigma_d of a Z_p^d action obeying the min-rule.

    The min-rule i(prod sigma_j^(a_j)) = min_j i(sigma_j^(a_j)) is taken as a
    premise.  Each generator carries LowerBreaks or a known height.
    """

    def __init__(self, generators: Sequence):
        labels = [g[0] for g in generators]
        if not labels:
            raise ValueError("need at least one generator")
        if len(set(labels)) != len(labels):
            raise ValueError("generator labels must be unique")
        self.generators = list(generators)

    @property
    def d(self) -> int:
        return len(self.generators)

    def heights(self, window: int = DEFAULT_WINDOW, tol: float | None = None) -> list[Fraction]:
        out = []
        for label, data in self.generators:
            if isinstance(data, LowerBreaks) or (isinstance(data, tuple) and len(data) == 2):
                h, verdict = derive_height(data, window, tol)
                if h is None:
                    raise ValueError(f"generator {label}: no height supported ({verdict.reason})")
                out.append(h)
            elif isinstance(data, HeightReport):
                if data.height is None:
                    raise ValueError(f"generator {label}: report has no height")
                out.append(data.height)
            elif isinstance(data, Height):
                out.append(to_fraction(data.h))
            else:
                out.append(to_fraction(data))
        return out

    def word_breaks(self, word: Sequence) -> LowerBreaks:
        """i_n of a word from the min-rule; ``word[j]`` is None or v_p(alpha_j)."""
        seqs = []
        p = None
        for (label, data), w in zip(self.generators, word):
            if w is None:
                continue
            if not isinstance(data, LowerBreaks):
                raise TypeError(f"generator {label} has no break data")
            p = data.p
            seqs.append(data.b[w:])
        if not seqs:
            raise ValueError("the identity has no breaks")
        n = min(len(s) for s in seqs)
        return LowerBreaks(p, [min(s[k] for s in seqs) for k in range(n)], strict=False)


@dataclass(frozen=True)
class FiltrationRow:
    h: Fraction
    rank: int
    multiplicity: int

    def to_json(self):
        return {"h": rational_str(self.h), "rank": self.rank, "multiplicity": self.multiplicity}


def filtration(gs, h_grid: Sequence, heights: Sequence | None = None) -> list[FiltrationRow]:
    """rank G[h] and the multiplicity m(h) at each grid point.

    Under the min-rule a word has height >= h iff each generator it uses
    has height >= h, so G[h] is spanned by those generators.
    """
    hs = [to_fraction(x) for x in (heights if heights is not None else gs.heights())]
    rows = []
    for h in h_grid:
        h = to_fraction(h)
        if h <= 0:
            raise ValueError("grid heights must be > 0")
        rank = sum(1 for x in hs if x >= h)
        mult = sum(1 for x in hs if x == h)
        rows.append(FiltrationRow(h, rank, mult))
    return rows


def multiplicities(heights: Sequence) -> dict:
    """m(h) for every height that occurs; the values sum to d."""
    out: dict = {}
    for x in heights:
        x = to_fraction(x)
        out[x] = out.get(x, 0) + 1
    return dict(sorted(out.items()))
