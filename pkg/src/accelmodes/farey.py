"""Rational approximation of a real number by Farey intervals.

Rationals are ``fractions.Fraction`` values; m(r) is the numerator and p(r)
the denominator of the reduced fraction.  A real target is wrapped in
:class:`Omega`, which answers sign queries ``sign(A omega - B)`` for integers
A, B.  All comparisons in this module go through that one query, so results
are exact for rational targets and certified for irrational ones.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import mpmath

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def num(r: Fraction) -> int:
    return r.numerator


def den(r: Fraction) -> int:
    return r.denominator


# ---------------------------------------------------------------------------
# target numbers


class PrecisionExhausted(ArithmeticError):
    """A comparison could not be decided at the maximum working precision."""


@dataclass(frozen=True)
class Omega:
    """A target number in (0, 1): exact rational or a high-precision real.

    ``generator(prec)`` must return an ``mpmath.mpf`` accurate to ``prec``
    bits; comparisons start at ``prec`` bits and double the precision while
    the difference is within rounding distance, up to ``max_prec``.
    """

    name: str
    exact: Fraction | None = None
    generator: Callable[[int], "mpmath.mpf"] | None = field(default=None, compare=False)
    prec: int = 256
    max_prec: int = 1 << 14

    def __post_init__(self) -> None:
        if (self.exact is None) == (self.generator is None):
            raise ValueError("give exactly one of exact or generator")
        if self.exact is not None and not ZERO < self.exact < ONE:
            raise ValueError(f"omega must lie strictly inside (0, 1), got {self.exact}")
        if self.exact is None and not 0.0 < float(self) < 1.0:
            raise ValueError(f"omega must lie strictly inside (0, 1), got {float(self)}")

    # constructors -----------------------------------------------------------

    @classmethod
    def rational(cls, value: Fraction | str | int, name: str | None = None) -> "Omega":
        value = Fraction(value)
        return cls(name or str(value), exact=value)

    @classmethod
    def golden(cls) -> "Omega":
        return cls("golden", generator=lambda prec: (mpmath.sqrt(5) - 1) / 2)

    @classmethod
    def pi_minus_3(cls) -> "Omega":
        return cls("pi-3", generator=lambda prec: mpmath.pi - 3)

    @classmethod
    def parse(cls, text: str) -> "Omega":
        """``golden``, ``pi-3``, a fraction ``r/s`` or a decimal literal.

        A decimal literal is taken as the exact rational it denotes, so
        ``0.390152`` means 390152/1000000.
        """
        t = text.strip().lower()
        if t in ("golden", "golden-mean", "phi"):
            return cls.golden()
        if t in ("pi-3", "pi - 3"):
            return cls.pi_minus_3()
        if re.fullmatch(r"\d+\s*/\s*\d+", t) or re.fullmatch(r"\d*\.\d+|\d+\.\d*|\d+", t):
            return cls.rational(Fraction(t.replace(" ", "")), name=text.strip())
        raise ValueError(f"cannot parse omega {text!r}")

    # queries ----------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.exact is not None

    def mpf(self, prec: int | None = None):
        with mpmath.workprec(prec or self.prec):
            if self.exact is not None:
                return mpmath.mpf(self.exact.numerator) / self.exact.denominator
            return +self.generator(prec or self.prec)

    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return float(self.mpf(64))

    def sign_linear(self, A: int, B: int) -> int:
        """Sign of A * omega - B, exact."""
        if self.exact is not None:
            v = A * self.exact - B
            return (v > 0) - (v < 0)
        if A == 0:
            return (B < 0) - (B > 0)
        prec = self.prec
        while prec <= self.max_prec:
            with mpmath.workprec(prec):
                x = self.generator(prec)
                diff = A * x - B
                scale = max(abs(A), abs(B), 1)
                if abs(diff) > scale * mpmath.ldexp(1, 8 - prec):
                    return 1 if diff > 0 else -1
            prec *= 2
        raise PrecisionExhausted(f"cannot separate {self.name} from {B}/{A}")

    def compare(self, r: Fraction) -> int:
        """Sign of omega - r."""
        return self.sign_linear(r.denominator, r.numerator)

    def d(self, r: Fraction):
        """|omega - r|: a Fraction for rational omega, an mpf otherwise."""
        if self.exact is not None:
            return abs(self.exact - r)
        with mpmath.workprec(self.prec):
            return abs(self.generator(self.prec) - mpmath.mpf(r.numerator) / r.denominator)

    def delta(self, r: Fraction):
        """p(r) |omega - r|."""
        if self.exact is not None:
            return r.denominator * self.d(r)
        with mpmath.workprec(self.prec):
            return r.denominator * self.d(r)

    def d_closer(self, r: Fraction, s: Fraction) -> int:
        """-1 if r is d-closer than s, +1 if s is d-closer, 0 on a tie."""
        return self._closer(r, s, 1, 1)

    def delta_closer(self, r: Fraction, s: Fraction) -> int:
        """Same as :meth:`d_closer` for the denominator-weighted distance."""
        return self._closer(r, s, r.denominator, s.denominator)

    def _closer(self, r: Fraction, s: Fraction, wr: int, ws: int) -> int:
        # sign of wr |w - r| - ws |w - s|, as one linear query in omega
        sr, ss = self.compare(r), self.compare(s)
        # wr sr (w - r) - ws ss (w - s) = (wr sr - ws ss) w - (wr sr r - ws ss s)
        a = wr * sr - ws * ss
        b = wr * sr * r - ws * ss * s
        return self.sign_linear(a * b.denominator, b.numerator)


# ---------------------------------------------------------------------------
# Farey intervals


@dataclass(frozen=True)
class FareyInterval:
    """Closed interval [left, right] with unit determinant, or the singleton [w]."""

    left: Fraction
    right: Fraction

    def __post_init__(self) -> None:
        if self.left == self.right:
            return
        if not self.left < self.right:
            raise ValueError("left endpoint must be smaller")
        if determinant(self.left, self.right) != 1:
            raise ValueError(f"[{self.left}, {self.right}] is not a Farey interval")

    @classmethod
    def singleton(cls, w: Fraction) -> "FareyInterval":
        return cls(w, w)

    @property
    def is_singleton(self) -> bool:
        return self.left == self.right

    @property
    def width(self) -> Fraction:
        return self.right - self.left

    @property
    def mediant(self) -> Fraction:
        return mediant(self.left, self.right)

    def contains(self, r: Fraction) -> bool:
        return self.left <= r <= self.right

    def __str__(self) -> str:
        if self.is_singleton:
            return f"[{self.left}]"
        return f"[{self.left}, {self.right}]"


def determinant(r1: Fraction, r2: Fraction) -> int:
    """m(r2) p(r1) - m(r1) p(r2)."""
    return r2.numerator * r1.denominator - r1.numerator * r2.denominator


def mediant(r1: Fraction, r2: Fraction) -> Fraction:
    """(m1 + m2) / (p1 + p2), reduced."""
    return Fraction(r1.numerator + r2.numerator, r1.denominator + r2.denominator)


UNIT = FareyInterval(ZERO, ONE)


def farey_step(F: FareyInterval, omega: Omega) -> FareyInterval:
    """Half of F that contains omega; the singleton [omega] when the mediant hits it."""
    if F.is_singleton:
        if omega.compare(F.left) != 0:
            raise ValueError(f"{omega.name} is not in {F}")
        return F
    if omega.compare(F.left) <= 0 or omega.compare(F.right) >= 0:
        raise ValueError(f"{omega.name} is not an interior point of {F}")
    med = F.mediant
    side = omega.compare(med)
    if side == 0:
        return FareyInterval.singleton(med)
    if side < 0:
        return FareyInterval(F.left, med)
    return FareyInterval(med, F.right)


def farey_algorithm(
    omega: Omega, max_denominator: int | None = None, max_steps: int | None = None
) -> list[FareyInterval]:
    """F_0 = [0, 1], F_{n+1} = step(F_n), stopping at [omega], after
    ``max_steps`` steps, or before an endpoint denominator would exceed
    ``max_denominator``."""
    if max_denominator is None and max_steps is None and not omega.is_rational:
        raise ValueError("an irrational omega needs max_denominator or max_steps")
    out = [UNIT]
    F = UNIT
    while not F.is_singleton:
        if max_steps is not None and len(out) > max_steps:
            break
        nxt = farey_step(F, omega)
        if max_denominator is not None and max(nxt.left.denominator, nxt.right.denominator) > max_denominator:
            break
        out.append(nxt)
        F = nxt
    return out


def endpoints(intervals: list[FareyInterval]) -> list[Fraction]:
    """Distinct endpoints in order of first appearance."""
    seen: dict[Fraction, None] = {}
    for F in intervals:
        seen.setdefault(F.left)
        seen.setdefault(F.right)
    return list(seen)


def closer_endpoint(F: FareyInterval, omega: Omega) -> Fraction:
    """The d-closer endpoint; on a tie the one with the smaller denominator."""
    if F.is_singleton:
        return F.left
    c = omega.d_closer(F.left, F.right)
    if c < 0:
        return F.left
    if c > 0:
        return F.right
    return F.left if F.left.denominator <= F.right.denominator else F.right


def farey_approximant(omega: Omega, n: int) -> Fraction:
    """r*_{omega,n}: the d-closer endpoint of F_{omega,n}."""
    if n < 0:
        raise ValueError("n must be non-negative")
    F = farey_algorithm(omega, max_steps=n)[-1]
    return closer_endpoint(F, omega)


def d_best_approximants(omega: Omega, p_max: int) -> list[Fraction]:
    """All best d-approximants with denominator <= p_max, by denominator.

    0/1 and 1/1 qualify trivially; every other one is the d-closer endpoint
    of some Farey interval of omega.
    """
    out = {ZERO, ONE}
    for F in farey_algorithm(omega, max_denominator=p_max):
        # fractions inside F have denominators above both endpoints, and those
        # outside are farther than the endpoint on their side
        out.add(closer_endpoint(F, omega))
    return sorted(out, key=lambda r: (r.denominator, r))


def convergents(omega: Omega, p_max: int) -> list[Fraction]:
    """Continued-fraction convergents with denominator <= p_max, starting at 0/1.

    Partial quotients are found by galloping over intermediate fractions, so
    only exact sign queries are used.
    """
    out = []
    h2, k2, h1, k1 = 0, 1, 1, 0  # h_{n-2}/k_{n-2}, h_{n-1}/k_{n-1}
    while True:
        # sign of the current remainder denominator: sign(k1 w - h1)
        sden = omega.sign_linear(k1, h1)
        if sden == 0:
            break

        def ge(a: int) -> bool:
            # x_n >= a  <=>  (h2 + a h1) - (k2 + a k1) w has the sign of sden (or is 0)
            s = -omega.sign_linear(k2 + a * k1, h2 + a * h1)
            return s == 0 or s == sden

        lo = 0 if ge(0) else None
        if lo is None:
            break
        hi = 1
        while ge(hi):
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ge(mid):
                lo = mid
            else:
                hi = mid
        a = lo
        h, k = a * h1 + h2, a * k1 + k2
        if k > p_max:
            break
        out.append(Fraction(h, k))
        if omega.sign_linear(k, h) == 0:
            break
        h2, k2, h1, k1 = h1, k1, h, k
    return out


def is_convergent(r: Fraction, convs: list[Fraction]) -> bool:
    return r in set(convs)


# ---------------------------------------------------------------------------
# theorem checks


@dataclass
class TheoremReport:
    omega: str
    steps: int = 0
    nesting: bool = True
    unit_determinant: bool = True
    width: bool = True
    mediant_denominator: bool = True
    t3: bool = True
    t3_tie_terminal: bool = True
    t5: bool = True
    terminated: bool = False
    t6_ratio_left: float = math.nan
    t6_ratio_right: float = math.nan
    failures: list[str] = field(default_factory=list)

    @property
    def exact_ok(self) -> bool:
        return all((self.nesting, self.unit_determinant, self.width,
                    self.mediant_denominator, self.t3, self.t3_tie_terminal, self.t5))

    @property
    def t6_decreasing(self) -> bool:
        """Trend only; a missing ratio (too few endpoints) is not flagged."""
        return all(math.isnan(r) or r < 1.0 for r in (self.t6_ratio_left, self.t6_ratio_right))


def check_theorems(omega: Omega, depth: int, eta: float = 0.5) -> TheoremReport:
    """Per-step checks of nesting, unit determinant, width, the mediant
    denominator, the delta-closer survival rule, and that one endpoint of
    each interval is a convergent.  The decay of p^{2 - eta} d along both
    endpoint sequences is summarised by a late/early ratio (reported, never
    asserted)."""
    rep = TheoremReport(omega.name)
    chain = farey_algorithm(omega, max_steps=depth)
    rep.steps = len(chain) - 1
    rep.terminated = chain[-1].is_singleton
    pmax = max(max(F.left.denominator, F.right.denominator) for F in chain)
    convs = set(convergents(omega, pmax))
    for n, F in enumerate(chain):
        if not F.is_singleton:
            if determinant(F.left, F.right) != 1:
                rep.unit_determinant = False
                rep.failures.append(f"D1 at n={n}")
            if F.width != Fraction(1, F.left.denominator * F.right.denominator):
                rep.width = False
                rep.failures.append(f"width at n={n}")
            # BT(b): the mediant is the least-denominator fraction strictly inside
            if (F.mediant.denominator != F.left.denominator + F.right.denominator
                    or simplest_between(F.left, F.right) != F.mediant):
                rep.mediant_denominator = False
                rep.failures.append(f"BT(b) mediant at n={n}")
            if F.left not in convs and F.right not in convs:
                rep.t5 = False
                rep.failures.append(f"T5 at n={n}")
        elif F.left not in convs:
            rep.t5 = False
            rep.failures.append(f"T5 singleton at n={n}")
        if n + 1 < len(chain):
            G = chain[n + 1]
            if not (F.left <= G.left and G.right <= F.right):
                rep.nesting = False
                rep.failures.append(f"nesting at n={n}")
            if not F.is_singleton:
                if not G.width < F.width:
                    rep.nesting = False
                    rep.failures.append(f"width not decreasing at n={n}")
                c = omega.delta_closer(F.left, F.right)
                if c == 0:
                    if not (G.is_singleton and omega.is_rational):
                        rep.t3_tie_terminal = False
                        rep.failures.append(f"T3 tie at n={n}")
                else:
                    winner = F.left if c < 0 else F.right
                    if winner not in (G.left, G.right):
                        rep.t3 = False
                        rep.failures.append(f"T3 at n={n}")
    rep.t6_ratio_left = _decay_ratio(omega, [F.left for F in chain if not F.is_singleton], eta)
    rep.t6_ratio_right = _decay_ratio(omega, [F.right for F in chain if not F.is_singleton], eta)
    return rep


def _decay_ratio(omega: Omega, seq: list[Fraction], eta: float) -> float:
    """max of p^{2 - eta} d over the later half of the distinct endpoints
    divided by its max over the earlier half; nan when too short."""
    distinct: list[Fraction] = []
    for r in seq:
        if r.denominator > 1 and (not distinct or distinct[-1] != r):
            distinct.append(r)
    vals = [r.denominator ** (2 - eta) * float(omega.d(r)) for r in distinct]
    h = len(vals) // 2
    if h == 0:
        return math.nan
    first = max(vals[:h])
    return max(vals[h:]) / first if first > 0 else math.nan


# ---------------------------------------------------------------------------
# Farey series and brute-force references


def farey_series(M: int) -> list[Fraction]:
    """All reduced fractions in [0, 1] with denominator <= M, ascending."""
    if M < 1:
        raise ValueError("M must be at least 1")
    a, b, c, d = 0, 1, 1, M
    out = [Fraction(0, 1)]
    while c <= M:
        k = (M + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
        out.append(Fraction(a, b))
    return out


def check_farey_series(series: list[Fraction]) -> tuple[bool, bool]:
    """(F1, F2): unit determinant between neighbours, and each middle
    element is the mediant of its neighbours."""
    f1 = all(determinant(r1, r2) == 1 for r1, r2 in zip(series, series[1:]))
    f2 = all(mediant(r1, r3) == r2 for r1, r2, r3 in zip(series, series[1:], series[2:]))
    return f1, f2


def brute_force_dbas(omega: Omega, p_max: int) -> list[Fraction]:
    """dBAs by definition: r beats every fraction of smaller denominator."""
    out = []
    best: Fraction | None = None  # d-closest fraction seen so far, smaller denominators
    for q in range(1, p_max + 1):
        level = [Fraction(m, q) for m in range(q + 1) if math.gcd(m, q) == 1]
        for r in level:
            if best is None or omega.d_closer(r, best) < 0:
                out.append(r)
        for r in level:
            if best is None or omega.d_closer(r, best) < 0:
                best = r
    return sorted(out, key=lambda r: (r.denominator, r))


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Fraction of least denominator in the open interval (lo, hi), lo < hi."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    fl = math.floor(lo)
    if fl + 1 < hi:
        return Fraction(fl + 1)
    # fl <= lo < hi <= fl + 1; recurse on reciprocals of the fractional parts
    if lo == fl:
        return fl + Fraction(1, math.floor(1 / (hi - fl)) + 1)
    return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl))


def iter_farey_intervals(max_sum: int) -> Iterator[FareyInterval]:
    """Every Farey interval in [0, 1] with p' + p'' <= max_sum (Stern-Brocot walk)."""
    stack = [UNIT]
    while stack:
        F = stack.pop()
        yield F
        m = F.mediant
        for G in (FareyInterval(F.left, m), FareyInterval(m, F.right)):
            if G.left.denominator + G.right.denominator <= max_sum:
                stack.append(G)
