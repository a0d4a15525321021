"""Which accelerator modes an experimental path is expected to reveal.

An experimental path (EP) is the curve Omega = omega + Phi(ktilde) traced
in the (Omega, ktilde) plane as the pulse period is scanned, with
ktilde = epsilon * k at fixed physical kick k.  The arm with epsilon < 0 is
the left arm, the one with epsilon > 0 the right arm.

A (p, m) mode is expected where the path crosses the subcritical part of
its tongue: |m/p - Omega| < |ktilde| / (2 pi sqrt(p)) and
|ktilde| < b p^{-3/2}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np
from scipy.constants import hbar as HBAR
from scipy.optimize import brentq

from .core_map import TWO_PI, OrbitLabel
from .farey import Omega, endpoints, farey_algorithm

DEFAULT_KICK = 0.8 * math.pi
B_DEFAULT = 6.0
B_PRESETS = {"6": 6.0, "2pi": TWO_PI}


@dataclass(frozen=True)
class ExperimentalPath:
    """EP through ``omega`` at ktilde = 0.

    With ``phi`` unset the path is linear, Phi(ktilde) = ktilde / alpha,
    and ``alpha = inf`` gives the vertical path Omega = omega.  A custom
    ``phi`` must be strictly monotone with phi(0) = 0; it overrides alpha.
    """

    omega: Omega
    alpha: float = math.inf
    kick: float = DEFAULT_KICK
    phi: Callable[[float], float] | None = None

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive or infinite, got {self.alpha}")
        if not self.kick > 0:
            raise ValueError("kick strength must be positive")
        if self.phi is not None and self.phi(0.0) != 0.0:
            raise ValueError("phi(0) must vanish")

    @property
    def is_linear(self) -> bool:
        return self.phi is None

    def offset(self, ktilde: float) -> float:
        """Phi(ktilde) = Omega - omega."""
        if self.phi is not None:
            return float(self.phi(ktilde))
        if math.isinf(self.alpha):
            return 0.0
        return ktilde / self.alpha

    def omega_at(self, epsilon: float) -> float:
        return float(self.omega) + self.offset(epsilon * self.kick)


def ep_linear(omega: Omega, alpha: float, kick: float = DEFAULT_KICK) -> ExperimentalPath:
    if not alpha > 0:
        raise ValueError(f"alpha must be positive or infinite, got {alpha}")
    return ExperimentalPath(omega, alpha, kick)


@dataclass(frozen=True)
class PhysicalSetup:
    """Laboratory parameters (SI): kick wavenumber G, gravity g, atom mass,
    resonance order ell and dimensionless kick strength k."""

    G: float
    g: float
    mass: float
    ell: int = 2
    k: float = DEFAULT_KICK
    hbar: float = HBAR

    @property
    def resonant_period(self) -> float:
        """T_ell = 2 pi ell m / (hbar G^2)."""
        return TWO_PI * self.ell * self.mass / (self.hbar * self.G ** 2)

    @property
    def omega_full(self) -> float:
        """G g T_ell^2 / (2 pi), before reduction."""
        return self.G * self.g * self.resonant_period ** 2 / TWO_PI

    @property
    def omega_value(self) -> float:
        """omega_full reduced mod 1 (only 2 pi Omega mod 2 pi enters the map)."""
        return self.omega_full % 1.0

    @property
    def alpha(self) -> float:
        """Small-ktilde slope hbar^2 G^3 k / (2 m^2 ell g) of the path."""
        return self.hbar ** 2 * self.G ** 3 * self.k / (2.0 * self.mass ** 2 * self.ell * self.g)


def ep_physical(setup: PhysicalSetup) -> ExperimentalPath:
    """EP of a period scan T = T_ell (1 + eps / (2 pi ell)) at fixed k:
    Omega = omega (1 + eps / (2 pi ell))^2, the exact curve behind alpha."""
    w = setup.omega_value
    om = Omega.rational(Fraction(w), name=f"{w:.12g}")
    full = setup.omega_full
    scale = TWO_PI * setup.ell * setup.k

    def phi(ktilde: float) -> float:
        # the shift scales the unreduced value; the integer part drops out only at eps = 0
        x = ktilde / scale
        return full * (2.0 * x + x * x)

    return ExperimentalPath(om, setup.alpha, setup.k, phi)


# ---------------------------------------------------------------------------
# tongue intersections


@dataclass(frozen=True)
class ArmWindow:
    """Range of |epsilon| on one arm where both tongue conditions hold."""

    arm: str  # "left" (epsilon < 0) or "right" (epsilon > 0)
    exists: bool
    abs_lo: float = math.nan
    abs_hi: float = math.nan

    @property
    def sign(self) -> int:
        return -1 if self.arm == "left" else 1

    @property
    def epsilon_window(self) -> tuple[float, float]:
        """Signed window, ordered."""
        if not self.exists:
            return (math.nan, math.nan)
        a, b = self.sign * self.abs_lo + 0.0, self.sign * self.abs_hi + 0.0
        return (min(a, b), max(a, b))

    @property
    def representative(self) -> float:
        """Geometric midpoint of the window (half its top when it reaches 0)."""
        if not self.exists:
            return math.nan
        mag = self.abs_hi / 2 if self.abs_lo == 0 else math.sqrt(self.abs_lo * self.abs_hi)
        return self.sign * mag


def ratio_offset(omega: Omega, r: Fraction) -> float:
    """m/p - omega as a float, without cancellation."""
    if omega.is_rational:
        return float(r - omega.exact)
    with mpmath.workprec(omega.prec):
        return float(mpmath.mpf(r.numerator) / r.denominator - omega.mpf())


def critical_kick(label: OrbitLabel, b: float = B_DEFAULT) -> float:
    """|ktilde| above which the tongue is taken as broken: b p^{-3/2}."""
    if not b > 0:
        raise ValueError("b must be positive")
    return b * label.p ** -1.5


def _linear_window(delta: float, beta: float, gamma: float, t_max: float) -> tuple[float, float]:
    # solve |delta - gamma t| < beta t on 0 < t < t_max, gamma the signed path slope
    lo, hi = 0.0, t_max
    for A, B in ((beta + gamma, delta), (beta - gamma, -delta)):
        # A t > B
        if A > 0:
            lo = max(lo, B / A)
        elif A == 0:
            if B >= 0:
                return (math.nan, math.nan)
        else:
            if B >= 0:
                return (math.nan, math.nan)
            hi = min(hi, B / A)
    return (lo, hi) if lo < hi else (math.nan, math.nan)


def _sampled_window(g: Callable[[float], float], t_max: float, samples: int = 4000) -> tuple[float, float]:
    # first run of g > 0 on (0, t_max), edges refined by bisection
    ts = np.linspace(0.0, t_max, samples + 1)[1:]
    vals = np.array([g(t) for t in ts])
    idx = np.flatnonzero(vals > 0)
    if idx.size == 0:
        return (math.nan, math.nan)
    i0 = int(idx[0])
    i1 = i0
    while i1 + 1 < len(ts) and vals[i1 + 1] > 0:
        i1 += 1
    lo = 0.0 if i0 == 0 else brentq(g, ts[i0 - 1], ts[i0], xtol=1e-15)
    hi = t_max if i1 == len(ts) - 1 else brentq(g, ts[i1], ts[i1 + 1], xtol=1e-15)
    return (lo, hi)


def intersects_subcritical(
    ep: ExperimentalPath, label: OrbitLabel, b: float = B_DEFAULT
) -> tuple[ArmWindow, ArmWindow]:
    """(left, right) windows in |epsilon| where the EP lies inside the
    subcritical (p, m) tongue."""
    p = label.p
    t_max = critical_kick(label, b)
    delta = ratio_offset(ep.omega, Fraction(label.m, p))
    beta = 1.0 / (TWO_PI * math.sqrt(p))
    out = []
    for arm, s in (("left", -1), ("right", 1)):
        if ep.is_linear:
            gamma = 0.0 if math.isinf(ep.alpha) else s / ep.alpha
            lo, hi = _linear_window(delta, beta, gamma, t_max)
        else:
            lo, hi = _sampled_window(lambda t: beta * t - abs(delta - ep.offset(s * t)), t_max)
        if math.isnan(lo):
            out.append(ArmWindow(arm, False))
        else:
            out.append(ArmWindow(arm, True, lo / ep.kick, hi / ep.kick))
    return out[0], out[1]


def passes_appro(ep: ExperimentalPath, label: OrbitLabel, b: float = B_DEFAULT) -> bool:
    """Necessary condition |omega - m/p| < b/(2 pi) p^{-2} + |Phi(b p^{-3/2})|."""
    t = critical_kick(label, b)
    reach = max(abs(ep.offset(t)), abs(ep.offset(-t)))
    bound = b / TWO_PI * label.p ** -2.0 + reach
    return abs(ratio_offset(ep.omega, Fraction(label.m, label.p))) < bound


# ---------------------------------------------------------------------------
# predictions


def mode_acceleration(omega_map: float, label: OrbitLabel, epsilon: float) -> float:
    """a = 2 pi (Omega - m/p) / epsilon."""
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    return TWO_PI * (omega_map - label.m / label.p) / epsilon


def quantum_relevance(area: float, epsilon: float) -> float:
    """Island area in units of the effective Planck cell, A / |epsilon|."""
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    if area < 0:
        raise ValueError("area must be non-negative")
    return area / abs(epsilon)


def quantally_relevant(area: float, epsilon: float, threshold: float = 1.0) -> bool:
    return quantum_relevance(area, epsilon) > threshold


@dataclass(frozen=True)
class ModePrediction:
    """One Farey endpoint of omega, with the verdict for both arms.

    ``side`` is where the ratio lies relative to omega ("left", "right", or
    "vertex" when equal); a, the jumping index and the epsilon window are
    reported on the representative arm: the same-side arm when it has a
    window, the other arm otherwise.
    """

    label: OrbitLabel
    side: str
    arms: tuple[ArmWindow, ArmWindow]
    passes_appro: bool
    epsilon: float = math.nan
    acceleration: float = math.nan
    jumping_index: int | None = None

    @property
    def passes_2cond(self) -> bool:
        return any(w.exists for w in self.arms)

    @property
    def observable(self) -> bool:
        return self.passes_appro and self.passes_2cond

    @property
    def both_arms(self) -> bool:
        return all(w.exists for w in self.arms)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.label.m, self.label.p)

    @property
    def window(self) -> ArmWindow | None:
        for w in self._arm_order():
            if w.exists:
                return w
        return None

    def _arm_order(self) -> tuple[ArmWindow, ArmWindow]:
        left, right = self.arms
        return (left, right) if self.side == "left" else (right, left)


def predict_mode(ep: ExperimentalPath, r: Fraction, b: float = B_DEFAULT) -> ModePrediction:
    label = OrbitLabel(r.denominator, r.numerator)
    delta = ratio_offset(ep.omega, r)
    side = "vertex" if delta == 0 and ep.omega.is_rational and r == ep.omega.exact else (
        "left" if delta < 0 else "right")
    arms = intersects_subcritical(ep, label, b)
    pred = ModePrediction(label, side, arms, passes_appro(ep, label, b))
    w = pred.window
    if w is None:
        return pred
    eps = w.representative
    # Omega - m/p = Phi(eps k) - (m/p - omega)
    a = TWO_PI * (ep.offset(eps * ep.kick) - delta) / eps
    return ModePrediction(label, side, arms, pred.passes_appro, eps, a, int(math.copysign(1, eps)) * label.m)


def mode_table(ep: ExperimentalPath, p_max: int, b: float = B_DEFAULT) -> list[ModePrediction]:
    """Every Farey endpoint of omega with denominator <= p_max, observable or not,
    in order of generation."""
    if p_max < 1:
        raise ValueError("p_max must be at least 1")
    chain = farey_algorithm(ep.omega, max_denominator=p_max)
    return [predict_mode(ep, r, b) for r in endpoints(chain)]


def observable_modes(ep: ExperimentalPath, p_max: int, b: float = B_DEFAULT) -> list[ModePrediction]:
    """Farey endpoints that satisfy the approximation bound and meet the
    subcritical tongue on at least one arm."""
    return [m for m in mode_table(ep, p_max, b) if m.observable]
