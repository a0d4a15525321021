"""Iteration of the kicked torus map and its cylinder lift.

Torus map, with the angle advanced *before* it is used in the kick::

    theta' = theta + J                           (mod 2 pi)
    J'     = J + 2 pi Omega + ktilde sin(theta')  (mod 2 pi)

Near a resonance m/p the drift is removed with L_n = J_n - 2 pi n m / p,
giving the time-dependent cylinder map M_n (period p in n) whose p-fold
composition M^(p) no longer depends on n.

Coordinates are always ordered (action, angle): ``(J, theta)`` on the torus
and ``(L, theta)`` on the cylinder.  Angles are reduced into [0, 2 pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class NotPeriodicError(ValueError):
    """Raised when a trajectory fails to close on the torus."""


def wrap(x: float) -> float:
    """Reduce an angle into [0, 2 pi) by floored remainder."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    # fmod of a tiny negative number plus 2 pi can round up to 2 pi
    if y >= TWO_PI:
        y = 0.0
    return y


def wrap_centered(x: float) -> float:
    """Reduce an angle difference into (-pi, pi]."""
    y = wrap(x + math.pi) - math.pi
    if y == -math.pi:
        y = math.pi
    return y


@dataclass(frozen=True)
class MapParams:
    omega: float
    ktilde: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega) and math.isfinite(self.ktilde)):
            raise ValueError("omega and ktilde must be finite")


@dataclass(frozen=True)
class TorusPoint:
    J: float
    theta: float

    @classmethod
    def reduced(cls, J: float, theta: float) -> "TorusPoint":
        return cls(wrap(J), wrap(theta))


@dataclass(frozen=True)
class CylinderPoint:
    L: float
    theta: float

    @classmethod
    def reduced(cls, L: float, theta: float) -> "CylinderPoint":
        return cls(L, wrap(theta))


@dataclass(frozen=True)
class OrbitLabel:
    """Period ``p`` and winding ``m`` of a periodic orbit (winding ratio m/p).

    A pair with a common factor is rejected: it denotes a different orbit
    (for instance one born in a bifurcation), not the reduced one.
    """

    p: int
    m: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, (int, np.integer)) or not isinstance(self.m, (int, np.integer)):
            raise TypeError("p and m must be integers")
        if self.p < 1:
            raise ValueError(f"period must be positive, got p={self.p}")
        if self.m < 0:
            raise ValueError(f"winding must be non-negative, got m={self.m}")
        if math.gcd(self.p, self.m) != 1:
            raise ValueError(f"({self.p},{self.m}) is not a coprime pair")

    @classmethod
    def parse(cls, text: str) -> "OrbitLabel":
        p, m = (int(s) for s in text.split(","))
        return cls(p, m)

    @property
    def ratio(self) -> float:
        return self.m / self.p

    def __str__(self) -> str:
        return f"({self.p},{self.m})"


# ---------------------------------------------------------------------------
# torus


def step_torus(pt: TorusPoint, params: MapParams) -> TorusPoint:
    theta = wrap(pt.theta + pt.J)
    J = wrap(pt.J + TWO_PI * params.omega + params.ktilde * math.sin(theta))
    return TorusPoint(J, theta)


def torus_trajectory(pt: TorusPoint, params: MapParams, nsteps: int) -> list[TorusPoint]:
    """Return ``nsteps + 1`` points starting with ``pt``."""
    out = [pt]
    for _ in range(nsteps):
        pt = step_torus(pt, params)
        out.append(pt)
    return out


def jacobian_torus(pt: TorusPoint, params: MapParams) -> np.ndarray:
    """One-step Jacobian d(J', theta')/d(J, theta)."""
    c = params.ktilde * math.cos(pt.theta + pt.J)
    return np.array([[1.0 + c, c], [1.0, 1.0]])


# ---------------------------------------------------------------------------
# cylinder


def cylinder_drive(label: OrbitLabel, n: int) -> float:
    """Angle shift 2 pi m n / p of M_n, reduced using the n -> n + p period."""
    return TWO_PI * ((label.m * n) % label.p) / label.p


def step_cylinder(
    n: int,
    pt: CylinderPoint,
    params: MapParams | None,
    label: OrbitLabel,
    epsilon_a: float,
    epsilon_k: float,
) -> CylinderPoint:
    """Apply M_n.  ``params`` is accepted for signature symmetry and unused;
    the map is fully specified by ``epsilon_a`` and ``epsilon_k``."""
    theta = wrap(pt.theta + pt.L + cylinder_drive(label, n))
    L = pt.L + epsilon_a + epsilon_k * math.sin(theta)
    return CylinderPoint(L, theta)


def _compose(L: float, theta: float, p: int, m: int, ea: float, ek: float) -> tuple[float, float]:
    for n in range(p):
        theta = theta + L + TWO_PI * ((m * n) % p) / p
        theta = math.fmod(theta, TWO_PI)
        if theta < 0.0:
            theta += TWO_PI
        L = L + ea + ek * math.sin(theta)
    return L, wrap(theta)


def compose_period(pt: CylinderPoint, eps: tuple[float, float], label: OrbitLabel) -> CylinderPoint:
    """One application of M^(p) = M_{p-1} o ... o M_0; ``eps = (eps_a, eps_k)``."""
    L, theta = _compose(pt.L, pt.theta, label.p, label.m, eps[0], eps[1])
    return CylinderPoint(L, theta)


def compose_with_tangent_fast(
    L: float, theta: float, p: int, m: int, ea: float, ek: float
) -> tuple[float, float, float, float, float, float]:
    """Float64 variant of :func:`compose_with_tangent` returning
    ``(L, theta, a11, a12, a21, a22)``; used inside Newton iterations."""
    a11, a12, a21, a22 = 1.0, 0.0, 0.0, 1.0
    for n in range(p):
        theta = math.fmod(theta + L + TWO_PI * ((m * n) % p) / p, TWO_PI)
        if theta < 0.0:
            theta += TWO_PI
        c = ek * math.cos(theta)
        L = L + ea + ek * math.sin(theta)
        a11, a12, a21, a22 = (1.0 + c) * a11 + c * a21, (1.0 + c) * a12 + c * a22, a11 + a21, a12 + a22
    return L, wrap(theta), a11, a12, a21, a22


def compose_with_tangent(
    L: float, theta: float, label: OrbitLabel, ea: float, ek: float
) -> tuple[float, float, np.ndarray]:
    """Image under M^(p) together with the Jacobian in (L, theta) order."""
    p, m = label.p, label.m
    # extended precision keeps det = 1 to roundoff even when the entries grow
    one, zero = np.longdouble(1.0), np.longdouble(0.0)
    a11, a12, a21, a22 = one, zero, zero, one
    for n in range(p):
        theta = theta + L + TWO_PI * ((m * n) % p) / p
        theta = math.fmod(theta, TWO_PI)
        if theta < 0.0:
            theta += TWO_PI
        c = np.longdouble(ek * math.cos(theta))
        L = L + ea + ek * math.sin(theta)
        # one-step Jacobian [[1 + c, c], [1, 1]] times the accumulated matrix
        b11 = (1.0 + c) * a11 + c * a21
        b12 = (1.0 + c) * a12 + c * a22
        b21 = a11 + a21
        b22 = a12 + a22
        a11, a12, a21, a22 = b11, b12, b21, b22
    return L, wrap(theta), np.array([[a11, a12], [a21, a22]], dtype=float)


def tangent_period(pt: CylinderPoint, eps: tuple[float, float], label: OrbitLabel) -> np.ndarray:
    """Jacobian of M^(p) at ``pt`` as a 2x2 array, rows/cols ordered (L, theta)."""
    return compose_with_tangent(pt.L, pt.theta, label, eps[0], eps[1])[2]


def cylinder_eps(params: MapParams, label: OrbitLabel) -> tuple[float, float]:
    """(eps_a, eps_k) of the cylinder map for the given torus parameters."""
    return TWO_PI * (params.omega - label.m / label.p), params.ktilde


def compose_period_array(
    L: np.ndarray, theta: np.ndarray, label: OrbitLabel, ea: float, ek: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised M^(p) on arrays with the angle left *unwrapped*.

    The caller removes the constant multiple of 2 pi that a resonant point
    picks up per period, so that a librating point keeps a bounded angle.
    """
    p, m = label.p, label.m
    for n in range(p):
        theta = theta + L + TWO_PI * ((m * n) % p) / p
        L = L + ea + ek * np.sin(theta)
    return L, theta


# ---------------------------------------------------------------------------
# winding


def unwrap_winding(
    trajectory: Sequence[TorusPoint], params: MapParams, tol: float = 1e-8
) -> int:
    """Winding m of a closed torus trajectory of ``len(trajectory) - 1`` steps.

    The unwrapped J increment of each step is 2 pi Omega + ktilde sin(theta'),
    so the total over one period must be 2 pi m.
    """
    if len(trajectory) < 2:
        raise ValueError("need at least one step")
    first, last = trajectory[0], trajectory[-1]
    gap = max(abs(wrap_centered(last.J - first.J)), abs(wrap_centered(last.theta - first.theta)))
    if gap > tol:
        raise NotPeriodicError(f"trajectory does not close (gap {gap:.3e})")
    total = 0.0
    for pt in trajectory[1:]:
        total += TWO_PI * params.omega + params.ktilde * math.sin(pt.theta)
    m = round(total / TWO_PI)
    if abs(total - TWO_PI * m) > max(tol, 1e-9) * len(trajectory):
        raise NotPeriodicError("accumulated action is not a multiple of 2 pi")
    return int(m)


def conjugate_point(pt: TorusPoint) -> TorusPoint:
    """Image under theta -> theta + pi, which conjugates ktilde -> -ktilde."""
    return TorusPoint(pt.J, wrap(pt.theta + math.pi))


def torus_to_cylinder(pt: TorusPoint, n: int, label: OrbitLabel) -> CylinderPoint:
    return CylinderPoint(pt.J - TWO_PI * n * label.m / label.p, pt.theta)


def cylinder_to_torus(pt: CylinderPoint, n: int, label: OrbitLabel) -> TorusPoint:
    return TorusPoint(wrap(pt.L + TWO_PI * n * label.m / label.p), pt.theta)


def determinant_drift(pt: TorusPoint, params: MapParams, nsteps: int) -> float:
    """Largest |det - 1| of the accumulated tangent map along ``nsteps``
    steps of the torus orbit of ``pt``.  Start on an elliptic orbit to keep
    the product bounded."""
    a11, a12, a21, a22 = 1.0, 0.0, 0.0, 1.0
    J, theta = pt.J, pt.theta
    w, k = TWO_PI * params.omega, params.ktilde
    worst = 0.0
    for _ in range(nsteps):
        theta = math.fmod(theta + J, TWO_PI)
        c = k * math.cos(theta)
        J = math.fmod(J + w + k * math.sin(theta), TWO_PI)
        a11, a12, a21, a22 = (1.0 + c) * a11 + c * a21, (1.0 + c) * a12 + c * a22, a11 + a21, a12 + a22
        worst = max(worst, abs(a11 * a22 - a12 * a21 - 1.0))
    return worst
