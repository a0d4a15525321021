"""First-order predictions near the vertex of a (p, m) tongue.

With Omega = m/p + eps a / (2 pi) and ktilde = eps k, the motion near the
resonant action R_{p,0} is that of the tilted pendulum

    H_res = p L3^2 / 2 + eps V(theta3),   V(theta3) = -p a theta3 + k sqrt(p) cos(theta3),

whose angle relates to the map angle by theta3 = theta + xi(R_{p,0}).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_map import TWO_PI, CylinderPoint, MapParams, OrbitLabel, wrap
from .gauss_sums import gauss_sum, resonant_action


class OutsideTongueError(ValueError):
    """The tilt parameter exceeds 1: the pendulum has no equilibria."""


@dataclass(frozen=True)
class ScaledParams:
    epsilon: float
    a: float
    k: float

    def unscale(self, label: OrbitLabel) -> MapParams:
        return MapParams(label.m / label.p + self.epsilon * self.a / TWO_PI, self.epsilon * self.k)

    @property
    def eps_a(self) -> float:
        return self.epsilon * self.a

    @property
    def eps_k(self) -> float:
        return self.epsilon * self.k


@dataclass(frozen=True)
class PendulumParams:
    p: int
    a: float
    k: float

    @property
    def lam(self) -> float:
        if self.k == 0:
            return math.inf
        return abs(self.a) * math.sqrt(self.p) / self.k

    def potential(self, theta3):
        return -self.p * self.a * theta3 + self.k * math.sqrt(self.p) * np.cos(theta3)

    def potential_d1(self, theta3):
        return -self.p * self.a - self.k * math.sqrt(self.p) * np.sin(theta3)

    def potential_d2(self, theta3):
        return -self.k * math.sqrt(self.p) * np.cos(theta3)


def scale(params: MapParams, label: OrbitLabel, epsilon: float) -> ScaledParams:
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    a = TWO_PI * (params.omega - label.m / label.p) / epsilon
    k = params.ktilde / epsilon
    if k < 0:
        raise ValueError("scaled kick k < 0: flip the sign of epsilon to match ktilde")
    return ScaledParams(epsilon, a, k)


def pendulum_params(label: OrbitLabel, scaled: ScaledParams) -> PendulumParams:
    return PendulumParams(label.p, scaled.a, scaled.k)


def tilt(label: OrbitLabel, params: MapParams) -> float:
    """lambda = |a| sqrt(p) / k, independent of how eps is chosen."""
    if params.ktilde == 0:
        return math.inf
    return abs(TWO_PI * (params.omega - label.m / label.p)) * math.sqrt(label.p) / abs(params.ktilde)


def params_on_ray(label: OrbitLabel, lam: float, ktilde: float, side: int = 1) -> MapParams:
    """Map parameters at tilt ``lam`` and kick ``ktilde``; ``side`` picks the sign of Omega - m/p."""
    offset = lam * abs(ktilde) / (TWO_PI * math.sqrt(label.p))
    return MapParams(label.m / label.p + math.copysign(offset, side), ktilde)


def tongue_margin(label: OrbitLabel, ktilde: float) -> float:
    """Half-width |ktilde| / (2 pi sqrt(p)) of the perturbative tongue in Omega."""
    return abs(ktilde) / (TWO_PI * math.sqrt(label.p))


def inside_tongue(label: OrbitLabel, params: MapParams) -> bool:
    return abs(params.omega - label.m / label.p) <= tongue_margin(label, params.ktilde)


def equilibria(pend: PendulumParams, epsilon_sign: float = 1.0) -> tuple[float, float] | None:
    """Stable and unstable equilibria of the tilted pendulum, in [0, 2 pi).

    Returns ``(theta_stable, theta_unstable)`` or ``None`` when lambda > 1.
    Stability is read off the sign of eps V''; a positive ``epsilon_sign``
    means the stable point sits where V'' > 0.
    """
    if pend.k == 0:
        raise ValueError("k = 0: no pendulum")
    s = -pend.a * math.sqrt(pend.p) / pend.k
    if abs(s) > 1.0:
        return None
    x = math.asin(s)
    roots = (wrap(x), wrap(math.pi - x))
    curv = [epsilon_sign * pend.potential_d2(r) for r in roots]
    if curv[0] > curv[1]:
        return roots[0], roots[1]
    return roots[1], roots[0]


def fixed_point_prediction(
    label: OrbitLabel, scaled: ScaledParams, branch: str = "stable"
) -> CylinderPoint:
    """First-order position of a period-p point of M^(p) near R_{p,0}.

    ``branch="principal"`` uses the principal arcsin branch,
    theta* = -arcsin(a sqrt(p) / k) - xi(R_{p,0}).  Which root that is depends
    on the sign of eps; ``branch="stable"`` (the default) returns the root that
    is elliptic for the given eps, ``"unstable"`` the other one.
    """
    pend = pendulum_params(label, scaled)
    if scaled.k == 0 or pend.lam > 1.0:
        raise OutsideTongueError(f"lambda = {pend.lam:.4g} > 1: outside tongue")
    xi0 = gauss_sum(label.p, label.m, resonant_action(label.p, 0)).phase
    if branch == "principal":
        theta3 = -math.asin(scaled.a * math.sqrt(label.p) / scaled.k)
    elif branch in ("stable", "unstable"):
        roots = equilibria(pend, math.copysign(1.0, scaled.epsilon))
        theta3 = roots[0] if branch == "stable" else roots[1]
    else:
        raise ValueError(f"unknown branch {branch!r}")
    theta = wrap(theta3 - xi0)
    L = resonant_action(label.p, 0)
    if label.p % 2 == 0:
        L += 0.5 * scaled.eps_a + 0.5 * scaled.eps_k * math.sin(theta)
    return CylinderPoint(L, theta)


def hamiltonian(pend: PendulumParams, epsilon: float, L3, theta3):
    return 0.5 * pend.p * np.asarray(L3) ** 2 + epsilon * pend.potential(np.asarray(theta3))


def pendulum_flow(
    state: tuple[float, float],
    pend: PendulumParams,
    epsilon: float,
    dt: float = 1e-3,
    nsteps: int = 1000,
) -> np.ndarray:
    """Leapfrog (kick-drift-kick) integration of H_res.

    Returns an ``(nsteps + 1, 2)`` array of (L3, theta3); theta3 is not wrapped
    because the linear part of V is multivalued on the circle.  One unit of
    time corresponds to one application of M^(p).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    out = np.empty((nsteps + 1, 2))
    L, th = float(state[0]), float(state[1])
    out[0] = L, th
    p = pend.p
    force_a = epsilon * p * pend.a
    force_k = epsilon * pend.k * math.sqrt(p)
    half = 0.5 * dt
    # dL/dt = -eps V'(theta) = eps (p a + k sqrt(p) sin theta), dtheta/dt = p L
    for i in range(1, nsteps + 1):
        L += half * (force_a + force_k * math.sin(th))
        th += dt * p * L
        L += half * (force_a + force_k * math.sin(th))
        out[i] = L, th
    return out


def validity_bounds(label: OrbitLabel, k: float, c: float = 1.0, c4: float = 1.0) -> tuple[float, float]:
    """Upper bounds on |eps| for the first-order map and for the resonant approximation."""
    if k <= 0:
        raise ValueError("k must be positive")
    p = label.p
    denom = k * p ** 1.5 * math.log(1.0 + p / 2.0)
    return c / denom, c4 / denom


def p1_exact_condition(params: MapParams, m: int = 0) -> bool:
    """Exact existence condition for (1, m) fixed points: the fixed-point
    equation sin(theta) = -2 pi (Omega - m) / ktilde must be solvable."""
    if params.ktilde == 0:
        return params.omega == m
    return abs(TWO_PI * (params.omega - m) / params.ktilde) <= 1.0
