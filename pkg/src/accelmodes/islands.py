"""Island areas: the separatrix estimate c p^{-1/4} |ktilde|^{1/2} f(lambda)
and a direct measurement on the exact map."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core_map import TWO_PI, MapParams, OrbitLabel, TorusPoint, compose_period_array, compose_with_tangent, cylinder_eps, wrap_centered
from .perturbation import PendulumParams, equilibria, tilt


class UnstableCenterError(ValueError):
    pass


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")


def h_of_lambda(lam: float) -> float:
    _check_lambda(lam)
    return lam * (math.asin(lam) - math.pi / 2) + math.sqrt(1.0 - lam * lam)


def _u_minus_sin(u: float) -> float:
    if abs(u) < 1e-2:
        u2 = u * u
        return u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0))
    return u - math.sin(u)


def _trigo(u: float, lam: float) -> float:
    # lam (u - sin u) - sqrt(1 - lam^2) (1 - cos u), free of cancellation at small u
    return lam * _u_minus_sin(u) - math.sqrt(1.0 - lam * lam) * 2.0 * math.sin(0.5 * u) ** 2


def u_of_lambda(lam: float) -> float:
    """Angular width of the separatrix: the nonzero root of
    lam u = lam sin u + sqrt(1 - lam^2) (1 - cos u), continuous with u(0) = 2 pi."""
    _check_lambda(lam)
    if lam == 0.0:
        return TWO_PI
    if lam == 1.0:
        return 0.0
    # u = 0 is always a root; the bracket starts just above it
    lo = 1e-9
    if _trigo(lo, lam) >= 0.0:
        # root below the bracket: lam within ~1e-18 of 1, use the small-u expansion
        return 3.0 * math.sqrt(1.0 - lam * lam) / lam
    if _trigo(TWO_PI, lam) <= 0.0:
        # lam below ~1e-32: roundoff in 1 - cos(2 pi) swamps lam, use u ~ 2 pi - 2 sqrt(pi lam)
        return TWO_PI - 2.0 * math.sqrt(math.pi * lam)
    return brentq(_trigo, lo, TWO_PI, args=(lam,), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def f_of_lambda(lam: float) -> float:
    return 4.0 * u_of_lambda(lam) * math.sqrt(max(h_of_lambda(lam), 0.0))


@dataclass(frozen=True)
class SeparatrixGeometry:
    delta_L3: float
    delta_theta3: float
    h: float
    u: float
    f: float


def separatrix_geometry(label: OrbitLabel, ktilde: float, lam: float) -> SeparatrixGeometry:
    h = h_of_lambda(lam)
    u = u_of_lambda(lam)
    dL = 4.0 * label.p ** -0.25 * math.sqrt(abs(ktilde)) * math.sqrt(max(h, 0.0))
    return SeparatrixGeometry(dL, u, h, u, 4.0 * u * math.sqrt(max(h, 0.0)))


def area_perturbative(label: OrbitLabel, ktilde: float, lam: float, c: float = 0.66) -> float:
    if c <= 0:
        raise ValueError("c must be positive")
    return c * label.p ** -0.25 * math.sqrt(abs(ktilde)) * f_of_lambda(lam)


def island_centre_offset(lam: float, sign: float = 1.0) -> float:
    """Angle from the stable point to the middle of the separatrix loop.

    The loop spans [theta_i, theta_r]; it lies on the side of the hyperbolic
    point theta_i where the next hump of eps V is higher.  ``sign`` is the
    sign of a (times that of eps).
    """
    if lam <= 0.0:
        return 0.0
    lam = min(lam, 1.0)
    pend = PendulumParams(1, -sign * lam, 1.0)
    roots = equilibria(pend, 1.0)
    ts, ti = roots
    u = u_of_lambda(lam)

    def w(t):
        return pend.potential(t)

    d = 1.0 if w(ti + TWO_PI) > w(ti) else -1.0
    centre = ti + d * 0.5 * u
    # stable point inside the loop, on the same unwrapped branch
    ts_branch = ts + TWO_PI * round((centre - ts) / TWO_PI)
    return centre - ts_branch


@dataclass(frozen=True)
class AreaConfig:
    grid: int = 100
    iterations: int = 2000
    window_scale: float = 1.5
    max_enlarge: int = 4


@dataclass(frozen=True)
class AreaResult:
    area: float
    trapped: int
    total: int
    window_L: float
    window_theta: float


def area_numerical(
    params: MapParams,
    label: OrbitLabel,
    center: TorusPoint,
    config: AreaConfig = AreaConfig(),
) -> AreaResult:
    """Area of the island around the stable period-p point ``center``.

    A uniform grid of initial conditions fills a window sized from the
    separatrix estimate; a point is trapped if its M^(p) orbit stays inside
    the window for ``config.iterations`` periods.  The angle is followed on
    the lift, so orbits that slip over a hyperbolic point leave the window.
    The window is enlarged when trapped points reach its edge.
    """
    ea, ek = cylinder_eps(params, label)
    L0, th0 = center.J, center.theta
    L1, th1, M = compose_with_tangent(L0, th0, label, ea, ek)
    if abs(L1 - L0) > 1e-6 or abs(wrap_centered(th1 - th0)) > 1e-6:
        raise ValueError("center is not a period-p point of the map")
    if abs(M[0, 0] + M[1, 1]) >= 2.0:
        raise UnstableCenterError("center is not an elliptic point")
    _, raw = compose_period_array(np.array([L0]), np.array([th0]), label, ea, ek)
    lift = TWO_PI * round((raw[0] - th0) / TWO_PI)

    lam = min(tilt(label, params), 1.0)
    geom = separatrix_geometry(label, params.ktilde, lam)
    sign = math.copysign(1.0, ea) * math.copysign(1.0, params.ktilde) if ea != 0 else 1.0
    offset = island_centre_offset(lam, sign)
    half_L = 0.5 * config.window_scale * geom.delta_L3
    half_th = 0.5 * min(config.window_scale * geom.delta_theta3, TWO_PI)
    # guard against a vanishing window very close to the margin
    half_L = max(half_L, 1e-6)
    half_th = max(half_th, 1e-6)

    n = config.grid
    for _ in range(config.max_enlarge + 1):
        cL = (np.arange(n) + 0.5) / n * 2.0 - 1.0
        gL, gT = np.meshgrid(cL * half_L, cL * half_th, indexing="ij")
        Ls = (L0 + gL).ravel()
        ts = (th0 + offset + gT).ravel()
        alive = np.ones(Ls.size, dtype=bool)
        L, th = Ls.copy(), ts.copy()
        for _ in range(config.iterations):
            L, th = compose_period_array(L, th, label, ea, ek)
            th = th - lift
            out = (np.abs(L - L0) > half_L) | (np.abs(th - th0 - offset) > half_th)
            if out.any():
                alive &= ~out
                # freeze escaped points so they cannot overflow
                L = np.where(alive, L, L0)
                th = np.where(alive, th, th0)
        trapped = alive.reshape(n, n)
        touching = trapped[0, :].any() or trapped[-1, :].any()
        if half_th < math.pi:
            touching = touching or trapped[:, 0].any() or trapped[:, -1].any()
        if not touching:
            break
        half_L *= 1.5
        half_th = min(1.5 * half_th, math.pi)
    count = int(trapped.sum())
    window_area = (2 * half_L) * (2 * half_th)
    return AreaResult(window_area * count / (n * n), count, n * n, 2 * half_L, 2 * half_th)


def fit_area_constant(measured: np.ndarray, predicted_unit_c: np.ndarray) -> float:
    """Least-squares c for measured ~ c * predicted_unit_c."""
    measured = np.asarray(measured, float)
    predicted_unit_c = np.asarray(predicted_unit_c, float)
    return float(np.dot(measured, predicted_unit_c) / np.dot(predicted_unit_c, predicted_unit_c))


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
