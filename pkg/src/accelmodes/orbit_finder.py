"""Periodic orbits of the exact map, tongue scans and critical borders."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core_map import (
    TWO_PI,
    CylinderPoint,
    MapParams,
    NotPeriodicError,
    OrbitLabel,
    TorusPoint,
    compose_with_tangent,
    compose_with_tangent_fast,
    cylinder_eps,
    torus_trajectory,
    unwrap_winding,
    wrap,
    wrap_centered,
)
from .gauss_sums import resonant_action
from .perturbation import fixed_point_prediction, params_on_ray, scale, tilt


class WrongWindingError(RuntimeError):
    pass


class DegenerateCircleError(RuntimeError):
    """eps_a = eps_k = 0: every point of the resonant circles is periodic."""


@dataclass(frozen=True)
class FinderConfig:
    tol: float = 1e-12
    max_iter: int = 60
    ring_seeds: int = 8
    ring_radius: float = 0.1
    theta_grid: int = 12
    max_halvings: int = 30


@dataclass(frozen=True)
class PeriodicOrbit:
    label: OrbitLabel
    params: MapParams
    points: tuple[TorusPoint, ...]
    residual: float
    trace: float
    stable: bool
    iterations: int = 0

    @property
    def start(self) -> CylinderPoint:
        return CylinderPoint(self.points[0].J, self.points[0].theta)


def _residual(L: float, theta: float, label: OrbitLabel, ea: float, ek: float):
    L1, th1, a11, a12, a21, a22 = compose_with_tangent_fast(L, theta, label.p, label.m, ea, ek)
    F = (L1 - L, wrap_centered(th1 - theta))
    return F, (a11, a12, a21, a22), max(abs(F[0]), abs(F[1]))


def newton_fixed_point(
    label: OrbitLabel,
    ea: float,
    ek: float,
    seed: CylinderPoint,
    tol: float = 1e-12,
    max_iter: int = 60,
    max_halvings: int = 30,
) -> tuple[float, float, float, int] | None:
    """Damped Newton for M^(p)(x) = x in cylinder coordinates.

    The action residual is not reduced mod 2 pi, which pins the winding to
    ``label.m``.  Returns ``(L, theta, residual, iterations)`` or ``None``.
    """
    L, theta = seed.L, wrap(seed.theta)
    F, M, res = _residual(L, theta, label, ea, ek)
    for it in range(max_iter + 1):
        if res < tol:
            return L, theta, res, it
        if it == max_iter:
            break
        # solve (M - I) step = -F by Cramer's rule
        b11, b12, b21, b22 = M[0] - 1.0, M[1], M[2], M[3] - 1.0
        det = b11 * b22 - b12 * b21
        if det == 0.0 or not math.isfinite(det):
            return None
        dL = (-F[0] * b22 + F[1] * b12) / det
        dth = (-F[1] * b11 + F[0] * b21) / det
        if not (math.isfinite(dL) and math.isfinite(dth)):
            return None
        t = 1.0
        for _ in range(max_halvings):
            Ln, thn = L + t * dL, wrap(theta + t * dth)
            Fn, Mn, rn = _residual(Ln, thn, label, ea, ek)
            if rn < res:
                break
            t *= 0.5
        else:
            return None
        L, theta, F, M, res = Ln, thn, Fn, Mn, rn
    return None


def _build_orbit(params: MapParams, label: OrbitLabel, L: float, theta: float, res: float, it: int) -> PeriodicOrbit:
    ea, ek = cylinder_eps(params, label)
    _, _, M = compose_with_tangent(L, theta, label, ea, ek)
    start = TorusPoint(wrap(L), wrap(theta))
    traj = torus_trajectory(start, params, label.p)
    closure_tol = max(1e-8, 1e3 * res)
    try:
        m = unwrap_winding(traj, params, tol=closure_tol)
    except NotPeriodicError as exc:
        raise WrongWindingError(str(exc)) from exc
    # the torus winding is only defined mod p when Omega is shifted by an integer
    if m != label.m:
        raise WrongWindingError(f"orbit winds {m} times, expected {label.m}")
    for d in range(1, label.p):
        if label.p % d == 0:
            q = traj[d]
            if abs(wrap_centered(q.J - start.J)) < closure_tol and abs(wrap_centered(q.theta - start.theta)) < closure_tol:
                raise WrongWindingError(f"orbit has sub-period {d}")
    trace = float(M[0, 0] + M[1, 1])
    # |trace| = 2 is counted as unstable
    return PeriodicOrbit(label, params, tuple(traj[:-1]), res, trace, abs(trace) < 2.0, it)


def find_orbit(
    params: MapParams,
    label: OrbitLabel,
    seed: CylinderPoint,
    tol: float = 1e-12,
    max_iter: int = 60,
) -> PeriodicOrbit | None:
    """Refine ``seed`` to a (p, m) periodic orbit; ``None`` when Newton fails."""
    ea, ek = cylinder_eps(params, label)
    if ea == 0.0 and ek == 0.0:
        raise DegenerateCircleError(
            f"unperturbed map: circles L = R_{{{label.p},s}} consist of fixed points of M^(p)"
        )
    sol = newton_fixed_point(label, ea, ek, seed, tol=tol, max_iter=max_iter)
    if sol is None:
        return None
    return _build_orbit(params, label, *sol)


def seeds_for(params: MapParams, label: OrbitLabel, config: FinderConfig = FinderConfig()) -> list[CylinderPoint]:
    """Perturbative seed, a ring around it, then a coarse angle grid."""
    seeds: list[CylinderPoint] = []
    centre = CylinderPoint(resonant_action(label.p, 0), 0.0)
    if params.ktilde != 0 and tilt(label, params) <= 1.0:
        eps = math.copysign(1.0, params.ktilde)
        centre = fixed_point_prediction(label, scale(params, label, eps))
        seeds.append(centre)
    for j in range(config.ring_seeds):
        phi = TWO_PI * j / config.ring_seeds
        seeds.append(CylinderPoint(centre.L + config.ring_radius * math.sin(phi),
                                   wrap(centre.theta + config.ring_radius * math.cos(phi))))
    L0 = resonant_action(label.p, 0)
    for j in range(config.theta_grid):
        seeds.append(CylinderPoint(L0, TWO_PI * (j + 0.5) / config.theta_grid))
    return seeds


def find_stable_orbit(
    params: MapParams,
    label: OrbitLabel,
    config: FinderConfig = FinderConfig(),
    extra_seeds: list[CylinderPoint] | None = None,
) -> tuple[PeriodicOrbit | None, PeriodicOrbit | None]:
    """Return ``(stable, any)``: the first stable (p, m) orbit found from the
    seed list, and the first orbit of any stability (for reporting a trace)."""
    first = None
    seeds = list(extra_seeds or []) + seeds_for(params, label, config)
    for seed in seeds:
        try:
            orbit = find_orbit(params, label, seed, tol=config.tol, max_iter=config.max_iter)
        except WrongWindingError:
            continue
        if orbit is None:
            continue
        if orbit.stable:
            return orbit, orbit
        if first is None:
            first = orbit
    return None, first


# ---------------------------------------------------------------------------
# scans


@dataclass
class TongueScan:
    label: OrbitLabel
    omegas: np.ndarray
    ktildes: np.ndarray
    stable: np.ndarray  # (n_ktilde, n_omega) bool
    trace: np.ndarray  # nan where no orbit was found
    area: np.ndarray | None = None
    config: dict = field(default_factory=dict)

    def rows(self):
        for i, k in enumerate(self.ktildes):
            for j, om in enumerate(self.omegas):
                yield (
                    float(om), float(k), bool(self.stable[i, j]), float(self.trace[i, j]),
                    None if self.area is None else float(self.area[i, j]),
                )


def _cell(args):
    omega, ktilde, label, config = args
    params = MapParams(omega, ktilde)
    if ktilde == 0.0 and omega == label.m / label.p:
        return False, math.nan
    stable, any_orbit = find_stable_orbit(params, label, config)
    if stable is not None:
        return True, stable.trace
    if any_orbit is not None:
        return False, any_orbit.trace
    return False, math.nan


def default_threads() -> int:
    return os.cpu_count() or 1


def scan_tongue(
    label: OrbitLabel,
    omega_range: tuple[float, float],
    ktilde_range: tuple[float, float],
    resolution: tuple[int, int],
    config: FinderConfig = FinderConfig(),
    threads: int = 1,
) -> TongueScan:
    """Stability verdict on a grid; ``resolution = (n_omega, n_ktilde)``, endpoints included.

    An axis with a single point samples the lower end of its range, so
    ``(n, 1)`` scans one row at ``ktilde_range[0]``.
    """
    n_om, n_k = resolution
    if n_om < 1 or n_k < 1:
        raise ValueError("resolution must be at least 1 per axis")
    omegas = np.linspace(omega_range[0], omega_range[1], n_om)
    ktildes = np.linspace(ktilde_range[0], ktilde_range[1], n_k)
    tasks = [(float(om), float(k), label, config) for k in ktildes for om in omegas]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_cell, tasks, chunksize=max(1, len(tasks) // (8 * threads))))
    else:
        results = [_cell(t) for t in tasks]
    stable = np.array([r[0] for r in results], dtype=bool).reshape(n_k, n_om)
    trace = np.array([r[1] for r in results], dtype=float).reshape(n_k, n_om)
    return TongueScan(label, omegas, ktildes, stable, trace,
                      config={"resolution": list(resolution), "tol": config.tol, "max_iter": config.max_iter})


def row_boundaries(omegas: np.ndarray, stable_row: np.ndarray, centre: float) -> tuple[float, float] | None:
    """Edges of the run of stable cells around ``centre`` (midpoints to the
    neighbouring unstable cells); ``None`` if no such run exists."""
    idx = np.flatnonzero(stable_row)
    if idx.size == 0:
        return None
    j0 = int(idx[np.argmin(np.abs(omegas[idx] - centre))])
    lo = j0
    while lo > 0 and stable_row[lo - 1]:
        lo -= 1
    hi = j0
    while hi < len(omegas) - 1 and stable_row[hi + 1]:
        hi += 1
    left = omegas[lo] if lo == 0 else 0.5 * (omegas[lo] + omegas[lo - 1])
    right = omegas[hi] if hi == len(omegas) - 1 else 0.5 * (omegas[hi] + omegas[hi + 1])
    return float(left), float(right)


def measured_halfwidths(scan: TongueScan) -> np.ndarray:
    """Half-width in Omega of the stable run at each ktilde (nan if empty)."""
    centre = scan.label.m / scan.label.p
    out = np.full(len(scan.ktildes), math.nan)
    for i in range(len(scan.ktildes)):
        b = row_boundaries(scan.omegas, scan.stable[i], centre)
        if b is not None:
            out[i] = 0.5 * (b[1] - b[0])
    return out


def scaled_overlay(scans: list[TongueScan]) -> list[dict]:
    """Tongue boundaries in the scaled plane ((Omega - m/p) p^2, |ktilde| p^{3/2})."""
    table = []
    for scan in scans:
        p, m = scan.label.p, scan.label.m
        for i, k in enumerate(scan.ktildes):
            b = row_boundaries(scan.omegas, scan.stable[i], m / p)
            if b is None:
                continue
            table.append({
                "p": p,
                "m": m,
                "ktilde": float(k),
                "scaled_ktilde": abs(float(k)) * p ** 1.5,
                "scaled_left": (b[0] - m / p) * p ** 2,
                "scaled_right": (b[1] - m / p) * p ** 2,
            })
    return table


def critical_border(
    label: OrbitLabel,
    lam: float,
    ktilde_max: float,
    config: FinderConfig = FinderConfig(),
    ktilde_min: float | None = None,
    steps: int = 60,
    refine: int = 30,
) -> float:
    """Largest ktilde on the ray of tilt ``lam`` below which the stable (p, m)
    orbit persists, walking up from the vertex.

    Each step is seeded with the previous stable orbit as well as the usual
    seeds; after the first failure the border is refined by bisection.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError("lambda must lie in [0, 1)")
    if ktilde_min is None:
        ktilde_min = ktilde_max / steps
    grid = np.linspace(ktilde_min, ktilde_max, steps)
    last_k, last_orbit = None, None

    def attempt(k: float, prev: PeriodicOrbit | None):
        extra = [prev.start] if prev is not None else None
        return find_stable_orbit(params_on_ray(label, lam, k), label, config, extra)[0]

    for k in grid:
        orbit = attempt(float(k), last_orbit)
        if orbit is None:
            break
        last_k, last_orbit = float(k), orbit
    else:
        return float(grid[-1])
    if last_k is None:
        raise RuntimeError(f"no stable {label} orbit at ktilde = {ktilde_min:g}")
    lo, hi = last_k, float(k)
    for _ in range(refine):
        mid = 0.5 * (lo + hi)
        orbit = attempt(mid, last_orbit)
        if orbit is None:
            hi = mid
        else:
            lo, last_orbit = mid, orbit
    return lo
