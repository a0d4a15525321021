"""Generalized Gauss sums G(p, m, L) = sum_{n=1}^p exp(i pi m n (n-1) / p + i n L).

The sum is the polynomial P(p, m, z) = sum_n C(p, m, n) z^n evaluated at
z = exp(iL).  Its modulus and phase on the resonant actions fix the size and
position of the islands of a (p, m) orbit.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def chi(p: int) -> int:
    """Characteristic function of the even integers."""
    return 1 if p % 2 == 0 else 0


def _check(p: int, m: int) -> None:
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    if math.gcd(p, m) != 1:
        raise ValueError(f"({p},{m}) is not a coprime pair")


@lru_cache(maxsize=512)
def coefficients(p: int, m: int) -> tuple[complex, ...]:
    """C(p, m, n) for n = 1..p.  The phase m n (n-1) is reduced mod 2p exactly."""
    _check(p, m)
    return tuple(
        cmath.exp(1j * math.pi * ((m * n * (n - 1)) % (2 * p)) / p) for n in range(1, p + 1)
    )


def gauss_polynomial(p: int, m: int, z: complex) -> complex:
    """P(p, m, z) by Horner's rule."""
    acc = 0j
    for c in reversed(coefficients(p, m)):
        acc = acc * z + c
    return acc * z


def gauss_polynomial_derivative(p: int, m: int, z: complex, order: int = 1) -> complex:
    """First or second z-derivative of P(p, m, z), by Horner on n C z^(n-1) etc."""
    cs = coefficients(p, m)
    if order == 1:
        acc = 0j
        for n in range(p, 0, -1):
            acc = acc * z + n * cs[n - 1]
        return acc
    if order == 2:
        acc = 0j
        for n in range(p, 1, -1):
            acc = acc * z + n * (n - 1) * cs[n - 1]
        return acc
    raise ValueError("order must be 1 or 2")


def resonant_action(p: int, s: int) -> float:
    """R_{p,s} = pi (2 s - chi(p)) / p."""
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    return math.pi * (2 * s - chi(p)) / p


@dataclass(frozen=True)
class GaussValue:
    value: complex
    modulus: float
    phase: float


def gauss_sum(p: int, m: int, L: float) -> GaussValue:
    """G(p, m, L) with modulus A(L) and principal phase xi(L) in (-pi, pi]."""
    g = gauss_polynomial(p, m, cmath.exp(1j * L))
    return GaussValue(g, abs(g), cmath.phase(g))


def gauss_sum_direct(p: int, m: int, L: float) -> complex:
    """Term-by-term evaluation of the defining sum (no Horner, no reduction)."""
    return sum(
        cmath.exp(1j * math.pi * m * s * (s - 1) / p + 1j * s * L) for s in range(1, p + 1)
    )


def rho(p: int, m: int, s: int) -> complex:
    """Evaluation points rho_s = exp(i pi m (2 s + chi(p)) / p)."""
    k = (m * (2 * s + chi(p))) % (2 * p)
    return cmath.exp(1j * math.pi * k / p)


@dataclass(frozen=True)
class IdentityReport:
    p: int
    m: int
    shift: float
    derivative: float
    modulus: float

    @property
    def worst(self) -> float:
        return max(self.shift, self.derivative, self.modulus)


def check_identities(p: int, m: int) -> IdentityReport:
    """Maximum residuals of the shift, derivative and modulus identities.

    shift:      P(rho_{s+1}) = P(rho_s) / rho_s             for all s
    derivative: P'(rho_0) = (p+1)/2 P(rho_0)                  (odd p)
                P'(rho_0) = p / (2 rho_0) (P(rho_0) + 1)      (even p)
    modulus:    |P(rho_s)| = sqrt(p)                          for all s
    """
    _check(p, m)
    values = [gauss_polynomial(p, m, rho(p, m, s)) for s in range(p + 1)]
    shift = max(abs(values[s + 1] - values[s] / rho(p, m, s)) for s in range(p))
    modulus = max(abs(abs(v) - math.sqrt(p)) for v in values[:p])
    r0 = rho(p, m, 0)
    d0 = gauss_polynomial_derivative(p, m, r0)
    if p % 2:
        derivative = abs(d0 - 0.5 * (p + 1) * values[0])
    else:
        derivative = abs(d0 - p / (2.0 * r0) * (values[0] + 1.0))
    return IdentityReport(p, m, shift, derivative, modulus)


def coprime_pairs(p_max: int) -> list[tuple[int, int]]:
    """All (p, m) with 1 <= p <= p_max, 0 <= m < p and gcd(p, m) = 1."""
    return [(p, m) for p in range(1, p_max + 1) for m in range(p) if math.gcd(p, m) == 1]


@dataclass(frozen=True)
class DerivativeBoundReport:
    p: int
    m: int
    max_first: float
    max_second: float
    ratio_first: float
    ratio_second: float
    c1: float
    c2: float

    @property
    def holds(self) -> bool:
        return self.ratio_first <= self.c1 and self.ratio_second <= self.c2


def check_derivative_bounds(
    p: int, m: int, samples: int | np.ndarray = 10_000, c1: float = 2.0, c2: float = 2.0
) -> DerivativeBoundReport:
    """Empirical |P'| and |P''| on the unit circle against p^{3/2} ln(1 + p/2)
    and p^{5/2} ln(1 + p/2).  The returned ratios are the empirical constants."""
    _check(p, m)
    if np.isscalar(samples):
        zs = np.exp(1j * np.linspace(0.0, 2 * math.pi, int(samples), endpoint=False))
    else:
        zs = np.asarray(samples, dtype=complex)
    cs = np.array(coefficients(p, m))
    n = np.arange(1, p + 1)
    powers = zs[:, None] ** (n - 1)[None, :]
    d1 = np.abs(powers @ (n * cs))
    # P'' = sum_{n>=2} n (n-1) C_n z^(n-2)
    d2 = np.abs(powers[:, : p - 1] @ (n * (n - 1) * cs)[1:])
    log_term = math.log(1.0 + p / 2.0)
    max1, max2 = float(d1.max()), float(d2.max())
    return DerivativeBoundReport(
        p, m, max1, max2,
        max1 / (p ** 1.5 * log_term),
        max2 / (p ** 2.5 * log_term),
        c1, c2,
    )


def interpolate(p: int, m: int, z: complex, alpha0: complex = 1.0) -> complex:
    """Reconstruct P(z) from its values at the p points alpha_s = alpha0 gamma^s,
    gamma = exp(2 pi i / p), with kernel F(z) = sum_{n=1}^p z^n."""
    gamma = cmath.exp(2j * math.pi / p)
    total = 0j
    for s in range(1, p + 1):
        a = alpha0 * gamma ** s
        w = z / a
        kernel = sum(w ** n for n in range(1, p + 1))
        total += gauss_polynomial(p, m, a) * kernel
    return total / p
