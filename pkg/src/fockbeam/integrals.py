"""The integral family

    I_n(N, x) = 2^N  int_0^{2 pi} dtheta  sin(theta/2)^(N/2 - n) cos(theta/2)^(N/2 + n) e^{-i N x theta / 2}

which generates the imbalanced amplitudes, plus its closed forms, exact
recursion and small-n approximation.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, NumericalError

_LOG2 = math.log(2.0)
_REL_TOL = 1e-10
_MAX_SHIFT = 40.0
_RING_NODES = 256


class NonIntegerExponentWarning(UserWarning):
    """Half-angle powers with non-integer exponents use the principal branch."""


@dataclass(frozen=True)
class InEvaluation:
    n_total: int
    n_index: int
    x: float
    value: complex
    method: str  # quadrature | recursion | approx_order0 | approx_corrected
    flags: tuple = field(default_factory=tuple)


def grid_index(n_total: int, x: float) -> int:
    """Integer Nx for an on-grid x; raises if N x is not (close to) an integer."""
    nx = round(n_total * x)
    if abs(n_total * x - nx) > 1e-9 * max(1, n_total):
        raise DomainError(f"x={x} is not on the grid of N={n_total}")
    return int(nx)


def in_quadrature(n_total: int, n: int, x: float, nodes: int | None = None) -> complex:
    """Periodic trapezoidal rule with max(4N, 256) nodes, checked against twice as many.

    For integer exponents the integrand is a trigonometric polynomial of
    degree <= N and the rule is exact up to rounding. On the grid that
    polynomial is also entire and 2 pi periodic, so the contour is moved to
    theta + i tau with tau chosen to minimise the largest integrand value;
    this removes the cancellation that otherwise costs up to 2^(N/2) near
    |x| = 1.
    """
    a = n_total / 2 - n
    b = n_total / 2 + n
    if a < 0 or b < 0:
        raise DomainError(f"|n| must not exceed N/2 (N={n_total}, n={n})")
    integer_powers = a == int(a) and b == int(b)
    if not integer_powers:
        warnings.warn(
            f"non-integer exponents {a}, {b}: principal branch on cos(theta/2) < 0",
            NonIntegerExponentWarning,
            stacklevel=2,
        )
    nx = _integer_nx(n_total, x)
    m = nodes or max(4 * n_total, 256)
    tau = 0.0
    if integer_powers and nx is not None and (nx - n_total) % 2 == 0:
        tau = _saddle_shift(n_total, int(a), int(b), nx)
    coarse, scale = _trapezoid(n_total, a, b, x, m, tau)
    fine, _ = _trapezoid(n_total, a, b, x, 2 * m, tau)
    if abs(fine - coarse) > _REL_TOL * max(abs(fine), scale):
        raise NumericalError(f"quadrature did not converge for N={n_total}, n={n}, x={x}")
    return fine


def _integer_nx(n_total: int, x: float) -> int | None:
    nx = round(n_total * x)
    return nx if abs(n_total * x - nx) <= 1e-9 * max(1, n_total) else None


def _log_power(base, exponent):
    if exponent == 0:
        return np.zeros_like(base, dtype=float)
    with np.errstate(divide="ignore"):
        return exponent * np.log(np.abs(base))


def _shifted_log_max(n_total, a, b, nx, theta, tau):
    """log of the largest |integrand| on the ring Im(theta) = tau."""
    sh2 = math.sinh(tau / 2.0) ** 2
    ls = 0.5 * _log_power(np.sin(theta / 2.0) ** 2 + sh2, a)
    lc = 0.5 * _log_power(np.cos(theta / 2.0) ** 2 + sh2, b)
    return float(np.max(ls + lc)) + 0.5 * nx * tau + n_total * _LOG2


def _saddle_shift(n_total: int, a: int, b: int, nx: int) -> float:
    """Imaginary contour offset through a saddle of sin^a(u) cos^b(u) e^{-i Nx u}, u = theta / 2.

    With t = tan u the saddle condition is b t^2 + i Nx t - a = 0. Each root
    gives a candidate height 2 Im(arctan t); the unshifted ring competes too,
    and the one with the smallest peak integrand wins.
    """
    if b == 0:
        roots = [a / (1j * nx)] if nx else []
    else:
        root = cmath.sqrt(-nx * nx + 4 * a * b)
        roots = [(-1j * nx + root) / (2 * b), (-1j * nx - root) / (2 * b)]
    candidates = [0.0]
    for t in roots:
        if abs(t.real) < 1e-300 and abs(t.imag) >= 1.0:
            tau = math.copysign(_MAX_SHIFT, t.imag)
        else:
            tau = 2.0 * cmath.atan(t).imag
        candidates.append(max(-_MAX_SHIFT, min(_MAX_SHIFT, tau)))
    theta = 2.0 * math.pi * np.arange(_RING_NODES) / _RING_NODES
    return min(candidates, key=lambda tau: _shifted_log_max(n_total, a, b, nx, theta, tau))


def _trapezoid(n_total, a, b, x, m, tau=0.0):
    k = np.arange(m)
    theta = 2.0 * math.pi * k / m
    nx = _integer_nx(n_total, x)
    if nx is not None:
        # e^{-i N x theta / 2} with the angle reduced exactly in integers
        drift = -math.pi * ((nx * k) % (2 * m)) / m
    else:
        drift = -0.5 * n_total * x * theta
    if tau == 0.0:
        s = np.sin(theta / 2.0)
        c = np.cos(theta / 2.0)
        log_mag = n_total * _LOG2 + _log_power(s, a) + _log_power(c, b)
        phase = drift + np.where(c < 0, math.pi * b, 0.0)
    else:
        u = 0.5 * (theta + 1j * tau)
        log_f = a * np.log(np.sin(u)) + b * np.log(np.cos(u))
        log_mag = n_total * _LOG2 + log_f.real + 0.5 * nx * tau
        phase = drift + log_f.imag
    top = np.max(log_mag)
    weights = np.exp(log_mag - top)
    total = np.sum(weights * np.exp(1j * phase)) * (2.0 * math.pi / m)
    scale = np.sum(weights) * (2.0 * math.pi / m)
    factor = math.exp(top)
    return complex(total) * factor, float(scale) * factor


def _quarter(n_total: int, x: float) -> Fraction:
    """N (1 + x) / 4 as an exact fraction."""
    if n_total % 2:
        raise DomainError(f"closed forms need even N, got {n_total}")
    return Fraction(n_total + grid_index(n_total, x), 4)


def _binomial0(n: int, k: Fraction) -> int:
    """C(n, k) when k is an integer in [0, n], otherwise 0."""
    if k.denominator != 1 or not 0 <= k <= n:
        return 0
    return math.comb(n, int(k))


def _minus_one_power(k: Fraction) -> int:
    return -1 if int(k) % 2 else 1


def i0_closed(n_total: int, x: float) -> complex:
    """2 pi i^(N/2) (-1)^(N(1+x)/4) C(N/2, N(1+x)/4), zero off the integer branch."""
    k = _quarter(n_total, x)
    binom = _binomial0(n_total // 2, k)
    if binom == 0:
        return 0j
    return 2.0 * math.pi * (1j ** ((n_total // 2) % 4)) * _minus_one_power(k) * binom


def i1_closed(n_total: int, x: float) -> complex:
    """Closed form of I_1: a half-integer-branch term plus an x-weighted integer-branch term."""
    k = _quarter(n_total, x)
    k_minus = Fraction(n_total // 2) - k  # N (1 - x) / 4
    x_exact = float(Fraction(grid_index(n_total, x), n_total))
    half = Fraction(1, 2)
    first = _binomial0(n_total // 2 - 1, k - half)
    second = _binomial0(n_total // 2, k)
    bracket = 0.0
    if first:
        bracket += 2.0 * _minus_one_power(k_minus - half) * first
    if second:
        bracket += x_exact * _minus_one_power(k_minus) * second
    return 2.0 * math.pi * (1j ** ((1 - n_total // 2) % 4)) * bracket


def in_recursion(n_total: int, x: float, i0: complex, i1: complex, n_max: int) -> list[complex]:
    """I_0..I_{n_max} by I_{n+2} = [(N/2 + n + 1) I_n + i N x I_{n+1}] / (N/2 - n - 1)."""
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    values = [complex(i0), complex(i1)][: n_max + 1]
    half = n_total / 2
    for n in range(n_max - 1):
        denom = half - n - 1
        if denom == 0:
            raise DomainError(f"forward recursion breaks down at n = N/2 - 1 = {n}")
        values.append(((half + n + 1) * values[n] + 1j * n_total * x * values[n + 1]) / denom)
    return values


def characteristic_roots(x: float) -> tuple[complex, complex]:
    """p, q = i x +- sqrt(1 - x^2), roots of r^2 - 2 i x r - 1 = 0."""
    r = math.sqrt(max(0.0, 1.0 - x * x))
    return complex(r, x), complex(-r, x)


def _divided_power(k: int, p: complex, q: complex) -> complex:
    # (p^k - q^k)/(p - q) as sum_j p^j q^(k-1-j): no division, so the
    # confluent root p = q (|x| = 1) needs no special case.
    if k < 0:
        return -_divided_power(-k, p, q) / (p * q) ** (-k)
    return sum(p**j * q ** (k - 1 - j) for j in range(k))


def imbalance_correction(n: int, n_total: int) -> float:
    """e^{f_n / N} with f_n ~ n^2: the accumulated O(n/N) effect of the dropped coefficients."""
    return math.exp(n * n / n_total)


def in_approx(n_total: int, n: int, x: float, corrected: bool = False) -> complex:
    """Solution of the reduced recursion I_{n+2} = 2 i x I_{n+1} + I_n from the closed I_0, I_1."""
    if n < 0:
        raise DomainError("small-n approximation is defined for n >= 0")
    p, q = characteristic_roots(x)
    value = _divided_power(n, p, q) * i1_closed(n_total, x) - p * q * _divided_power(n - 1, p, q) * i0_closed(n_total, x)
    if corrected:
        value *= imbalance_correction(n, n_total)
    return value


def evaluate(n_total: int, n: int, x: float, method: str = "quadrature") -> InEvaluation:
    """Tagged evaluation of I_n by one of the four methods."""
    flags = []
    if method == "quadrature":
        value = in_quadrature(n_total, n, x)
    elif method == "recursion":
        if n < 0:
            raise DomainError("forward recursion starts at n = 0")
        value = in_recursion(n_total, x, i0_closed(n_total, x), i1_closed(n_total, x), n)[n]
    elif method in ("approx_order0", "approx_corrected"):
        value = in_approx(n_total, n, x, corrected=method == "approx_corrected")
        if abs(x) == 1.0:
            flags.append("confluent_roots")
    else:
        raise DomainError(f"unknown method {method!r}")
    if n > 0 and n * n >= n_total and method == "approx_order0":
        flags.append("poissonian_imbalance")
    return InEvaluation(n_total, n, x, complex(value), method, tuple(flags))
