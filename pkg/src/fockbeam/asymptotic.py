"""Closed-form approximations to the 50:50 output amplitudes.

All forms here assume xi = pi/4 and an even total photon number. On the
output grid the quantity N(1+x)/4 equals m_a/2, so even m_a sit on the
integer branch and odd m_a on the half-integer branch.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, EdgeError, RegimeError
from .numerics import SignedLogValue, log_binomial, log_factorial, sin_ratio

_LOG2 = math.log(2.0)

EQ17_MAX_IMBALANCE_FRACTION = Fraction(1, 4)
EQ18_MIN_PHOTONS = 100


class BranchTag(enum.Enum):
    INTEGER = "integer_branch"
    HALF_INTEGER = "half_integer_branch"
    VANISHING = "vanishing"


def branch_tag(n_total: int, m_a) -> BranchTag:
    """Which of N(1+x)/4 = m_a/2 or m_a/2 + 1/2 is an integer.

    ``m_a`` may be a Fraction for off-grid diagnostics; integer m_a is never
    on the vanishing branch.
    """
    quarter = Fraction(m_a) / 2
    if quarter.denominator == 1:
        return BranchTag.INTEGER
    if (quarter + Fraction(1, 2)).denominator == 1:
        return BranchTag.HALF_INTEGER
    return BranchTag.VANISHING


def _require_even(n_total: int) -> None:
    if n_total <= 0 or n_total % 2:
        raise DomainError(f"closed forms need an even positive N, got {n_total}")


def _grid_x(n_total: int, m_a: int) -> float:
    if int(m_a) != m_a or not 0 <= m_a <= n_total:
        raise DomainError(f"m_a must be an integer in [0, {n_total}], got {m_a}")
    return (2 * m_a - n_total) / n_total


def output_phase(x: float) -> float:
    """pi/2 + arcsin(x), the angle on which the envelopes oscillate."""
    return math.pi / 2 + math.asin(x)


def balanced_asymptotic(n_total: int, m_a: int) -> SignedLogValue:
    """Large-N form (-1)^(m/2) 2 / (sqrt(pi N) (1 - x^2)^(1/4)) of the balanced amplitude."""
    _require_even(n_total)
    x = _grid_x(n_total, m_a)
    if m_a % 2:
        return SignedLogValue(0)
    if abs(x) == 1.0:
        raise EdgeError("balanced asymptotic form diverges at |x| = 1")
    log_mag = math.log(2.0) - 0.5 * math.log(math.pi * n_total) - 0.25 * math.log1p(-x * x)
    return SignedLogValue(-1 if (m_a // 2) % 2 else 1, log_mag)


def _check_imbalance(n_total: int, ny: int) -> None:
    _require_even(n_total)
    if int(ny) != ny or ny < 0 or ny % 2 or ny > n_total:
        raise DomainError(
            f"Ny must be an even integer in [0, N]; got {ny} (use the reflection rule for Ny < 0)"
        )


def eq17_in_validity(n_total: int, ny: int) -> bool:
    """Engineering cutoff for the small-imbalance regime: |Ny| <= N/4."""
    return Fraction(abs(ny), n_total) <= EQ17_MAX_IMBALANCE_FRACTION


def imbalanced_amplitude(n_total: int, ny: int, m_a: int) -> SignedLogValue:
    """Analytic amplitude for a small non-negative input imbalance Ny.

    The prefactor sqrt([N(1+x)/2]! [N(1-x)/2]! / ([N(1+y)/2]! [N(1-y)/2]!))
    e^{N y^2 / 4} / 2^{N/2} multiplies a brace in which exactly one binomial
    survives per grid point. sin(k phi)/sqrt(1 - x^2) is evaluated as a
    Chebyshev ratio, which keeps the edges |x| = 1 finite.
    """
    _check_imbalance(n_total, ny)
    x = _grid_x(n_total, m_a)
    n = ny // 2
    half = n_total // 2
    y = ny / n_total
    log_pref = (
        0.5 * (log_factorial(m_a) + log_factorial(n_total - m_a))
        - 0.5 * (log_factorial(half + n) + log_factorial(half - n))
        + n_total * y * y / 4.0
        - half * _LOG2
    )
    phi = output_phase(x)
    if m_a % 2:
        # half-integer branch: only C(N/2 - 1, (m-1)/2) survives
        k = (m_a - 1) // 2
        binom = log_binomial(half - 1, k)
        sign = -1 if ((m_a + 1) // 2) % 2 else 1
        coeff = 2.0 * sign * sin_ratio(n, phi)
    else:
        k = m_a // 2
        binom = log_binomial(half, k)
        sign = -1 if k % 2 else 1
        coeff = sign * (x * sin_ratio(n, phi) + sin_ratio(n - 1, phi))
    if binom.is_zero or coeff == 0.0:
        return SignedLogValue(0)
    brace = binom.scale(math.log(abs(coeff)), 1 if coeff > 0 else -1)
    return -brace.scale(log_pref)


def largeN_amplitude(n_total: int, ny: int, m_a: int) -> SignedLogValue:
    """Stirling form of ``imbalanced_amplitude``.

    At |x| = 1 the half-integer branch vanishes and the integer branch is
    returned with ``log_mag = inf`` (divergence like (1-x^2)^(-1/4)).
    """
    _check_imbalance(n_total, ny)
    if n_total < EQ18_MIN_PHOTONS:
        raise RegimeError(f"large-N form needs N >= {EQ18_MIN_PHOTONS}, got N={n_total}")
    if ny >= n_total:
        raise DomainError("large-N form needs |Ny| < N")
    x = _grid_x(n_total, m_a)
    y = ny / n_total
    n = ny // 2
    log_pref = (
        math.log(2.0) - 0.5 * math.log(math.pi * n_total) + n_total * y * y / 4.0
        - (n_total / 4.0) * ((1 + y) * math.log1p(y) + (1 - y) * math.log1p(-y))
        - 0.25 * math.log1p(-y * y)
    )
    phi = output_phase(x)
    w = 1.0 - x * x
    if m_a % 2:
        sign = -1 if ((m_a + 1) // 2) % 2 else 1
        if w == 0.0:
            return SignedLogValue(0)
        term = sign * math.sin(n * phi) / w**0.25
    else:
        sign = -1 if (m_a // 2) % 2 else 1
        c = math.cos(n * phi)
        if w == 0.0:
            return SignedLogValue(sign * (1 if c > 0 else -1), math.inf)
        term = -sign * c / w**0.25
    if term == 0.0:
        return SignedLogValue(0)
    return SignedLogValue(-1 if term > 0 else 1, log_pref + math.log(abs(term)))


def reflected(amplitude: SignedLogValue, m_a: int) -> SignedLogValue:
    """Phase (-1)^m_a relating the amplitude at -Ny to the one at +Ny."""
    return -amplitude if m_a % 2 else amplitude


def arcsine_envelope(x) -> float:
    """Branch-averaged output density 1 / (pi sqrt(1 - x^2))."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(x_arr) >= 1.0):
        raise DomainError("arcsine density is defined for |x| < 1 only")
    out = 1.0 / (math.pi * np.sqrt(1.0 - x_arr * x_arr))
    return float(out) if out.ndim == 0 else out


def envelope_sign_changes(n_total: int, amplitudes, branch: BranchTag) -> int:
    """Sign changes of the slowly varying envelope on one branch, edges excluded.

    The fast alternation (-1)^(m/2) (integer branch) or (-1)^((m+1)/2)
    (half-integer branch) is divided out first; exact zeros are skipped.
    """
    amps = [a.to_real() if isinstance(a, SignedLogValue) else float(a) for a in amplitudes]
    parity = 0 if branch is BranchTag.INTEGER else 1
    signs = []
    for m in range(1, n_total):
        if m % 2 != parity or amps[m] == 0.0 or not math.isfinite(amps[m]):
            continue
        fast = (m // 2) % 2 if parity == 0 else ((m + 1) // 2) % 2
        s = (1 if amps[m] > 0 else -1) * (-1 if fast else 1)
        signs.append(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)
