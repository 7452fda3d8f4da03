"""Exact output amplitudes of a two-mode beam splitter fed with a Fock state.

For input ``|n_a, N - n_a>`` and output ``|m_a, N - m_a>`` the m_a-fold
derivative in the amplitude formula expands, by the product rule, into

    A = sqrt(C(N, m_a) / C(N, n_a))
        * sum_j (-1)^(m_a - j) C(m_a, j) C(N - m_a, n_a - j)
              * sin(xi)^(n_a + m_a - 2j) * cos(xi)^(N - n_a - m_a + 2j)

with purely integer coefficients. The alternating sum cancels by a factor of
order 2^(N/2), far beyond double precision, so the 50:50 case is summed in
exact integers and other angles in extended precision sized to the
cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import DomainError, NumericalError
from .numerics import (
    SignedLogValue,
    log_binomial,
    log_factorial,
    log_factorial_array,
    signed_log_sum,
)

BALANCED_XI = math.pi / 4
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class FockInput:
    n_total: int
    n_a: int
    xi: float = BALANCED_XI

    def __post_init__(self):
        if int(self.n_total) != self.n_total or self.n_total < 0:
            raise DomainError(f"total photon number must be a non-negative integer, got {self.n_total}")
        if int(self.n_a) != self.n_a or not 0 <= self.n_a <= self.n_total:
            raise DomainError(f"n_a must be an integer in [0, {self.n_total}], got {self.n_a}")
        if not math.isfinite(self.xi):
            raise DomainError("mixing angle must be finite")

    @classmethod
    def from_imbalance(cls, n_total: int, ny: int, xi: float = BALANCED_XI) -> "FockInput":
        """Build from the signed input imbalance ``Ny = n_a - n_b``."""
        if (n_total + ny) % 2 or abs(ny) > n_total:
            raise DomainError(f"imbalance Ny={ny} incompatible with N={n_total}")
        return cls(n_total, (n_total + ny) // 2, xi)

    @property
    def n_b(self) -> int:
        return self.n_total - self.n_a

    @property
    def ny(self) -> int:
        return 2 * self.n_a - self.n_total

    @property
    def y(self) -> float:
        return self.ny / self.n_total if self.n_total else 0.0

    @property
    def is_balanced_splitter(self) -> bool:
        return self.xi == BALANCED_XI

    def mirrored(self) -> "FockInput":
        return FockInput(self.n_total, self.n_b, self.xi)


def output_x(n_total: int, m_a: int) -> float:
    """Normalized output imbalance (2 m_a - N) / N."""
    return (2 * m_a - n_total) / n_total if n_total else 0.0


def _check_output(inp: FockInput, m_a: int) -> int:
    if int(m_a) != m_a or not 0 <= m_a <= inp.n_total:
        raise DomainError(f"m_a must be an integer in [0, {inp.n_total}], got {m_a}")
    return int(m_a)


def _j_range(n_total: int, n_a: int, m_a: int) -> range:
    return range(max(0, n_a + m_a - n_total), min(n_a, m_a) + 1)


def derivative_sum(n_total: int, n_a: int, m_a: int) -> int:
    """Integer core of the 50:50 amplitude: sum_j (-1)^(m-j) C(m,j) C(N-m, n-j)."""
    total = 0
    for j in _j_range(n_total, n_a, m_a):
        term = math.comb(m_a, j) * math.comb(n_total - m_a, n_a - j)
        total += -term if (m_a - j) % 2 else term
    return total


def _log_prefactor(n_total: int, n_a: int, m_a: int) -> float:
    return 0.5 * (log_binomial(n_total, m_a).log_mag - log_binomial(n_total, n_a).log_mag)


def _amplitude_balanced(inp: FockInput, m_a: int) -> SignedLogValue:
    core = derivative_sum(inp.n_total, inp.n_a, m_a)
    return SignedLogValue.from_int(core).scale(
        _log_prefactor(inp.n_total, inp.n_a, m_a) - 0.5 * inp.n_total * _LOG2
    )


def _amplitude_float(inp: FockInput, m_a: int) -> SignedLogValue:
    # Term-by-term signed-log accumulation; accurate only while the
    # cancellation stays well inside double precision (small N).
    n_total, n_a = inp.n_total, inp.n_a
    s, c = math.sin(inp.xi), math.cos(inp.xi)
    terms = []
    for j in _j_range(n_total, n_a, m_a):
        ps, pc = n_a + m_a - 2 * j, n_total - n_a - m_a + 2 * j
        if (ps and s == 0.0) or (pc and c == 0.0):
            continue
        log_mag = (
            log_factorial(m_a) + log_factorial(n_total - m_a)
            - log_factorial(j) - log_factorial(m_a - j)
            - log_factorial(n_a - j) - log_factorial(n_total - m_a - n_a + j)
        )
        log_mag += (ps * math.log(abs(s)) if ps else 0.0) + (pc * math.log(abs(c)) if pc else 0.0)
        sign = (-1) ** (m_a - j) * (1 if s > 0 or ps % 2 == 0 else -1) * (1 if c > 0 or pc % 2 == 0 else -1)
        terms.append(SignedLogValue(sign, log_mag))
    return signed_log_sum(terms).scale(_log_prefactor(n_total, n_a, m_a))


def _amplitude_mpfr(inp: FockInput, m_a: int, powers=None) -> SignedLogValue:
    n_total, n_a = inp.n_total, inp.n_a
    js = _j_range(n_total, n_a, m_a)
    coeffs = [
        (-1) ** (m_a - j) * math.comb(m_a, j) * math.comb(n_total - m_a, n_a - j) for j in js
    ]
    prec = 96 + n_total
    while True:
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            if powers is not None and powers[0] >= prec:
                ps, pc = powers[1], powers[2]
            else:
                s = gmpy2.sin(gmpy2.mpfr(inp.xi))
                c = gmpy2.cos(gmpy2.mpfr(inp.xi))
                ps = [s**k for k in range(n_total + 1)]
                pc = [c**k for k in range(n_total + 1)]
                if powers is not None:
                    powers[:] = [prec, ps, pc]
            total = gmpy2.mpfr(0)
            scale = gmpy2.mpfr(0)
            for j, coeff in zip(js, coeffs):
                term = coeff * ps[n_a + m_a - 2 * j] * pc[n_total - n_a - m_a + 2 * j]
                total += term
                scale += abs(term)
            if total == 0 or scale == 0:
                if scale == 0 or prec > 4 * n_total + 512:
                    return SignedLogValue(0)
                prec *= 2
                continue
            lost = float(gmpy2.log2(scale / abs(total)))
            if lost > prec - 64:
                if prec > 4 * n_total + 512:
                    raise NumericalError(f"cancellation of {lost:.0f} bits at N={n_total}, m_a={m_a}")
                prec = int(lost) + 128
                continue
            sign = 1 if total > 0 else -1
            log_mag = float(gmpy2.log(abs(total)))
        return SignedLogValue(sign, log_mag + _log_prefactor(n_total, n_a, m_a))


def exact_amplitude(inp: FockInput, m_a: int, arithmetic: str = "exact") -> SignedLogValue:
    """Output amplitude <m_a, N - m_a| U(xi) |n_a, N - n_a>.

    ``arithmetic="exact"`` is exact at xi = pi/4 (integer sum) and carries
    enough working precision elsewhere that the cancellation cannot reach
    the returned double. ``arithmetic="float"`` sums signed log-domain terms
    in double precision and is only trustworthy for small N.
    """
    m_a = _check_output(inp, m_a)
    if arithmetic == "float":
        return _amplitude_float(inp, m_a)
    if arithmetic != "exact":
        raise DomainError(f"unknown arithmetic {arithmetic!r}")
    if inp.is_balanced_splitter:
        return _amplitude_balanced(inp, m_a)
    return _amplitude_mpfr(inp, m_a)


def krawtchouk_column(n_total: int, n_a: int) -> list[int]:
    """K_m(n_a) for m = 0..N, from the generating function (1-t)^n_a (1+t)^(N-n_a).

    Uses the exact three-term recurrence in the degree; every division is exact.
    """
    col = [1]
    if n_total == 0:
        return col
    col.append(n_total - 2 * n_a)
    for m in range(1, n_total):
        num = (n_total - 2 * n_a) * col[m] - (n_total - m + 1) * col[m - 1]
        col.append(num // (m + 1))
    return col


def _column_arrays(inp: FockInput) -> tuple[np.ndarray, np.ndarray]:
    """Signs and log-magnitudes of the whole 50:50 column.

    The derivative sums satisfy sum_j ... = (-1)^m K_m(n_a) C(N, n_a) / C(N, m),
    so the column costs O(N) exact integer steps.
    """
    n_total, n_a = inp.n_total, inp.n_a
    col = krawtchouk_column(n_total, n_a)
    signs = np.array([(k > 0) - (k < 0) for k in col], dtype=int)
    log_k = np.array([math.log(abs(k)) if k else -math.inf for k in col])
    signs[1::2] *= -1
    lf = log_factorial_array(n_total)
    log_binom_m = lf[n_total] - lf - lf[::-1]
    log_mag = log_k - 0.5 * n_total * _LOG2 + 0.5 * (log_binom_m[n_a] - log_binom_m)
    log_mag[signs == 0] = -math.inf
    return signs, log_mag


def exact_column(inp: FockInput) -> list[SignedLogValue]:
    """Amplitudes for every m_a = 0..N of one input state."""
    if not inp.is_balanced_splitter:
        powers: list = [0, None, None]
        return [_amplitude_mpfr(inp, m, powers) for m in range(inp.n_total + 1)]
    signs, log_mag = _column_arrays(inp)
    return [SignedLogValue(int(s), float(l)) for s, l in zip(signs, log_mag)]


def exact_amplitudes_real(inp: FockInput) -> np.ndarray:
    """Column of amplitudes as floats (underflowing tails become 0)."""
    if not inp.is_balanced_splitter:
        return np.array([a.to_real() for a in exact_column(inp)])
    signs, log_mag = _column_arrays(inp)
    return signs * np.exp(log_mag)


def exact_probabilities(inp: FockInput) -> np.ndarray:
    """|A|^2 for every m_a = 0..N."""
    if not inp.is_balanced_splitter:
        return np.array([a.square_real() for a in exact_column(inp)])
    _, log_mag = _column_arrays(inp)
    return np.exp(2.0 * log_mag)


def balanced_amplitude(n_total: int, m_a: int) -> SignedLogValue:
    """Closed form for a balanced input n_a = n_b = N/2 at 50:50.

    (-1)^(m/2) sqrt(m! (N-m)!) / (2^(N/2) (m/2)! ((N-m)/2)!) for even m, zero for odd m.
    """
    if n_total % 2:
        raise DomainError(f"balanced input needs an even photon number, got N={n_total}")
    _check_output(FockInput(n_total, n_total // 2), m_a)
    if m_a % 2:
        return SignedLogValue(0)
    half, rest = m_a // 2, (n_total - m_a) // 2
    log_mag = (
        0.5 * (log_factorial(m_a) + log_factorial(n_total - m_a))
        - 0.5 * n_total * _LOG2
        - log_factorial(half)
        - log_factorial(rest)
    )
    return SignedLogValue(-1 if half % 2 else 1, log_mag)


def negative_y_amplitude(inp: FockInput, m_a: int) -> SignedLogValue:
    """Amplitude of a y < 0 input from its mirror image: (-1)^m_a * A(mirrored).

    Exists to check the reflection rule against the direct evaluation.
    """
    if inp.ny >= 0:
        raise DomainError("reflection rule applies to negative input imbalance")
    m_a = _check_output(inp, m_a)
    mirrored = exact_amplitude(inp.mirrored(), m_a)
    return -mirrored if m_a % 2 else mirrored
