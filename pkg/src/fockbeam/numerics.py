"""Overflow-safe arithmetic in the signed log domain.

Amplitudes at a few thousand photons are ratios of numbers with thousands of
digits; every magnitude here is carried as ``(sign, log|value|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import DomainError

# ln(k!) for k < _TABLE_SIZE comes from a running sum of logs. Consecutive
# entries then differ by ln(k+1) up to a single rounding.
_TABLE_SIZE = 16_384
_LOG_FACT = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, _TABLE_SIZE, dtype=float)))))
_LOG_FACT[:2] = 0.0


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as ``sign * exp(log_mag)``.

    ``sign`` is one of -1, 0, +1; ``log_mag`` is ignored (and kept at -inf)
    when ``sign == 0``. ``log_mag == inf`` marks a divergent value.
    """

    sign: int
    log_mag: float = -math.inf

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0 and self.log_mag != -math.inf:
            object.__setattr__(self, "log_mag", -math.inf)
        if self.sign != 0 and math.isnan(self.log_mag):
            raise DomainError("log magnitude is NaN")

    @classmethod
    def zero(cls) -> "SignedLogValue":
        return cls(0)

    @classmethod
    def one(cls) -> "SignedLogValue":
        return cls(1, 0.0)

    @classmethod
    def from_real(cls, value: float) -> "SignedLogValue":
        if value == 0:
            return cls(0)
        if math.isnan(value):
            raise DomainError("cannot represent NaN")
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @classmethod
    def from_int(cls, value: int) -> "SignedLogValue":
        """Exact integers of any size (``math.log`` handles big ints)."""
        if value == 0:
            return cls(0)
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_real(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_mag > 709.78:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_mag)

    def square_real(self) -> float:
        """``value**2`` as a float, computed without forming ``value``."""
        if self.sign == 0:
            return 0.0
        return math.exp(2.0 * self.log_mag) if self.log_mag < 354.0 else math.inf

    def __neg__(self) -> "SignedLogValue":
        return SignedLogValue(-self.sign, self.log_mag)

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            return NotImplemented
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue(0)
        return SignedLogValue(self.sign * other.sign, self.log_mag + other.log_mag)

    def __truediv__(self, other: "SignedLogValue") -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            return NotImplemented
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLogValue")
        if self.sign == 0:
            return SignedLogValue(0)
        return SignedLogValue(self.sign * other.sign, self.log_mag - other.log_mag)

    def scale(self, log_factor: float, sign: int = 1) -> "SignedLogValue":
        """Multiply by ``sign * exp(log_factor)``."""
        if self.sign == 0 or sign == 0:
            return SignedLogValue(0)
        return SignedLogValue(self.sign * sign, self.log_mag + log_factor)

    def sqrt(self) -> "SignedLogValue":
        if self.sign < 0:
            raise DomainError("square root of a negative value")
        if self.sign == 0:
            return self
        return SignedLogValue(1, 0.5 * self.log_mag)


def log_factorial(k: int) -> float:
    """ln(k!) for a non-negative integer ``k``."""
    k = int(k)
    if k < 0:
        raise DomainError(f"factorial of negative integer {k}")
    if k < _TABLE_SIZE:
        return float(_LOG_FACT[k])
    return math.lgamma(k + 1.0)


def log_binomial(n: int, k: int) -> SignedLogValue:
    """C(n, k) in the signed log domain; zero when ``k`` is out of ``[0, n]``."""
    n, k = int(n), int(k)
    if n < 0:
        raise DomainError(f"binomial with negative upper entry {n}")
    if k < 0 or k > n:
        return SignedLogValue(0)
    return SignedLogValue(1, log_factorial(n) - log_factorial(k) - log_factorial(n - k))


def signed_log_sum(terms: Iterable[SignedLogValue]) -> SignedLogValue:
    """Sum of signed log-domain terms.

    Terms are rescaled by the largest magnitude and accumulated with
    ``math.fsum`` (exactly rounded), so the result does not depend on the
    order of ``terms``.
    """
    live = [t for t in terms if t.sign != 0]
    if not live:
        return SignedLogValue(0)
    top = max(t.log_mag for t in live)
    if math.isinf(top):
        signs = {t.sign for t in live if t.log_mag == top}
        if len(signs) > 1:
            raise DomainError("sum of opposite infinities")
        return SignedLogValue(signs.pop(), math.inf)
    total = math.fsum(t.sign * math.exp(t.log_mag - top) for t in live)
    if total == 0.0:
        return SignedLogValue(0)
    return SignedLogValue(1 if total > 0 else -1, math.log(abs(total)) + top)


def sin_ratio(k: int, theta):
    """sin(k*theta)/sin(theta), continuous through the removable points.

    Evaluated as the Chebyshev polynomial U_{k-1}(cos theta) by its three-term
    recurrence, so multiples of pi give +-k with no special casing. Accepts a
    scalar or an array for ``theta``.
    """
    k = int(k)
    c = np.cos(np.asarray(theta, dtype=float))
    if k == 0:
        out = np.zeros_like(c)
    else:
        sign = 1.0
        if k < 0:
            k, sign = -k, -1.0
        prev, cur = np.zeros_like(c), np.ones_like(c)
        for _ in range(k - 1):
            prev, cur = cur, 2.0 * c * cur - prev
        out = sign * cur
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def log_factorial_array(n_max: int) -> np.ndarray:
    """ln(k!) for k = 0..n_max as a read-only array."""
    if n_max < _TABLE_SIZE:
        arr = _LOG_FACT[: n_max + 1].copy()
    else:
        from scipy.special import gammaln

        arr = np.concatenate((_LOG_FACT, gammaln(np.arange(_TABLE_SIZE, n_max + 1) + 1.0)))
    arr.setflags(write=False)
    return arr
