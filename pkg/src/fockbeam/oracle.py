"""Brute-force beam splitter by exponentiating its Fock-basis generator.

Shares no code with the combinatorial engine; it is the independent ground
truth the closed forms are checked against.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm

from .errors import DomainError, ResourceLimitError

MAX_DIMENSION_N = 2000


@dataclass(frozen=True)
class GeneratorMatrix:
    """Matrix of a^dag b - b^dag a in the basis |k, N - k>, k = 0..N.

    Only the raising couplings g_k = sqrt((k+1)(N-k)) at (k+1, k) are stored;
    the (k, k+1) entries are -g_k.
    """

    n_total: int
    raising: np.ndarray

    @classmethod
    def build(cls, n_total: int) -> "GeneratorMatrix":
        if n_total < 0:
            raise DomainError("photon number must be non-negative")
        if n_total > MAX_DIMENSION_N:
            raise ResourceLimitError(f"dense oracle is limited to N <= {MAX_DIMENSION_N}")
        k = np.arange(n_total, dtype=float)
        return cls(n_total, np.sqrt((k + 1.0) * (n_total - k)))

    @property
    def dimension(self) -> int:
        return self.n_total + 1

    def dense(self) -> np.ndarray:
        g = np.zeros((self.dimension, self.dimension))
        idx = np.arange(self.n_total)
        g[idx + 1, idx] = self.raising
        g[idx, idx + 1] = -self.raising
        return g


def _evolution_eig(gen: GeneratorMatrix, xi: float) -> np.ndarray:
    # With D = diag(i^k), G = D (-i S) D^-1 for the real symmetric tridiagonal
    # S carrying the same couplings, so exp(-xi G) = D exp(i xi S) D^-1.
    dim = gen.dimension
    if dim == 1:
        return np.ones((1, 1))
    evals, evecs = eigh_tridiagonal(np.zeros(dim), gen.raising)
    inner = (evecs * np.exp(1j * xi * evals)) @ evecs.T
    phase = 1j ** (np.arange(dim) % 4)
    u = phase[:, None] * inner * np.conj(phase)[None, :]
    return u.real


def oracle_matrix(n_total: int, xi: float, method: str = "eig") -> np.ndarray:
    """Full (N+1) x (N+1) matrix of exp(-xi G); entry [m, n] = <m| U |n>."""
    gen = GeneratorMatrix.build(n_total)
    if method == "eig":
        return _evolution_eig(gen, xi)
    if method == "expm":
        return expm(-xi * gen.dense())
    raise DomainError(f"unknown exponential method {method!r}")


def oracle_evolve(n_total: int, n_a: int, xi: float, method: str = "eig") -> np.ndarray:
    """Output amplitude vector over m_a = 0..N for the input |n_a, N - n_a>."""
    if not 0 <= n_a <= n_total:
        raise DomainError(f"n_a must lie in [0, {n_total}]")
    return oracle_matrix(n_total, xi, method)[:, n_a].copy()


@dataclass
class OracleReport:
    n_max: int
    xis: list
    max_deviation: float
    worst_case: tuple | None
    cases_checked: int
    elapsed_s: float
    tolerance: float = 1e-8
    per_n: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "xis": list(self.xis),
            "max_deviation": self.max_deviation,
            "worst_case": list(self.worst_case) if self.worst_case else None,
            "cases_checked": self.cases_checked,
            "elapsed_s": self.elapsed_s,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def oracle_check(n_max: int, xis=(math.pi / 4,), tolerance: float = 1e-8,
                 n_values=None, columns=None) -> OracleReport:
    """Compare |oracle| with |exact| entrywise for every N <= n_max and every n_a.

    ``n_values`` restricts the photon numbers checked; ``columns(N)`` may
    return a subset of input states for expensive angles.
    """
    from .exact import FockInput, exact_amplitudes_real

    start = time.perf_counter()
    worst, worst_case, cases = 0.0, None, 0
    per_n = {}
    ns = range(0, n_max + 1) if n_values is None else n_values
    for xi in xis:
        for n_total in ns:
            u = oracle_matrix(n_total, xi)
            cols = range(n_total + 1) if columns is None else columns(n_total)
            dev_n = 0.0
            for n_a in cols:
                exact = exact_amplitudes_real(FockInput(n_total, n_a, xi))
                dev = float(np.max(np.abs(np.abs(u[:, n_a]) - np.abs(exact))))
                cases += 1
                dev_n = max(dev_n, dev)
                if dev > worst:
                    worst, worst_case = dev, (n_total, n_a, xi)
            per_n[(n_total, xi)] = dev_n
    return OracleReport(n_max, list(xis), worst, worst_case, cases,
                        time.perf_counter() - start, tolerance, per_n)
