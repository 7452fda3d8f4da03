"""Ensemble statistics over a random input imbalance.

Two density normalizations are in play. ``"eq8"`` is (N/2)|A|^2, whose sum
times dx = 2/N is one. ``"eq20"`` is (N/4)|A|^2, the convention in which
the averaged and correlation closed forms are written. Every
function takes ``normalization`` and converts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotic import BranchTag, branch_tag, output_phase
from .errors import DomainError, EdgeError, RegimeError
from .exact import FockInput, exact_probabilities
from .numerics import sin_ratio

NORMALIZATIONS = {"eq8": 0.5, "eq20": 0.25}
GAUSSIAN_CUTOFF_SIGMAS = 6.0


def _density_factor(normalization: str) -> float:
    try:
        return NORMALIZATIONS[normalization]
    except KeyError:
        raise DomainError(f"normalization must be one of {sorted(NORMALIZATIONS)}") from None


def _closed_scale(normalization: str) -> float:
    # the closed forms are written for the (N/4) density
    return _density_factor(normalization) / NORMALIZATIONS["eq20"]


@dataclass(frozen=True)
class AveragingWindow:
    n_bound: int
    weighting: str = "uniform"  # uniform | gaussian_poissonian

    def __post_init__(self):
        if self.n_bound < 0 or self.n_bound % 2:
            raise DomainError(f"n_bound must be an even non-negative integer, got {self.n_bound}")
        if self.weighting not in ("uniform", "gaussian_poissonian"):
            raise DomainError(f"unknown weighting {self.weighting!r}")

    def weights(self, n_total: int) -> list[tuple[int, float]]:
        """(Ny, weight) pairs over even Ny with |Ny| <= n_bound, weights summing to one."""
        if n_total % 2:
            raise DomainError("ensemble averages over even Ny need an even N")
        if self.n_bound >= n_total:
            raise DomainError(f"n_bound={self.n_bound} must be smaller than N={n_total}")
        bound = self.n_bound
        if self.weighting == "gaussian_poissonian":
            cutoff = int(GAUSSIAN_CUTOFF_SIGMAS * math.sqrt(n_total))
            bound = min(bound, cutoff - cutoff % 2)
        nys = list(range(-bound, bound + 1, 2))
        if self.weighting == "uniform":
            raw = [1.0] * len(nys)
        else:
            raw = [math.exp(-ny * ny / (4.0 * n_total)) for ny in nys]
        total = math.fsum(raw)
        return [(ny, w / total) for ny, w in zip(nys, raw)]


@dataclass
class AveragedDistribution:
    n_total: int
    window: AveragingWindow
    normalization: str
    m_a: np.ndarray
    x: np.ndarray
    density: np.ndarray

    def total_mass(self) -> float:
        """Sum of density * dx; one under the eq8 normalization."""
        return math.fsum(self.density * 2.0 / self.n_total)


def _probability_rows(n_total: int, nys, workers: int | None = None) -> np.ndarray:
    inputs = [FockInput.from_imbalance(n_total, ny) for ny in nys]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(exact_probabilities, inputs))
    else:
        rows = [exact_probabilities(inp) for inp in inputs]
    return np.array(rows)


def averaged_distribution_direct(n_total: int, window: AveragingWindow,
                                 normalization: str = "eq8",
                                 workers: int | None = None) -> AveragedDistribution:
    """Weighted average of exact densities over the input imbalances of ``window``."""
    pairs = window.weights(n_total)
    rows = _probability_rows(n_total, [ny for ny, _ in pairs], workers)
    w = np.array([w for _, w in pairs])
    density = n_total * _density_factor(normalization) * (w @ rows)
    m = np.arange(n_total + 1)
    return AveragedDistribution(n_total, window, normalization, m, (2 * m - n_total) / n_total, density)


def _check_sub_poissonian(n_total: int, n_bound: int, enforce: bool) -> None:
    if enforce and n_bound > math.isqrt(n_total):
        raise RegimeError(f"closed forms assume n_bound <= sqrt(N) = {math.isqrt(n_total)}")


def _interior_x(n_total: int, m_a: int) -> float:
    if not 0 <= m_a <= n_total:
        raise DomainError(f"m_a must lie in [0, {n_total}]")
    x = (2 * m_a - n_total) / n_total
    if abs(x) == 1.0:
        raise EdgeError("closed ensemble forms are singular at |x| = 1")
    return x


def averaged_distribution_closed(n_total: int, n_bound: int, m_a: int,
                                 normalization: str = "eq8",
                                 enforce_regime: bool = True) -> float:
    """Uniform-window average in closed form.

    (1/pi) (1/2) (1 -+ sin[(n+1) phi] / ((n+1) sin phi)) / sqrt(1 - x^2) in
    the eq20 normalization; minus on the half-integer branch, plus on the
    integer branch.
    """
    _check_sub_poissonian(n_total, n_bound, enforce_regime)
    x = _interior_x(n_total, m_a)
    phi = output_phase(x)
    osc = sin_ratio(n_bound + 1, phi) / (n_bound + 1)
    sign = 1.0 if branch_tag(n_total, m_a) is BranchTag.INTEGER else -1.0
    return _closed_scale(normalization) * 0.5 * (1.0 + sign * osc) / (math.pi * math.sqrt(1.0 - x * x))


def trig_average_identities(n_bound: int, phi: float) -> tuple[float, float]:
    """Closed forms of the window averages of sin^2(k phi)/sin^2(phi) and cos^2(k phi).

    k runs over -n/2..n/2. Within 1e-4/(n+1) of a multiple of pi the first
    average switches to its Taylor expansion about the removable point.
    """
    if n_bound < 0 or n_bound % 2:
        raise DomainError("n_bound must be an even non-negative integer")
    count = n_bound + 1
    osc = sin_ratio(count, phi) / count
    cos_avg = 0.5 * (1.0 + osc)
    delta = math.remainder(phi, math.pi)
    if abs(delta) * count < 1e-4:
        half = n_bound // 2
        k2 = half * (half + 1) / 3.0
        k4 = half * (half + 1) * (3 * half * half + 3 * half - 1) / 15.0
        sin_avg = k2 - delta * delta * (k4 - k2) / 3.0
    else:
        sin_avg = 0.5 * (1.0 - osc) / math.sin(phi) ** 2
    return sin_avg, cos_avg


def epsilon_parity(n_total: int, m_a: int, m_a_prime: int) -> int:
    """+1 for two points on the same branch, -1 for opposite branches, 0 otherwise."""
    if n_total % 2:
        raise DomainError("parity mask is defined for even N")
    a, b = branch_tag(n_total, m_a), branch_tag(n_total, m_a_prime)
    if BranchTag.VANISHING in (a, b):
        return 0
    return 1 if a is b else -1


def _correlation_bracket(count: int, phi, phi_p):
    return (
        sin_ratio(count, phi + phi_p)
        + sin_ratio(count, phi - phi_p)
        - (2.0 / count) * (sin_ratio(count, phi) * sin_ratio(count, phi_p))
    )


def correlation(n_total: int, n_bound: int, m_a: int, m_a_prime: int,
                normalization: str = "eq8", enforce_regime: bool = True) -> float:
    """Closed-form covariance over the uniform window of the densities at two points."""
    _check_sub_poissonian(n_total, n_bound, enforce_regime)
    eps = epsilon_parity(n_total, m_a, m_a_prime)
    x, xp = _interior_x(n_total, m_a), _interior_x(n_total, m_a_prime)
    if eps == 0:
        return 0.0
    count = n_bound + 1
    phi, phi_p = output_phase(x), output_phase(xp)
    pref = eps / (math.pi**2 * math.sqrt((1 - x * x) * (1 - xp * xp)) * 8.0 * count)
    return _closed_scale(normalization) ** 2 * pref * float(_correlation_bracket(count, phi, phi_p))


@dataclass
class CorrelationGrid:
    n_total: int
    n_bound: int
    m_a: np.ndarray
    xs: np.ndarray
    values: np.ndarray
    epsilon_mask: np.ndarray
    normalization: str = "eq8"


def interior_points(n_total: int) -> np.ndarray:
    return np.arange(1, n_total)


def _grid_block(n_total, n_bound, m_rows, m_cols, normalization):
    x_r = (2 * m_rows - n_total) / n_total
    x_c = (2 * m_cols - n_total) / n_total
    if np.any(np.abs(x_r) >= 1.0) or np.any(np.abs(x_c) >= 1.0):
        raise EdgeError("closed ensemble forms are singular at |x| = 1")
    eps = np.outer(np.where(m_rows % 2 == 0, 1, -1), np.where(m_cols % 2 == 0, 1, -1))
    phi_r = np.pi / 2 + np.arcsin(x_r)
    phi_c = np.pi / 2 + np.arcsin(x_c)
    count = n_bound + 1
    bracket = (
        sin_ratio(count, phi_r[:, None] + phi_c[None, :])
        + sin_ratio(count, phi_r[:, None] - phi_c[None, :])
        - (2.0 / count) * np.outer(sin_ratio(count, phi_r), sin_ratio(count, phi_c))
    )
    w = np.outer(np.sqrt(1.0 - x_r * x_r), np.sqrt(1.0 - x_c * x_c))
    values = _closed_scale(normalization) ** 2 * eps * bracket / (np.pi**2 * w * 8.0 * count)
    return values, eps


def correlation_grid(n_total: int, n_bound: int, m_values=None, normalization: str = "eq8",
                     enforce_regime: bool = True) -> CorrelationGrid:
    """Vectorized ``correlation`` over all pairs of ``m_values`` (default: all interior points)."""
    _check_sub_poissonian(n_total, n_bound, enforce_regime)
    m = interior_points(n_total) if m_values is None else np.asarray(m_values, dtype=int)
    values, eps = _grid_block(n_total, n_bound, m, m, normalization)
    xs = (2 * m - n_total) / n_total
    return CorrelationGrid(n_total, n_bound, m, xs, values, eps, normalization)


def _closed_quadratic_form(f, n_total, n_bound, normalization="eq8", block=512) -> float:
    """f^T C f over interior points where f != 0, one row block at a time."""
    m = np.flatnonzero(f)
    m = m[(m > 0) & (m < n_total)]
    total = 0.0
    for start in range(0, m.size, block):
        rows = m[start:start + block]
        values, _ = _grid_block(n_total, n_bound, rows, m, normalization)
        total += float(f[rows] @ values @ f[m])
    return total


def direct_covariance(n_total: int, window: AveragingWindow, normalization: str = "eq8",
                      m_values=None, workers: int | None = None) -> np.ndarray:
    """Ensemble covariance of exact densities, mean(P P^T) - mean(P) mean(P)^T."""
    pairs = window.weights(n_total)
    rows = _probability_rows(n_total, [ny for ny, _ in pairs], workers)
    rows *= n_total * _density_factor(normalization)
    if m_values is not None:
        rows = rows[:, np.asarray(m_values, dtype=int)]
    w = np.array([w for _, w in pairs])
    mean = w @ rows
    return (rows.T * w) @ rows - np.outer(mean, mean)


def variance_functional(f, n_total: int, n_bound: int, method: str = "direct",
                        weighting: str = "uniform", enforce_regime: bool = True,
                        x_max: float | None = None) -> float:
    """Variance over the ensemble of <f> = sum f(x) P_N(x) dx, dx = 2/N.

    ``f`` is tabulated on the full grid m_a = 0..N. The closed method uses
    interior points only, because its correlation is singular at |x| = 1;
    its accuracy degrades towards the edges, so observables that weight
    |x| -> 1 should be compared with ``x_max`` set (f is zeroed beyond it,
    for both methods).
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (n_total + 1,):
        raise DomainError(f"f must be tabulated on all {n_total + 1} grid points")
    if x_max is not None:
        xs = (2 * np.arange(n_total + 1) - n_total) / n_total
        f = np.where(np.abs(xs) <= x_max, f, 0.0)
    dx = 2.0 / n_total
    if method == "direct":
        cov = direct_covariance(n_total, AveragingWindow(n_bound, weighting))
        return float(f @ cov @ f) * dx * dx
    if method == "closed":
        if weighting != "uniform":
            raise RegimeError("the closed correlation is derived for the uniform window")
        _check_sub_poissonian(n_total, n_bound, enforce_regime)
        return _closed_quadratic_form(f, n_total, n_bound) * dx * dx
    raise DomainError(f"unknown method {method!r}")
