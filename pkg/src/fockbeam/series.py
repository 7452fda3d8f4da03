"""Assemble full output distributions from any of the amplitude engines."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import asymptotic
from .errors import DomainError, EdgeError, RegimeError
from .exact import FockInput, balanced_amplitude, exact_column, output_x
from .numerics import SignedLogValue


class Engine(enum.Enum):
    EXACT = "exact"
    BALANCED_CLOSED = "balanced_closed"
    BALANCED_ASYMPTOTIC = "balanced_asymptotic"
    IMBALANCED_EQ17 = "imbalanced_eq17"
    LARGEN_EQ18 = "largeN_eq18"
    ORACLE = "oracle"

    @classmethod
    def parse(cls, name: str) -> "Engine":
        aliases = {"balanced": cls.BALANCED_CLOSED, "eq6": cls.BALANCED_CLOSED,
                   "eq7": cls.BALANCED_ASYMPTOTIC, "eq17": cls.IMBALANCED_EQ17,
                   "eq18": cls.LARGEN_EQ18}
        if name in aliases:
            return aliases[name]
        try:
            return cls(name)
        except ValueError:
            raise DomainError(f"unknown engine {name!r}") from None


@dataclass(frozen=True)
class OutputPoint:
    m_a: int
    m_b: int
    x: float
    amplitude: SignedLogValue
    density: float
    flag: str = ""  # "" | edge_divergent | edge_vanishing


@dataclass
class DistributionSeries:
    input: FockInput
    points: list
    engine: Engine
    in_validity: bool = True
    notes: list = field(default_factory=list)

    @property
    def n_total(self) -> int:
        return self.input.n_total

    def probabilities(self) -> np.ndarray:
        """Probability mass per point: density * 2 / N."""
        return np.array([p.amplitude.square_real() for p in self.points])

    def densities(self) -> np.ndarray:
        return np.array([p.density for p in self.points])

    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    def amplitudes_real(self) -> np.ndarray:
        return np.array([p.amplitude.to_real() for p in self.points])

    def total_probability(self) -> float:
        return math.fsum(self.probabilities())


def density_of(n_total: int, amplitude: SignedLogValue) -> float:
    """(N/2) |A|^2."""
    if amplitude.sign == 0:
        return 0.0
    if amplitude.log_mag == math.inf:
        return math.inf
    return 0.5 * n_total * amplitude.square_real()


def _closed_form_input(inp: FockInput, engine: Engine) -> None:
    if not inp.is_balanced_splitter:
        raise RegimeError(f"{engine.value} is derived for a 50:50 splitter only")
    if inp.n_total % 2:
        raise RegimeError(f"{engine.value} needs an even photon number")
    if engine in (Engine.BALANCED_CLOSED, Engine.BALANCED_ASYMPTOTIC) and inp.ny != 0:
        raise RegimeError(f"{engine.value} applies to balanced input (Ny = 0) only")


def _closed_form_column(inp: FockInput, engine: Engine) -> list:
    n_total, ny = inp.n_total, inp.ny
    out = []
    for m in range(n_total + 1):
        flag = ""
        try:
            if engine is Engine.BALANCED_CLOSED:
                amp = balanced_amplitude(n_total, m)
            elif engine is Engine.BALANCED_ASYMPTOTIC:
                amp = asymptotic.balanced_asymptotic(n_total, m)
            elif engine is Engine.IMBALANCED_EQ17:
                amp = asymptotic.imbalanced_amplitude(n_total, abs(ny), m)
            else:
                amp = asymptotic.largeN_amplitude(n_total, abs(ny), m)
        except EdgeError:
            amp, flag = SignedLogValue(1, math.inf), "edge_divergent"
        if ny < 0:
            amp = asymptotic.reflected(amp, m)
        if not flag and m in (0, n_total) and engine is Engine.LARGEN_EQ18:
            flag = "edge_divergent" if amp.log_mag == math.inf else "edge_vanishing"
        out.append((amp, flag))
    return out


def distribution(inp: FockInput, engine: Engine | str = Engine.EXACT) -> DistributionSeries:
    """Amplitude and density (N/2)|A|^2 at every m_a = 0..N."""
    engine = Engine.parse(engine) if isinstance(engine, str) else engine
    n_total = inp.n_total
    notes = []
    in_validity = True
    if engine is Engine.EXACT:
        pairs = [(a, "") for a in exact_column(inp)]
    elif engine is Engine.ORACLE:
        from .oracle import oracle_evolve

        vec = oracle_evolve(n_total, inp.n_a, inp.xi)
        pairs = [(SignedLogValue.from_real(float(v)), "") for v in vec]
    else:
        _closed_form_input(inp, engine)
        if engine in (Engine.IMBALANCED_EQ17, Engine.LARGEN_EQ18):
            in_validity = asymptotic.eq17_in_validity(n_total, inp.ny)
            if not in_validity:
                notes.append(f"|Ny| = {abs(inp.ny)} exceeds N/4; small-imbalance form evaluated outside its validity range")
        pairs = _closed_form_column(inp, engine)
    points = [
        OutputPoint(m, n_total - m, output_x(n_total, m), amp, density_of(n_total, amp), flag)
        for m, (amp, flag) in enumerate(pairs)
    ]
    return DistributionSeries(inp, points, engine, in_validity, notes)
