"""The spectrum map n -> floor(n*alpha + gamma) and Beatty complementarity.

Bulk evaluation uses certified integer brackets: alpha and gamma are pinned
between consecutive scaled integers, and a floor is emitted only when both
bracket ends agree; disagreements fall back to the fully exact path.  The
fallback raises rather than guess, so a bulk run is exactly as trustworthy
as an element-by-element one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

from .errors import FloorAmbiguous, RationalTieWarning
from .exact import ExactReal, Rational, compare, floor_linear, _coerce
from .windows import WindowSet

_BULK_SCALE = 30  # 10^-30 bracket width dwarfs any desk-scale horizon


@dataclass(frozen=True)
class SpectrumMap:
    """alpha > 0 with offset gamma in [0, 1); gamma = 0 is the classical
    Beatty case, the open range is the nonhomogeneous one."""

    alpha: ExactReal
    gamma: ExactReal

    def __post_init__(self):
        if self.alpha.sign() <= 0:
            raise ValueError("alpha must be positive")
        if self.gamma.sign() < 0 or compare(self.gamma, 1) >= 0:
            raise ValueError("gamma must lie in [0, 1)")


class _FloorEngine:
    """Certified bulk floors of n*alpha + gamma for n >= 0."""

    def __init__(self, alpha: ExactReal, gamma: ExactReal, scale: int = _BULK_SCALE):
        self.alpha = alpha
        self.gamma = gamma
        self.scale = 10 ** scale
        self.a_lo, self.a_hi = alpha.int_bracket(scale)
        self.g_lo, self.g_hi = gamma.int_bracket(scale)
        self.fallbacks = 0

    def floor_at(self, n: int) -> int:
        k_lo = (n * self.a_lo + self.g_lo) // self.scale
        k_hi = (n * self.a_hi + self.g_hi) // self.scale
        if k_lo == k_hi:
            return k_lo
        self.fallbacks += 1
        return floor_linear(self.alpha, n, self.gamma)


def apply(spectrum: SpectrumMap, n: int) -> int:
    """floor(n*alpha + gamma); total on n >= 1, may return 0 when alpha is
    small (zeros are dropped by image_set, not here)."""
    if n < 1:
        raise ValueError("spectrum map is defined on positive integers")
    return floor_linear(spectrum.alpha, n, spectrum.gamma)


def image_set(spectrum: SpectrumMap, A: WindowSet) -> WindowSet:
    """{floor(n*alpha + gamma) : n in A} with zeros removed.

    Result horizon floor(H_A * alpha + gamma): every value up to that bound
    has all of its preimages inside A's window, so membership is decided.
    """
    engine = _FloorEngine(spectrum.alpha, spectrum.gamma)
    values = {engine.floor_at(n) for n in A.elements}
    values.discard(0)
    horizon = engine.floor_at(A.horizon) if A.horizon else 0
    return WindowSet(tuple(sorted(values)), max(horizon, 0))


def image_of_range(spectrum: SpectrumMap, horizon: int) -> WindowSet:
    """image_set over the full window [1, horizon], without materializing it."""
    engine = _FloorEngine(spectrum.alpha, spectrum.gamma)
    values = {engine.floor_at(n) for n in range(1, horizon + 1)}
    values.discard(0)
    out_h = engine.floor_at(horizon) if horizon else 0
    return WindowSet(tuple(sorted(values)), max(out_h, 0))


def spectrum_values(spectrum: SpectrumMap, n_lo: int, n_hi: int) -> list[int]:
    """[floor(n*alpha+gamma) for n in [n_lo, n_hi]], bulk-certified."""
    if n_lo < 1:
        raise ValueError("spectrum values start at n = 1")
    engine = _FloorEngine(spectrum.alpha, spectrum.gamma)
    return [engine.floor_at(n) for n in range(n_lo, n_hi + 1)]


def _ceil_exact(x: ExactReal) -> int:
    return -((-x).floor())


def preimage_witness(spectrum: SpectrumMap, k: int) -> Optional[int]:
    """Least n >= 1 with floor(n*alpha+gamma) == k, if any.

    Witnesses live exactly in [(k-gamma)/alpha, (k+1-gamma)/alpha)."""
    if k < 1:
        raise ValueError("preimages are searched for positive k")
    lo = (_coerce(k) - spectrum.gamma) / spectrum.alpha
    n = max(1, _ceil_exact(lo))
    if apply(spectrum, n) == k:
        return n
    return None


@dataclass(frozen=True)
class BeattyReport:
    partition: bool
    first_violation: Optional[int]
    covered_twice: tuple[int, ...]
    uncovered: tuple[int, ...]
    ambiguous: tuple[int, ...]
    horizon: int
    rational_alpha: bool
    rational_beta: bool

    def to_payload(self) -> dict:
        return {
            "partition": self.partition,
            "first_violation": self.first_violation,
            "covered_twice": list(self.covered_twice),
            "uncovered": list(self.uncovered),
            "ambiguous": list(self.ambiguous),
            "horizon": self.horizon,
            "rational_alpha": self.rational_alpha,
            "rational_beta": self.rational_beta,
        }


def beatty_complement_check(alpha: ExactReal, beta: ExactReal,
                            horizon: int) -> BeattyReport:
    """Classify every k in [1, horizon] against {floor(n*alpha)} and
    {floor(n*beta)}; a perfect partition covers each k exactly once.

    Irrational alpha with 1/alpha + 1/beta = 1 is the complementary case.
    Rational inputs trip a RationalTieWarning and the report simply
    enumerates the violations.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if compare(alpha, 1) <= 0 or compare(beta, 1) <= 0:
        raise ValueError("complementarity needs alpha, beta > 1")
    rational_alpha = isinstance(alpha, Rational)
    rational_beta = isinstance(beta, Rational)
    if rational_alpha or rational_beta:
        warnings.warn("rational slope: floor ties make complementarity fail",
                      RationalTieWarning, stacklevel=2)
    zero = Rational(0)
    coverage = bytearray(horizon + 1)
    ambiguous: list[int] = []
    for slope in (alpha, beta):
        engine = _FloorEngine(slope, zero)
        n = 1
        while True:
            try:
                k = engine.floor_at(n)
            except FloorAmbiguous:
                ambiguous.append(n)
                n += 1
                continue
            if k > horizon:
                break
            if coverage[k] < 2:
                coverage[k] += 1
            n += 1
    uncovered = tuple(k for k in range(1, horizon + 1) if coverage[k] == 0)
    covered_twice = tuple(k for k in range(1, horizon + 1) if coverage[k] >= 2)
    violations = sorted(uncovered + covered_twice)
    return BeattyReport(
        partition=not violations and not ambiguous,
        first_violation=violations[0] if violations else None,
        covered_twice=covered_twice,
        uncovered=uncovered,
        ambiguous=tuple(ambiguous),
        horizon=horizon,
        rational_alpha=rational_alpha,
        rational_beta=rational_beta,
    )
