"""Characteristic bend angle from the chord of a constant-bend test arc."""

import math
import statistics
from dataclasses import dataclass
from typing import Sequence

THETA_TOL = 1e-12


@dataclass(frozen=True)
class CalibrationInput:
    l: float
    n: int
    measured_chords: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "measured_chords", tuple(float(c) for c in self.measured_chords))
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"calibration needs n >= 2 segments, got {self.n}")
        if not self.l > 0:
            raise ValueError("segment length must be positive")
        if not self.measured_chords:
            raise ValueError("no chord measurements")
        full = self.n * self.l
        for c in self.measured_chords:
            if not c > 0:
                raise ValueError(f"chord {c} mm must be positive")
            if c > full:
                raise ValueError(f"chord {c} mm exceeds n*l = {full} mm")


@dataclass(frozen=True)
class CalibrationResult:
    theta_star: float
    chord_mean: float
    chord_std: float
    residual: float

    @property
    def theta_star_deg(self) -> float:
        return math.degrees(self.theta_star)


def chord_closed_form(l: float, n: int, theta: float) -> float:
    """End-to-end chord of ``n`` links of length ``l`` turning ``theta`` at each joint."""
    if n < 1 or not l > 0:
        raise ValueError("need n >= 1 and l > 0")
    limit = 2.0 * math.pi / n
    if not 0.0 <= theta <= limit:
        raise ValueError(f"theta {theta} rad outside [0, 2*pi/n = {limit}]")
    if theta == 0.0:
        return n * l
    if theta == limit:
        return 0.0
    return l * math.sin(0.5 * n * theta) / math.sin(0.5 * theta)


def solve_theta(inp: CalibrationInput) -> CalibrationResult:
    """Bisection for the bend angle whose chord equals the mean measured chord.

    The chord decreases strictly from n*l at 0 to 0 at 2*pi/n, so the root is
    unique.
    """
    target = statistics.fmean(inp.measured_chords)
    spread = statistics.stdev(inp.measured_chords) if len(inp.measured_chords) > 1 else 0.0
    l, n = inp.l, inp.n
    full = n * l
    if not 0.0 < target <= full:
        raise ValueError(f"mean chord {target} mm outside (0, n*l = {full}] mm")
    if target == full:
        return CalibrationResult(0.0, target, spread, 0.0)

    lo, hi = 0.0, 2.0 * math.pi / n
    while hi - lo > THETA_TOL:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if chord_closed_form(l, n, mid) > target:
            lo = mid
        else:
            hi = mid
    # finish on whichever bracket end matches best
    theta = min((lo, 0.5 * (lo + hi), hi), key=lambda t: abs(chord_closed_form(l, n, t) - target))
    residual = abs(chord_closed_form(l, n, theta) - target)
    return CalibrationResult(theta, target, spread, residual)


def calibrate(l: float, n: int, chords: Sequence[float]) -> CalibrationResult:
    return solve_theta(CalibrationInput(l, n, tuple(chords)))
