"""Wire description, action programs and forward kinematics.

Indexing: ``ActionStep.k`` counts in shaping order, k = 1 is the distal tip
segment and is shaped first. Geometry is built in the opposite direction, from
the shaft (base joint at the origin, tangent +e3) out to the tip.

Roll: ``phi`` is the absolute nozzle angle commanded while segment k is bent.
In the shaft frame segment k bends in the plane at roll ``phi``. Walking the
chain from base to tip the relative roll between neighbours is the difference
of their absolute rolls, so adding a constant to every ``phi`` rotates the
whole centerline about e3.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geom import E3, rot_x, rot_z, wrap_angle

LENGTH_TOL = 1e-9


@dataclass(frozen=True)
class WireSpec:
    diameter: float = 0.64
    shapeable_length: float = 20.0
    total_length: float = 680.0
    segment_length: float = 2.0
    n: int = 10

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"segment count must be a positive integer, got {self.n}")
        if not self.segment_length > 0:
            raise ValueError("segment_length must be positive")
        if not self.diameter > 0:
            raise ValueError("diameter must be positive")
        if self.n * self.segment_length > self.shapeable_length + LENGTH_TOL:
            raise ValueError(
                f"n*l = {self.n * self.segment_length} mm exceeds shapeable length "
                f"{self.shapeable_length} mm")
        if self.shapeable_length > self.total_length + LENGTH_TOL:
            raise ValueError("shapeable length exceeds total length")


@dataclass(frozen=True)
class ActionStep:
    k: int
    phi: float
    beta: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.beta) and math.isfinite(self.delta)):
            raise ValueError(f"step {self.k}: non-finite value")
        if not self.delta > 0:
            raise ValueError(f"step {self.k}: advance must be positive, got {self.delta}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"step {self.k}: pinch command {self.beta} outside [0, 1]")

    @property
    def pinched(self) -> bool:
        # beta == 0 is the jaws-open command: no bend regardless of the law
        return self.beta > 0.0


@dataclass(frozen=True)
class ActionProgram:
    wire: WireSpec
    steps: tuple[ActionStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if len(self.steps) > self.wire.n:
            raise ValueError(f"{len(self.steps)} steps exceed the wire's {self.wire.n} segments")
        for i, s in enumerate(self.steps, start=1):
            if s.k != i:
                raise ValueError(f"step indices must run 1, 2, ... in order; position {i} has k={s.k}")
        fed = sum(s.delta for s in self.steps)
        if fed > self.wire.shapeable_length + LENGTH_TOL:
            raise ValueError(f"total advance {fed} mm exceeds shapeable length "
                             f"{self.wire.shapeable_length} mm")

    @property
    def rolls(self) -> list[float]:
        return [s.phi for s in self.steps]

    def roll_increments(self) -> list[float]:
        """Shaping-order increments phi_k - phi_{k-1} with phi_0 = 0."""
        prev = 0.0
        out = []
        for s in self.steps:
            out.append(s.phi - prev)
            prev = s.phi
        return out

    def pinch_pattern(self) -> list[bool]:
        return [s.pinched for s in self.steps]


@dataclass(frozen=True)
class BendLaw:
    """Piecewise-linear map from pinch command to bend angle (radians)."""

    table: tuple[tuple[float, float], ...]

    def __post_init__(self):
        table = tuple((float(b), float(t)) for b, t in self.table)
        object.__setattr__(self, "table", table)
        if not table:
            raise ValueError("bend law table is empty")
        betas = [b for b, _ in table]
        thetas = [t for _, t in table]
        if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("bend law betas must be strictly increasing")
        if any(t < 0 for t in thetas) or any(t2 < t1 for t1, t2 in zip(thetas, thetas[1:])):
            raise ValueError("bend law thetas must be non-negative and non-decreasing")

    @classmethod
    def constant(cls, beta: float, theta: float) -> "BendLaw":
        return cls(((beta, theta),))

    @property
    def theta_max(self) -> float:
        return self.table[-1][1]

    def invert(self, theta: float) -> float:
        """Smallest pinch command reaching ``theta`` (clamped to the table)."""
        if theta <= self.table[0][1]:
            return self.table[0][0]
        for (b0, t0), (b1, t1) in zip(self.table, self.table[1:]):
            if theta <= t1:
                if t1 == t0:
                    return b0
                return b0 + (b1 - b0) * (theta - t0) / (t1 - t0)
        return self.table[-1][0]


@dataclass(frozen=True)
class Centerline:
    points: np.ndarray
    frame: str = "base"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"centerline points must be an (N, 3) array, got shape {pts.shape}")
        if len(pts) < 2:
            raise ValueError("centerline needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("centerline has non-finite coordinates")
        if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0.0):
            raise ValueError("consecutive centerline points coincide")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, Centerline):
            return NotImplemented
        return self.frame == other.frame and np.array_equal(self.points, other.points)

    @property
    def tip(self) -> np.ndarray:
        return self.points[-1]

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)


def apply_bend_law(law: BendLaw, beta: float) -> float:
    if not law.table:
        raise ValueError("bend law table is empty")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"pinch command {beta} outside [0, 1]")
    table = law.table
    if beta <= table[0][0]:
        return table[0][1]
    if beta >= table[-1][0]:
        return table[-1][1]
    for (b0, t0), (b1, t1) in zip(table, table[1:]):
        if beta <= b1:
            return t0 + (t1 - t0) * (beta - b0) / (b1 - b0)
    return table[-1][1]  # unreachable


@dataclass(frozen=True)
class Joint:
    """One segment in geometric (base-to-tip) order."""

    k: int
    roll: float
    theta: float
    length: float


def geometric_joints(program: ActionProgram, law: BendLaw) -> list[Joint]:
    """Segments from the shaft outwards, padded with straight unshaped segments.

    Segments not covered by a step (k > len(steps)) sit between the shaft and
    the shaped tip; they are straight, carry zero roll and length ``l``.
    """
    wire = program.wire
    joints = [Joint(k, 0.0, 0.0, wire.segment_length)
              for k in range(wire.n, len(program.steps), -1)]
    for s in reversed(program.steps):
        theta = apply_bend_law(law, s.beta) if s.pinched else 0.0
        joints.append(Joint(s.k, s.phi, theta, s.delta))
    return joints


def _sinc_half(theta: float) -> float:
    h = 0.5 * theta
    if abs(h) < 1e-4:
        return 1.0 - h * h / 6.0 + h ** 4 / 120.0
    return math.sin(h) / h


def chain_points(joints: Sequence[Joint], mode: str = "rigid") -> np.ndarray:
    if mode not in ("rigid", "arc"):
        raise ValueError(f"unknown kinematics mode {mode!r}")
    R = np.eye(3)
    p = np.zeros(3)
    prev_roll = 0.0
    pts = [p.copy()]
    for j in joints:
        R = R @ rot_z(j.roll - prev_roll)
        prev_roll = j.roll
        if mode == "rigid":
            R = R @ rot_x(j.theta)
            p = p + j.length * (R @ E3)
        else:
            chord = j.length * _sinc_half(j.theta)
            p = p + chord * (R @ rot_x(0.5 * j.theta) @ E3)
            R = R @ rot_x(j.theta)
        pts.append(p.copy())
    return np.array(pts)


def forward_shape(program: ActionProgram, law: BendLaw, mode: str = "rigid") -> Centerline:
    """Predicted centerline: ``wire.n + 1`` joints from the base (origin) to the tip."""
    if not isinstance(program, ActionProgram):
        raise TypeError("forward_shape expects an ActionProgram")
    return Centerline(chain_points(geometric_joints(program, law), mode))


def chord_of(centerline: Centerline) -> float:
    pts = centerline.points
    return float(np.linalg.norm(pts[-1] - pts[0]))


def turning(points, base_tangent=E3):
    """Discrete turning at every joint, base joint included.

    Returns ``(angles, axes)``: the angle between consecutive chord directions
    (the first measured against ``base_tangent``) and the unit turning axis in
    the base frame, zero where the turning is below 1e-8 rad.
    """
    pts = np.asarray(points, dtype=float)
    d = np.diff(pts, axis=0)
    d = d / np.linalg.norm(d, axis=1)[:, None]
    prev = np.vstack([np.asarray(base_tangent, dtype=float)[None, :], d[:-1]])
    cr = np.cross(prev, d)
    s = np.linalg.norm(cr, axis=1)
    c = np.einsum("ij,ij->i", prev, d)
    angles = np.arctan2(s, c)
    axes = np.zeros_like(cr)
    ok = angles >= 1e-8
    axes[ok] = cr[ok] / s[ok, None]
    return angles, axes


def signed_turning(points, normal, base_tangent=E3) -> np.ndarray:
    """Turning angles signed by their axis' orientation against ``normal``."""
    angles, axes = turning(points, base_tangent)
    sign = np.sign(axes @ np.asarray(normal, dtype=float))
    return angles * sign


def wrapped_roll_error(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))
