"""Shape recipes to action programs, and the greedy inverse fit.

Count-based recipes (S, Angled, Hook) list their runs from the shaft towards
the tip: ``hook(2, 4, 4)`` is two straight segments next to the shaft, four
primary bends at 0 deg, then four recurve bends at 180 deg ending at the tip.
Custom and helix recipes are given in shaping order (k = 1 first).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geom import rot_x, rot_z, wrap_angle
from .wire import (ActionProgram, ActionStep, BendLaw, Centerline, WireSpec,
                   apply_bend_law, forward_shape)

KINDS = ("c", "s", "angled", "hook", "helix", "custom")
_ARITY = {"c": 1, "s": 2, "angled": 2, "hook": 3, "helix": 1, "custom": 0}

FLAT_TURN = 1e-8
SPACING_TOL = 0.10


@dataclass(frozen=True)
class ShapeRecipe:
    kind: str
    counts: tuple[int, ...] = ()
    dphi: float = 0.0
    custom: tuple[tuple[float, bool], ...] = ()
    segment_length: float = 2.0
    beta_nominal: float = 1.0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        object.__setattr__(self, "custom", tuple((float(p), bool(on)) for p, on in self.custom))
        if kind not in KINDS:
            raise ValueError(f"unknown recipe {self.kind!r}; expected one of {', '.join(KINDS)}")
        if len(self.counts) != _ARITY[kind]:
            raise ValueError(f"{kind} recipe takes {_ARITY[kind]} counts, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValueError("recipe counts must be non-negative")
        if not -math.pi < self.dphi <= math.pi:
            raise ValueError("dphi must lie in (-pi, pi]")
        if not self.segment_length > 0:
            raise ValueError("segment_length must be positive")
        if not 0.0 < self.beta_nominal <= 1.0:
            raise ValueError("beta_nominal must lie in (0, 1]")

    @property
    def total(self) -> int:
        return len(self.custom) if self.kind == "custom" else sum(self.counts)

    # shorthand constructors
    @classmethod
    def c(cls, n_bent, **kw):
        return cls("c", (n_bent,), **kw)

    @classmethod
    def s(cls, n_first, n_second, **kw):
        return cls("s", (n_first, n_second), **kw)

    @classmethod
    def angled(cls, n_straight, n_bent, **kw):
        return cls("angled", (n_straight, n_bent), **kw)

    @classmethod
    def hook(cls, n_straight, n_primary, n_recurve, **kw):
        return cls("hook", (n_straight, n_primary, n_recurve), **kw)

    @classmethod
    def helix(cls, n, dphi, **kw):
        return cls("helix", (n,), dphi=dphi, **kw)

    @classmethod
    def from_steps(cls, steps, **kw):
        return cls("custom", custom=tuple(steps), **kw)


def _base_to_tip(recipe: ShapeRecipe) -> list[tuple[float, bool]]:
    c = recipe.counts
    if recipe.kind == "c":
        return [(0.0, True)] * c[0]
    if recipe.kind == "s":
        return [(0.0, True)] * c[0] + [(math.pi, True)] * c[1]
    if recipe.kind == "angled":
        return [(0.0, False)] * c[0] + [(0.0, True)] * c[1]
    if recipe.kind == "hook":
        return [(0.0, False)] * c[0] + [(0.0, True)] * c[1] + [(math.pi, True)] * c[2]
    raise AssertionError(recipe.kind)


def plan(recipe: ShapeRecipe, wire: WireSpec) -> ActionProgram:
    if recipe.total > wire.n:
        raise ValueError(f"{recipe.kind} recipe needs {recipe.total} segments, wire has {wire.n}")
    if recipe.total * recipe.segment_length > wire.shapeable_length + 1e-9:
        raise ValueError("recipe is longer than the shapeable tip")
    if recipe.kind == "helix":
        shaping = [(k * recipe.dphi, True) for k in range(1, recipe.counts[0] + 1)]
    elif recipe.kind == "custom":
        shaping = list(recipe.custom)
    else:
        shaping = _base_to_tip(recipe)[::-1]
    steps = [ActionStep(k, phi, recipe.beta_nominal if on else 0.0, recipe.segment_length)
             for k, (phi, on) in enumerate(shaping, start=1)]
    return ActionProgram(wire, tuple(steps))


@dataclass(frozen=True)
class FitOptions:
    pinch_mode: str = "binary"
    curvature_threshold: Optional[float] = None
    max_segments: Optional[int] = None
    beta_on: Optional[float] = None

    def __post_init__(self):
        if self.pinch_mode not in ("binary", "continuous"):
            raise ValueError(f"pinch_mode must be 'binary' or 'continuous', got {self.pinch_mode!r}")
        if self.curvature_threshold is not None and not self.curvature_threshold > 0:
            raise ValueError("curvature_threshold must be positive")
        if self.max_segments is not None and self.max_segments < 1:
            raise ValueError("max_segments must be >= 1")


@dataclass(frozen=True)
class FitResult:
    program: ActionProgram
    residual_rms: float
    per_joint_residual: tuple[float, ...]


def fit_actions(target: Centerline, wire: WireSpec, law: BendLaw,
                options: FitOptions = FitOptions()) -> FitResult:
    """Greedy proximal-to-distal recovery of rolls and pinches from a centerline.

    ``target`` is expressed in the base frame: joint 0 at the shaft exit, shaft
    tangent +e3. Each joint's turning axis, written in a frame transported
    along the target, gives the roll increment; the turning angle decides the
    pinch.
    """
    from .evaluation import align, per_segment_error

    pts = np.asarray(target.points, dtype=float)
    if len(pts) < 3:
        raise ValueError("target needs at least 3 points")
    l = wire.segment_length
    lengths = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    bad = np.flatnonzero(np.abs(lengths - l) > SPACING_TOL * l)
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"target spacing {lengths[i]:.4g} mm at segment {i + 1} "
                         f"is inconsistent with l = {l} mm; resample first")
    nseg = len(lengths)
    limit = min(wire.n, options.max_segments or wire.n)
    if nseg > limit:
        raise ValueError(f"target has {nseg} segments, at most {limit} allowed")
    if nseg * l > wire.shapeable_length + 1e-9:
        raise ValueError("target is longer than the shapeable tip")

    beta_on = law.table[-1][0] if options.beta_on is None else options.beta_on
    theta_on = apply_bend_law(law, beta_on)
    threshold = options.curvature_threshold
    if threshold is None:
        threshold = 0.5 * theta_on
        if threshold <= 0:
            raise ValueError("bend law yields no bend; pass an explicit curvature_threshold")

    pts = pts - pts[0]
    R = np.eye(3)
    roll = 0.0
    geometric = []  # base-to-tip (phi, beta)
    for i in range(nseg):
        chord = pts[i + 1] - pts[i]
        v = R.T @ (chord / np.linalg.norm(chord))
        s = math.hypot(v[0], v[1])
        psi = math.atan2(s, v[2])
        if psi < FLAT_TURN:
            dphi, psi = 0.0, 0.0
        else:
            # turning axis e3 x v lies in the local xy-plane
            dphi = math.atan2(v[0], -v[1])
        roll += dphi
        R = R @ rot_z(dphi) @ rot_x(psi)
        if psi >= threshold:
            if options.pinch_mode == "binary":
                beta = beta_on
            else:
                beta = law.invert(min(psi, law.theta_max))
                if beta == 0.0:
                    beta = next((b for b, _ in law.table if b > 0), beta_on)
        else:
            beta = 0.0
        geometric.append((roll, beta))

    steps = tuple(ActionStep(k, wrap_angle(phi), beta, l)
                  for k, (phi, beta) in enumerate(reversed(geometric), start=1))
    program = ActionProgram(wire, steps)

    predicted = forward_shape(program, law)
    # forward_shape pads unshaped proximal segments; compare the shaped part
    pred_pts = predicted.points[len(predicted.points) - nseg - 1:]
    pred = Centerline(pred_pts - pred_pts[0])
    meas = align(Centerline(pts), pred, "base")
    per_joint = per_segment_error(meas, pred, include_base=True)
    rms = float(math.sqrt(np.mean(np.square(per_joint))))
    return FitResult(program, rms, tuple(float(e) for e in per_joint))
