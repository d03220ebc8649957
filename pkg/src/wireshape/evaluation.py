"""Alignment of measured and predicted centerlines and the shape-error report."""

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geom import align_vectors, exp_so3
from .wire import Centerline, WireSpec

ALIGN_MODES = ("base", "base-roll")


@dataclass(frozen=True)
class ErrorReport:
    shape_label: str
    per_segment: tuple[float, ...]
    percent_of_shapeable: tuple[float, ...]
    e_min: float
    e_max: float
    e_mean: float
    e_rms: float


def resample(points, n: int, l: float) -> Centerline:
    """``n + 1`` points spaced ``l`` apart in arc length along a polyline.

    Inputs down to 90 % of ``n * l`` are accepted; the missing length is
    extrapolated along the last chord.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
        raise ValueError("need at least two 3D points")
    if n < 1 or not l > 0:
        raise ValueError("need n >= 1 and l > 0")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    keep = np.concatenate([[True], seg > 0])
    pts, seg = pts[keep], seg[seg > 0]
    if len(pts) < 2:
        raise ValueError("polyline has zero length")
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total < 0.9 * n * l:
        raise ValueError(f"polyline length {total:.4g} mm is shorter than 0.9*n*l = {0.9 * n * l:.4g} mm")
    out = np.empty((n + 1, 3))
    for i in range(n + 1):
        t = i * l
        j = min(int(np.searchsorted(s, t, side="right")) - 1, len(seg) - 1)
        f = (t - s[j]) / seg[j]
        if f == 0.0:
            out[i] = pts[j]
        elif f == 1.0:
            out[i] = pts[j + 1]
        else:
            out[i] = pts[j] + f * (pts[j + 1] - pts[j])
    return Centerline(out)


def _first_tangent(c: Centerline) -> np.ndarray:
    d = c.points[1] - c.points[0]
    norm = np.linalg.norm(d)
    if norm == 0.0:
        raise ValueError("degenerate initial tangent")
    return d / norm


def best_roll(a: np.ndarray, b: np.ndarray, axis: np.ndarray) -> float:
    """Rotation angle about ``axis`` minimising sum |R a_i - b_i|^2."""
    a_perp = a - np.outer(a @ axis, axis)
    b_perp = b - np.outer(b @ axis, axis)
    sin_term = float(np.sum(np.cross(a_perp, b_perp) @ axis))
    cos_term = float(np.sum(a_perp * b_perp))
    if sin_term == 0.0 and cos_term == 0.0:
        return 0.0
    return math.atan2(sin_term, cos_term)


def align(meas: Centerline, pred: Centerline, mode: str = "base") -> Centerline:
    """Rigidly move ``meas`` into the base frame of ``pred``.

    ``base`` puts the base joints together and turns the first chord of
    ``meas`` onto that of ``pred`` (for a predicted shape leaving the shaft
    straight, that is +e3). ``base-roll`` then also rolls about that tangent
    by the angle minimising the summed squared joint distances.
    """
    if mode not in ALIGN_MODES:
        raise ValueError(f"alignment mode must be one of {ALIGN_MODES}, got {mode!r}")
    if len(meas) < 2 or len(pred) < 2:
        raise ValueError("alignment needs at least 2 points per curve")
    t_meas = _first_tangent(meas)
    t_pred = _first_tangent(pred)
    origin = pred.points[0]
    R = align_vectors(t_meas, t_pred)
    local = (meas.points - meas.points[0]) @ R.T
    if mode == "base-roll":
        m = min(len(meas), len(pred))
        alpha = best_roll(local[:m], pred.points[:m] - origin, t_pred)
        local = local @ exp_so3(t_pred, alpha).T
    return Centerline(local + origin, frame=pred.frame)


def bending_plane(pred: Centerline):
    """Least-squares plane ``(centroid, unit normal)`` of the predicted joints, or None if collinear."""
    pts = pred.points
    c = pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(pts - c)
    if len(sv) < 2 or sv[1] <= 1e-9 * max(sv[0], 1.0):
        return None
    return c, vt[2]


def project_to_plane(c: Centerline, plane) -> Centerline:
    centroid, normal = plane
    pts = c.points - np.outer((c.points - centroid) @ normal, normal)
    return Centerline(pts, frame=c.frame)


def per_segment_error(meas: Centerline, pred: Centerline, planar: bool = False,
                      include_base: bool = False) -> np.ndarray:
    """Index-matched joint distances, one per segment end (joints 1..n).

    ``planar`` first projects both curves onto the best-fit plane of ``pred``.
    """
    if len(meas) != len(pred):
        raise ValueError(f"point count mismatch: {len(meas)} measured vs {len(pred)} predicted")
    if planar:
        plane = bending_plane(pred)
        if plane is not None:
            meas, pred = project_to_plane(meas, plane), project_to_plane(pred, plane)
    e = np.linalg.norm(meas.points - pred.points, axis=1)
    return e if include_base else e[1:]


def summarize(errors: Sequence[float], wire: WireSpec, label: str = "") -> ErrorReport:
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise ValueError("no errors to summarise")
    if np.any(e < 0):
        raise ValueError("errors must be non-negative")
    pct = e / wire.shapeable_length * 100.0
    return ErrorReport(
        shape_label=label,
        per_segment=tuple(float(x) for x in e),
        percent_of_shapeable=tuple(float(x) for x in pct),
        e_min=float(e.min()),
        e_max=float(e.max()),
        e_mean=float(e.mean()),
        e_rms=float(math.sqrt(np.mean(e * e))),
    )


def aggregate(reports: Iterable[ErrorReport]) -> dict:
    """Cross-shape summary: the mean of per-shape means, plus pooled RMS and extremes."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    pooled = np.concatenate([np.asarray(r.per_segment) for r in reports])
    return {
        "mean_of_means": float(np.mean([r.e_mean for r in reports])),
        "pooled_mean": float(pooled.mean()),
        "pooled_rms": float(math.sqrt(np.mean(pooled * pooled))),
        "min": float(pooled.min()),
        "max": float(pooled.max()),
    }


def evaluate(meas: Centerline, pred: Centerline, wire: WireSpec, label: str = "",
             mode: str = "base", planar: bool = True) -> ErrorReport:
    aligned = align(meas, pred, mode)
    return summarize(per_segment_error(aligned, pred, planar=planar), wire, label)


def report_csv(reports: Iterable[ErrorReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["shape", "k", "e_mm", "e_pct"])
    for r in reports:
        for k, (e, p) in enumerate(zip(r.per_segment, r.percent_of_shapeable), start=1):
            w.writerow([r.shape_label, k, repr(e), repr(p)])
    return buf.getvalue()


def summary_table(reports: Sequence[ErrorReport]) -> str:
    rows = [f"{'shape':<12} {'min-max [mm]':>14} {'mean [mm]':>10} {'rms [mm]':>9}"]
    for r in reports:
        rng = f"{r.e_min:.2f}-{r.e_max:.2f}"
        rows.append(f"{r.shape_label:<12} {rng:>14} {r.e_mean:>10.2f} {r.e_rms:>9.2f}")
    if len(reports) > 1:
        agg = aggregate(reports)
        rows.append(f"{'average':<12} {'--':>14} {agg['mean_of_means']:>10.2f} {agg['pooled_rms']:>9.2f}")
    return "\n".join(rows) + "\n"
