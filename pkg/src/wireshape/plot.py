"""Standalone SVG overlay of predicted and measured centerlines."""

import numpy as np

from .evaluation import bending_plane
from .wire import Centerline

PRED_COLOR = "#1f4e9c"
MEAS_COLOR = "#c0392b"
WHISKER_COLOR = "#7f7f7f"


def _plane_axes(pred: Centerline):
    pts = pred.points
    chord = pts[-1] - pts[0]
    plane = bending_plane(pred)
    if plane is None:
        # straight prediction: draw in the base y-z plane
        return np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 0.0])
    _, normal = plane
    u = np.linalg.svd(pts - pts.mean(axis=0))[2][0]
    if u @ chord < 0:
        u = -u
    v = np.cross(normal, u)
    return u, v


def overlay_svg(meas: Centerline, pred: Centerline, title: str = "",
                size: int = 480, margin: float = 24.0) -> str:
    """Two polylines (model in blue, measurement in red) plus a grey whisker per joint."""
    if len(meas) != len(pred):
        raise ValueError("curves must have the same number of joints")
    u, v = _plane_axes(pred)
    origin = pred.points[0]

    def to2d(c):
        rel = c.points - origin
        return np.column_stack([rel @ u, rel @ v])

    a, b = to2d(pred), to2d(meas)
    both = np.vstack([a, b])
    lo, hi = both.min(axis=0), both.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-9)
    scale = (size - 2 * margin) / span

    def xy(p):
        # SVG y grows downwards
        return (margin + (p[0] - lo[0]) * scale, size - margin - (p[1] - lo[1]) * scale)

    def poly(arr, color, cls):
        coords = " ".join("{:.4f},{:.4f}".format(*xy(p)) for p in arr)
        return (f'  <polyline class="{cls}" points="{coords}" fill="none" '
                f'stroke="{color}" stroke-width="2"/>')

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">']
    if title:
        out.append(f'  <title>{_escape(title)}</title>')
    out.append(poly(a, PRED_COLOR, "predicted"))
    out.append(poly(b, MEAS_COLOR, "measured"))
    for k in range(1, len(a)):
        x1, y1 = xy(a[k])
        x2, y2 = xy(b[k])
        out.append(f'  <line class="whisker" x1="{x1:.4f}" y1="{y1:.4f}" x2="{x2:.4f}" '
                   f'y2="{y2:.4f}" stroke="{WHISKER_COLOR}" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
