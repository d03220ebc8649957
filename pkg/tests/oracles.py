"""Independent reference computations for the test-suite.

None of these call into the package's numerical paths.
"""

import math

import mpmath as mp
import numpy as np
from scipy.optimize import least_squares


def phasor_chord(l, n, theta, dps=40):
    """Chord of a planar n-link chain by summing unit phasors at high precision."""
    with mp.workdps(dps):
        t = mp.mpf(theta)
        s = sum(mp.expj(k * t) for k in range(1, n + 1))
        return float(mp.mpf(l) * abs(s))


def bisect_theta(l, n, chord, dps=40, iters=200):
    """High-precision bisection for the bend angle of a given chord."""
    with mp.workdps(dps):
        target = mp.mpf(chord)
        lo, hi = mp.mpf(0), 2 * mp.pi / n

        def c(t):
            return mp.mpf(l) * abs(sum(mp.expj(k * t) for k in range(1, n + 1)))

        for _ in range(iters):
            mid = (lo + hi) / 2
            if c(mid) > target:
                lo = mid
            else:
                hi = mid
        return float((lo + hi) / 2)


def rodrigues_matrix(axis, angle):
    """Rotation matrix from the axis-angle formula written out entrywise."""
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    C = 1 - c
    return np.array([
        [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
        [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
        [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
    ])


def fit_cylinder(points):
    """Least-squares cylinder: returns (axis_point, axis_dir, radius, radial_distances)."""
    P = np.asarray(points, dtype=float)
    c0 = P.mean(axis=0)
    # the axis of a helix-like point set is closest to the direction of least
    # in-plane spread of the chord-difference vectors
    d2 = np.diff(P, n=2, axis=0)
    _, _, vt = np.linalg.svd(d2)
    a0 = vt[2]

    def unpack(x):
        th, ph = x[0], x[1]
        a = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
        # axis point restricted to the plane through c0 normal to a
        u = np.cross(a, [1.0, 0.0, 0.0])
        if np.linalg.norm(u) < 1e-6:
            u = np.cross(a, [0.0, 1.0, 0.0])
        u /= np.linalg.norm(u)
        v = np.cross(a, u)
        return a, c0 + x[2] * u + x[3] * v

    def dist(x):
        a, p = unpack(x)
        r = P - p
        return np.linalg.norm(r - np.outer(r @ a, a), axis=1)

    def resid(x):
        return dist(x) - x[4]

    th0 = math.acos(np.clip(a0[2], -1, 1))
    ph0 = math.atan2(a0[1], a0[0])
    x0 = np.array([th0, ph0, 0.0, 0.0, 0.0])
    x0[4] = float(np.mean(dist(x0)))
    sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
    a, p = unpack(sol.x)
    d = dist(sol.x)
    return p, a, float(np.mean(d)), d
