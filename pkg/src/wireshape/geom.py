"""Small SO(3) toolkit.

Conventions: right-handed frames, column vectors, active rotations.
``exp_so3(axis, angle)`` rotates vectors counter-clockwise about ``axis`` when
viewed from its tip, so ``exp_so3(E1, pi/2) @ E3 == -E2``.
"""

import math

import numpy as np

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

UNIT_TOL = 1e-9


def vec3(x, y=None, z=None) -> np.ndarray:
    if y is None:
        v = np.asarray(x, dtype=float).reshape(3)
    else:
        v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v!r}")
    return v


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix with ``hat(v) @ w == cross(v, w)``."""
    x, y, z = vec3(v)
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def exp_so3(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    a = vec3(axis)
    if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
        raise ValueError(f"rotation axis must be unit length, got |a|={np.linalg.norm(a)}")
    K = hat(a)
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def is_rotation(R, tol: float = 1e-12) -> bool:
    R = np.asarray(R, dtype=float)
    return (R.shape == (3, 3)
            and np.allclose(R.T @ R, np.eye(3), atol=tol, rtol=0)
            and abs(np.linalg.det(R) - 1.0) <= tol)


def align_vectors(a, b) -> np.ndarray:
    """Minimal rotation taking direction ``a`` onto direction ``b``."""
    a = vec3(a) / np.linalg.norm(a)
    b = vec3(b) / np.linalg.norm(b)
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    c = float(np.dot(a, b))
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        # antiparallel: half-turn about any axis normal to a
        helper = E1 if abs(a[0]) < 0.9 else E2
        perp = np.cross(a, helper)
        return exp_so3(perp / np.linalg.norm(perp), math.pi)
    return exp_so3(axis / s, math.atan2(s, c))


def wrap_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(angle, 2.0 * math.pi)
    return math.pi if w == -math.pi else w
