"""Rotation representations and conversions on SO(3).

Conventions
-----------
Rotation matrices are plain ``(3, 3)`` float arrays acting on column vectors.
Their columns are the left, down and front pose vectors of a face.

Euler angles are in degrees and follow the extrinsic x-y-z order::

    R = Rz(roll) @ Ry(yaw) @ Rx(pitch)

so pitch is applied first about the fixed x-axis, then yaw about y, then roll
about z.  Yaw is the middle angle and therefore the one that hits gimbal lock
at +-90 degrees.  Canonical Euler angles lie in (-180, 180], with yaw in
[-90, 90].

Quaternions are scalar-first ``(w, x, y, z)`` and canonicalized to ``w >= 0``;
when ``w == 0`` the first nonzero component is made positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ValidationError

# |yaw| within this many degrees of 90 counts as gimbal lock
GIMBAL_TOL_DEG = 1e-7
_GIMBAL_COS = math.sin(math.radians(GIMBAL_TOL_DEG))


@dataclass(frozen=True)
class EulerAngles:
    pitch: float
    yaw: float
    roll: float
    gimbal_locked: bool = field(default=False, compare=False)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.pitch, self.yaw, self.roll)


@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def canonical(self) -> "Quaternion":
        q = self.as_array()
        return Quaternion(*_canonical_sign(q))


@dataclass(frozen=True)
class AxisAngle:
    axis: tuple[float, float, float]
    theta: float  # radians

    def rotvec(self) -> np.ndarray:
        return np.asarray(self.axis, dtype=float) * self.theta


def wrap_deg(a):
    """Wrap angles in degrees into (-180, 180]."""
    return 180.0 - np.mod(180.0 - np.asarray(a, dtype=float), 360.0)


def _wrap1(a: float) -> float:
    return 180.0 - (180.0 - a) % 360.0


def _canonical_sign(v: np.ndarray, tol: float = 0.0) -> np.ndarray:
    # first component with |v| > tol made positive
    for c in v:
        if abs(c) > tol:
            return v if c > 0 else -v
    return v


def hat(w) -> np.ndarray:
    """Cross-product (skew-symmetric) matrix of a 3-vector."""
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(S: np.ndarray) -> np.ndarray:
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _det3(m) -> float:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def is_rotation(R, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    # plain floats: this runs on every conversion and numpy overhead dominates at 3x3
    m = R.tolist()
    if not math.isfinite(sum(m[0]) + sum(m[1]) + sum(m[2])):  # nan and inf propagate
        return False
    (a, b, c), (d, e, f), (g, h, i) = m
    # entries of R^T R - I (symmetric, so off-diagonal terms count twice)
    d00 = a * a + d * d + g * g - 1.0
    d11 = b * b + e * e + h * h - 1.0
    d22 = c * c + f * f + i * i - 1.0
    d01 = a * b + d * e + g * h
    d02 = a * c + d * f + g * i
    d12 = b * c + e * f + h * i
    err = d00 * d00 + d11 * d11 + d22 * d22 + 2.0 * (d01 * d01 + d02 * d02 + d12 * d12)
    return math.sqrt(err) <= tol and abs(_det3(m) - 1.0) <= tol


def as_rotation(R, tol: float = 1e-6) -> np.ndarray:
    """Return ``R`` as a float array, raising if it is not a rotation within ``tol``."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValidationError(f"rotation matrix must be 3x3, got shape {R.shape}")
    if not is_rotation(R, tol):
        raise ValidationError("matrix is not a rotation (orthonormal with det +1)")
    return R


def euler_to_matrix(e: EulerAngles) -> np.ndarray:
    angles = e.as_tuple()
    if not all(math.isfinite(a) for a in angles):
        raise ValidationError(f"Euler angles must be finite, got {angles}")
    pitch, yaw, roll = (math.radians(a) for a in angles)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    cr, sr = math.cos(roll), math.sin(roll)
    # entries of Rz(roll) Ry(yaw) Rx(pitch)
    return np.array([
        [cr * cy, cr * sy * sp - sr * cp, cr * sy * cp + sr * sp],
        [sr * cy, sr * sy * sp + cr * cp, sr * sy * cp - cr * sp],
        [-sy, cy * sp, cy * cp],
    ])


def matrix_to_euler(R, check: bool = True) -> EulerAngles:
    """Inverse of :func:`euler_to_matrix`.

    At gimbal lock (yaw = +-90) pitch and roll are not separable; the
    returned angles put everything into pitch, set roll to 0 and carry
    ``gimbal_locked=True``.
    """
    R = (as_rotation(R) if check else np.asarray(R, dtype=float)).tolist()
    R = {(r, c): R[r][c] for r in range(3) for c in range(3)}
    cos_yaw = math.hypot(R[0, 0], R[1, 0])
    yaw = math.atan2(-R[2, 0], cos_yaw)
    if cos_yaw < _GIMBAL_COS:
        # R = Ry(+-90) Rx(pitch): row 1 is [0, cos(pitch), -sin(pitch)] for both signs
        pitch = math.atan2(-R[1, 2], R[1, 1])
        yaw = math.copysign(math.pi / 2, -R[2, 0])
        return EulerAngles(_wrap1(math.degrees(pitch)), math.degrees(yaw), 0.0,
                           gimbal_locked=True)
    pitch = math.atan2(R[2, 1], R[2, 2])
    roll = math.atan2(R[1, 0], R[0, 0])
    return EulerAngles(_wrap1(math.degrees(pitch)), math.degrees(yaw),
                       _wrap1(math.degrees(roll)))


def quat_to_matrix(q: Quaternion) -> np.ndarray:
    n = math.sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z)
    if not math.isfinite(n) or abs(n - 1.0) > 1e-6:
        raise ValidationError(f"quaternion norm {n} deviates from 1 by more than 1e-6")
    w, x, y, z = q.w / n, q.x / n, q.y / n, q.z / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(R, check: bool = True) -> Quaternion:
    """Shepperd's method: branch on the largest of trace and diagonal entries."""
    R = (as_rotation(R) if check else np.asarray(R, dtype=float)).tolist()
    R = {(r, c): R[r][c] for r in range(3) for c in range(3)}
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    cands = [tr, R[0, 0], R[1, 1], R[2, 2]]
    branch = cands.index(max(cands))
    if branch == 0:
        w = 0.5 * math.sqrt(1.0 + tr)
        f = 0.25 / w
        q = [w, (R[2, 1] - R[1, 2]) * f, (R[0, 2] - R[2, 0]) * f, (R[1, 0] - R[0, 1]) * f]
    elif branch == 1:
        x = 0.5 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        f = 0.25 / x
        q = [(R[2, 1] - R[1, 2]) * f, x, (R[0, 1] + R[1, 0]) * f, (R[0, 2] + R[2, 0]) * f]
    elif branch == 2:
        y = 0.5 * math.sqrt(1.0 - R[0, 0] + R[1, 1] - R[2, 2])
        f = 0.25 / y
        q = [(R[0, 2] - R[2, 0]) * f, (R[0, 1] + R[1, 0]) * f, y, (R[1, 2] + R[2, 1]) * f]
    else:
        z = 0.5 * math.sqrt(1.0 - R[0, 0] - R[1, 1] + R[2, 2])
        f = 0.25 / z
        q = [(R[1, 0] - R[0, 1]) * f, (R[0, 2] + R[2, 0]) * f, (R[1, 2] + R[2, 1]) * f, z]
    n = math.sqrt(sum(c * c for c in q))
    q = _canonical_sign(np.array([c / n for c in q]))
    return Quaternion(*(float(c) for c in q))


def axis_angle_to_matrix(a: AxisAngle) -> np.ndarray:
    """Rodrigues' formula, written out entrywise."""
    theta = float(a.theta)
    axis = np.asarray(a.axis, dtype=float)
    if theta == 0.0:
        return np.eye(3)
    if axis.shape != (3,):
        raise ValidationError(f"axis must be a 3-vector, got shape {axis.shape}")
    n = math.sqrt(float(axis @ axis))
    if abs(n - 1.0) > 1e-6:
        raise ValidationError(f"axis must be a unit vector, got norm {n}")
    x, y, z = (float(v) / n for v in axis)
    c, s = math.cos(theta), math.sin(theta)
    C = 1.0 - c
    # cos(t) I + sin(t) K + (1 - cos(t)) a a^T
    return np.array([
        [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
        [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
        [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
    ])


def matrix_to_axis_angle(R, check: bool = True) -> AxisAngle:
    """Log map. Returns ``theta`` in [0, pi].

    The angle comes from ``atan2(|skew|, (tr - 1) / 2)``, which equals the
    arccos form but keeps full precision near 0 and pi.  For angles past
    120 degrees the axis is read off the symmetric part of ``R`` and its sign
    fixed from the skew part; at pi the sign is canonical (first nonzero
    component positive).
    """
    R = as_rotation(R) if check else np.asarray(R, dtype=float)
    m = R.tolist()
    c = (m[0][0] + m[1][1] + m[2][2] - 1.0) / 2.0
    skew = (0.5 * (m[2][1] - m[1][2]), 0.5 * (m[0][2] - m[2][0]), 0.5 * (m[1][0] - m[0][1]))
    s = math.hypot(*skew)
    theta = math.atan2(s, c)
    if theta == 0.0:
        return AxisAngle((1.0, 0.0, 0.0), 0.0)
    if c > -0.5:
        return AxisAngle((skew[0] / s, skew[1] / s, skew[2] / s), theta)
    else:
        skew = np.array(skew)
        B = 0.5 * (R + R.T) - c * np.eye(3)
        col = B[:, int(np.argmax(np.diag(B)))]
        axis = col / np.linalg.norm(col)
        if theta >= math.pi - 1e-9:
            axis = _canonical_sign(axis, tol=1e-12)
        elif axis @ skew < 0:
            axis = -axis
    return AxisAngle(tuple(float(v) for v in axis), float(theta))


def project_to_so3(A) -> np.ndarray:
    """Closest rotation to ``A`` in Frobenius norm.

    ``U diag(1, 1, sign(det(U V^T))) V^T``; the sign term keeps the result in
    SO(3) when the plain ``U V^T`` would be a reflection.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3) or not np.all(np.isfinite(A)):
        raise ValidationError("project_to_so3 needs a finite 3x3 matrix")
    U, s, Vt = np.linalg.svd(A)
    if s[-1] <= 1e-12:
        raise DegenerateInputError(
            f"matrix is rank deficient: smallest singular value {s[-1]:.3e} <= 1e-12")
    d = -1.0 if np.linalg.det(U @ Vt) < 0 else 1.0
    return (U * np.array([1.0, 1.0, d])) @ Vt


def project_to_so3_batch(A: np.ndarray) -> np.ndarray:
    """Vectorized :func:`project_to_so3` over a ``(n, 3, 3)`` stack."""
    A = np.asarray(A, dtype=float)
    U, s, Vt = np.linalg.svd(A)
    if np.any(s[:, -1] <= 1e-12):
        bad = int(np.argmin(s[:, -1]))
        raise DegenerateInputError(
            f"matrix {bad} is rank deficient: smallest singular value {s[bad, -1]:.3e}")
    d = np.where(np.linalg.det(U @ Vt) < 0, -1.0, 1.0)
    U = U.copy()
    U[:, :, 2] *= d[:, None]
    return U @ Vt


def geodesic_distance_deg(R1, R2) -> float:
    """Rotation angle of ``R1^T R2`` in degrees."""
    M = np.asarray(R1, dtype=float).T @ np.asarray(R2, dtype=float)
    c = (np.trace(M) - 1.0) / 2.0
    s = np.linalg.norm(vee(0.5 * (M - M.T)))
    return math.degrees(math.atan2(s, c))


def vector_angle_deg(a, b) -> np.ndarray:
    """Angle between vectors along the last axis, in degrees, via atan2(|a x b|, a.b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.sum(a * b, axis=-1)
    return np.degrees(np.arctan2(cross, dot))


def random_quaternions(n: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, 4)`` quaternions uniform over SO(3) (normalized 4-D Gaussians)."""
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def random_rotations(n: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, 3, 3)`` rotation matrices uniform over SO(3)."""
    q = random_quaternions(n, rng)
    w, x, y, z = q.T
    R = np.empty((n, 3, 3))
    R[:, 0, 0] = 1 - 2 * (y * y + z * z)
    R[:, 0, 1] = 2 * (x * y - w * z)
    R[:, 0, 2] = 2 * (x * z + w * y)
    R[:, 1, 0] = 2 * (x * y + w * z)
    R[:, 1, 1] = 1 - 2 * (x * x + z * z)
    R[:, 1, 2] = 2 * (y * z - w * x)
    R[:, 2, 0] = 2 * (x * z - w * y)
    R[:, 2, 1] = 2 * (y * z + w * x)
    R[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return R


# representation name -> (to matrix, from matrix)
_CONVERTERS = {
    "matrix": (as_rotation, lambda R, check=True: as_rotation(R) if check else np.asarray(R)),
    "euler": (euler_to_matrix, matrix_to_euler),
    "quat": (quat_to_matrix, matrix_to_quat),
    "axis": (axis_angle_to_matrix, matrix_to_axis_angle),
}
REPRESENTATIONS = tuple(_CONVERTERS)


def to_matrix(value, kind: str) -> np.ndarray:
    try:
        return _CONVERTERS[kind][0](value)
    except KeyError:
        raise ValidationError(f"unknown representation {kind!r}; "
                              f"expected one of {REPRESENTATIONS}") from None


def from_matrix(R, kind: str, check: bool = True):
    """``check=False`` skips validating ``R`` (for matrices already known to be rotations)."""
    try:
        return _CONVERTERS[kind][1](R, check)
    except KeyError:
        raise ValidationError(f"unknown representation {kind!r}; "
                              f"expected one of {REPRESENTATIONS}") from None


def convert(value, src: str, dst: str):
    """Convert between any two of ``matrix``, ``euler``, ``quat``, ``axis``."""
    # to_matrix validates (or constructs) a rotation, so the second check is redundant
    return from_matrix(to_matrix(value, src), dst, check=False)
