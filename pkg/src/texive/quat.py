"""Small quaternion toolbox (scalar-first, body-to-earth convention).

A quaternion q = (w, x, y, z) here represents the rotation that takes
body-frame vectors into the earth frame: v_earth = rotate(q, v_body).
"""

from __future__ import annotations

import math

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q: np.ndarray) -> np.ndarray:
    return q / math.sqrt(float(q @ q))


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def from_rotvec(v: np.ndarray) -> np.ndarray:
    """Quaternion for a rotation of |v| radians about axis v."""
    angle = math.sqrt(float(v @ v))
    if angle < 1e-12:
        # second-order small-angle expansion keeps unit norm to machine precision
        half = 0.5 * angle
        return normalize(np.array([1.0 - half * half / 2.0, 0.5 * v[0], 0.5 * v[1], 0.5 * v[2]]))
    half = 0.5 * angle
    s = math.sin(half) / angle
    return np.array([math.cos(half), v[0] * s, v[1] * s, v[2] * s])


def to_rotvec(q: np.ndarray) -> np.ndarray:
    w = min(1.0, max(-1.0, float(q[0])))
    vec = np.asarray(q[1:], dtype=float)
    s = math.sqrt(float(vec @ vec))
    if s < 1e-12:
        return 2.0 * vec
    angle = 2.0 * math.atan2(s, w)
    return vec * (angle / s)


def rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate body vector v into the earth frame."""
    w, x, y, z = q
    # t = 2 * (q_vec x v); v' = v + w*t + q_vec x t
    tx = 2.0 * (y * v[2] - z * v[1])
    ty = 2.0 * (z * v[0] - x * v[2])
    tz = 2.0 * (x * v[1] - y * v[0])
    return np.array(
        [
            v[0] + w * tx + y * tz - z * ty,
            v[1] + w * ty + z * tx - x * tz,
            v[2] + w * tz + x * ty - y * tx,
        ]
    )


def rotate_inverse(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate earth vector v into the body frame."""
    return rotate(conjugate(q), v)


def to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def from_matrix(m: np.ndarray) -> np.ndarray:
    """Shepperd's method; m must be a proper rotation matrix."""
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    elif m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array(
            [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        )
    if q[0] < 0:
        q = -q
    return normalize(q)


def from_axis_angle(axis: str, angle: float) -> np.ndarray:
    half = 0.5 * angle
    c, s = math.cos(half), math.sin(half)
    idx = {"x": 1, "y": 2, "z": 3}[axis]
    q = np.array([c, 0.0, 0.0, 0.0])
    q[idx] = s
    return q


def from_zyx(yaw: float, pitch: float, roll_internal: float) -> np.ndarray:
    """Compose R_z(yaw) @ R_y(pitch) @ R_x(roll_internal)."""
    return multiply(
        from_axis_angle("z", yaw),
        multiply(from_axis_angle("y", pitch), from_axis_angle("x", roll_internal)),
    )


def from_zyx_many(yaw: np.ndarray, pitch: np.ndarray, roll_internal: np.ndarray) -> np.ndarray:
    """Vectorized from_zyx over equal-length angle arrays; returns (n, 4)."""
    cy, sy = np.cos(yaw / 2), np.sin(yaw / 2)
    cp, sp = np.cos(pitch / 2), np.sin(pitch / 2)
    cr, sr = np.cos(roll_internal / 2), np.sin(roll_internal / 2)
    return np.column_stack(
        [
            cy * cp * cr + sy * sp * sr,
            cy * cp * sr - sy * sp * cr,
            cy * sp * cr + sy * cp * sr,
            sy * cp * cr - cy * sp * sr,
        ]
    )


def rotate_inverse_many(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized earth-to-body rotation of v[i] by q[i]; both (n, ...)."""
    w = q[:, 0:1]
    vec = -q[:, 1:4]  # conjugate
    t = 2.0 * np.cross(vec, v)
    return v + w * t + np.cross(vec, t)


def body_rates(q: np.ndarray, dt: float) -> np.ndarray:
    """Angular velocity taking q[i] to q[i+1] over dt; last row repeats."""
    n = q.shape[0]
    out = np.empty((n, 3))
    if n < 2:
        out[:] = 0.0
        return out
    a, b = q[:-1], q[1:]
    # dq = conj(a) * b, vectorized Hamilton product
    aw, ax, ay, az = a[:, 0], -a[:, 1], -a[:, 2], -a[:, 3]
    bw, bx, by, bz = b[:, 0], b[:, 1], b[:, 2], b[:, 3]
    dw = aw * bw - ax * bx - ay * by - az * bz
    dx = aw * bx + ax * bw + ay * bz - az * by
    dy = aw * by - ax * bz + ay * bw + az * bx
    dz = aw * bz + ax * by - ay * bx + az * bw
    s = np.sqrt(dx * dx + dy * dy + dz * dz)
    angle = 2.0 * np.arctan2(s, dw)
    scale = np.where(s < 1e-12, 2.0, angle / np.where(s < 1e-12, 1.0, s)) / dt
    out[:-1, 0] = dx * scale
    out[:-1, 1] = dy * scale
    out[:-1, 2] = dz * scale
    out[-1] = out[-2]
    return out
