"""Pure-NumPy kernels: reference implementations of the hot loops.

The compiled extension in `_core.pyx` mirrors these routines operation for
operation; parity between the two backends is covered by tests.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

BACKEND = "python"

# params vector layout shared with the compiled kernel
P_GYRO_VAR = 0
P_ACCEL_VAR = 1
P_MAG_VAR = 2
P_GRAVITY = 3
P_MAG_REF = 4  # ..6
P_ACCEL_GATE = 7
P_GYRO_BIAS = 8  # ..10
PARAMS_LEN = 11


@lru_cache(maxsize=32)
def dct_basis(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis: row k is the k-th analysis vector."""
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    basis = np.cos(np.pi * (2.0 * m + 1.0) * k / (2.0 * n))
    basis[0] *= math.sqrt(1.0 / n)
    basis[1:] *= math.sqrt(2.0 / n)
    basis.setflags(write=False)
    return basis


def dct2(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    return dct_basis(x.shape[0]) @ x


def _quat_mul(a, b):
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


def _quat_from_rotvec(v):
    angle = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if angle < 1e-12:
        q = np.array([1.0 - angle * angle / 8.0, 0.5 * v[0], 0.5 * v[1], 0.5 * v[2]])
    else:
        half = 0.5 * angle
        s = math.sin(half) / angle
        q = np.array([math.cos(half), v[0] * s, v[1] * s, v[2] * s])
    return q / math.sqrt(float(q @ q))


def _rot_matrix(q):
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _rodrigues(v):
    """Rotation matrix for rotation vector v."""
    angle = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    K = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    if angle < 1e-12:
        return np.eye(3) + K
    K /= angle
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def _inv3(m):
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    A = e * i - f * h
    B = -(d * i - f * g)
    C = d * h - e * g
    det = a * A + b * B + c * C
    inv = np.array(
        [
            [A, -(b * i - c * h), b * f - c * e],
            [B, a * i - c * g, -(a * f - c * d)],
            [C, -(a * h - b * g), a * e - b * d],
        ]
    )
    return inv / det


def _vector_update(q, P, meas, ref, var):
    """One multiplicative EKF correction against a unit reference direction."""
    R = _rot_matrix(q)
    v = R.T @ ref
    y = meas - v
    H = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    S = H @ P @ H.T + var * np.eye(3)
    K = P @ H.T @ _inv3(S)
    dtheta = K @ y
    IKH = np.eye(3) - K @ H
    P = IKH @ P @ IKH.T + var * (K @ K.T)
    P = 0.5 * (P + P.T)
    q = _quat_mul(q, _quat_from_rotvec(dtheta))
    q = q / math.sqrt(float(q @ q))
    return q, P


def _euler(q):
    w, x, y, z = q
    sp = 2.0 * (w * y - z * x)
    sp = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp)
    roll = -math.atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    yaw = math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
    return pitch, roll, yaw


def ekf_step(q, P, gyro, accel, mag, dt, params):
    """One predict+correct cycle; returns the new (q, P)."""
    gyro_var = params[P_GYRO_VAR]
    accel_var = params[P_ACCEL_VAR]
    mag_var = params[P_MAG_VAR]
    gravity = params[P_GRAVITY]
    mag_ref = np.asarray(params[P_MAG_REF : P_MAG_REF + 3])
    gate = params[P_ACCEL_GATE]
    bias = np.asarray(params[P_GYRO_BIAS : P_GYRO_BIAS + 3])

    theta = (np.asarray(gyro, dtype=float) - bias) * dt
    q = _quat_mul(q, _quat_from_rotvec(theta))
    q = q / math.sqrt(float(q @ q))
    F = _rodrigues(-theta)
    P = F @ P @ F.T + (gyro_var * dt * dt) * np.eye(3)
    P = 0.5 * (P + P.T)

    a = np.asarray(accel, dtype=float)
    an = math.sqrt(float(a @ a))
    if an > 0.0 and abs(an - gravity) <= gate and math.isfinite(accel_var):
        q, P = _vector_update(q, P, a / an, np.array([0.0, 0.0, 1.0]), accel_var)

    m = np.asarray(mag, dtype=float)
    mn = math.sqrt(float(m @ m))
    if mn > 0.0 and math.isfinite(mag_var):
        q, P = _vector_update(q, P, m / mn, mag_ref, mag_var)

    return q, P


def ekf_run(q0, P0, gyro, accel, mag, dt, params):
    """Filter a block of samples.

    Returns (q_hist[N,4], P_out[3,3], lin_efc[N,3], mag_efc[N,3], euler[N,3])
    where euler columns are (pitch, roll, yaw) and lin_efc is the earth-frame
    acceleration with gravity removed from the down axis.
    """
    gyro = np.ascontiguousarray(gyro, dtype=np.float64)
    accel = np.ascontiguousarray(accel, dtype=np.float64)
    mag = np.ascontiguousarray(mag, dtype=np.float64)
    dt = np.ascontiguousarray(dt, dtype=np.float64)
    params = np.ascontiguousarray(params, dtype=np.float64)
    n = gyro.shape[0]
    gravity = params[P_GRAVITY]

    q = np.asarray(q0, dtype=float).copy()
    P = np.asarray(P0, dtype=float).copy()
    q_hist = np.empty((n, 4))
    lin_efc = np.empty((n, 3))
    mag_efc = np.empty((n, 3))
    euler = np.empty((n, 3))

    for i in range(n):
        q, P = ekf_step(q, P, gyro[i], accel[i], mag[i], dt[i], params)
        R = _rot_matrix(q)
        ae = R @ accel[i]
        lin_efc[i, 0] = ae[0]
        lin_efc[i, 1] = ae[1]
        lin_efc[i, 2] = ae[2] - gravity
        mag_efc[i] = R @ mag[i]
        euler[i] = _euler(q)
        q_hist[i] = q

    return q_hist, P, lin_efc, mag_efc, euler
