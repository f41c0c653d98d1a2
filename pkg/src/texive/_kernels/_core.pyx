# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: orientation-filter loop and windowed DCT.

Mirrors `_fallback.py` operation for operation; both backends must stay
interchangeable (see the kernel parity tests).
"""

from libc.math cimport sqrt, sin, cos, asin, atan2, fabs, isfinite

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

_BASIS_CACHE = {}


def _basis(int n):
    basis = _BASIS_CACHE.get(n)
    if basis is None:
        k = np.arange(n)[:, None]
        m = np.arange(n)[None, :]
        basis = np.cos(np.pi * (2.0 * m + 1.0) * k / (2.0 * n))
        basis[0] *= np.sqrt(1.0 / n)
        basis[1:] *= np.sqrt(2.0 / n)
        basis = np.ascontiguousarray(basis)
        _BASIS_CACHE[n] = basis
    return basis


def dct2(x):
    """Orthonormal DCT-II of a 1-D float64 signal."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] b = _basis(x.shape[0])
    cdef double[::1] xv = x
    cdef Py_ssize_t n = xv.shape[0]
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += b[i, j] * xv[j]
        ov[i] = acc
    return out


cdef inline void quat_mul(double *a, double *b, double *out) noexcept:
    out[0] = a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    out[1] = a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2]
    out[2] = a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1]
    out[3] = a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]


cdef inline void quat_normalize(double *q) noexcept:
    cdef double n = sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    q[0] /= n
    q[1] /= n
    q[2] /= n
    q[3] /= n


cdef inline void quat_from_rotvec(double *v, double *q) noexcept:
    cdef double angle = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    cdef double half, s
    if angle < 1e-12:
        q[0] = 1.0 - angle * angle / 8.0
        q[1] = 0.5 * v[0]
        q[2] = 0.5 * v[1]
        q[3] = 0.5 * v[2]
    else:
        half = 0.5 * angle
        s = sin(half) / angle
        q[0] = cos(half)
        q[1] = v[0] * s
        q[2] = v[1] * s
        q[3] = v[2] * s
    quat_normalize(q)


cdef inline void rot_matrix(double *q, double *r) noexcept:
    cdef double w = q[0], x = q[1], y = q[2], z = q[3]
    r[0] = 1 - 2 * (y * y + z * z)
    r[1] = 2 * (x * y - w * z)
    r[2] = 2 * (x * z + w * y)
    r[3] = 2 * (x * y + w * z)
    r[4] = 1 - 2 * (x * x + z * z)
    r[5] = 2 * (y * z - w * x)
    r[6] = 2 * (x * z - w * y)
    r[7] = 2 * (y * z + w * x)
    r[8] = 1 - 2 * (x * x + y * y)


cdef inline void mat3_mul(double *a, double *b, double *c) noexcept:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            c[3 * i + j] = 0.0
            for k in range(3):
                c[3 * i + j] += a[3 * i + k] * b[3 * k + j]


cdef inline void mat3_mul_t(double *a, double *b, double *c) noexcept:
    # c = a @ b.T
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            c[3 * i + j] = 0.0
            for k in range(3):
                c[3 * i + j] += a[3 * i + k] * b[3 * j + k]


cdef inline void inv3(double *m, double *out) noexcept:
    cdef double a = m[0], b = m[1], c = m[2]
    cdef double d = m[3], e = m[4], f = m[5]
    cdef double g = m[6], h = m[7], i = m[8]
    cdef double A = e * i - f * h
    cdef double B = -(d * i - f * g)
    cdef double C = d * h - e * g
    cdef double det = a * A + b * B + c * C
    out[0] = A / det
    out[1] = -(b * i - c * h) / det
    out[2] = (b * f - c * e) / det
    out[3] = B / det
    out[4] = (a * i - c * g) / det
    out[5] = -(a * f - c * d) / det
    out[6] = C / det
    out[7] = -(a * h - b * g) / det
    out[8] = (a * e - b * d) / det


cdef inline void symmetrize(double *p) noexcept:
    cdef double t
    t = 0.5 * (p[1] + p[3]); p[1] = t; p[3] = t
    t = 0.5 * (p[2] + p[6]); p[2] = t; p[6] = t
    t = 0.5 * (p[5] + p[7]); p[5] = t; p[7] = t
    p[0] = 0.5 * (p[0] + p[0])
    p[4] = 0.5 * (p[4] + p[4])
    p[8] = 0.5 * (p[8] + p[8])


cdef void vector_update(double *q, double *P, double *meas, double *ref, double var) noexcept:
    cdef double R[9]
    cdef double v[3]
    cdef double H[9]
    cdef double S[9]
    cdef double Sinv[9]
    cdef double PHt[9]
    cdef double K[9]
    cdef double IKH[9]
    cdef double tmp[9]
    cdef double tmp2[9]
    cdef double y[3]
    cdef double dtheta[3]
    cdef double dq[4]
    cdef double qn[4]
    cdef int i, j, k

    rot_matrix(q, R)
    # v = R.T @ ref
    for i in range(3):
        v[i] = R[i] * ref[0] + R[i + 3] * ref[1] + R[i + 6] * ref[2]
    for i in range(3):
        y[i] = meas[i] - v[i]
    H[0] = 0.0;   H[1] = -v[2]; H[2] = v[1]
    H[3] = v[2];  H[4] = 0.0;   H[5] = -v[0]
    H[6] = -v[1]; H[7] = v[0];  H[8] = 0.0

    # S = H P H.T + var I
    mat3_mul(H, P, tmp)
    mat3_mul_t(tmp, H, S)
    S[0] += var
    S[4] += var
    S[8] += var
    inv3(S, Sinv)
    # K = P H.T Sinv
    mat3_mul_t(P, H, PHt)
    mat3_mul(PHt, Sinv, K)
    for i in range(3):
        dtheta[i] = K[3 * i] * y[0] + K[3 * i + 1] * y[1] + K[3 * i + 2] * y[2]
    # IKH = I - K H
    mat3_mul(K, H, IKH)
    for i in range(9):
        IKH[i] = -IKH[i]
    IKH[0] += 1.0
    IKH[4] += 1.0
    IKH[8] += 1.0
    # P = IKH P IKH.T + var K K.T
    mat3_mul(IKH, P, tmp)
    mat3_mul_t(tmp, IKH, tmp2)
    mat3_mul_t(K, K, tmp)
    for i in range(9):
        P[i] = tmp2[i] + var * tmp[i]
    symmetrize(P)

    quat_from_rotvec(dtheta, dq)
    quat_mul(q, dq, qn)
    for i in range(4):
        q[i] = qn[i]
    quat_normalize(q)


def ekf_run(q0, P0, gyro, accel, mag, dt, params):
    """Filter a block of samples; see the fallback docstring for outputs."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] g = np.ascontiguousarray(gyro, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] a = np.ascontiguousarray(accel, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] m = np.ascontiguousarray(mag, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] dts = np.ascontiguousarray(dt, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] prm = np.ascontiguousarray(params, dtype=np.float64)

    cdef Py_ssize_t n = g.shape[0]
    cdef cnp.ndarray[double, ndim=2, mode="c"] q_hist = np.empty((n, 4))
    cdef cnp.ndarray[double, ndim=2, mode="c"] lin_efc = np.empty((n, 3))
    cdef cnp.ndarray[double, ndim=2, mode="c"] mag_efc = np.empty((n, 3))
    cdef cnp.ndarray[double, ndim=2, mode="c"] euler = np.empty((n, 3))

    cdef double q[4]
    cdef double P[9]
    cdef double theta[3]
    cdef double dq[4]
    cdef double qn[4]
    cdef double F[9]
    cdef double tmp[9]
    cdef double R[9]
    cdef double meas[3]
    cdef double gravity_ref[3]
    cdef double mag_ref[3]
    cdef double K_[9]
    cdef double angle, s, c2, kx, ky, kz, step_dt, an, mn, sp
    cdef double gyro_var = prm[0]
    cdef double accel_var = prm[1]
    cdef double mag_var = prm[2]
    cdef double gravity = prm[3]
    cdef double gate = prm[7]
    cdef Py_ssize_t i, j

    q0 = np.ascontiguousarray(q0, dtype=np.float64)
    P0 = np.ascontiguousarray(P0, dtype=np.float64).reshape(-1)
    for j in range(4):
        q[j] = q0[j]
    for j in range(9):
        P[j] = P0[j]
    mag_ref[0] = prm[4]
    mag_ref[1] = prm[5]
    mag_ref[2] = prm[6]
    gravity_ref[0] = 0.0
    gravity_ref[1] = 0.0
    gravity_ref[2] = 1.0

    for i in range(n):
        step_dt = dts[i]
        theta[0] = (g[i, 0] - prm[8]) * step_dt
        theta[1] = (g[i, 1] - prm[9]) * step_dt
        theta[2] = (g[i, 2] - prm[10]) * step_dt
        quat_from_rotvec(theta, dq)
        quat_mul(q, dq, qn)
        for j in range(4):
            q[j] = qn[j]
        quat_normalize(q)

        # F = Rodrigues(-theta); P = F P F.T + gyro_var dt^2 I
        angle = sqrt(theta[0] * theta[0] + theta[1] * theta[1] + theta[2] * theta[2])
        if angle < 1e-12:
            kx = -theta[0]
            ky = -theta[1]
            kz = -theta[2]
            s = 1.0
            c2 = 0.0
        else:
            kx = -theta[0] / angle
            ky = -theta[1] / angle
            kz = -theta[2] / angle
            s = sin(angle)
            c2 = 1.0 - cos(angle)
        # F = I + s [k]x + c2 [k]x^2
        F[0] = 1.0 + c2 * (-ky * ky - kz * kz)
        F[1] = -s * kz + c2 * kx * ky
        F[2] = s * ky + c2 * kx * kz
        F[3] = s * kz + c2 * kx * ky
        F[4] = 1.0 + c2 * (-kx * kx - kz * kz)
        F[5] = -s * kx + c2 * ky * kz
        F[6] = -s * ky + c2 * kx * kz
        F[7] = s * kx + c2 * ky * kz
        F[8] = 1.0 + c2 * (-kx * kx - ky * ky)
        mat3_mul(F, P, tmp)
        mat3_mul_t(tmp, F, P)
        P[0] += gyro_var * step_dt * step_dt
        P[4] += gyro_var * step_dt * step_dt
        P[8] += gyro_var * step_dt * step_dt
        symmetrize(P)

        an = sqrt(a[i, 0] * a[i, 0] + a[i, 1] * a[i, 1] + a[i, 2] * a[i, 2])
        if an > 0.0 and fabs(an - gravity) <= gate and isfinite(accel_var):
            meas[0] = a[i, 0] / an
            meas[1] = a[i, 1] / an
            meas[2] = a[i, 2] / an
            vector_update(q, P, meas, gravity_ref, accel_var)

        mn = sqrt(m[i, 0] * m[i, 0] + m[i, 1] * m[i, 1] + m[i, 2] * m[i, 2])
        if mn > 0.0 and isfinite(mag_var):
            meas[0] = m[i, 0] / mn
            meas[1] = m[i, 1] / mn
            meas[2] = m[i, 2] / mn
            vector_update(q, P, meas, mag_ref, mag_var)

        rot_matrix(q, R)
        lin_efc[i, 0] = R[0] * a[i, 0] + R[1] * a[i, 1] + R[2] * a[i, 2]
        lin_efc[i, 1] = R[3] * a[i, 0] + R[4] * a[i, 1] + R[5] * a[i, 2]
        lin_efc[i, 2] = R[6] * a[i, 0] + R[7] * a[i, 1] + R[8] * a[i, 2] - gravity
        mag_efc[i, 0] = R[0] * m[i, 0] + R[1] * m[i, 1] + R[2] * m[i, 2]
        mag_efc[i, 1] = R[3] * m[i, 0] + R[4] * m[i, 1] + R[5] * m[i, 2]
        mag_efc[i, 2] = R[6] * m[i, 0] + R[7] * m[i, 1] + R[8] * m[i, 2]

        sp = 2.0 * (q[0] * q[2] - q[3] * q[1])
        if sp > 1.0:
            sp = 1.0
        elif sp < -1.0:
            sp = -1.0
        euler[i, 0] = asin(sp)
        euler[i, 1] = -atan2(2.0 * (q[0] * q[1] + q[2] * q[3]),
                             1.0 - 2.0 * (q[1] * q[1] + q[2] * q[2]))
        euler[i, 2] = atan2(2.0 * (q[0] * q[3] + q[1] * q[2]),
                            1.0 - 2.0 * (q[2] * q[2] + q[3] * q[3]))
        q_hist[i, 0] = q[0]
        q_hist[i, 1] = q[1]
        q_hist[i, 2] = q[2]
        q_hist[i, 3] = q[3]

    P_out = np.empty((3, 3))
    cdef double[:, ::1] pv = P_out
    for i in range(3):
        for j in range(3):
            pv[i, j] = P[3 * i + j]
    return q_hist, P_out, lin_efc, mag_efc, euler
