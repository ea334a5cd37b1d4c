# cython: language_level=3
"""Compiled hot kernels. Same signatures and semantics as ``_pycore``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs, INFINITY, isfinite

cnp.import_array()


def gae(rewards, values, dones, double gamma, double lam):
    cdef double[::1] r = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(dones, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc = 0.0, live, delta
    cdef Py_ssize_t t
    for t in range(n - 1, -1, -1):
        live = 1.0 - d[t]
        delta = r[t] + gamma * v[t + 1] * live - v[t]
        acc = delta + gamma * lam * live * acc
        o[t] = acc
    return out


cdef double GROWTH = 20.0
cdef double NEWTON_TOL = 1e-12
cdef int MAX_STAGE_STEPS = 200
cdef double REL_FLOOR = 1e-14


cdef double _barrier(const double[::1] v, const double[::1] c, double t,
                     const double[::1] h, double beta, bint has_h, double r_sq,
                     double lower, bint has_lower) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0], i
    cdef double cv = 0.0, vv = 0.0, hv = 0.0, logs = 0.0, gap
    for i in range(n):
        cv += c[i] * v[i]
        vv += v[i] * v[i]
        if has_h:
            hv += h[i] * v[i]
        if has_lower:
            gap = v[i] - lower
            if gap <= 0.0:
                return INFINITY
            logs += log(gap)
    if r_sq - vv <= 0.0:
        return INFINITY
    if has_h and beta - hv <= 0.0:
        return INFINITY
    gap = -t * cv - log(r_sq - vv) - logs
    if has_h:
        gap -= log(beta - hv)
    return gap


def barrier(c, h, double beta, double radius, double lower, v0,
            double gap_tol, int max_newton):
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    v_arr = np.array(v0, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef Py_ssize_t n = v.shape[0], i
    cu_arr = np.empty(n)
    cdef double[::1] cu = cu_arr
    cdef double[::1] grad = np.empty(n), diag = np.empty(n), u_h = np.empty(n)
    cdef double[::1] u_r = np.empty(n), dh = np.empty(n), dr = np.empty(n)
    cdef double[::1] y_g = np.empty(n), y_1 = np.empty(n), step = np.empty(n)
    cdef double[::1] trial = np.empty(n)
    cdef double c_norm = 0.0, hh = 0.0
    for i in range(n):
        c_norm += cv[i] * cv[i]
        hh += hv[i] * hv[i]
    c_norm = sqrt(c_norm)
    cdef bint has_h = isfinite(beta) and hh > 0.0
    cdef bint has_lower = isfinite(lower)
    cdef double m = 1.0 + (1.0 if has_h else 0.0) + (<double>n if has_lower else 0.0)
    if c_norm == 0.0:
        return v_arr, 0, 0.0
    for i in range(n):
        cu[i] = cv[i] / c_norm
    cdef double r_sq = radius * radius, t = m / radius
    cdef int steps = 0, k, ls
    cdef double s_r, s_h, vv, hvv, ig, m11, m12, m22, det
    cdef double a1, a2, b1, b2, k1, k2, l1, l2, sg, s1, nu, dec, f0, f1, alpha, mean
    with nogil:
        while True:
            for k in range(MAX_STAGE_STEPS):
                if steps >= max_newton:
                    with gil:
                        return v_arr, steps, m / t
                vv = 0.0
                hvv = 0.0
                for i in range(n):
                    vv += v[i] * v[i]
                    hvv += hv[i] * v[i]
                s_r = r_sq - vv
                s_h = beta - hvv
                for i in range(n):
                    u_r[i] = (2.0 / s_r) * v[i]
                    grad[i] = -t * cu[i] + u_r[i]
                    diag[i] = 2.0 / s_r
                    if has_h:
                        u_h[i] = hv[i] / s_h
                        grad[i] += u_h[i]
                    else:
                        u_h[i] = 0.0
                    if has_lower:
                        ig = 1.0 / (v[i] - lower)
                        grad[i] -= ig
                        diag[i] += ig * ig
                m11 = 1.0
                m12 = 0.0
                m22 = 1.0
                for i in range(n):
                    dh[i] = u_h[i] / diag[i]
                    dr[i] = u_r[i] / diag[i]
                    m11 += u_h[i] * dh[i]
                    m12 += u_h[i] * dr[i]
                    m22 += u_r[i] * dr[i]
                det = m11 * m22 - m12 * m12
                # Woodbury solves for the gradient and the all-ones vector
                a1 = 0.0
                a2 = 0.0
                b1 = 0.0
                b2 = 0.0
                for i in range(n):
                    a1 += u_h[i] * grad[i] / diag[i]
                    a2 += u_r[i] * grad[i] / diag[i]
                    b1 += dh[i]
                    b2 += dr[i]
                k1 = (m22 * a1 - m12 * a2) / det
                k2 = (m11 * a2 - m12 * a1) / det
                l1 = (m22 * b1 - m12 * b2) / det
                l2 = (m11 * b2 - m12 * b1) / det
                sg = 0.0
                s1 = 0.0
                for i in range(n):
                    y_g[i] = grad[i] / diag[i] - k1 * dh[i] - k2 * dr[i]
                    y_1[i] = 1.0 / diag[i] - l1 * dh[i] - l2 * dr[i]
                    sg += y_g[i]
                    s1 += y_1[i]
                nu = -sg / s1
                dec = 0.0
                for i in range(n):
                    step[i] = -(y_g[i] + nu * y_1[i])
                    dec -= grad[i] * step[i]
                f0 = _barrier(v, cu, t, hv, beta, has_h, r_sq, lower, has_lower)
                if dec * 0.5 <= NEWTON_TOL + REL_FLOOR * fabs(f0):
                    break
                alpha = 1.0
                for ls in range(80):
                    for i in range(n):
                        trial[i] = v[i] + alpha * step[i]
                    f1 = _barrier(trial, cu, t, hv, beta, has_h, r_sq, lower, has_lower)
                    if f1 <= f0 - 0.25 * alpha * dec:
                        break
                    alpha *= 0.5
                else:
                    break
                mean = 0.0
                for i in range(n):
                    v[i] = trial[i]
                    mean += v[i]
                mean /= n
                for i in range(n):
                    v[i] -= mean
                steps += 1
            if m / t <= gap_tol * radius:
                break
            t *= GROWTH
    return v_arr, steps, m / t
