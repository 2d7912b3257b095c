# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: orbit iteration, cocycle products, visit counting.

Bit-identical with the pure-Python fallback in `_kernels_py` (same
floating-point evaluation order; compiled with -ffp-contract=off).
"""

from libc.math cimport floor, sqrt, log, isfinite, INFINITY

import numpy as np

BACKEND = "compiled"


def doubling_rational_orbit(p0, q, n):
    """Numerators of the exact orbit of p0/q under x -> 2x mod 1."""
    cdef long long p = p0
    cdef long long qq = q
    cdef Py_ssize_t nn = n, i
    out = np.empty(nn, dtype=np.int64)
    cdef long long[::1] o = out
    with nogil:
        for i in range(nn):
            o[i] = p
            p = (2 * p) % qq
    return out


def doubling_float_orbit(x0, n):
    cdef double x = x0
    cdef Py_ssize_t nn = n, i
    out = np.empty(nn, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(nn):
            o[i] = x
            x = 2.0 * x
            x -= floor(x)
    return out


def rotation_orbit(x0, alpha, n):
    cdef double x = x0
    cdef double a = alpha
    cdef Py_ssize_t nn = n, i
    out = np.empty(nn, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(nn):
            o[i] = x
            x = x + a
            x -= floor(x)
    return out


def halving_orbit(x0, n):
    cdef double x = x0
    cdef Py_ssize_t nn = n, i
    out = np.empty(nn, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(nn):
            o[i] = x
            x = 0.5 * x
    return out


def may_leonard_orbit(x0, alpha, beta, tau, substeps, n):
    """Orbit of the time-tau RK4 map of the three-species competition field
    with per-substep clamping at 0 and renormalization onto the simplex."""
    cdef double a = alpha
    cdef double b = beta
    cdef double h = tau / substeps
    cdef double h2 = 0.5 * h
    cdef double h6 = h / 6.0
    cdef Py_ssize_t nn = n, sub = substeps, t, ss
    cdef double x0_ = x0[0], x1_ = x0[1], x2_ = x0[2]
    cdef double k10, k11, k12, k20, k21, k22, k30, k31, k32, k40, k41, k42
    cdef double y0, y1, y2, s
    out = np.empty((nn, 3), dtype=np.float64)
    cdef double[:, ::1] o = out
    o[0, 0] = x0_
    o[0, 1] = x1_
    o[0, 2] = x2_
    with nogil:
        for t in range(1, nn):
            for ss in range(sub):
                k10 = x0_ * (1.0 - x0_ - a * x1_ - b * x2_)
                k11 = x1_ * (1.0 - x1_ - a * x2_ - b * x0_)
                k12 = x2_ * (1.0 - x2_ - a * x0_ - b * x1_)
                y0 = x0_ + h2 * k10
                y1 = x1_ + h2 * k11
                y2 = x2_ + h2 * k12
                k20 = y0 * (1.0 - y0 - a * y1 - b * y2)
                k21 = y1 * (1.0 - y1 - a * y2 - b * y0)
                k22 = y2 * (1.0 - y2 - a * y0 - b * y1)
                y0 = x0_ + h2 * k20
                y1 = x1_ + h2 * k21
                y2 = x2_ + h2 * k22
                k30 = y0 * (1.0 - y0 - a * y1 - b * y2)
                k31 = y1 * (1.0 - y1 - a * y2 - b * y0)
                k32 = y2 * (1.0 - y2 - a * y0 - b * y1)
                y0 = x0_ + h * k30
                y1 = x1_ + h * k31
                y2 = x2_ + h * k32
                k40 = y0 * (1.0 - y0 - a * y1 - b * y2)
                k41 = y1 * (1.0 - y1 - a * y2 - b * y0)
                k42 = y2 * (1.0 - y2 - a * y0 - b * y1)
                x0_ = x0_ + h6 * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
                x1_ = x1_ + h6 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
                x2_ = x2_ + h6 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
                # coordinates below 1e-300 are dynamically zero (they only
                # pin to the invariant boundary) and subnormals stall the FPU
                if x0_ < 1e-300:
                    x0_ = 0.0
                if x1_ < 1e-300:
                    x1_ = 0.0
                if x2_ < 1e-300:
                    x2_ = 0.0
                s = x0_ + x1_ + x2_
                x0_ /= s
                x1_ /= s
                x2_ /= s
            o[t, 0] = x0_
            o[t, 1] = x1_
            o[t, 2] = x2_
    return out


def cocycle_checkpoint_products(mats, checkpoints, renorm_every):
    """Left-ordered products P_k = mats[k-1] @ ... @ mats[0] at checkpoints,
    Frobenius-renormalized every `renorm_every` factors (log accumulator).
    Returns (logacc (m,), products (m, d, d), collapse index or -1)."""
    mats = np.ascontiguousarray(mats, dtype=np.float64)
    checkpoints = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef const double[:, :, ::1] A = mats
    cdef const long long[::1] cps = checkpoints
    cdef Py_ssize_t n = A.shape[0], d = A.shape[1], m = cps.shape[0]
    cdef Py_ssize_t i, j, r, c, k
    cdef long long renorm = renorm_every
    cdef double logacc = 0.0, acc, s
    cdef long long collapsed = -1
    logacc_out = np.empty(m, dtype=np.float64)
    prods_out = np.empty((m, d, d), dtype=np.float64)
    pbuf = np.eye(d)
    wbuf = np.empty((d, d))
    cdef double[::1] lo = logacc_out
    cdef double[:, :, ::1] po = prods_out
    cdef double[:, ::1] P = pbuf
    cdef double[:, ::1] W = wbuf
    cdef double[:, ::1] tmp
    j = 0
    with nogil:
        for i in range(1, n + 1):
            for r in range(d):
                for c in range(d):
                    acc = 0.0
                    for k in range(d):
                        acc += A[i - 1, r, k] * P[k, c]
                    W[r, c] = acc
            tmp = P
            P = W
            W = tmp
            if i % renorm == 0:
                s = 0.0
                for r in range(d):
                    for c in range(d):
                        s += P[r, c] * P[r, c]
                s = sqrt(s)
                if s == 0.0:
                    collapsed = i
                    while j < m:
                        lo[j] = -INFINITY
                        for r in range(d):
                            for c in range(d):
                                po[j, r, c] = 0.0
                        j += 1
                    break
                for r in range(d):
                    for c in range(d):
                        P[r, c] /= s
                logacc += log(s)
            if j < m and i == cps[j]:
                lo[j] = logacc
                for r in range(d):
                    for c in range(d):
                        po[j, r, c] = P[r, c]
                j += 1
    return logacc_out, prods_out, int(collapsed)


def window_products(mats, l):
    """Products of each length-l window mats[i+l-1] @ ... @ mats[i],
    renormalized per factor.  Returns (logacc (n-l+1,), prods (n-l+1,d,d))."""
    mats = np.ascontiguousarray(mats, dtype=np.float64)
    cdef const double[:, :, ::1] A = mats
    cdef Py_ssize_t n = A.shape[0], d = A.shape[1], ll = l
    cdef Py_ssize_t count = n - ll + 1
    cdef Py_ssize_t i, t, r, c, k
    cdef double logacc, acc, s
    cdef bint dead
    logacc_out = np.empty(count, dtype=np.float64)
    prods_out = np.empty((count, d, d), dtype=np.float64)
    pbuf = np.empty((d, d))
    wbuf = np.empty((d, d))
    cdef double[::1] lo = logacc_out
    cdef double[:, :, ::1] po = prods_out
    cdef double[:, ::1] P = pbuf
    cdef double[:, ::1] W = wbuf
    cdef double[:, ::1] tmp
    with nogil:
        for i in range(count):
            for r in range(d):
                for c in range(d):
                    P[r, c] = 1.0 if r == c else 0.0
            logacc = 0.0
            dead = False
            for t in range(ll):
                for r in range(d):
                    for c in range(d):
                        acc = 0.0
                        for k in range(d):
                            acc += A[i + t, r, k] * P[k, c]
                        W[r, c] = acc
                tmp = P
                P = W
                W = tmp
                s = 0.0
                for r in range(d):
                    for c in range(d):
                        s += P[r, c] * P[r, c]
                s = sqrt(s)
                if s == 0.0:
                    dead = True
                    break
                for r in range(d):
                    for c in range(d):
                        P[r, c] /= s
                logacc += log(s)
            if dead:
                lo[i] = -INFINITY
                for r in range(d):
                    for c in range(d):
                        po[i, r, c] = 0.0
            else:
                lo[i] = logacc
                for r in range(d):
                    for c in range(d):
                        po[i, r, c] = P[r, c]
    return logacc_out, prods_out


def visit_hits_circle(xs, targets, eps):
    """1 where the wraparound distance from xs[i] to the target set is < eps."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    cdef const double[::1] x = xs
    cdef const double[::1] tg = targets
    cdef double e = eps, dd
    cdef Py_ssize_t n = x.shape[0], m = tg.shape[0], i, t
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    with nogil:
        for i in range(n):
            for t in range(m):
                dd = x[i] - tg[t]
                if dd < 0.0:
                    dd = -dd
                if dd > 0.5:
                    dd = 1.0 - dd
                if dd < e:
                    o[i] = 1
                    break
    return out


def visit_hits_euclid(pts, targets, eps):
    """1 where the Euclidean distance from pts[i] to the target set is < eps."""
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    cdef const double[:, ::1] p = pts
    cdef const double[:, ::1] tg = targets
    cdef double e2 = eps * eps, d2, diff
    cdef Py_ssize_t n = p.shape[0], dim = p.shape[1], m = tg.shape[0], i, t, c
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    with nogil:
        for i in range(n):
            for t in range(m):
                d2 = 0.0
                for c in range(dim):
                    diff = p[i, c] - tg[t, c]
                    d2 += diff * diff
                if d2 < e2:
                    o[i] = 1
                    break
    return out
