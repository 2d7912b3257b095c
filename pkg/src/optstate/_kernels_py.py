"""Pure-Python reference implementations of the hot kernels.

These mirror the compiled extension (`optstate._kernels`) operation for
operation, in the same floating-point evaluation order, so both backends
produce bit-identical orbits.  The compiled module is preferred at import
time; this module keeps the package fully functional without a compiler
and serves as the baseline in the kernel benchmark.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def doubling_rational_orbit(p0, q, n):
    """Numerators of the exact orbit of p0/q under x -> 2x mod 1."""
    out = np.empty(n, dtype=np.int64)
    p = p0
    for i in range(n):
        out[i] = p
        p = (2 * p) % q
    return out


def doubling_float_orbit(x0, n):
    out = np.empty(n, dtype=np.float64)
    x = x0
    for i in range(n):
        out[i] = x
        x = 2.0 * x
        x -= math.floor(x)
    return out


def rotation_orbit(x0, alpha, n):
    out = np.empty(n, dtype=np.float64)
    x = x0
    for i in range(n):
        out[i] = x
        x = x + alpha
        x -= math.floor(x)
    return out


def halving_orbit(x0, n):
    out = np.empty(n, dtype=np.float64)
    x = x0
    for i in range(n):
        out[i] = x
        x = 0.5 * x
    return out


def may_leonard_orbit(x0, alpha, beta, tau, substeps, n):
    """Orbit of the time-tau map of the three-species competition field

        dx_i/dt = x_i * (1 - x_i - alpha*x_{i+1} - beta*x_{i-1})   (mod 3)

    integrated with classical fixed-step RK4; after every substep the state
    is clamped at 0 and renormalized to the simplex.  Returns (n, 3) points
    with row 0 equal to x0; raises nothing (the wrapper checks finiteness).
    """
    out = np.empty((n, 3), dtype=np.float64)
    a = alpha
    b = beta
    h = tau / substeps
    h2 = 0.5 * h
    h6 = h / 6.0
    x0_, x1_, x2_ = float(x0[0]), float(x0[1]), float(x0[2])
    out[0, 0] = x0_
    out[0, 1] = x1_
    out[0, 2] = x2_
    for t in range(1, n):
        for _ in range(substeps):
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
            # coordinates below 1e-300 are dynamically zero (they only pin
            # to the invariant boundary) and subnormals stall the FPU
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
        out[t, 0] = x0_
        out[t, 1] = x1_
        out[t, 2] = x2_
    return out


def cocycle_checkpoint_products(mats, checkpoints, renorm_every):
    """Left-ordered products P_k = mats[k-1] @ ... @ mats[0] at checkpoints.

    The running product is renormalized by its Frobenius norm every
    `renorm_every` factors; the factored-out norm accumulates in a log.
    Returns (logacc per checkpoint, renormalized product per checkpoint,
    index of the factor at which the product underflowed to 0, or -1).
    """
    n, d, _ = mats.shape
    m = len(checkpoints)
    logacc_out = np.empty(m, dtype=np.float64)
    prods_out = np.empty((m, d, d), dtype=np.float64)
    P = np.eye(d)
    W = np.empty((d, d))
    logacc = 0.0
    collapsed = -1
    j = 0
    for i in range(1, n + 1):
        A = mats[i - 1]
        for r in range(d):
            for c in range(d):
                acc = 0.0
                for k in range(d):
                    acc += A[r, k] * P[k, c]
                W[r, c] = acc
        P, W = W, P
        if i % renorm_every == 0:
            s = 0.0
            for r in range(d):
                for c in range(d):
                    s += P[r, c] * P[r, c]
            s = math.sqrt(s)
            if s == 0.0:
                collapsed = i
                while j < m:
                    logacc_out[j] = -math.inf
                    prods_out[j] = 0.0
                    j += 1
                break
            for r in range(d):
                for c in range(d):
                    P[r, c] /= s
            logacc += math.log(s)
        if j < m and i == checkpoints[j]:
            logacc_out[j] = logacc
            prods_out[j] = P
            j += 1
    return logacc_out, prods_out, collapsed


def window_products(mats, l):
    """Products of each length-l window mats[i+l-1] @ ... @ mats[i].

    Returns (logacc (n-l+1,), renormalized products (n-l+1, d, d)); each
    window is renormalized per factor so entries never under/overflow.
    """
    n, d, _ = mats.shape
    count = n - l + 1
    logacc_out = np.empty(count, dtype=np.float64)
    prods_out = np.empty((count, d, d), dtype=np.float64)
    P = np.empty((d, d))
    W = np.empty((d, d))
    for i in range(count):
        for r in range(d):
            for c in range(d):
                P[r, c] = 1.0 if r == c else 0.0
        logacc = 0.0
        dead = False
        for t in range(l):
            A = mats[i + t]
            for r in range(d):
                for c in range(d):
                    acc = 0.0
                    for k in range(d):
                        acc += A[r, k] * P[k, c]
                    W[r, c] = acc
            P, W = W, P
            s = 0.0
            for r in range(d):
                for c in range(d):
                    s += P[r, c] * P[r, c]
            s = math.sqrt(s)
            if s == 0.0:
                dead = True
                break
            for r in range(d):
                for c in range(d):
                    P[r, c] /= s
            logacc += math.log(s)
        if dead:
            logacc_out[i] = -math.inf
            prods_out[i] = 0.0
        else:
            logacc_out[i] = logacc
            prods_out[i] = P
    return logacc_out, prods_out


def visit_hits_circle(xs, targets, eps):
    """1 where the wraparound distance from xs[i] to the target set is < eps."""
    n = xs.shape[0]
    m = targets.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        x = xs[i]
        for t in range(m):
            dd = abs(x - targets[t])
            if dd > 0.5:
                dd = 1.0 - dd
            if dd < eps:
                out[i] = 1
                break
    return out


def visit_hits_euclid(pts, targets, eps):
    """1 where the Euclidean distance from pts[i] to the target set is < eps."""
    n, dim = pts.shape
    m = targets.shape[0]
    e2 = eps * eps
    out = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        for t in range(m):
            d2 = 0.0
            for c in range(dim):
                diff = pts[i, c] - targets[t, c]
                d2 += diff * diff
            if d2 < e2:
                out[i] = 1
                break
    return out
