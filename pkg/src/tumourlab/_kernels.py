"""Compiled inner loops for the explicit scheme and per-step integrals.

The numpy functions in ``fields``/``diagnostics`` are the reference
definitions; these kernels fuse them for the time loop and are tested
against them.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def growth(code, a, b, p):
    if code == 0:
        return 0.0
    lin = 1.0 - p / b
    if code == 2 and lin < 0.0:
        lin = 0.0
    return a * lin


@njit(cache=True)
def explicit_update(n1, n2, dx, dt, gamma, codes, amps, thrs):
    N = n1.size
    p = np.empty(N)
    for j in range(N):
        nj = n1[j] + n2[j]
        p[j] = nj**gamma if nj > 0.0 else 0.0
    f1 = np.zeros(N + 1)
    f2 = np.zeros(N + 1)
    for j in range(N - 1):
        u = -(p[j + 1] - p[j]) / dx
        if u > 0.0:
            f1[j + 1] = u * n1[j]
            f2[j + 1] = u * n2[j]
        elif u < 0.0:
            f1[j + 1] = u * n1[j + 1]
            f2[j + 1] = u * n2[j + 1]
        # u == 0: mean of the two sides, times zero velocity
    out1 = np.empty(N)
    out2 = np.empty(N)
    source = 0.0
    lam = dt / dx
    for j in range(N):
        pj = p[j]
        F1 = growth(codes[0], amps[0], thrs[0], pj)
        F2 = growth(codes[1], amps[1], thrs[1], pj)
        G1 = growth(codes[2], amps[2], thrs[2], pj)
        G2 = growth(codes[3], amps[3], thrs[3], pj)
        r1 = n1[j] * F1 + n2[j] * G1
        r2 = n1[j] * F2 + n2[j] * G2
        out1[j] = n1[j] - lam * (f1[j + 1] - f1[j]) + dt * r1
        out2[j] = n2[j] - lam * (f2[j + 1] - f2[j]) + dt * r2
        source += r1 + r2
    return out1, out2, source * dx


@njit(cache=True)
def step_integrals(n1, n2, dx, gamma, codes, amps, thrs, vac_tol):
    """Fused per-step functionals.

    Returns [max_p, max|u|, min_n, grad_p_sq, p_absw, p_w2, residual,
    source, w_minus].
    """
    N = n1.size
    p = np.empty(N)
    min_n = np.inf
    max_p = 0.0
    for j in range(N):
        nj = n1[j] + n2[j]
        p[j] = nj**gamma if nj > 0.0 else 0.0
        if nj < min_n:
            min_n = nj
        if p[j] > max_p:
            max_p = p[j]
    max_u = 0.0
    gp = 0.0
    for j in range(N - 1):
        u = (p[j + 1] - p[j]) / dx
        gp += u * u
        if abs(u) > max_u:
            max_u = abs(u)
    p_absw = 0.0
    p_w2 = 0.0
    resid = 0.0
    source = 0.0
    w_minus = 0.0
    inv = 1.0 / (dx * dx)
    for j in range(N):
        if N == 1:
            pxx = 0.0
        elif j == 0:
            pxx = (p[1] - p[0]) * inv
        elif j == N - 1:
            pxx = (p[N - 2] - p[N - 1]) * inv
        else:
            pxx = (p[j + 1] - 2.0 * p[j] + p[j - 1]) * inv
        pj = p[j]
        F = growth(codes[0], amps[0], thrs[0], pj) + growth(codes[1], amps[1], thrs[1], pj)
        G = growth(codes[2], amps[2], thrs[2], pj) + growth(codes[3], amps[3], thrs[3], pj)
        nj = n1[j] + n2[j]
        if nj > vac_tol:
            R = (n1[j] * F + n2[j] * G) / nj
        else:
            R = 0.5 * F + 0.5 * G
        w = pxx + R
        p_absw += pj * abs(w)
        p_w2 += pj * w * w
        if w < 0.0:
            w_minus -= w
        src = n1[j] * F + n2[j] * G
        source += src
        resid += pj * abs(pxx + src)
    out = np.empty(9)
    out[0] = max_p
    out[1] = max_u
    out[2] = min_n
    out[3] = gp * dx
    out[4] = p_absw * dx
    out[5] = p_w2 * dx
    out[6] = resid * dx
    out[7] = source * dx
    out[8] = w_minus * dx
    return out


@njit(cache=True)
def rk4_uniform(n1, n2, gamma, codes, amps, thrs, dt, nsteps, stride, cap):
    """Classical RK4 for the spatially uniform reaction system.

    Samples every ``stride`` steps (and the initial value).  Returns
    (samples[k, 2], status) with status -1 on success or the step index at
    which a value left [-cap, cap].
    """
    nout = nsteps // stride + 1
    out = np.empty((nout, 2))
    out[0, 0] = n1
    out[0, 1] = n2
    k = np.empty((4, 2))
    for i in range(nsteps):
        a1 = n1
        a2 = n2
        for s in range(4):
            if s == 0:
                y1, y2 = a1, a2
            elif s == 3:
                y1 = a1 + dt * k[2, 0]
                y2 = a2 + dt * k[2, 1]
            else:
                y1 = a1 + 0.5 * dt * k[s - 1, 0]
                y2 = a2 + 0.5 * dt * k[s - 1, 1]
            tot = y1 + y2
            p = tot**gamma if tot > 0.0 else 0.0
            F1 = growth(codes[0], amps[0], thrs[0], p)
            F2 = growth(codes[1], amps[1], thrs[1], p)
            G1 = growth(codes[2], amps[2], thrs[2], p)
            G2 = growth(codes[3], amps[3], thrs[3], p)
            k[s, 0] = y1 * F1 + y2 * G1
            k[s, 1] = y1 * F2 + y2 * G2
        n1 = a1 + dt / 6.0 * (k[0, 0] + 2.0 * k[1, 0] + 2.0 * k[2, 0] + k[3, 0])
        n2 = a2 + dt / 6.0 * (k[0, 1] + 2.0 * k[1, 1] + 2.0 * k[2, 1] + k[3, 1])
        if not (abs(n1) <= cap and abs(n2) <= cap):
            return out, i
        if (i + 1) % stride == 0:
            out[(i + 1) // stride, 0] = n1
            out[(i + 1) // stride, 1] = n2
    return out, -1
