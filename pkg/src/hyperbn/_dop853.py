"""Compiled Dormand-Prince 8(5,3) integrator for scalar second-order radial ODEs.

The tableau is taken from scipy so the step control matches
``solve_ivp(method="DOP853")``; the loop runs under numba because shooting
needs thousands of shots.

Two right-hand sides are built in:

* model 0: ``u'' = -(N-1) coth(r) u' - lam u - |u|^(p-2) u``
* model 1: ``u'' = -(N-1) u' / r - lam u`` (Euclidean radial eigenproblem)
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _co

N_STAGES = _co.N_STAGES
A = np.ascontiguousarray(_co.A[: N_STAGES + 1 + 3, : N_STAGES + 1 + 3])
B = np.ascontiguousarray(_co.B)
C = np.ascontiguousarray(_co.C)
E3 = np.ascontiguousarray(_co.E3)
E5 = np.ascontiguousarray(_co.E5)
D = np.ascontiguousarray(_co.D)

STATUS_RMAX = 0
STATUS_EVENT = 1
STATUS_UNDERFLOW = 2
STATUS_STEP_UNDERFLOW = 3
STATUS_MAX_STEPS = 4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERR_EXP = -1.0 / 8.0
_TINY = 1e-280


@njit(cache=True)
def _rhs(model, nm1, lam, pm2, t, u, up):
    if model == 0:
        au = abs(u)
        nl = 0.0
        if au > 0.0:
            nl = au**pm2 * u
        return up, -nm1 * up / math.tanh(t) - lam * u - nl
    return up, -nm1 * up / t - lam * u


@njit(cache=True)
def _dense_point(x, F, y_old):
    # scipy's Dop853DenseOutput evaluation, one point
    u = 0.0
    v = 0.0
    for i in range(6, -1, -1):
        u += F[i, 0]
        v += F[i, 1]
        if i % 2 == 0:
            u *= x
            v *= x
        else:
            u *= 1.0 - x
            v *= 1.0 - x
    return u + y_old[0], v + y_old[1]


@njit(cache=True)
def _event_fn(u, t, c_fast, log_level):
    au = abs(u)
    if au <= 0.0:
        return -1e300
    return math.log(au) + c_fast * t - log_level


@njit(cache=True)
def integrate_kernel(model, nm1, lam, pm2, r0, u0, up0, r_max, rtol, atol,
                     c_fast, log_level, use_event, max_steps):
    """Integrate from ``r0`` to ``r_max`` or the first event.

    The event is ``log|u| + c_fast*r >= log_level``.  Returns the step
    endpoints, the interpolation coefficients per step, the event radius
    (``nan`` when none fired) and a status code.
    """
    cap = 1024
    ts = np.empty(cap)
    ys = np.empty((cap, 2))
    Fs = np.empty((cap, 7, 2))
    K = np.empty((N_STAGES + 4, 2))

    t = r0
    y0 = u0
    y1 = up0
    ts[0] = t
    ys[0, 0] = y0
    ys[0, 1] = y1
    n = 0
    f0, f1 = _rhs(model, nm1, lam, pm2, t, y0, y1)

    # initial step as in scipy's select_initial_step (order 7)
    s0 = atol + abs(y0) * rtol
    s1 = atol + abs(y1) * rtol
    d0 = math.sqrt(((y0 / s0) ** 2 + (y1 / s1) ** 2) / 2.0)
    d1 = math.sqrt(((f0 / s0) ** 2 + (f1 / s1) ** 2) / 2.0)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, r_max - t)
    g0, g1 = _rhs(model, nm1, lam, pm2, t + h0, y0 + h0 * f0, y1 + h0 * f1)
    d2 = math.sqrt((((g0 - f0) / s0) ** 2 + ((g1 - f1) / s1) ** 2) / 2.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    h = min(100.0 * h0, h1, r_max - t)

    status = STATUS_RMAX
    r_event = np.nan
    if use_event and _event_fn(y0, t, c_fast, log_level) >= 0.0:
        status = STATUS_EVENT
        r_event = t
        return ts[:1], ys[:1], Fs[:0], r_event, status

    while t < r_max:
        if n >= max_steps:
            status = STATUS_MAX_STEPS
            break
        min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
        if h < min_step:
            h = min_step
        accepted = False
        rejected = False
        while not accepted:
            if h < min_step:
                status = STATUS_STEP_UNDERFLOW
                break
            t_new = t + h
            if t_new > r_max:
                t_new = r_max
            h = t_new - t
            K[0, 0] = f0
            K[0, 1] = f1
            for s in range(1, N_STAGES):
                a0 = 0.0
                a1 = 0.0
                for j in range(s):
                    a0 += A[s, j] * K[j, 0]
                    a1 += A[s, j] * K[j, 1]
                K[s, 0], K[s, 1] = _rhs(model, nm1, lam, pm2, t + C[s] * h,
                                        y0 + h * a0, y1 + h * a1)
            b0 = 0.0
            b1 = 0.0
            for j in range(N_STAGES):
                b0 += B[j] * K[j, 0]
                b1 += B[j] * K[j, 1]
            yn0 = y0 + h * b0
            yn1 = y1 + h * b1
            fn0, fn1 = _rhs(model, nm1, lam, pm2, t_new, yn0, yn1)
            K[N_STAGES, 0] = fn0
            K[N_STAGES, 1] = fn1

            sc0 = atol + max(abs(y0), abs(yn0)) * rtol
            sc1 = atol + max(abs(y1), abs(yn1)) * rtol
            e50 = 0.0
            e51 = 0.0
            e30 = 0.0
            e31 = 0.0
            for j in range(N_STAGES + 1):
                e50 += K[j, 0] * E5[j]
                e51 += K[j, 1] * E5[j]
                e30 += K[j, 0] * E3[j]
                e31 += K[j, 1] * E3[j]
            e50 /= sc0
            e51 /= sc1
            e30 /= sc0
            e31 /= sc1
            n5 = e50 * e50 + e51 * e51
            n3 = e30 * e30 + e31 * e31
            if n5 == 0.0 and n3 == 0.0:
                err = 0.0
            else:
                den = n5 + 0.01 * n3
                err = abs(h) * n5 / math.sqrt(den * 2.0)
            if err < 1.0:
                if err == 0.0:
                    factor = _MAX_FACTOR
                else:
                    factor = min(_MAX_FACTOR, _SAFETY * err**_ERR_EXP)
                if rejected:
                    factor = min(1.0, factor)
                accepted = True
                h_next = h * factor
            else:
                h *= max(_MIN_FACTOR, _SAFETY * err**_ERR_EXP)
                rejected = True
        if not accepted:
            break

        # extra stages for the 7th-degree interpolant
        for s in range(N_STAGES + 1, N_STAGES + 4):
            a0 = 0.0
            a1 = 0.0
            for j in range(s):
                a0 += A[s, j] * K[j, 0]
                a1 += A[s, j] * K[j, 1]
            K[s, 0], K[s, 1] = _rhs(model, nm1, lam, pm2, t + C[s] * h,
                                    y0 + h * a0, y1 + h * a1)

        if n + 1 >= cap:
            cap *= 2
            ts2 = np.empty(cap)
            ys2 = np.empty((cap, 2))
            Fs2 = np.empty((cap, 7, 2))
            ts2[: n + 1] = ts[: n + 1]
            ys2[: n + 1] = ys[: n + 1]
            Fs2[:n] = Fs[:n]
            ts = ts2
            ys = ys2
            Fs = Fs2

        dy0 = yn0 - y0
        dy1 = yn1 - y1
        Fs[n, 0, 0] = dy0
        Fs[n, 0, 1] = dy1
        Fs[n, 1, 0] = h * f0 - dy0
        Fs[n, 1, 1] = h * f1 - dy1
        Fs[n, 2, 0] = 2.0 * dy0 - h * (fn0 + f0)
        Fs[n, 2, 1] = 2.0 * dy1 - h * (fn1 + f1)
        for i in range(4):
            d0s = 0.0
            d1s = 0.0
            for j in range(N_STAGES + 4):
                d0s += D[i, j] * K[j, 0]
                d1s += D[i, j] * K[j, 1]
            Fs[n, 3 + i, 0] = h * d0s
            Fs[n, 3 + i, 1] = h * d1s

        n += 1
        ts[n] = t_new
        ys[n, 0] = yn0
        ys[n, 1] = yn1

        if use_event and _event_fn(yn0, t_new, c_fast, log_level) >= 0.0:
            # bisection on the interpolant for the crossing radius
            lo = 0.0
            hi = 1.0
            yold = ys[n - 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                um, _v = _dense_point(mid, Fs[n - 1], yold)
                if _event_fn(um, t + mid * h, c_fast, log_level) >= 0.0:
                    hi = mid
                else:
                    lo = mid
            r_event = t + hi * h
            status = STATUS_EVENT
            t = t_new
            break

        t = t_new
        y0 = yn0
        y1 = yn1
        f0 = fn0
        f1 = fn1
        h = h_next
        if abs(y0) < _TINY and abs(y1) < _TINY:
            status = STATUS_UNDERFLOW
            break

    return ts[: n + 1], ys[: n + 1], Fs[:n], r_event, status


@njit(cache=True)
def dense_eval(ts, ys, Fs, rq):
    """Evaluate the piecewise interpolant at sorted radii ``rq``."""
    m = rq.shape[0]
    out = np.empty((m, 2))
    nsteps = Fs.shape[0]
    k = 0
    for i in range(m):
        r = rq[i]
        while k < nsteps - 1 and r > ts[k + 1]:
            k += 1
        if nsteps == 0:
            out[i, 0] = ys[0, 0]
            out[i, 1] = ys[0, 1]
            continue
        h = ts[k + 1] - ts[k]
        x = (r - ts[k]) / h
        out[i, 0], out[i, 1] = _dense_point(x, Fs[k], ys[k])
    return out


@njit(cache=True)
def sample_grid(ts, r_stop, n_sub, dr_out):
    """Output radii: every step end plus at least ``n_sub`` points per step,
    spaced no wider than ``dr_out``; truncated at ``r_stop``."""
    nsteps = ts.shape[0] - 1
    total = 1
    for k in range(nsteps):
        if ts[k] >= r_stop:
            break
        h = min(ts[k + 1], r_stop) - ts[k]
        m = max(n_sub, int(math.ceil(h / dr_out)))
        total += m
    out = np.empty(total)
    out[0] = ts[0]
    idx = 1
    for k in range(nsteps):
        if ts[k] >= r_stop:
            break
        end = min(ts[k + 1], r_stop)
        h = end - ts[k]
        m = max(n_sub, int(math.ceil(h / dr_out)))
        for j in range(1, m + 1):
            out[idx] = ts[k] + h * j / m
            idx += 1
    out[idx - 1] = min(ts[nsteps], r_stop) if nsteps > 0 else ts[0]
    return out[:idx]
