"""Compiled kernels for the flux-form shooting ODE.

State ``(u, v)`` with flux ``v = cp |u'|^{p-2} u' + cq |u'|^{q-2} u'``:

    u' = Phi^{-1}(v),    v' = -alpha |u|^{p-2} u - beta |u|^{q-2} u.

Integration uses the Dormand-Prince 8(5,3) pair with its 7th-order dense
output (coefficient tables taken from scipy). Zero crossings of ``u`` and of
``v`` are located by bisection on the dense output.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

_NS = _dop.N_STAGES
_A = np.ascontiguousarray(_dop.A, dtype=np.float64)
_B = np.ascontiguousarray(_dop.B, dtype=np.float64)
_C = np.ascontiguousarray(_dop.C, dtype=np.float64)
_E3 = np.ascontiguousarray(_dop.E3, dtype=np.float64)
_E5 = np.ascontiguousarray(_dop.E5, dtype=np.float64)
_D = np.ascontiguousarray(_dop.D, dtype=np.float64)

STATUS_XMAX = 0
STATUS_ZERO = 1
STATUS_UNDERFLOW = -1
STATUS_MAXSTEPS = -2


@njit(cache=True, nogil=True)
def _spow(t, e):
    """``|t|^e * sign(t)``."""
    if t > 0.0:
        return t**e
    if t < 0.0:
        return -((-t) ** e)
    return 0.0


@njit(cache=True, nogil=True)
def flux(t, p, q, cp, cq):
    return cp * _spow(t, p - 1.0) + cq * _spow(t, q - 1.0)


@njit(cache=True, nogil=True)
def flux_inverse(w, p, q, cp, cq):
    """Unique ``t`` with ``flux(t) = w``; safeguarded Newton on a bracket."""
    if w == 0.0:
        return 0.0
    a = abs(w)
    if cq == 0.0:
        t = (a / cp) ** (1.0 / (p - 1.0))
        return t if w > 0.0 else -t
    if cp == 0.0:
        t = (a / cq) ** (1.0 / (q - 1.0))
        return t if w > 0.0 else -t
    # each term alone bounds t from above; half of |w| per term bounds it below
    tp = (a / cp) ** (1.0 / (p - 1.0))
    tq = (a / cq) ** (1.0 / (q - 1.0))
    hi = min(tp, tq)
    lo = min((0.5 * a / cp) ** (1.0 / (p - 1.0)), (0.5 * a / cq) ** (1.0 / (q - 1.0)))
    t = hi
    for _ in range(100):
        g = cp * t ** (p - 1.0) + cq * t ** (q - 1.0) - a
        if g == 0.0:
            break
        if g > 0.0:
            hi = t
        else:
            lo = t
        dg = cp * (p - 1.0) * t ** (p - 2.0) + cq * (q - 1.0) * t ** (q - 2.0)
        tn = t - g / dg
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        if abs(tn - t) <= 1e-16 * t:
            t = tn
            break
        t = tn
    return t if w > 0.0 else -t


@njit(cache=True, nogil=True)
def _rhs(y, out, p, q, cp, cq, alpha, beta):
    u = y[0]
    out[0] = flux_inverse(y[1], p, q, cp, cq)
    out[1] = -(alpha * _spow(u, p - 1.0) + beta * _spow(u, q - 1.0))


@njit(cache=True, nogil=True)
def _dense_coeffs(K, x_old, y_old, y_new, f_new, h, pars, F):
    p, q, cp, cq, alpha, beta = pars[0], pars[1], pars[2], pars[3], pars[4], pars[5]
    ytmp = np.empty(2)
    for s in range(_NS + 1, _A.shape[0]):
        for j in range(2):
            acc = 0.0
            for k in range(s):
                acc += _A[s, k] * K[k, j]
            ytmp[j] = y_old[j] + h * acc
        _rhs(ytmp, K[s], p, q, cp, cq, alpha, beta)
    for j in range(2):
        dy = y_new[j] - y_old[j]
        F[0, j] = dy
        F[1, j] = h * K[0, j] - dy
        F[2, j] = 2.0 * dy - h * (f_new[j] + K[0, j])
        for i in range(_D.shape[0]):
            acc = 0.0
            for k in range(_A.shape[0]):
                acc += _D[i, k] * K[k, j]
            F[3 + i, j] = h * acc


@njit(cache=True, nogil=True)
def _dense_eval(F, x_old, h, y_old, x, j):
    th = (x - x_old) / h
    y = 0.0
    n = F.shape[0]
    for i in range(n):
        y += F[n - 1 - i, j]
        if i % 2 == 0:
            y *= th
        else:
            y *= 1.0 - th
    return y + y_old[j]


@njit(cache=True, nogil=True)
def _bisect_zero(F, x_old, h, y_old, j, a, b):
    """Sign change of component ``j`` of the dense output on ``[a, b]``."""
    fa = _dense_eval(F, x_old, h, y_old, a, j)
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b or b - a <= 1e-15 * max(1.0, abs(b)):
            break
        fm = _dense_eval(F, x_old, h, y_old, m, j)
        if (fm > 0.0) == (fa > 0.0) and fm != 0.0:
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


@njit(cache=True, nogil=True)
def integrate(pars, u0, v0, x_max, rtol, atol_u, atol_v, stop_at_zero, x_out, max_steps):
    """Integrate from ``x = 0``.

    ``pars = (p, q, cp, cq, alpha, beta)``. Returns ``(status, xs, ys, x_end,
    x_peak, u_peak, y_out)``: accepted step endpoints, the terminal abscissa
    (the first zero of ``u`` when ``status == STATUS_ZERO``), the location and
    value of the first maximum of ``u`` (NaN if none), and dense samples at
    ``x_out`` (NaN beyond ``x_end``).
    """
    p, q, cp, cq, alpha, beta = pars[0], pars[1], pars[2], pars[3], pars[4], pars[5]
    n_ext = _A.shape[0]
    K = np.zeros((n_ext, 2))
    F = np.zeros((3 + _D.shape[0], 2))
    y = np.array([u0, v0])
    y_new = np.empty(2)
    ytmp = np.empty(2)
    f = np.empty(2)
    f_new = np.empty(2)
    atol = np.array([atol_u, atol_v])

    xs = np.empty(max_steps + 1)
    ys = np.empty((max_steps + 1, 2))
    y_out = np.full((x_out.shape[0], 2), np.nan)
    i_out = 0
    xs[0] = 0.0
    ys[0, 0] = u0
    ys[0, 1] = v0
    n_acc = 0

    x = 0.0
    x_peak = np.nan
    u_peak = np.nan
    status = STATUS_MAXSTEPS
    x_end = x

    while i_out < x_out.shape[0] and x_out[i_out] <= 0.0:
        y_out[i_out, 0] = u0
        y_out[i_out, 1] = v0
        i_out += 1

    _rhs(y, f, p, q, cp, cq, alpha, beta)

    # initial step (Hairer, Norsett & Wanner II.4)
    d0 = 0.0
    d1 = 0.0
    for j in range(2):
        sc = atol[j] + rtol * abs(y[j])
        d0 += (y[j] / sc) ** 2
        d1 += (f[j] / sc) ** 2
    d0 = np.sqrt(d0 / 2.0)
    d1 = np.sqrt(d1 / 2.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, x_max)
    for j in range(2):
        ytmp[j] = y[j] + h0 * f[j]
    _rhs(ytmp, f_new, p, q, cp, cq, alpha, beta)
    d2 = 0.0
    for j in range(2):
        sc = atol[j] + rtol * abs(y[j])
        d2 += ((f_new[j] - f[j]) / sc) ** 2
    d2 = np.sqrt(d2 / 2.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    h = min(100.0 * h0, h1, x_max)

    rejected = False
    while True:
        if n_acc >= max_steps:
            status = STATUS_MAXSTEPS
            break
        if h < 10.0 * np.finfo(np.float64).eps * max(1.0, abs(x)):
            status = STATUS_UNDERFLOW
            break
        if x + h > x_max:
            h = x_max - x

        # stages
        for j in range(2):
            K[0, j] = f[j]
        for s in range(1, _NS):
            for j in range(2):
                acc = 0.0
                for k in range(s):
                    acc += _A[s, k] * K[k, j]
                ytmp[j] = y[j] + h * acc
            _rhs(ytmp, K[s], p, q, cp, cq, alpha, beta)
        for j in range(2):
            acc = 0.0
            for k in range(_NS):
                acc += _B[k] * K[k, j]
            y_new[j] = y[j] + h * acc
        _rhs(y_new, f_new, p, q, cp, cq, alpha, beta)
        for j in range(2):
            K[_NS, j] = f_new[j]

        e5 = 0.0
        e3 = 0.0
        for j in range(2):
            sc = atol[j] + rtol * max(abs(y[j]), abs(y_new[j]))
            a5 = 0.0
            a3 = 0.0
            for k in range(_NS + 1):
                a5 += _E5[k] * K[k, j]
                a3 += _E3[k] * K[k, j]
            e5 += (a5 / sc) ** 2
            e3 += (a3 / sc) ** 2
        if e5 == 0.0 and e3 == 0.0:
            err = 0.0
        else:
            err = abs(h) * e5 / np.sqrt((e5 + 0.01 * e3) * 2.0)
        if not np.isfinite(err):
            err = 1e10

        if err > 1.0:
            h *= max(0.2, 0.9 * err ** (-1.0 / 8.0))
            rejected = True
            continue

        x_new = x + h
        need_dense = False
        crosses_zero = stop_at_zero and y[0] > 0.0 and y_new[0] <= 0.0
        crosses_peak = np.isnan(x_peak) and y[1] > 0.0 and y_new[1] <= 0.0
        if crosses_zero or crosses_peak:
            need_dense = True
        if i_out < x_out.shape[0] and x_out[i_out] <= x_new:
            need_dense = True
        if need_dense:
            _dense_coeffs(K, x, y, y_new, f_new, h, pars, F)

        x_stop = x_new
        if crosses_zero:
            x_stop = _bisect_zero(F, x, h, y, 0, x, x_new)
        if crosses_peak:
            xp = _bisect_zero(F, x, h, y, 1, x, x_new)
            if xp <= x_stop:
                x_peak = xp
                u_peak = _dense_eval(F, x, h, y, xp, 0)
        while i_out < x_out.shape[0] and x_out[i_out] <= x_stop:
            if x_out[i_out] >= x_new:
                y_out[i_out, 0] = y_new[0]
                y_out[i_out, 1] = y_new[1]
            else:
                y_out[i_out, 0] = _dense_eval(F, x, h, y, x_out[i_out], 0)
                y_out[i_out, 1] = _dense_eval(F, x, h, y, x_out[i_out], 1)
            i_out += 1

        n_acc += 1
        if crosses_zero:
            xs[n_acc] = x_stop
            ys[n_acc, 0] = 0.0
            ys[n_acc, 1] = _dense_eval(F, x, h, y, x_stop, 1)
            x_end = x_stop
            status = STATUS_ZERO
            break

        x = x_new
        for j in range(2):
            y[j] = y_new[j]
            f[j] = f_new[j]
        xs[n_acc] = x
        ys[n_acc, 0] = y[0]
        ys[n_acc, 1] = y[1]
        if x >= x_max:
            x_end = x
            status = STATUS_XMAX
            break

        if err == 0.0:
            fac = 10.0
        else:
            fac = min(10.0, 0.9 * err ** (-1.0 / 8.0))
        if rejected:
            fac = min(1.0, fac)
        h *= fac
        rejected = False

    if status < 0:
        x_end = x
    return status, xs[: n_acc + 1].copy(), ys[: n_acc + 1].copy(), x_end, x_peak, u_peak, y_out


@njit(cache=True, nogil=True)
def flux_inverse_array(w, p, q, cp, cq):
    out = np.empty_like(w)
    for i in range(w.shape[0]):
        out[i] = flux_inverse(w[i], p, q, cp, cq)
    return out
