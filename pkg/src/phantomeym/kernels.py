"""Numeric kernels: right-hand side, DOP853 stepping, dense output, events.

State vectors are float64 arrays ordered ``(r, N, w, U, kappa, zeta)``.
Everything here is jittable; see :mod:`phantomeym._jit`.
"""

import numpy as np

from phantomeym import _tableau as tab
from phantomeym._jit import jit

N_STAGES = tab.N_STAGES
N_STAGES_EXTENDED = tab.N_STAGES_EXTENDED
INTERPOLATOR_POWER = tab.INTERPOLATOR_POWER

A = np.ascontiguousarray(tab.A)
B = np.ascontiguousarray(tab.B)
E3 = np.ascontiguousarray(tab.E3)
E5 = np.ascontiguousarray(tab.E5)
D = np.ascontiguousarray(tab.D)

# termination codes
REACHED = 0
COLLAPSED = 1
BLOWUP = 2
UNDERFLOW = 3
ESCAPED = 4
NONFINITE = 5
MAXSTEPS = 6

# event kinds
EV_W_ZERO = 0
EV_N_ZERO = 1
EV_W_EXIT = 2
EV_N_PLUS_ZETA = 3
N_EVENT_KINDS = 4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERROR_EXPONENT = -1.0 / 8.0


@jit
def rhs(y):
    r = y[0]
    N = y[1]
    w = y[2]
    U = y[3]
    k = y[4]
    z = y[5]
    p = 1.0 - w * w
    q = p / r  # squared below; r**2 alone overflows for rho > ~350
    out = np.empty(6)
    out[0] = r * N
    out[1] = 1.0 - q * q - k * N
    out[2] = r * U
    out[3] = -(k - N) * U - w * q
    out[4] = 1.0 + 2.0 * U * U - k * k
    out[5] = -k * z
    return out


@jit
def constraint(y):
    q = (1.0 - y[2] * y[2]) / y[0]
    return y[5] * y[5] - (1.0 + 2.0 * y[3] * y[3] - q * q - 2.0 * y[4] * y[1] + y[1] * y[1])


@jit
def event_values(y):
    g = np.empty(N_EVENT_KINDS)
    g[0] = y[2]
    g[1] = y[1]
    g[2] = abs(y[2]) - 1.0
    g[3] = y[1] + y[5]
    return g


@jit
def rk_step(y, f, h, K):
    """One DOP853 step; fills ``K[:N_STAGES + 1]``."""
    K[0] = f
    for s in range(1, N_STAGES):
        dy = np.dot(A[s, :s], K[:s]) * h
        K[s] = rhs(y + dy)
    y_new = y + h * np.dot(B, K[:N_STAGES])
    f_new = rhs(y_new)
    K[N_STAGES] = f_new
    return y_new, f_new


@jit
def error_norm(K, h, y, y_new, rtol, atol):
    scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
    err5 = np.dot(E5, K[:N_STAGES + 1]) / scale
    err3 = np.dot(E3, K[:N_STAGES + 1]) / scale
    e5 = np.sum(err5 * err5)
    e3 = np.sum(err3 * err3)
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    return abs(h) * e5 / np.sqrt((e5 + 0.01 * e3) * y.shape[0])


@jit
def dense_coefficients(y_old, y_new, f_old, f_new, h, K):
    for s in range(N_STAGES + 1, N_STAGES_EXTENDED):
        dy = np.dot(A[s, :s], K[:s]) * h
        K[s] = rhs(y_old + dy)
    F = np.empty((INTERPOLATOR_POWER, y_old.shape[0]))
    delta = y_new - y_old
    F[0] = delta
    F[1] = h * f_old - delta
    F[2] = 2.0 * delta - h * (f_new + f_old)
    F[3:] = h * np.dot(D, K)
    return F


@jit
def dense_eval(y_old, F, x):
    """Evaluate the continuous extension at fraction ``x`` of the step."""
    y = np.zeros(y_old.shape[0])
    for i in range(INTERPOLATOR_POWER):
        y += F[INTERPOLATOR_POWER - 1 - i]
        if i % 2 == 0:
            y *= x
        else:
            y *= 1.0 - x
    return y + y_old


@jit
def dense_eval_derivative(y_old, F, x, h):
    """d/drho of the continuous extension, by differentiating the nested form."""
    n = y_old.shape[0]
    y = np.zeros(n)
    dy = np.zeros(n)
    for i in range(INTERPOLATOR_POWER):
        y += F[INTERPOLATOR_POWER - 1 - i]
        if i % 2 == 0:
            dy = dy * x + y
            y *= x
        else:
            dy = dy * (1.0 - x) - y
            y *= 1.0 - x
    return dy / h


@jit
def locate_event(y_old, F, h, rho_old, kind, g_old, tol):
    lo = 0.0
    hi = 1.0
    for _ in range(200):
        if (hi - lo) * h <= tol:
            break
        mid = 0.5 * (lo + hi)
        gm = event_values(dense_eval(y_old, F, mid))[kind]
        if gm == 0.0:
            lo = mid
            hi = mid
            break
        if (gm > 0.0) == (g_old > 0.0):
            lo = mid
        else:
            hi = mid
    return rho_old + 0.5 * (lo + hi) * h


@jit
def initial_step(y0, f0, rtol, atol):
    scale = atol + np.abs(y0) * rtol
    n = y0.shape[0]
    d0 = np.sqrt(np.sum((y0 / scale) ** 2) / n)
    d1 = np.sqrt(np.sum((f0 / scale) ** 2) / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = rhs(y1)
    d2 = np.sqrt(np.sum(((f1 - f0) / scale) ** 2) / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1)


@jit
def _grow2(a, cap):
    out = np.empty((cap, a.shape[1]))
    out[: a.shape[0]] = a
    return out


@jit
def _grow3(a, cap):
    out = np.empty((cap, a.shape[1], a.shape[2]))
    out[: a.shape[0]] = a
    return out


@jit
def _grow1(a, cap):
    out = np.empty(cap, dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@jit
def integrate_kernel(y0, rho_max, rtol, atol, r_floor, n_floor, h_min, exit_band, max_steps):
    """Adaptive DOP853 march from rho = 0 with event logging and latches.

    Returns ``(rho, Y, F, ev_rho, ev_kind, ev_dir, status, n_rejected)`` where
    ``F[i]`` holds the dense-output coefficients of the step ``rho[i] ->
    rho[i + 1]`` and ``ev_dir`` is the sign of the event function just after
    the crossing.
    """
    n = y0.shape[0]
    cap = 256
    rho_arr = np.empty(cap)
    Y = np.empty((cap, n))
    Fs = np.empty((cap, INTERPOLATOR_POWER, n))
    ecap = 32
    ev_rho = np.empty(ecap)
    ev_kind = np.empty(ecap, dtype=np.int64)
    ev_dir = np.empty(ecap, dtype=np.int64)
    n_ev = 0

    K = np.zeros((N_STAGES_EXTENDED, n))
    rho = 0.0
    y = y0.copy()
    f = rhs(y)
    rho_arr[0] = rho
    Y[0] = y
    n_nodes = 1
    g_old = event_values(y)

    status = -1
    if np.all(np.isfinite(y)) and np.all(np.isfinite(f)):
        h = initial_step(y, f, rtol, atol)
    else:
        status = NONFINITE
        h = 0.0
    rejected = False
    n_rejected = 0
    steps = 0
    while status < 0:
        if steps >= max_steps:
            status = MAXSTEPS
            break
        remaining = rho_max - rho
        last = h >= remaining
        h_eff = remaining if last else h
        if not last and not h_eff >= h_min:  # also catches NaN
            status = UNDERFLOW
            break
        y_new, f_new = rk_step(y, f, h_eff, K)
        err = error_norm(K, h_eff, y, y_new, rtol, atol)
        if not np.isfinite(err) or not np.all(np.isfinite(y_new)):
            h = h_eff * MIN_FACTOR
            rejected = True
            n_rejected += 1
            continue
        if err > 1.0:
            h = h_eff * max(MIN_FACTOR, SAFETY * err ** ERROR_EXPONENT)
            rejected = True
            n_rejected += 1
            continue
        steps += 1
        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = min(MAX_FACTOR, SAFETY * err ** ERROR_EXPONENT)
        if rejected:
            factor = min(1.0, factor)
        rejected = False

        rho_new = rho_max if last else rho + h_eff
        F = dense_coefficients(y, y_new, f, f_new, h_eff, K)

        if n_nodes >= cap:
            cap *= 2
            rho_arr = _grow1(rho_arr, cap)
            Y = _grow2(Y, cap)
            Fs = _grow3(Fs, cap)
        rho_arr[n_nodes] = rho_new
        Y[n_nodes] = y_new
        Fs[n_nodes - 1] = F
        n_nodes += 1

        g_new = event_values(y_new)
        tol = 1e-12 * (1.0 + abs(rho_new))
        first = n_ev
        for kind in range(N_EVENT_KINDS):
            go = g_old[kind]
            gn = g_new[kind]
            if go == 0.0:
                # leaving an initial zero counts for the region events only
                if n_nodes == 2 and gn != 0.0 and (kind == EV_W_EXIT or kind == EV_N_PLUS_ZETA):
                    rho_ev = rho
                    d = 1 if gn > 0.0 else -1
                else:
                    continue
            elif gn == 0.0:
                rho_ev = rho_new
                d = -1 if go > 0.0 else 1
            elif (gn > 0.0) != (go > 0.0):
                rho_ev = locate_event(y, F, rho_new - rho, rho, kind, go, tol)
                d = 1 if gn > 0.0 else -1
            else:
                continue
            if n_ev >= ecap:
                ecap *= 2
                ev_rho = _grow1(ev_rho, ecap)
                ev_kind = _grow1(ev_kind, ecap)
                ev_dir = _grow1(ev_dir, ecap)
            ev_rho[n_ev] = rho_ev
            ev_kind[n_ev] = kind
            ev_dir[n_ev] = d
            n_ev += 1
        # insertion sort of this step's events by rho (kind breaks ties)
        for i in range(first + 1, n_ev):
            j = i
            while j > first and (
                ev_rho[j] < ev_rho[j - 1]
                or (ev_rho[j] == ev_rho[j - 1] and ev_kind[j] < ev_kind[j - 1])
            ):
                tr = ev_rho[j]
                ev_rho[j] = ev_rho[j - 1]
                ev_rho[j - 1] = tr
                tk = ev_kind[j]
                ev_kind[j] = ev_kind[j - 1]
                ev_kind[j - 1] = tk
                td = ev_dir[j]
                ev_dir[j] = ev_dir[j - 1]
                ev_dir[j - 1] = td
                j -= 1

        rho = rho_new
        y = y_new
        f = f_new
        g_old = g_new
        h = h_eff * factor if not last else h

        if y[0] < r_floor:
            status = COLLAPSED
        elif y[1] < n_floor and y[1] + y[5] < 0.0:
            status = BLOWUP
        elif abs(y[2]) >= 1.0 + exit_band and y[2] * y[3] > 0.0:
            status = ESCAPED
        elif last:
            status = REACHED

    return (
        rho_arr[:n_nodes].copy(),
        Y[:n_nodes].copy(),
        Fs[: max(n_nodes - 1, 0)].copy(),
        ev_rho[:n_ev].copy(),
        ev_kind[:n_ev].copy(),
        ev_dir[:n_ev].copy(),
        status,
        n_rejected,
    )


@jit
def sample_kernel(rho_nodes, Y, Fs, rho_query):
    """Dense-output states at sorted or unsorted query points inside the span."""
    m = rho_query.shape[0]
    n = Y.shape[1]
    out = np.empty((m, n))
    last = rho_nodes.shape[0] - 1
    for i in range(m):
        q = rho_query[i]
        j = np.searchsorted(rho_nodes, q, side="right") - 1
        if j >= last:
            j = last - 1
        if j < 0:
            j = 0
        if q == rho_nodes[j]:
            out[i] = Y[j]
            continue
        if j + 1 <= last and q == rho_nodes[j + 1]:
            out[i] = Y[j + 1]
            continue
        h = rho_nodes[j + 1] - rho_nodes[j]
        out[i] = dense_eval(Y[j], Fs[j], (q - rho_nodes[j]) / h)
    return out


@jit
def sample_derivative_kernel(rho_nodes, Y, Fs, rho_query):
    m = rho_query.shape[0]
    n = Y.shape[1]
    out = np.empty((m, n))
    last = rho_nodes.shape[0] - 1
    for i in range(m):
        q = rho_query[i]
        j = np.searchsorted(rho_nodes, q, side="right") - 1
        if j >= last:
            j = last - 1
        if j < 0:
            j = 0
        h = rho_nodes[j + 1] - rho_nodes[j]
        out[i] = dense_eval_derivative(Y[j], Fs[j], (q - rho_nodes[j]) / h, h)
    return out


@jit
def rk4_fixed(y0, h, n_steps, stop_abs_w):
    """Classical fixed-step RK4, stopping once |w| exceeds ``stop_abs_w``.

    Independent reference path used by the verification suite; shares only
    :func:`rhs` with the adaptive integrator.
    """
    y = y0.copy()
    i = 0
    for i in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if abs(y[2]) > stop_abs_w or y[0] <= 0.0 or not np.isfinite(y[1]):
            break
    return y, (i + 1) * h
