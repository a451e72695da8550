"""Hot numerical kernels with a numba path and a pure-Python/numpy twin.

Each kernel is written once as a plain function and, when numba is available
and not disabled via the ``CTEPA_NUMBA`` environment variable (set to ``"0"``
to disable), compiled with ``@njit``.  The public dispatchers accept
``backend=None`` (use the configured default), ``"numba"`` or ``"numpy"``;
the benchmark script drives both explicitly.

Kernels
-------
ws_integrate
    Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) integration of the
    characteristic-plane system ``w' = k (1 - c(t) s)``, ``s' = w - nu(t) s``
    with cubic-Hermite dense output, bisected line-crossing events and a
    terminal small-``s`` cutoff event.
vacuum_integrate
    Same integrator for the scalar slope equation along a vacuum
    characteristic, ``G' = -G (G - nu(t)) - k c(t)``, with a divergence floor.
alignment_sums
    Direct O(N^2) pairwise convolution and alignment sums on the torus.
cic_deposit / cic_gather
    Cloud-in-cell deposition of particle mass onto a uniform grid and linear
    interpolation of a grid field back to particles.

Coefficient paths are passed as a numeric spec ``(ckind, cpar)``:

- ``ckind=0``: constant, ``cpar=[c, nu]``;
- ``ckind=1``: sinusoidal, ``cpar=[c_mid, c_amp, c_om, c_ph, nu_mid, nu_amp, nu_om, nu_ph]``;
- ``ckind=2``: piecewise constant, ``cpar=[n_seg, sw_1.., c_1.., nu_1..]``.

Kernel shapes: ``psi_kind=0`` constant ``[psi0]``; ``psi_kind=1`` cosine bump
``[base, amp]`` with ``psi(d) = base + amp*(1+cos d)/2``.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "HAS_NUMBA",
    "NUMBA_ENABLED",
    "backend_name",
    "ws_integrate",
    "vacuum_integrate",
    "alignment_sums",
    "cic_deposit",
    "cic_gather",
    "WS_STATUS_OK",
    "WS_STATUS_CUTOFF",
    "WS_STATUS_UNDERFLOW",
    "WS_STATUS_BUDGET",
    "WS_STATUS_COEFF_BOUNDS",
    "EV_NU_PLUS",
    "EV_NU_MINUS",
    "EV_INV_CPLUS",
    "EV_INV_CMINUS",
    "EV_CUTOFF",
]

try:  # pragma: no cover - exercised implicitly by backend selection
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    njit = None
    HAS_NUMBA = False

NUMBA_ENABLED = HAS_NUMBA and os.environ.get("CTEPA_NUMBA", "1") != "0"

# Integration outcome codes.
WS_STATUS_OK = 0
WS_STATUS_CUTOFF = 1
WS_STATUS_UNDERFLOW = 2
WS_STATUS_BUDGET = 3
WS_STATUS_COEFF_BOUNDS = 5

# Event functional codes.
EV_NU_PLUS = 0      # w - nu_plus * s
EV_NU_MINUS = 1     # w - nu_minus * s
EV_INV_CPLUS = 2    # s - 1/c_plus
EV_INV_CMINUS = 3   # s - 1/c_minus
EV_CUTOFF = 4       # s - s_eps (terminal)

_TWO_PI = 2.0 * math.pi


def backend_name() -> str:
    """Name of the default kernel backend ("numba" or "numpy")."""
    return "numba" if NUMBA_ENABLED else "numpy"


def _use_numba(backend: str | None) -> bool:
    if backend is None:
        return NUMBA_ENABLED
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")


# ----------------------------------------------------------------------------
# characteristic-plane integrator (single source, compiled twin below)
# ----------------------------------------------------------------------------

def _ws_integrate_src(ckind, cpar, k,
                      w0, s0, t0, t_end,
                      rtol, atol, s_eps,
                      nu_plus, nu_minus, inv_cp, inv_cm,
                      c_lo, c_hi, nu_lo, nu_hi,
                      max_dt,
                      ts, ws, ss, ev_t, ev_w, ev_s, ev_code, ev_dir):
    n_cap = ts.shape[0]
    ev_cap = ev_t.shape[0]
    c_slack = 1e-12 * (1.0 + c_hi)
    nu_slack = 1e-12 * (1.0 + nu_hi)

    t = t0
    w = w0
    s = s0
    ts[0] = t
    ws[0] = w
    ss[0] = s
    n = 1
    nev = 0
    nrej = 0
    status = WS_STATUS_OK

    # coefficients at t (inline eval, repeated at every stage below)
    if ckind == 0:
        cv = cpar[0]
        nv = cpar[1]
    elif ckind == 1:
        cv = cpar[0] + cpar[1] * math.sin(cpar[2] * t + cpar[3])
        nv = cpar[4] + cpar[5] * math.sin(cpar[6] * t + cpar[7])
    else:
        nseg = int(cpar[0])
        idx = 0
        while idx < nseg - 1 and t >= cpar[1 + idx]:
            idx += 1
        cv = cpar[nseg + idx]
        nv = cpar[2 * nseg + idx]
    if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
        return n, nev, WS_STATUS_COEFF_BOUNDS, 0, nrej

    fw = k * (1.0 - cv * s)
    fs = w - nv * s

    dt = 0.01 * (1.0 + abs(w) + abs(s)) / (1.0 + abs(fw) + abs(fs))
    if dt > max_dt:
        dt = max_dt
    span = t_end - t0
    if dt > span:
        dt = span

    n_accept = 0
    while t < t_end:
        if n >= n_cap:
            status = WS_STATUS_BUDGET
            break
        # near-cutoff limiter: do not overshoot deep past s = 0
        if fs < 0.0 and s > 0.0:
            cap = 0.9 * s / (-fs)
            if dt > cap:
                dt = cap
        if dt > t_end - t:
            dt = t_end - t
        if dt < 1e-14 * (1.0 + abs(t)):
            status = WS_STATUS_UNDERFLOW
            break

        # Dormand-Prince 5(4) stages (FSAL: k1 = last stage of accepted step)
        k1w = fw
        k1s = fs
        bounds_bad = False

        tt = t + 0.2 * dt
        yw = w + dt * (0.2 * k1w)
        ys = s + dt * (0.2 * k1s)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k2w = k * (1.0 - cv * ys)
        k2s = yw - nv * ys

        tt = t + 0.3 * dt
        yw = w + dt * (0.075 * k1w + 0.225 * k2w)
        ys = s + dt * (0.075 * k1s + 0.225 * k2s)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k3w = k * (1.0 - cv * ys)
        k3s = yw - nv * ys

        tt = t + 0.8 * dt
        yw = w + dt * ((44.0 / 45.0) * k1w - (56.0 / 15.0) * k2w + (32.0 / 9.0) * k3w)
        ys = s + dt * ((44.0 / 45.0) * k1s - (56.0 / 15.0) * k2s + (32.0 / 9.0) * k3s)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k4w = k * (1.0 - cv * ys)
        k4s = yw - nv * ys

        tt = t + (8.0 / 9.0) * dt
        yw = w + dt * ((19372.0 / 6561.0) * k1w - (25360.0 / 2187.0) * k2w
                       + (64448.0 / 6561.0) * k3w - (212.0 / 729.0) * k4w)
        ys = s + dt * ((19372.0 / 6561.0) * k1s - (25360.0 / 2187.0) * k2s
                       + (64448.0 / 6561.0) * k3s - (212.0 / 729.0) * k4s)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k5w = k * (1.0 - cv * ys)
        k5s = yw - nv * ys

        tt = t + dt
        yw = w + dt * ((9017.0 / 3168.0) * k1w - (355.0 / 33.0) * k2w
                       + (46732.0 / 5247.0) * k3w + (49.0 / 176.0) * k4w
                       - (5103.0 / 18656.0) * k5w)
        ys = s + dt * ((9017.0 / 3168.0) * k1s - (355.0 / 33.0) * k2s
                       + (46732.0 / 5247.0) * k3s + (49.0 / 176.0) * k4s
                       - (5103.0 / 18656.0) * k5s)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k6w = k * (1.0 - cv * ys)
        k6s = yw - nv * ys

        w_new = w + dt * ((35.0 / 384.0) * k1w + (500.0 / 1113.0) * k3w
                          + (125.0 / 192.0) * k4w - (2187.0 / 6784.0) * k5w
                          + (11.0 / 84.0) * k6w)
        s_new = s + dt * ((35.0 / 384.0) * k1s + (500.0 / 1113.0) * k3s
                          + (125.0 / 192.0) * k4s - (2187.0 / 6784.0) * k5s
                          + (11.0 / 84.0) * k6s)

        t_new = t + dt
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * t_new + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * t_new + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and t_new >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k7w = k * (1.0 - cv * s_new)
        k7s = w_new - nv * s_new

        if bounds_bad:
            status = WS_STATUS_COEFF_BOUNDS
            break

        ew = dt * ((71.0 / 57600.0) * k1w - (71.0 / 16695.0) * k3w
                   + (71.0 / 1920.0) * k4w - (17253.0 / 339200.0) * k5w
                   + (22.0 / 525.0) * k6w - (1.0 / 40.0) * k7w)
        es = dt * ((71.0 / 57600.0) * k1s - (71.0 / 16695.0) * k3s
                   + (71.0 / 1920.0) * k4s - (17253.0 / 339200.0) * k5s
                   + (22.0 / 525.0) * k6s - (1.0 / 40.0) * k7s)
        scw = atol + rtol * max(abs(w), abs(w_new))
        scs = atol + rtol * max(abs(s), abs(s_new))
        err = math.sqrt(0.5 * ((ew / scw) ** 2 + (es / scs) ** 2))

        if err > 1.0:
            nrej += 1
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            dt *= fac
            continue

        # accepted: locate line crossings with the cubic Hermite dense output
        h = dt
        for code in range(5):
            if code == 0:
                g_old = w - nu_plus * s
                g_new = w_new - nu_plus * s_new
            elif code == 1:
                g_old = w - nu_minus * s
                g_new = w_new - nu_minus * s_new
            elif code == 2:
                g_old = s - inv_cp
                g_new = s_new - inv_cp
            elif code == 3:
                g_old = s - inv_cm
                g_new = s_new - inv_cm
            else:
                g_old = s - s_eps
                g_new = s_new - s_eps
            crossed = (g_old > 0.0 and g_new < 0.0) or (g_old < 0.0 and g_new > 0.0) \
                or (g_old != 0.0 and g_new == 0.0)
            if not crossed:
                continue
            # bisection on the Hermite interpolant in normalized time
            a = 0.0
            b = 1.0
            ga = g_old
            for _ in range(80):
                mid = 0.5 * (a + b)
                th = mid
                h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th)
                h10 = th * (1.0 - th) * (1.0 - th)
                h01 = th * th * (3.0 - 2.0 * th)
                h11 = th * th * (th - 1.0)
                wm = h00 * w + h10 * h * k1w + h01 * w_new + h11 * h * k7w
                sm = h00 * s + h10 * h * k1s + h01 * s_new + h11 * h * k7s
                if code == 0:
                    gm = wm - nu_plus * sm
                elif code == 1:
                    gm = wm - nu_minus * sm
                elif code == 2:
                    gm = sm - inv_cp
                elif code == 3:
                    gm = sm - inv_cm
                else:
                    gm = sm - s_eps
                if (ga > 0.0 and gm > 0.0) or (ga < 0.0 and gm < 0.0):
                    a = mid
                    ga = gm
                else:
                    b = mid
                if (b - a) * h < 1e-13 * (1.0 + abs(t)):
                    break
            th = 0.5 * (a + b)
            h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th)
            h10 = th * (1.0 - th) * (1.0 - th)
            h01 = th * th * (3.0 - 2.0 * th)
            h11 = th * th * (th - 1.0)
            wm = h00 * w + h10 * h * k1w + h01 * w_new + h11 * h * k7w
            sm = h00 * s + h10 * h * k1s + h01 * s_new + h11 * h * k7s
            te = t + th * h
            if nev < ev_cap:
                ev_t[nev] = te
                ev_w[nev] = wm
                ev_s[nev] = sm
                ev_code[nev] = code
                ev_dir[nev] = 1 if g_new > g_old else -1
                nev += 1
            if code == 4 and g_new < g_old:
                # terminal cutoff: truncate the step at the crossing
                ts[n] = te
                ws[n] = wm
                ss[n] = sm
                n += 1
                n_accept += 1
                status = WS_STATUS_CUTOFF
                t = te
                w = wm
                s = sm
                break
        if status == WS_STATUS_CUTOFF:
            break

        t = t_new
        w = w_new
        s = s_new
        fw = k7w
        fs = k7s
        ts[n] = t
        ws[n] = w
        ss[n] = s
        n += 1
        n_accept += 1

        fac = 5.0
        if err > 0.0:
            fac = 0.9 * err ** -0.2
            if fac > 5.0:
                fac = 5.0
        dt *= fac
        if dt > max_dt:
            dt = max_dt

    return n, nev, status, n_accept, nrej


def _vacuum_integrate_src(ckind, cpar, k,
                          g0, t0, t_end,
                          rtol, atol, g_floor,
                          c_lo, c_hi, nu_lo, nu_hi,
                          max_dt, ts, gs):
    n_cap = ts.shape[0]
    c_slack = 1e-12 * (1.0 + c_hi)
    nu_slack = 1e-12 * (1.0 + nu_hi)

    t = t0
    g = g0
    ts[0] = t
    gs[0] = g
    n = 1
    status = WS_STATUS_OK
    nrej = 0

    if ckind == 0:
        cv = cpar[0]
        nv = cpar[1]
    elif ckind == 1:
        cv = cpar[0] + cpar[1] * math.sin(cpar[2] * t + cpar[3])
        nv = cpar[4] + cpar[5] * math.sin(cpar[6] * t + cpar[7])
    else:
        nseg = int(cpar[0])
        idx = 0
        while idx < nseg - 1 and t >= cpar[1 + idx]:
            idx += 1
        cv = cpar[nseg + idx]
        nv = cpar[2 * nseg + idx]
    if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
        return n, WS_STATUS_COEFF_BOUNDS, nrej

    f0 = -g * (g - nv) - k * cv
    dt = 0.01 * (1.0 + abs(g)) / (1.0 + abs(f0))
    if dt > max_dt:
        dt = max_dt
    if dt > t_end - t0:
        dt = t_end - t0

    while t < t_end:
        if n >= n_cap:
            status = WS_STATUS_BUDGET
            break
        if dt > t_end - t:
            dt = t_end - t
        if dt < 1e-16 * (1.0 + abs(t)):
            status = WS_STATUS_UNDERFLOW
            break

        k1 = f0
        bounds_bad = False

        tt = t + 0.2 * dt
        y = g + dt * 0.2 * k1
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k2 = -y * (y - nv) - k * cv

        tt = t + 0.3 * dt
        y = g + dt * (0.075 * k1 + 0.225 * k2)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k3 = -y * (y - nv) - k * cv

        tt = t + 0.8 * dt
        y = g + dt * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2 + (32.0 / 9.0) * k3)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k4 = -y * (y - nv) - k * cv

        tt = t + (8.0 / 9.0) * dt
        y = g + dt * ((19372.0 / 6561.0) * k1 - (25360.0 / 2187.0) * k2
                      + (64448.0 / 6561.0) * k3 - (212.0 / 729.0) * k4)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k5 = -y * (y - nv) - k * cv

        tt = t + dt
        y = g + dt * ((9017.0 / 3168.0) * k1 - (355.0 / 33.0) * k2
                      + (46732.0 / 5247.0) * k3 + (49.0 / 176.0) * k4
                      - (5103.0 / 18656.0) * k5)
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * tt + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * tt + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and tt >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k6 = -y * (y - nv) - k * cv

        g_new = g + dt * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3
                          + (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5
                          + (11.0 / 84.0) * k6)
        t_new = t + dt
        if ckind == 0:
            cv = cpar[0]
            nv = cpar[1]
        elif ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * t_new + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * t_new + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and t_new >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        if cv < c_lo - c_slack or cv > c_hi + c_slack or nv < nu_lo - nu_slack or nv > nu_hi + nu_slack:
            bounds_bad = True
        k7 = -g_new * (g_new - nv) - k * cv

        if bounds_bad:
            status = WS_STATUS_COEFF_BOUNDS
            break

        e = dt * ((71.0 / 57600.0) * k1 - (71.0 / 16695.0) * k3
                  + (71.0 / 1920.0) * k4 - (17253.0 / 339200.0) * k5
                  + (22.0 / 525.0) * k6 - (1.0 / 40.0) * k7)
        sc = atol + rtol * max(abs(g), abs(g_new))
        err = abs(e) / sc

        if err > 1.0:
            nrej += 1
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            dt *= fac
            continue

        if g_new <= g_floor:
            # divergence floor hit: bisect the crossing on the Hermite interpolant
            a = 0.0
            b = 1.0
            h = dt
            ga = g - g_floor
            for _ in range(80):
                mid = 0.5 * (a + b)
                th = mid
                h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th)
                h10 = th * (1.0 - th) * (1.0 - th)
                h01 = th * th * (3.0 - 2.0 * th)
                h11 = th * th * (th - 1.0)
                gm = h00 * g + h10 * h * k1 + h01 * g_new + h11 * h * k7 - g_floor
                if (ga > 0.0 and gm > 0.0) or (ga < 0.0 and gm < 0.0):
                    a = mid
                    ga = gm
                else:
                    b = mid
                if (b - a) * h < 1e-13 * (1.0 + abs(t)):
                    break
            th = 0.5 * (a + b)
            ts[n] = t + th * h
            gs[n] = g_floor
            n += 1
            status = WS_STATUS_CUTOFF
            break

        t = t_new
        g = g_new
        f0 = k7
        ts[n] = t
        gs[n] = g
        n += 1

        fac = 5.0
        if err > 0.0:
            fac = 0.9 * err ** -0.2
            if fac > 5.0:
                fac = 5.0
        dt *= fac
        if dt > max_dt:
            dt = max_dt

    return n, status, nrej


# ----------------------------------------------------------------------------
# particle kernels (loop source for numba, vectorized numpy twins)
# ----------------------------------------------------------------------------

def _alignment_sums_src(x, u, m, psi_kind, psi_par, conv, align):
    n = x.shape[0]
    for i in range(n):
        ci = 0.0
        ai = 0.0
        xi = x[i]
        ui = u[i]
        for j in range(n):
            d = xi - x[j]
            d -= _TWO_PI * math.floor(d / _TWO_PI + 0.5)
            if psi_kind == 0:
                p = psi_par[0]
            else:
                p = psi_par[0] + psi_par[1] * 0.5 * (1.0 + math.cos(d))
            ci += m[j] * p
            ai += m[j] * p * (u[j] - ui)
        conv[i] = ci
        align[i] = ai


def _alignment_sums_numpy(x, u, m, psi_kind, psi_par, conv, align):
    d = x[:, None] - x[None, :]
    d -= _TWO_PI * np.floor(d / _TWO_PI + 0.5)
    if psi_kind == 0:
        p = np.full_like(d, psi_par[0])
    else:
        p = psi_par[0] + psi_par[1] * 0.5 * (1.0 + np.cos(d))
    pw = p * m[None, :]
    conv[:] = pw.sum(axis=1)
    align[:] = pw @ u - conv * u


def _cic_deposit_src(x, m, rho):
    mm = rho.shape[0]
    dx = _TWO_PI / mm
    for i in range(rho.shape[0]):
        rho[i] = 0.0
    for i in range(x.shape[0]):
        xi = x[i] - _TWO_PI * math.floor(x[i] / _TWO_PI)
        g = xi / dx
        j0 = int(math.floor(g))
        f = g - j0
        if j0 >= mm:
            j0 -= mm
        j1 = j0 + 1
        if j1 >= mm:
            j1 -= mm
        rho[j0] += m[i] * (1.0 - f)
        rho[j1] += m[i] * f
    for i in range(mm):
        rho[i] /= dx


def _cic_deposit_numpy(x, m, rho):
    mm = rho.shape[0]
    dx = _TWO_PI / mm
    xi = np.mod(x, _TWO_PI)
    g = xi / dx
    j0 = np.floor(g).astype(np.int64)
    f = g - j0
    j0 = np.mod(j0, mm)
    j1 = np.mod(j0 + 1, mm)
    rho[:] = 0.0
    np.add.at(rho, j0, m * (1.0 - f))
    np.add.at(rho, j1, m * f)
    rho /= dx


def _cic_gather_src(field, x, out):
    mm = field.shape[0]
    dx = _TWO_PI / mm
    for i in range(x.shape[0]):
        xi = x[i] - _TWO_PI * math.floor(x[i] / _TWO_PI)
        g = xi / dx
        j0 = int(math.floor(g))
        f = g - j0
        if j0 >= mm:
            j0 -= mm
        j1 = j0 + 1
        if j1 >= mm:
            j1 -= mm
        out[i] = (1.0 - f) * field[j0] + f * field[j1]


def _cic_gather_numpy(field, x, out):
    mm = field.shape[0]
    dx = _TWO_PI / mm
    xi = np.mod(x, _TWO_PI)
    g = xi / dx
    j0 = np.floor(g).astype(np.int64)
    f = g - j0
    j0 = np.mod(j0, mm)
    j1 = np.mod(j0 + 1, mm)
    out[:] = (1.0 - f) * field[j0] + f * field[j1]


if HAS_NUMBA:  # pragma: no branch
    _ws_integrate_jit = njit(cache=True, nogil=True)(_ws_integrate_src)
    _vacuum_integrate_jit = njit(cache=True, nogil=True)(_vacuum_integrate_src)
    _alignment_sums_jit = njit(cache=True, nogil=True)(_alignment_sums_src)
    _cic_deposit_jit = njit(cache=True, nogil=True)(_cic_deposit_src)
    _cic_gather_jit = njit(cache=True, nogil=True)(_cic_gather_src)
else:  # pragma: no cover
    _ws_integrate_jit = None
    _vacuum_integrate_jit = None
    _alignment_sums_jit = None
    _cic_deposit_jit = None
    _cic_gather_jit = None


def ws_integrate(ckind, cpar, k, w0, s0, t0, t_end, rtol, atol, s_eps,
                 nu_plus, nu_minus, inv_cp, inv_cm,
                 c_lo, c_hi, nu_lo, nu_hi,
                 max_dt, max_steps, backend=None):
    """Integrate the characteristic-plane system; see module docstring.

    Returns ``(status, ts, ws, ss, ev_t, ev_w, ev_s, ev_code, ev_dir,
    n_accept, n_reject)`` with arrays already truncated to their fill level.
    """
    cpar = np.ascontiguousarray(cpar, dtype=np.float64)
    n_cap = int(max_steps) + 2
    ts = np.empty(n_cap)
    ws = np.empty(n_cap)
    ss = np.empty(n_cap)
    ev_cap = 65536
    ev_t = np.empty(ev_cap)
    ev_w = np.empty(ev_cap)
    ev_s = np.empty(ev_cap)
    ev_code = np.empty(ev_cap, dtype=np.int64)
    ev_dir = np.empty(ev_cap, dtype=np.int64)
    fn = _ws_integrate_jit if _use_numba(backend) else _ws_integrate_src
    n, nev, status, n_accept, n_reject = fn(
        int(ckind), cpar, float(k), float(w0), float(s0), float(t0), float(t_end),
        float(rtol), float(atol), float(s_eps),
        float(nu_plus), float(nu_minus), float(inv_cp), float(inv_cm),
        float(c_lo), float(c_hi), float(nu_lo), float(nu_hi),
        float(max_dt), ts, ws, ss, ev_t, ev_w, ev_s, ev_code, ev_dir)
    return (status, ts[:n], ws[:n], ss[:n],
            ev_t[:nev], ev_w[:nev], ev_s[:nev], ev_code[:nev], ev_dir[:nev],
            n_accept, n_reject)


def vacuum_integrate(ckind, cpar, k, g0, t0, t_end, rtol, atol, g_floor,
                     c_lo, c_hi, nu_lo, nu_hi, max_dt, max_steps, backend=None):
    """Integrate the vacuum slope equation; returns ``(status, ts, gs)``."""
    cpar = np.ascontiguousarray(cpar, dtype=np.float64)
    n_cap = int(max_steps) + 2
    ts = np.empty(n_cap)
    gs = np.empty(n_cap)
    fn = _vacuum_integrate_jit if _use_numba(backend) else _vacuum_integrate_src
    n, status, _ = fn(int(ckind), cpar, float(k), float(g0), float(t0), float(t_end),
                      float(rtol), float(atol), float(g_floor),
                      float(c_lo), float(c_hi), float(nu_lo), float(nu_hi),
                      float(max_dt), ts, gs)
    return status, ts[:n], gs[:n]


def alignment_sums(x, u, m, psi_kind, psi_par, backend=None):
    """Pairwise kernel sums: returns ``(conv, align)`` with
    ``conv_i = sum_j m_j psi(x_i - x_j)`` and
    ``align_i = sum_j m_j psi(x_i - x_j) (u_j - u_i)``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    m = np.ascontiguousarray(m, dtype=np.float64)
    psi_par = np.ascontiguousarray(psi_par, dtype=np.float64)
    conv = np.empty_like(x)
    align = np.empty_like(x)
    if _use_numba(backend):
        _alignment_sums_jit(x, u, m, int(psi_kind), psi_par, conv, align)
    else:
        _alignment_sums_numpy(x, u, m, int(psi_kind), psi_par, conv, align)
    return conv, align


def cic_deposit(x, m, n_grid, backend=None):
    """Cloud-in-cell deposit of particle masses onto a uniform periodic grid.

    Returns the grid density (mass per cell divided by the cell width), which
    integrates to the total particle mass exactly.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    m = np.ascontiguousarray(m, dtype=np.float64)
    rho = np.empty(int(n_grid))
    if _use_numba(backend):
        _cic_deposit_jit(x, m, rho)
    else:
        _cic_deposit_numpy(x, m, rho)
    return rho


def cic_gather(field, x, backend=None):
    """Linear interpolation of a uniform periodic grid field at particle positions."""
    field = np.ascontiguousarray(field, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    if _use_numba(backend):
        _cic_gather_jit(field, x, out)
    else:
        _cic_gather_numpy(field, x, out)
    return out
