"""Characteristic-plane dynamics under time-dependent coefficients.

The nonlocal characteristic system along a flow trajectory reads

    w' = k (1 - c(t) s),        s' = w - nu(t) s,

with the background weight ``c(t)`` confined to ``[c_minus, c_plus]`` and the
alignment rate ``nu(t)`` to ``[nu_minus, nu_plus]``.  The flow stays smooth
exactly while ``s`` stays positive; ``s`` reaching zero is the finite-time
blowup of the underlying solution.

Provided here:

* :class:`CoefficientPath` -- admissible coefficient pairs: constants at the
  extreme corners, sinusoidal sweeps, seeded piecewise-constant switching.
* :func:`simulate_ws` -- adaptive embedded Runge-Kutta integration with dense
  event detection on the four region-boundary lines and the blowup cutoff.
  Built-in coefficient modes run through the compiled kernel (or its numpy
  twin); arbitrary Python callables fall back to a SciPy integrator with the
  same event set.
* :func:`check_comparison` -- residence-episode monitoring of the eight
  one-sided comparison principles against the Lyapunov tables.
* :func:`certify_blowup` -- the staged blowup certificate with explicit
  residence-time bounds.
* :func:`invariance_suite` -- randomized region-invariance batches.
* :func:`simulate_vacuum_G` -- the vacuum indicator equation
  ``G' = -G (G - nu(t)) - k c(t)`` and its dichotomy thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from . import _kernels
from .errors import InternalInvariantError
from .lyapunov import LyapunovTable
from .params import Params, classify_regime, spectral, validate
from .phaseplane import CornerSet, corner_set, g_flat, g_sharp
from .regions import Region, region_pair

__all__ = [
    "CoefficientPath",
    "SimControls",
    "TrajectoryEvent",
    "BlowupInfo",
    "Trajectory",
    "simulate_ws",
    "octants_of",
    "octant_spec",
    "ComparisonEpisode",
    "ComparisonReport",
    "check_comparison",
    "StageVisit",
    "BlowupCertificate",
    "stage_levels",
    "certify_blowup",
    "InvarianceRun",
    "InvarianceStats",
    "invariance_suite",
    "VacuumTrajectory",
    "simulate_vacuum_G",
    "vacuum_expected_verdict",
    "vacuum_thresholds",
]

_STATUS_NAMES = {
    _kernels.WS_STATUS_OK: "completed",
    _kernels.WS_STATUS_CUTOFF: "blowup",
    _kernels.WS_STATUS_UNDERFLOW: "underflow",
    _kernels.WS_STATUS_BUDGET: "budget",
    _kernels.WS_STATUS_COEFF_BOUNDS: "coeff-bounds",
}

_EVENT_NAMES = {
    _kernels.EV_NU_PLUS: "line-nu-plus",
    _kernels.EV_NU_MINUS: "line-nu-minus",
    _kernels.EV_INV_CPLUS: "level-inv-c-plus",
    _kernels.EV_INV_CMINUS: "level-inv-c-minus",
    _kernels.EV_CUTOFF: "cutoff",
}


# ---------------------------------------------------------------------------
# coefficient paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientPath:
    """A time-dependent coefficient pair ``(c(t), nu(t))`` within bounds.

    Instances are built through the constructors :meth:`const`,
    :meth:`sine` and :meth:`random_switching` (or :meth:`from_mode`), which
    encode the path for the compiled kernel; ``__call__`` evaluates the same
    formulas in Python and asserts the bounds on every evaluation.
    """

    p: Params
    ckind: int
    cpar: tuple[float, ...]
    label: str

    def __call__(self, t: float) -> tuple[float, float]:
        cpar = self.cpar
        if self.ckind == 0:
            cv, nv = cpar[0], cpar[1]
        elif self.ckind == 1:
            cv = cpar[0] + cpar[1] * math.sin(cpar[2] * t + cpar[3])
            nv = cpar[4] + cpar[5] * math.sin(cpar[6] * t + cpar[7])
        else:
            nseg = int(cpar[0])
            idx = 0
            while idx < nseg - 1 and t >= cpar[1 + idx]:
                idx += 1
            cv = cpar[nseg + idx]
            nv = cpar[2 * nseg + idx]
        p = self.p
        c_slack = 1e-12 * (1.0 + p.c_plus)
        nu_slack = 1e-12 * (1.0 + p.nu_plus)
        if not (p.c_minus - c_slack <= cv <= p.c_plus + c_slack):
            raise ValueError(
                f"coefficient path leaves its c bounds at t={t:.6g}: {cv:.6g}")
        if not (p.nu_minus - nu_slack <= nv <= p.nu_plus + nu_slack):
            raise ValueError(
                f"coefficient path leaves its nu bounds at t={t:.6g}: {nv:.6g}")
        return float(cv), float(nv)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def const(p: Params, c: float | None = None,
              nu: float | None = None) -> "CoefficientPath":
        """Constant coefficients; defaults to ``(c_minus, nu_plus)``."""
        p = validate(p)
        cv = p.c_minus if c is None else float(c)
        nv = p.nu_plus if nu is None else float(nu)
        if not (p.c_minus <= cv <= p.c_plus and p.nu_minus <= nv <= p.nu_plus):
            raise ValueError("constant coefficients must lie within the bounds")
        return CoefficientPath(p, 0, (cv, nv), f"const(c={cv:g}, nu={nv:g})")

    @staticmethod
    def sine(p: Params, omega_c: float = 1.0, omega_nu: float = math.sqrt(2.0),
             phase_c: float = 0.0, phase_nu: float = math.pi / 3.0,
             amp: float = 1.0) -> "CoefficientPath":
        """Sinusoidal sweeps spanning ``amp`` of each bound interval."""
        p = validate(p)
        if not 0.0 <= amp <= 1.0:
            raise ValueError("amp must lie in [0, 1]")
        cpar = (0.5 * (p.c_minus + p.c_plus), 0.5 * amp * (p.c_plus - p.c_minus),
                float(omega_c), float(phase_c),
                0.5 * (p.nu_minus + p.nu_plus), 0.5 * amp * (p.nu_plus - p.nu_minus),
                float(omega_nu), float(phase_nu))
        return CoefficientPath(p, 1, cpar, f"sine(amp={amp:g})")

    @staticmethod
    def random_switching(p: Params, seed: int, T: float,
                         n_segments: int | None = None) -> "CoefficientPath":
        """Seeded piecewise-constant switching over ``[0, T]``."""
        p = validate(p)
        if not T > 0.0:
            raise ValueError("T must be positive")
        rng = np.random.default_rng(seed)
        nseg = int(n_segments) if n_segments is not None else int(rng.integers(4, 10))
        if nseg < 1:
            raise ValueError("n_segments must be at least 1")
        breaks = np.sort(rng.uniform(0.0, T, size=nseg - 1))
        cs = rng.uniform(p.c_minus, p.c_plus, size=nseg)
        nus = rng.uniform(p.nu_minus, p.nu_plus, size=nseg)
        cpar = (float(nseg), *breaks.tolist(), *cs.tolist(), *nus.tolist())
        return CoefficientPath(p, 2, cpar, f"random(seed={seed}, segments={nseg})")

    @staticmethod
    def from_mode(p: Params, mode: str, T: float) -> "CoefficientPath":
        """Parse a CLI-style mode string: ``const-minmax``, ``sine`` or
        ``random:<seed>``."""
        if mode == "const-minmax":
            return CoefficientPath.const(p)
        if mode == "sine":
            return CoefficientPath.sine(p)
        if mode.startswith("random:"):
            try:
                seed = int(mode.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad random coefficient mode {mode!r}; "
                                 "expected random:<integer seed>") from None
            return CoefficientPath.random_switching(p, seed, T)
        raise ValueError(f"unknown coefficient mode {mode!r}; expected "
                         "'const-minmax', 'sine' or 'random:<seed>'")


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimControls:
    """Integrator tolerances and guards for the characteristic simulations."""

    rtol: float = 1e-10
    atol: float = 1e-12
    s_eps: float = 1e-8
    g_eps: float = 1e-8
    max_dt: float = 0.25
    max_steps: int = 500_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not (0 < self.s_eps < 1e-2):
            raise ValueError("s_eps must lie in (0, 1e-2)")
        if not (0 < self.g_eps < 1e-2):
            raise ValueError("g_eps must lie in (0, 1e-2)")
        if not self.max_dt > 0:
            raise ValueError("max_dt must be positive")
        if self.max_steps < 100:
            raise ValueError("max_steps must be at least 100")


@dataclass(frozen=True)
class TrajectoryEvent:
    """One dense-output event: a region-boundary line or level crossing."""

    t: float
    w: float
    s: float
    kind: str
    direction: int

    def to_json(self) -> dict:
        return {"t": self.t, "w": self.w, "s": self.s,
                "kind": self.kind, "direction": self.direction}


@dataclass(frozen=True)
class BlowupInfo:
    """Blowup hit data and the extrapolated singularity time."""

    t_hit: float
    w_hit: float
    s_hit: float
    t_star: float
    t_star_err: float

    def to_json(self) -> dict:
        return {"t_hit": self.t_hit, "w_hit": self.w_hit, "s_hit": self.s_hit,
                "t_star": self.t_star, "t_star_err": self.t_star_err}


@dataclass(eq=False)
class Trajectory:
    """A characteristic-plane run: accepted samples, events, outcome."""

    p: Params
    coeffs: CoefficientPath | Callable[[float], tuple[float, float]]
    controls: SimControls
    t_end: float
    t: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    status: str
    events: tuple[TrajectoryEvent, ...] = field(repr=False)
    blowup: BlowupInfo | None
    n_accept: int
    n_reject: int

    @cached_property
    def _interp(self) -> tuple[CubicHermiteSpline, CubicHermiteSpline]:
        cs = np.empty(self.t.size)
        ns = np.empty(self.t.size)
        for i, tt in enumerate(self.t):
            cs[i], ns[i] = self.coeffs_at(float(tt))
        dw = self.p.k * (1.0 - cs * self.s)
        ds = self.w - ns * self.s
        return (CubicHermiteSpline(self.t, self.w, dw, extrapolate=False),
                CubicHermiteSpline(self.t, self.s, ds, extrapolate=False))

    def sample(self, t):
        """Interpolated ``(w, s)`` at time(s) ``t`` within the covered range.

        Cubic Hermite dense output with the exact right-hand side as slope;
        the accepted samples themselves carry the integrator tolerance."""
        iw, isv = self._interp
        return iw(t), isv(t)

    def coeffs_at(self, t: float) -> tuple[float, float]:
        return self.coeffs(t)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "t_end_requested": self.t_end,
            "t_last": float(self.t[-1]),
            "n_samples": int(self.t.size),
            "n_events": len(self.events),
            "n_accept": self.n_accept,
            "n_reject": self.n_reject,
            "blowup": None if self.blowup is None else self.blowup.to_json(),
        }


def _estimate_t_star(ts: np.ndarray, ws: np.ndarray, ss: np.ndarray,
                     coeffs, s_eps: float) -> tuple[float, float]:
    """Extrapolate the time at which ``s`` reaches zero past the cutoff."""
    t_hit, w_hit, s_hit = float(ts[-1]), float(ws[-1]), float(ss[-1])
    _, nu_hit = coeffs(t_hit)
    slope = w_hit - nu_hit * s_hit
    if slope >= 0.0:
        return t_hit, s_eps
    est_lin = t_hit + s_hit / (-slope)
    est = est_lin
    if ts.size >= 3:
        tl = ts[-3:] - t_hit
        coef = np.polyfit(tl, ss[-3:], 2)
        roots = np.roots(coef)
        real = roots[np.abs(roots.imag) < 1e-12].real
        ahead = real[real >= -1e-12]
        if ahead.size:
            est = t_hit + float(np.min(ahead))
    err = abs(est - est_lin) + s_eps / (-slope)
    return est, err


def _events_from_kernel(ev_t, ev_w, ev_s, ev_code, ev_dir) -> tuple[TrajectoryEvent, ...]:
    out = []
    for i in range(ev_t.size):
        out.append(TrajectoryEvent(float(ev_t[i]), float(ev_w[i]), float(ev_s[i]),
                                   _EVENT_NAMES[int(ev_code[i])], int(ev_dir[i])))
    return tuple(out)


def _simulate_callable(p: Params, coeffs, w0: float, s0: float, T: float,
                       controls: SimControls):
    """SciPy fallback path for arbitrary Python coefficient callables."""
    def rhs(t, y):
        cv, nv = coeffs(t)
        return [p.k * (1.0 - cv * y[1]), y[0] - nv * y[1]]

    evs = [
        lambda t, y: y[0] - p.nu_plus * y[1],
        lambda t, y: y[0] - p.nu_minus * y[1],
        lambda t, y: y[1] - 1.0 / p.c_plus,
        lambda t, y: y[1] - 1.0 / p.c_minus,
        lambda t, y: y[1] - controls.s_eps,
    ]
    evs[4].terminal = True
    evs[4].direction = -1.0
    sol = solve_ivp(rhs, (0.0, T), [w0, s0], method="RK45",
                    rtol=controls.rtol, atol=controls.atol,
                    max_step=controls.max_dt, events=evs, dense_output=False)
    if not sol.success and sol.status != 1:
        raise RuntimeError(f"integration failed: {sol.message}")
    events = []
    names = ["line-nu-plus", "line-nu-minus", "level-inv-c-plus",
             "level-inv-c-minus", "cutoff"]
    for code, (t_arr, y_arr) in enumerate(zip(sol.t_events, sol.y_events)):
        for t_ev, y_ev in zip(t_arr, y_arr):
            events.append(TrajectoryEvent(float(t_ev), float(y_ev[0]),
                                          float(y_ev[1]), names[code], 0))
    events.sort(key=lambda e: e.t)
    blew = sol.status == 1 and sol.t_events[4].size > 0
    status = "blowup" if blew else "completed"
    ts = np.asarray(sol.t, dtype=float)
    wsamp = np.asarray(sol.y[0], dtype=float)
    ssamp = np.asarray(sol.y[1], dtype=float)
    return status, ts, wsamp, ssamp, tuple(events), int(sol.t.size), 0


def simulate_ws(p: Params, coeffs, w0: float, s0: float, T: float,
                controls: SimControls | None = None,
                backend: str | None = None) -> Trajectory:
    """Integrate one characteristic state ``(w0, s0)`` over ``[0, T]``.

    ``coeffs`` is a :class:`CoefficientPath` (kernel-dispatched) or any
    callable ``t -> (c, nu)`` (SciPy fallback).  The run terminates early
    with status ``"blowup"`` when ``s`` falls to the cutoff ``s_eps``.

    Raises
    ------
    ValueError
        If the coefficient path leaves its bounds (reported, not clamped).
    RuntimeError
        On step-size underflow or an exhausted step budget.
    """
    p = validate(p)
    controls = controls or SimControls()
    w0, s0, T = float(w0), float(s0), float(T)
    if not (math.isfinite(w0) and math.isfinite(s0) and s0 > 0.0):
        raise ValueError("initial state must be finite with s0 > 0")
    if not T > 0.0:
        raise ValueError("T must be positive")

    if isinstance(coeffs, CoefficientPath):
        if coeffs.p != p:
            raise ValueError("coefficient path was built for different parameters")
        res = _kernels.ws_integrate(
            coeffs.ckind, np.asarray(coeffs.cpar, dtype=float), p.k,
            w0, s0, 0.0, T, controls.rtol, controls.atol, controls.s_eps,
            p.nu_plus, p.nu_minus, 1.0 / p.c_plus, 1.0 / p.c_minus,
            p.c_minus, p.c_plus, p.nu_minus, p.nu_plus,
            controls.max_dt, controls.max_steps, backend=backend)
        (code, ts, ws, ss, ev_t, ev_w, ev_s, ev_code, ev_dir,
         n_acc, n_rej) = res
        status = _STATUS_NAMES[int(code)]
        if status == "coeff-bounds":
            raise ValueError(
                "coefficient path leaves its bounds during integration")
        if status == "underflow":
            raise RuntimeError(
                f"step-size underflow at t={ts[-1]:.6g}; integration cannot "
                "continue (not silently clamped)")
        if status == "budget":
            raise RuntimeError(
                f"step budget exhausted at t={ts[-1]:.6g}; raise "
                "SimControls.max_steps for longer runs")
        events = _events_from_kernel(ev_t, ev_w, ev_s, ev_code, ev_dir)
    elif callable(coeffs):
        status, ts, ws, ss, events, n_acc, n_rej = _simulate_callable(
            p, coeffs, w0, s0, T, controls)
    else:
        raise TypeError("coeffs must be a CoefficientPath or a callable")

    blow = None
    if status == "blowup":
        t_star, t_err = _estimate_t_star(ts, ws, ss, coeffs, controls.s_eps)
        blow = BlowupInfo(float(ts[-1]), float(ws[-1]), float(ss[-1]),
                          t_star, t_err)
    return Trajectory(p=p, coeffs=coeffs, controls=controls, t_end=T,
                      t=ts, w=ws, s=ss, status=status, events=events,
                      blowup=blow, n_accept=int(n_acc), n_reject=int(n_rej))


# ---------------------------------------------------------------------------
# comparison-principle monitoring
# ---------------------------------------------------------------------------

# code -> (table tag, invariant L sign, region test builder)
_OCTANTS: tuple[tuple[str, str, int], ...] = (
    ("R1", "P1", +1),
    ("R2", "P2", +1),
    ("R3", "N3", -1),
    ("R4", "N4", -1),
    ("Rt1", "P1t", -1),
    ("Rt2", "P2t", -1),
    ("Rt3", "N3t", +1),
    ("Rt4", "N4t", +1),
)


def octant_spec(code: str) -> tuple[str, int]:
    """Table tag and invariant ``L`` sign of one comparison region."""
    for cd, tag, sign in _OCTANTS:
        if cd == code:
            return tag, sign
    raise ValueError(f"unknown comparison region {code!r}")


def _octant_masks(p: Params, w: np.ndarray, s: np.ndarray) -> dict[str, np.ndarray]:
    """Strict membership masks of the eight comparison regions."""
    inv_cp, inv_cm = 1.0 / p.c_plus, 1.0 / p.c_minus
    lp = w - p.nu_plus * s
    lm = w - p.nu_minus * s
    return {
        "R1": (s < inv_cp) & (lp < 0.0),
        "R2": (s > inv_cp) & (lm < 0.0),
        "R3": (s > inv_cm) & (lm > 0.0),
        "R4": (s < inv_cm) & (lp > 0.0),
        "Rt1": (s < inv_cm) & (lm < 0.0),
        "Rt2": (s > inv_cm) & (lp < 0.0),
        "Rt3": (s > inv_cp) & (lp > 0.0),
        "Rt4": (s < inv_cp) & (lm > 0.0),
    }


def octants_of(p: Params, w: float, s: float) -> tuple[str, ...]:
    """The comparison regions containing one state (possibly several)."""
    masks = _octant_masks(p, np.asarray([w]), np.asarray([s]))
    return tuple(code for code, _, _ in _OCTANTS if bool(masks[code][0]))


@dataclass(frozen=True)
class ComparisonEpisode:
    """One maximal residence of a trajectory in one comparison region."""

    code: str
    t_enter: float
    t_exit: float
    n_samples: int
    hypothesis_active: bool
    ok: bool
    worst: float
    note: str = ""

    def to_json(self) -> dict:
        return {"code": self.code, "t_enter": self.t_enter,
                "t_exit": self.t_exit, "n_samples": self.n_samples,
                "hypothesis_active": self.hypothesis_active, "ok": self.ok,
                "worst": self.worst, "note": self.note}


@dataclass(frozen=True)
class ComparisonReport:
    """Episode-by-episode verdicts of the comparison principles."""

    episodes: tuple[ComparisonEpisode, ...]
    n_episodes: int
    n_checked: int
    n_violations: int
    n_not_applicable: int

    def to_json(self) -> dict:
        return {"n_episodes": self.n_episodes, "n_checked": self.n_checked,
                "n_violations": self.n_violations,
                "n_not_applicable": self.n_not_applicable,
                "episodes": [e.to_json() for e in self.episodes]}


def _comparison_tol(L: np.ndarray | float) -> np.ndarray | float:
    return 1e-7 * (1.0 + np.abs(L))


def check_comparison(traj: Trajectory, rtol_scale: float = 1.0) -> ComparisonReport:
    """Verify the eight one-sided comparison principles along a run.

    In each comparison region one side of the corresponding frozen boundary
    arc is forward-invariant (``L >= 0`` for R1, R2, Rt3, Rt4; ``L <= 0`` for
    the others).  For every maximal residence episode: once a sample lands
    strictly on the invariant side (beyond the tolerance
    ``1e-7 (1 + |L|)``), all later samples of the episode must stay on that
    side up to the same tolerance.  Bulk evaluation uses the tabulated
    boundary; would-be violations are re-checked against the exact arc before
    they count.  Episodes leaving the table's ``s`` coverage are reported
    as not applicable.
    """
    p = traj.p
    sub, sup, _ = region_pair(p)
    tables: dict[str, LyapunovTable] = dict(sup.tables)
    if sub is not None:
        tables.update(sub.tables)
    masks = _octant_masks(p, traj.w, traj.s)
    episodes: list[ComparisonEpisode] = []
    n_checked = n_viol = n_na = 0
    tol_scale = float(rtol_scale)
    for code, tag, sign in _OCTANTS:
        mask = masks[code]
        if not mask.any():
            continue
        idx = np.flatnonzero(mask)
        splits = np.flatnonzero(np.diff(idx) > 1)
        for chunk in np.split(idx, splits + 1):
            if chunk.size < 2:
                continue
            t0, t1 = float(traj.t[chunk[0]]), float(traj.t[chunk[-1]])
            tb = tables.get(tag)
            if tb is None:
                episodes.append(ComparisonEpisode(
                    code, t0, t1, chunk.size, False, True, 0.0,
                    "not applicable: boundary table unavailable"))
                n_na += 1
                continue
            s_ep = traj.s[chunk]
            w_ep = traj.w[chunk]
            in_dom = (s_ep >= tb.s_lo) & (s_ep <= tb.s_hi)
            if not in_dom.all():
                episodes.append(ComparisonEpisode(
                    code, t0, t1, chunk.size, False, True, 0.0,
                    "not applicable: episode leaves the table's s coverage"))
                n_na += 1
                continue
            L = np.asarray(tb.eval_L(w_ep, s_ep), dtype=float)
            tol = tol_scale * _comparison_tol(L)
            onside = sign * L > tol
            if not onside.any():
                episodes.append(ComparisonEpisode(
                    code, t0, t1, chunk.size, False, True, 0.0,
                    "hypothesis never activated"))
                continue
            first = int(np.argmax(onside))
            tail = slice(first, None)
            margin = sign * L[tail] + tol[tail]
            bad = np.flatnonzero(margin < 0.0)
            confirmed = []
            for j in bad:
                jj = first + int(j)
                v_ex = tb.value_exact(float(s_ep[jj]))
                root = math.sqrt(2.0 * max(v_ex, 0.0))
                l_exact = (w_ep[jj] - tb.nu * s_ep[jj]
                           + (root if tb.kind == "plus" else -root))
                if sign * l_exact + tol_scale * float(_comparison_tol(l_exact)) < 0.0:
                    confirmed.append((jj, l_exact))
            worst = float(np.min(margin)) if margin.size else 0.0
            ok = not confirmed
            note = ""
            if confirmed:
                jj, l_bad = confirmed[0]
                note = (f"sign {'+' if sign > 0 else '-'} lost at "
                        f"t={traj.t[chunk[jj]]:.6g} (L={l_bad:.3e})")
            episodes.append(ComparisonEpisode(code, t0, t1, chunk.size, True,
                                              ok, worst, note))
            n_checked += 1
            if not ok:
                n_viol += 1
    return ComparisonReport(tuple(episodes), len(episodes), n_checked,
                            n_viol, n_na)


# ---------------------------------------------------------------------------
# blowup certificate
# ---------------------------------------------------------------------------


def stage_levels(p: Params, corners: CornerSet | None = None) -> tuple[float, float, float]:
    """The stage thresholds ``(s*, s**, v_w)`` of the blowup certificate.

    ``s*`` separates the early stages (midpoint of the supercritical lens
    levels in scenario IV, one above the first tilde corner in scenario III),
    ``s** = 1/(2 c_plus)`` is the late-stage level, and ``v_w`` the
    guaranteed downward ``w``-speed in stage A2.
    """
    p = validate(p)
    if corners is None:
        corners = corner_set(p)
    regime = classify_regime(p)
    st1 = corners.get("st1")
    if regime.scenario_sup == "IV":
        st2 = corners.get("st2")
        s_star = 0.5 * (st1 + st2)
    else:
        s_star = st1 + 1.0
    s_dstar = 0.5 / p.c_plus
    v_w = p.k * (p.c_minus * s_star - 1.0)
    if not v_w > 0.0:
        raise InternalInvariantError("stage speed v_w is not positive")
    return s_star, s_dstar, v_w


@dataclass(frozen=True)
class StageVisit:
    """One visited certificate stage with its residence bound."""

    stage: str
    t_enter: float
    t_exit: float
    w_enter: float
    s_enter: float
    residence: float
    bound: float | None
    ok: bool
    note: str = ""

    def to_json(self) -> dict:
        return {"stage": self.stage, "t_enter": self.t_enter,
                "t_exit": self.t_exit, "w_enter": self.w_enter,
                "s_enter": self.s_enter, "residence": self.residence,
                "bound": self.bound, "ok": self.ok, "note": self.note}


@dataclass(frozen=True)
class BlowupCertificate:
    """Staged certificate for one finite-time blowup run."""

    stages: tuple[StageVisit, ...]
    s_star: float
    s_dstar: float
    v_w: float
    t_star: float
    t_star_err: float
    ok: bool

    def to_json(self) -> dict:
        return {"stages": [sv.to_json() for sv in self.stages],
                "s_star": self.s_star, "s_dstar": self.s_dstar,
                "v_w": self.v_w, "t_star": self.t_star,
                "t_star_err": self.t_star_err, "ok": self.ok}


_STAGE_ORDER = ("A1", "A2", "A3", "A4")


def _stage_codes(w: np.ndarray, s: np.ndarray, s_star: float,
                 s_dstar: float) -> np.ndarray:
    """Stage index per sample: A1/A2 split ``s_star`` at ``w > 0``, A3/A4
    split ``s_dstar`` at ``w <= 0``."""
    out = np.empty(w.shape, dtype=np.int64)
    pos = w > 0.0
    out[pos & (s < s_star)] = 0
    out[pos & (s >= s_star)] = 1
    out[~pos & (s > s_dstar)] = 2
    out[~pos & (s <= s_dstar)] = 3
    return out


def certify_blowup(p: Params, traj: Trajectory,
                   corners: CornerSet | None = None) -> BlowupCertificate:
    """Certify a blowup run against the staged residence bounds.

    The half plane splits into stages A1 (``w > 0``, ``s < s*``), A2
    (``w > 0``, ``s >= s*``), A3 (``w <= 0``, ``s > s**``) and A4
    (``w <= 0``, ``s <= s**``).  Each maximal residence is bounded by:
    A2, ``w_enter / v_w``; A3, ``2 c_plus s_enter / nu_minus``; A4,
    ``2 |w_enter| / k``; an A1 passage with rising specific volume, the gap
    to ``s*`` over the measured minimum of ``s'`` (descending or turning
    passages carry no residence claim).  While ``w > 0`` the early stages
    may alternate as ``s`` crosses ``s*``; the ``w``-sign phase itself
    never regresses (region invariance forbids an upward zero crossing on
    a supercritical run), and neither does A4 to A3 (``s`` falls strictly
    while ``w <= 0``).

    Raises
    ------
    ValueError
        If the trajectory did not blow up (certification needs a cutoff run).
    InternalInvariantError
        If the visited stages regress across one of those one-way steps.
    """
    p = validate(p)
    if traj.status != "blowup" or traj.blowup is None:
        raise ValueError(
            "trajectory has not blown up; the staged certificate applies to "
            "runs that reached the cutoff")
    s_star, s_dstar, v_w = stage_levels(p, corners)
    codes = _stage_codes(traj.w, traj.s, s_star, s_dstar)
    changes = np.flatnonzero(np.diff(codes) != 0)
    starts = np.concatenate([[0], changes + 1])
    ends = np.concatenate([changes, [codes.size - 1]])
    order = [int(codes[i]) for i in starts]
    for a, b in zip(order, order[1:]):
        if b < a and (a, b) != (1, 0):
            raise InternalInvariantError(
                f"stage sequence regressed from {_STAGE_ORDER[a]} to "
                f"{_STAGE_ORDER[b]}; the staged blowup argument is violated")
    visits: list[StageVisit] = []
    all_ok = True
    slack = 1e-6
    for i0, i1 in zip(starts, ends):
        code = int(codes[i0])
        t_en, t_ex = float(traj.t[i0]), float(traj.t[i1])
        w_en, s_en = float(traj.w[i0]), float(traj.s[i0])
        res = t_ex - t_en
        # one sample spacing of slack: stage boundaries fall between samples
        dt_pad = float(traj.t[min(i1 + 1, codes.size - 1)] - traj.t[i1])
        note = ""
        if code == 0:
            sdot = traj.w[i0:i1 + 1] - _nu_along(traj, i0, i1) * traj.s[i0:i1 + 1]
            v_min = float(np.min(sdot))
            if v_min <= 0.0:
                bound, ok = None, True
                note = "descending or turning passage; no residence claim"
            else:
                bound = (s_star - s_en) / v_min
                ok = res <= bound * (1.0 + slack) + dt_pad
        elif code == 1:
            bound = w_en / v_w
            ok = res <= bound * (1.0 + slack) + dt_pad
        elif code == 2:
            bound = 2.0 * p.c_plus * s_en / p.nu_minus
            ok = res <= bound * (1.0 + slack) + dt_pad
        else:
            if w_en < 0.0:
                bound = 2.0 * abs(w_en) / p.k
                ok = res <= bound * (1.0 + slack) + dt_pad
            else:
                bound, ok = None, True
                note = "entered A4 with w = 0; no residence claim"
        visits.append(StageVisit(_STAGE_ORDER[code], t_en, t_ex, w_en, s_en,
                                 res, bound, bool(ok), note))
        all_ok = all_ok and bool(ok)
    return BlowupCertificate(tuple(visits), s_star, s_dstar, v_w,
                             traj.blowup.t_star, traj.blowup.t_star_err,
                             all_ok)


def _nu_along(traj: Trajectory, i0: int, i1: int) -> np.ndarray:
    out = np.empty(i1 - i0 + 1)
    for j, tt in enumerate(traj.t[i0:i1 + 1]):
        out[j] = traj.coeffs_at(float(tt))[1]
    return out


# ---------------------------------------------------------------------------
# invariance suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvarianceRun:
    """One randomized run of the invariance suite."""

    seed: int
    side: str
    w0: float
    s0: float
    status: str
    n_samples: int
    n_violations: int
    worst_excess: float

    def to_json(self) -> dict:
        return {"seed": self.seed, "side": self.side, "w0": self.w0,
                "s0": self.s0, "status": self.status,
                "n_samples": self.n_samples,
                "n_violations": self.n_violations,
                "worst_excess": self.worst_excess}


@dataclass(frozen=True)
class InvarianceStats:
    """Aggregated results of :func:`invariance_suite`."""

    n_runs: int
    n_samples: int
    n_violations: int
    worst_excess: float
    runs: tuple[InvarianceRun, ...]

    def to_json(self) -> dict:
        return {"n_runs": self.n_runs, "n_samples": self.n_samples,
                "n_violations": self.n_violations,
                "worst_excess": self.worst_excess,
                "runs": [r.to_json() for r in self.runs]}


def _sub_violations(region: Region, w: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Excess by which samples leave the open subcritical region (0 inside).

    Beyond the tabulated reach of scenario I, the lower boundary is
    increasing in ``s``, so ``W_l(reach)`` is a rigorous lower bound there;
    the detector can only under-report, never flag a false violation."""
    tol = 1e-7 * (1.0 + np.abs(w))
    if region.s_cap is not None:
        s_c = np.minimum(s, region.s_cap)
        wl = np.asarray(region.w_left(s_c), dtype=float)
        wr = np.asarray(region.w_right(s_c), dtype=float)
        ex = np.maximum(wl - w - tol, 0.0)
        ex = np.maximum(ex, np.maximum(w - wr - tol, 0.0))
        return np.where(s >= region.s_cap,
                        np.maximum(ex, s - region.s_cap), ex)
    s_c = np.minimum(s, region.s_reach)
    wl = np.asarray(region.w_left(s_c), dtype=float)
    return np.maximum(wl - w - tol, 0.0)


def _sup_violations(region: Region, w: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Excess by which samples leave the closed supercritical region."""
    tol = 1e-7 * (1.0 + np.abs(w))
    p = region.p
    if region.s_cap is not None:
        inside_cap = s < region.s_cap
        ex = np.zeros(w.shape)
        if inside_cap.any():
            sc = np.where(inside_cap, s, 0.5 * region.s_cap)
            wl = np.asarray(region.w_left(sc), dtype=float)
            wr = np.asarray(region.w_right(sc), dtype=float)
            gap = np.minimum(np.maximum(w - wl, 0.0), np.maximum(wr - w, 0.0))
            ex = np.where(inside_cap, np.maximum(gap - tol, 0.0), 0.0)
        return ex
    reach = region.s_reach
    near = s <= reach
    ex = np.zeros(w.shape)
    if near.any():
        wl = np.asarray(region.w_left(np.where(near, s, reach)), dtype=float)
        ex = np.maximum(ex, np.where(near, w - wl - tol, 0.0))
    far = ~near
    if far.any():
        slope = g_sharp(p)
        line = slope * s + (p.nu_plus - slope) / p.c_minus
        ex = np.maximum(ex, np.where(far, w - line - tol, 0.0))
    return np.maximum(ex, 0.0)


def _draw_start(rng: np.random.Generator, region: Region) -> tuple[float, float]:
    """A random interior start of the region, with a safety margin."""
    if region.kind == "Subcritical":
        if region.s_cap is not None:
            sv = float(rng.uniform(0.08, 0.92)) * region.s_cap
            wl = float(region.w_left(sv))
            wr = float(region.w_right(sv))
            frac = float(rng.uniform(0.1, 0.9))
            return wl + frac * (wr - wl), sv
        sv = float(rng.uniform(0.2, 0.9)) * min(region.s_reach,
                                                4.0 / region.p.c_minus)
        wl = float(region.w_left(sv))
        lift = float(rng.uniform(0.05, 1.5)) * (1.0 + abs(wl))
        return wl + lift, sv
    if region.s_cap is not None and rng.uniform() < 0.5:
        sv = float(rng.uniform(1.02, 2.0)) * region.s_cap
        wv = float(rng.uniform(-1.0, 1.0)) * (1.0 + region.p.nu_plus * sv)
        return wv, sv
    sv = float(rng.uniform(0.05, 0.9)) * (region.s_cap or
                                          min(region.s_reach, 4.0 / region.p.c_minus))
    wl = float(region.w_left(sv))
    drop = float(rng.uniform(0.05, 1.5)) * (1.0 + abs(wl))
    return wl - drop, sv


def invariance_suite(p: Params, n_runs: int, T: float,
                     seed: int = 0) -> InvarianceStats:
    """Randomized invariance check of both threshold regions.

    Runs ``n_runs`` subcritical and ``n_runs`` supercritical starts under
    seeded random switching coefficients; no sample may leave its region
    beyond the comparison tolerance ``1e-7 (1 + |w|)``.  ``n_runs = 0``
    returns empty statistics.  Per-run seeds derive deterministically from
    ``seed``.
    """
    p = validate(p)
    if n_runs < 0:
        raise ValueError("n_runs must be nonnegative")
    if n_runs == 0:
        return InvarianceStats(0, 0, 0, 0.0, ())
    sub, sup, _ = region_pair(p)
    children = np.random.SeedSequence(seed).spawn(2 * n_runs)
    runs: list[InvarianceRun] = []
    total = viol = 0
    worst = 0.0
    for i in range(2 * n_runs):
        side = "sub" if i < n_runs else "sup"
        region = sub if side == "sub" else sup
        child = children[i]
        run_seed = int(child.generate_state(1)[0] % (2 ** 31))
        if region is None:
            runs.append(InvarianceRun(run_seed, side, math.nan, math.nan,
                                      "skipped: region unavailable", 0, 0, 0.0))
            continue
        rng = np.random.default_rng(child)
        w0, s0 = _draw_start(rng, region)
        coeffs = CoefficientPath.random_switching(p, run_seed, T)
        traj = simulate_ws(p, coeffs, w0, s0, T)
        if side == "sub":
            ex = _sub_violations(region, traj.w, traj.s)
        else:
            ex = _sup_violations(region, traj.w, traj.s)
        nv = int(np.count_nonzero(ex > 0.0))
        wex = float(np.max(ex)) if ex.size else 0.0
        runs.append(InvarianceRun(run_seed, side, w0, s0, traj.status,
                                  int(traj.t.size), nv, wex))
        total += int(traj.t.size)
        viol += nv
        worst = max(worst, wex)
    return InvarianceStats(2 * n_runs, total, viol, worst, tuple(runs))


# ---------------------------------------------------------------------------
# vacuum indicator dynamics
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class VacuumTrajectory:
    """A vacuum indicator run ``G(t)`` with its verdict."""

    p: Params
    G0: float
    t_end: float
    t: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)
    status: str
    verdict: str
    t_star: float | None
    sup_G: float

    def to_json(self) -> dict:
        return {"G0": self.G0, "t_end_requested": self.t_end,
                "t_last": float(self.t[-1]), "status": self.status,
                "verdict": self.verdict, "t_star": self.t_star,
                "sup_G": self.sup_G, "n_samples": int(self.t.size)}


def vacuum_thresholds(p: Params) -> dict[str, float | None]:
    """The vacuum dichotomy thresholds available for ``p``.

    ``G_flat`` (scenario I bounded-side threshold), ``G_sharp`` (scenario III
    blowup-side threshold) and ``G_tilde_plus`` (the fast stable slope that
    bounds the eventual indicator value from above); each is ``None`` where
    its scenario does not apply.
    """
    p = validate(p)
    regime = classify_regime(p)
    out: dict[str, float | None] = {"G_flat": None, "G_sharp": None,
                                    "G_tilde_plus": None}
    if regime.scenario_sub == "I":
        out["G_flat"] = g_flat(p)
        out["G_tilde_plus"] = -spectral(p.c_plus, p.nu_minus, p.k).lambda2
    if regime.scenario_sup == "III":
        out["G_sharp"] = g_sharp(p)
    return out


def vacuum_expected_verdict(p: Params, G0: float) -> tuple[str, str]:
    """The dichotomy's verdict for a vacuum state with initial slope ``G0``.

    Returns ``(verdict, reason)`` with verdict ``"Blowup"``, ``"Bounded"``
    or ``"Indeterminate"`` (outside the proposition's cases).
    """
    p = validate(p)
    regime = classify_regime(p)
    thr = vacuum_thresholds(p)
    if regime.label == "weak":
        return "Blowup", "weak alignment: every initial slope blows up"
    g_sharp_val = thr["G_sharp"]
    if G0 < g_sharp_val:
        return "Blowup", f"G0 < G_sharp = {g_sharp_val:.6g}"
    if regime.label == "strong" and G0 >= thr["G_flat"]:
        return "Bounded", f"G0 >= G_flat = {thr['G_flat']:.6g}"
    return "Indeterminate", "between the vacuum thresholds"


def simulate_vacuum_G(p: Params, coeffs, G0: float, T: float,
                      controls: SimControls | None = None,
                      backend: str | None = None) -> VacuumTrajectory:
    """Integrate the vacuum indicator ``G' = -G (G - nu(t)) - k c(t)``.

    The verdict is ``"Blowup"`` when ``G`` falls to ``-1/g_eps`` (the
    indicator diverges in finite time past any finite floor), otherwise
    ``"Bounded"`` with the recorded supremum.
    """
    p = validate(p)
    controls = controls or SimControls()
    G0, T = float(G0), float(T)
    if not math.isfinite(G0):
        raise ValueError("G0 must be finite")
    if not T > 0.0:
        raise ValueError("T must be positive")
    g_floor = -1.0 / controls.g_eps
    if isinstance(coeffs, CoefficientPath):
        if coeffs.p != p:
            raise ValueError("coefficient path was built for different parameters")
        code, ts, gs = _kernels.vacuum_integrate(
            coeffs.ckind, np.asarray(coeffs.cpar, dtype=float), p.k,
            G0, 0.0, T, controls.rtol, controls.atol, g_floor,
            p.c_minus, p.c_plus, p.nu_minus, p.nu_plus,
            controls.max_dt, controls.max_steps, backend=backend)
        status = _STATUS_NAMES[int(code)]
        if status == "coeff-bounds":
            raise ValueError(
                "coefficient path leaves its bounds during integration")
        if status in ("underflow", "budget"):
            raise RuntimeError(f"vacuum integration stopped early: {status}")
    elif callable(coeffs):
        def rhs(t, y):
            cv, nv = coeffs(t)
            return [-y[0] * (y[0] - nv) - p.k * cv]
        ev = lambda t, y: y[0] - g_floor
        ev.terminal = True
        ev.direction = -1.0
        sol = solve_ivp(rhs, (0.0, T), [G0], method="RK45",
                        rtol=controls.rtol, atol=controls.atol,
                        max_step=controls.max_dt, events=[ev])
        if not sol.success and sol.status != 1:
            raise RuntimeError(f"vacuum integration failed: {sol.message}")
        ts = np.asarray(sol.t, dtype=float)
        gs = np.asarray(sol.y[0], dtype=float)
        status = "blowup" if sol.status == 1 else "completed"
    else:
        raise TypeError("coeffs must be a CoefficientPath or a callable")

    if status == "blowup":
        g_hit = float(gs[-1])
        t_star = float(ts[-1]) + 1.0 / max(-g_hit, 1.0)
        verdict = "Blowup"
    else:
        t_star = None
        verdict = "Bounded"
    return VacuumTrajectory(p=p, G0=G0, t_end=T, t=ts, G=gs, status=status,
                            verdict=verdict, t_star=t_star,
                            sup_G=float(np.max(gs)))
