"""Closed-form phase-plane machinery for the characteristic system.

Along a characteristic, the scaled slope ``w = G / rho`` and the specific
volume ``s = 1 / rho`` obey

    w' = k (1 - c(t) s),        s' = w - nu(t) s,

with coefficients frozen at an extreme pair ``(c, nu)`` this is linear around
the equilibrium ``(nu/c, 1/c)`` and solvable in closed form.  The threshold
regions are bounded by concatenations of four such frozen arcs; this module
computes the arcs (:class:`LocalTrajectory`), the junction corners reached by
running each frozen system backward from its exit level
(:func:`subcritical_corners`, :func:`supercritical_corners`), the
admissibility conditions under which the four-arc chain closes
(:func:`admissibility`), and the two asymptotic slope thresholds
(:func:`g_flat`, :func:`g_sharp`).

Corner naming: plain fields (``t1, w1, s1, ..., w_star``) belong to the
subcritical chain, ``t``-prefixed tilde fields (``tt1, wt1, st1, ...,
wt_star``) to the supercritical chain.  The constants ``z1..z4`` are the
oscillatory arc-expansion factors; ``eta1``/``eta3`` their monotone-branch
counterparts for steps 1 and 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable

import numpy as np
from scipy.optimize import brentq

from .errors import InternalInvariantError
from .params import Params, Regime, classify_regime, spectral

__all__ = [
    "LocalTrajectory",
    "local_trajectory",
    "CornerSet",
    "Admissibility",
    "subcritical_corners",
    "supercritical_corners",
    "corner_set",
    "admissibility",
    "g_flat",
    "g_sharp",
]

_CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class LocalTrajectory:
    """Exact solution of the frozen system through ``(w0, s0)`` at time ``t0``.

    Evaluation uses the uniform exponential form

        w(t) = nu/c + E (C u0 + S du),    s(t) = 1/c + E (C v0 + S dv),

    with ``tau = t - t0``, ``E = exp(-nu tau / 2)``, ``u0 = w0 - nu/c``,
    ``v0 = s0 - 1/c``, ``du = (nu/2) u0 - k c v0``, ``dv = u0 - (nu/2) v0``
    and ``(C, S)`` equal to ``(cosh r tau, sinh(r tau)/r)``,
    ``(cos r tau, sin(r tau)/r)`` or ``(1, tau)`` according to the sign of the
    discriminant quarter ``delta = (nu/2)^2 - k c``; all three branches agree
    to machine precision near the borderline.

    ``A1, A2`` are the coefficients of the specific-volume deviation in the
    fundamental-mode expansion of the branch (``A1 e^{l1 tau} + A2 e^{l2 tau}``
    on the monotone branch, ``e^{mu tau}(A1 cos + A2 sin)`` on the oscillatory
    one, ``e^{mu tau}(A1 + A2 tau)`` on the borderline).
    """

    c: float
    nu: float
    k: float
    w0: float
    s0: float
    t0: float
    branch: str
    A1: float
    A2: float

    def _cs(self, tau):
        mu = -0.5 * self.nu
        delta = mu * mu - self.k * self.c
        if self.branch == "real":
            r = math.sqrt(delta)
            arg = r * tau
            return np.cosh(arg), np.where(arg == 0.0, tau, np.sinh(arg) / r)
        if self.branch == "complex":
            r = math.sqrt(-delta)
            arg = r * tau
            return np.cos(arg), np.where(arg == 0.0, tau, np.sin(arg) / r)
        ones = np.ones_like(np.asarray(tau, dtype=float))
        return ones, tau

    def __call__(self, t):
        """Evaluate ``(w, s)`` at scalar or array time ``t``."""
        t_arr = np.asarray(t, dtype=float)
        tau = t_arr - self.t0
        c, nu, k = self.c, self.nu, self.k
        mu = -0.5 * nu
        u0 = self.w0 - nu / c
        v0 = self.s0 - 1.0 / c
        du = (0.5 * nu) * u0 - k * c * v0
        dv = u0 + mu * v0
        cc, ss = self._cs(tau)
        e = np.exp(mu * tau)
        w = nu / c + e * (cc * u0 + ss * du)
        s = 1.0 / c + e * (cc * v0 + ss * dv)
        if np.isscalar(t) or t_arr.ndim == 0:
            return float(w), float(s)
        return w, s

    def derivative(self, t):
        """Evaluate ``(w', s')`` at ``t`` from the governing equations."""
        w, s = self(t)
        return self.k * (1.0 - self.c * np.asarray(s)), np.asarray(w) - self.nu * np.asarray(s)

    def s_at(self, t):
        return self(t)[1]

    def w_at(self, t):
        return self(t)[0]


def local_trajectory(c: float, nu: float, k: float,
                     w0: float, s0: float, t0: float = 0.0) -> LocalTrajectory:
    """Build the exact frozen-coefficient trajectory through ``(w0, s0)`` at ``t0``."""
    if not (c > 0 and k > 0):
        raise ValueError("c and k must be positive")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    for name, val in (("w0", w0), ("s0", s0), ("t0", t0)):
        if not math.isfinite(val):
            raise ValueError(f"{name} must be finite")
    spec = spectral(c, nu, k)
    u0 = w0 - nu / c
    v0 = s0 - 1.0 / c
    mu = -0.5 * nu
    if spec.branch == "real":
        l1, l2 = spec.lambda1, spec.lambda2
        a1 = (u0 + l1 * v0) / (l1 - l2)
        a2 = -(u0 + l2 * v0) / (l1 - l2)
    elif spec.branch == "complex":
        a1 = v0
        a2 = (u0 + mu * v0) / spec.theta
    else:
        a1 = v0
        a2 = u0 + mu * v0
    return LocalTrajectory(float(c), float(nu), float(k), float(w0), float(s0),
                           float(t0), spec.branch, float(a1), float(a2))


# ----------------------------------------------------------------------------
# corner chains
# ----------------------------------------------------------------------------

_SUB_FIELDS = ("t1", "w1", "s1", "z1", "eta1", "t2", "w2", "s2", "z2",
               "t3", "w3", "s3", "z3", "eta3", "t4", "w4", "s4", "z4",
               "t_star", "w_star")
_SUP_FIELDS = ("tt1", "wt1", "st1", "tt2", "wt2", "st2",
               "tt3", "wt3", "st3", "tt_star", "wt_star")


@dataclass(frozen=True)
class CornerSet:
    """Junction corners of the threshold-region boundary chains.

    Fields that are not defined for the parameter set's scenario, or that are
    gated off by a failed admissibility condition, are ``None``;
    :meth:`get` raises an explanatory ``ValueError`` for them.
    """

    t1: float | None = None
    w1: float | None = None
    s1: float | None = None
    z1: float | None = None
    eta1: float | None = None
    t2: float | None = None
    w2: float | None = None
    s2: float | None = None
    z2: float | None = None
    t3: float | None = None
    w3: float | None = None
    s3: float | None = None
    z3: float | None = None
    eta3: float | None = None
    t4: float | None = None
    w4: float | None = None
    s4: float | None = None
    z4: float | None = None
    t_star: float | None = None
    w_star: float | None = None
    tt1: float | None = None
    wt1: float | None = None
    st1: float | None = None
    tt2: float | None = None
    wt2: float | None = None
    st2: float | None = None
    tt3: float | None = None
    wt3: float | None = None
    st3: float | None = None
    tt_star: float | None = None
    wt_star: float | None = None
    unavailable: tuple[tuple[str, str], ...] = ()
    notes: tuple[str, ...] = ()

    def get(self, name: str) -> float:
        """Return a corner value, raising an explanatory error if undefined."""
        if name not in {f.name for f in fields(self)}:
            raise KeyError(f"unknown corner field {name!r}")
        value = getattr(self, name)
        if value is None:
            for field_name, reason in self.unavailable:
                if field_name == name:
                    raise ValueError(reason)
            raise ValueError(f"{name} not computed")
        return value

    def to_json(self, adm: "Admissibility | None" = None) -> dict:
        out: dict = {}
        for f in fields(self):
            if f.name in ("unavailable", "notes"):
                continue
            val = getattr(self, f.name)
            if val is not None:
                out[f.name] = val
        if adm is not None:
            out["ac1"] = adm.ac1
            out["ac2"] = adm.ac2
            out["ac3"] = adm.ac3
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def merged_with(self, other: "CornerSet") -> "CornerSet":
        """Combine two half-filled corner sets (one per chain) into one."""
        data: dict = {}
        for f in fields(self):
            if f.name in ("unavailable", "notes"):
                continue
            a, b = getattr(self, f.name), getattr(other, f.name)
            data[f.name] = a if a is not None else b
        data["unavailable"] = tuple(dict(list(self.unavailable) + list(other.unavailable)).items())
        data["notes"] = self.notes + other.notes
        return CornerSet(**data)


def _theta(k: float, c: float, nu: float) -> float:
    """Oscillation rate ``sqrt(4 k c - nu^2) / 2`` of an underdamped frozen system."""
    disc = 4.0 * k * c - nu * nu
    if disc <= 0.0:
        raise InternalInvariantError(
            f"oscillatory constant requested for non-oscillatory coefficients "
            f"(k={k}, c={c}, nu={nu})")
    return 0.5 * math.sqrt(disc)


def _step1(k: float, c: float, nu: float) -> tuple[float, float, str, float]:
    """Backward exit of the frozen-(c, nu) trajectory through the origin at ``s = 1/c``.

    Returns ``(t_exit, w_exit, branch, constant)`` where ``constant`` is the
    arc-expansion factor of the used branch (``z``-type when oscillatory,
    ``eta``-type when monotone, ``e`` at the borderline).
    """
    spec = spectral(c, nu, k)
    if spec.branch == "real":
        l1, l2 = spec.lambda1, spec.lambda2
        t_exit = math.log(l1 / l2) / (l1 - l2)
        eta = (l2 / l1) ** (nu / (2.0 * (l1 - l2))) * math.sqrt(k / c)
        return t_exit, nu / c - eta, "real", eta
    if spec.branch == "borderline":
        eta = math.e * math.sqrt(k / c)
        return -2.0 / nu, nu / c - eta, "borderline", eta
    th = spec.theta
    z = math.exp(nu * math.atan2(2.0 * th, nu) / (2.0 * th))
    return -math.atan2(2.0 * th, nu) / th, nu / c - math.sqrt(k / c) * z, "complex", z


def _check_exit(traj: LocalTrajectory, t: float, w_expect: float, s_expect: float,
                what: str) -> None:
    w, s = traj(t)
    scale = 1.0 + abs(w_expect) + abs(s_expect)
    if abs(w - w_expect) > _CONSISTENCY_TOL * scale or abs(s - s_expect) > _CONSISTENCY_TOL * scale:
        raise InternalInvariantError(
            f"{what}: closed-form corner disagrees with its trajectory "
            f"({w:.17g},{s:.17g}) vs ({w_expect:.17g},{s_expect:.17g})")


def _march_to_negative_s(traj: LocalTrajectory, t_hi: float, step: float) -> float:
    """Backward march from ``t_hi`` until the trajectory's ``s`` turns negative."""
    t = t_hi
    stride = step
    for _ in range(10000):
        t -= stride
        w, s = traj(t)
        if not (math.isfinite(w) and math.isfinite(s)) or abs(w) > 1e14:
            raise InternalInvariantError(
                "backward march diverged before the specific volume reached zero")
        if s < 0.0:
            return t
        stride *= 1.5
    raise InternalInvariantError("backward march failed to bracket s = 0")


def _s_zero_time(traj: LocalTrajectory, t_lo: float, t_hi: float) -> float:
    """Root of ``s(t) = 0`` inside ``(t_lo, t_hi)`` for a bracketing trajectory."""
    return brentq(lambda t: traj(t)[1], t_lo, t_hi, xtol=1e-14, rtol=8.9e-16)


def subcritical_corners(p: Params) -> CornerSet:
    """Corners of the subcritical boundary chain.

    Step 1 always exists.  In scenario I the chain stops there (the second arc
    is unbounded).  In scenario II, steps 3 and 4 are computed only when the
    admissibility conditions reachable at each stage hold; gated-off fields
    are ``None`` with the failure recorded in ``unavailable``.
    """
    regime = classify_regime(p)
    k, cm, cp, num, nup = p.k, p.c_minus, p.c_plus, p.nu_minus, p.nu_plus
    data: dict = {}
    unavailable: list[tuple[str, str]] = []
    notes: list[str] = []

    t1, w1, branch1, const1 = _step1(k, cp, nup)
    data.update(t1=t1, w1=w1, s1=1.0 / cp)
    if branch1 == "complex":
        data["z1"] = const1
    else:
        data["eta1"] = const1
    traj1 = local_trajectory(cp, nup, k, 0.0, 0.0, 0.0)
    _check_exit(traj1, t1, w1, 1.0 / cp, "subcritical step 1")
    if not w1 < nup / cp:
        raise InternalInvariantError("step-1 corner lies on the wrong side of its exit line")

    if regime.scenario_sub == "I":
        for name in ("t2", "w2", "s2", "z2", "t3", "w3", "s3", "z3", "eta3",
                     "t4", "w4", "s4", "z4", "t_star", "w_star"):
            unavailable.append((name, f"scenario I: {name} undefined"))
        notes.append("scenario I: boundary continues unbounded along the second arc")
        return CornerSet(**data, unavailable=tuple(unavailable), notes=tuple(notes))

    # step 2: oscillatory (c_plus, nu_minus) arc from (w1, 1/c_plus) back to
    # its tangency with the line w = nu_minus * s
    th2 = _theta(k, cp, num)
    half_turn = math.pi - math.atan2(2.0 * th2, num)
    z2 = math.exp(num * half_turn / (2.0 * th2))
    gap1 = num / cp - w1
    t2 = t1 - half_turn / th2
    w2 = num / cp + (num / math.sqrt(k * cp)) * gap1 * z2
    s2 = 1.0 / cp + (1.0 / math.sqrt(k * cp)) * gap1 * z2
    data.update(t2=t2, w2=w2, s2=s2, z2=z2)
    if abs(w2 - num * s2) > _CONSISTENCY_TOL * (1.0 + abs(w2)):
        raise InternalInvariantError("step-2 corner is not on its exit line")
    traj2 = local_trajectory(cp, num, k, w1, 1.0 / cp, t1)
    _check_exit(traj2, t2, w2, s2, "subcritical step 2")

    # step-3 branch constant of the frozen (c_minus, nu_minus) system; needed
    # for admissibility even when the step itself is gated off
    spec3 = spectral(cm, num, k)
    if spec3.branch == "real":
        l1, l2 = spec3.lambda1, spec3.lambda2
        eta3 = -l1 * (l1 / l2) ** (l2 / (l1 - l2))
        data["eta3"] = eta3
        h3 = eta3
        dt3 = math.log(l1 / l2) / (l1 - l2)
    elif spec3.branch == "borderline":
        eta3 = 0.5 * num * math.e
        data["eta3"] = eta3
        h3 = eta3
        dt3 = -2.0 / num
    else:
        th3 = spec3.theta
        z3 = math.exp(num * math.atan2(2.0 * th3, num) / (2.0 * th3))
        data["z3"] = z3
        h3 = math.sqrt(k * cm) * z3
        dt3 = -math.atan2(2.0 * th3, num) / th3

    ac1 = s2 > 1.0 / cm
    ac2 = (nup - num) < cm * (s2 - 1.0 / cm) * h3
    if not (ac1 and ac2):
        which = "AC1" if not ac1 else "AC2"
        reason = f"inadmissible parameters: {which} fails"
        for name in ("t3", "w3", "s3", "t4", "w4", "s4", "z4", "t_star", "w_star"):
            unavailable.append((name, reason))
        notes.append(reason)
        return CornerSet(**data, unavailable=tuple(unavailable), notes=tuple(notes))

    # step 3: frozen (c_minus, nu_minus) arc from (w2, s2) back to s = 1/c_minus
    t3 = t2 + dt3
    w3 = num / cm + (s2 - 1.0 / cm) * h3
    data.update(t3=t3, w3=w3, s3=1.0 / cm)
    traj3 = local_trajectory(cm, num, k, w2, s2, t2)
    _check_exit(traj3, t3, w3, 1.0 / cm, "subcritical step 3")
    if not w3 > nup / cm:
        raise InternalInvariantError(
            "step-3 corner contradicts the admissibility condition that gated it")

    # step 4: frozen (c_minus, nu_plus) arc from (w3, 1/c_minus) backward
    traj4 = local_trajectory(cm, nup, k, w3, 1.0 / cm, t3)
    if regime.label == "weak":
        th4 = _theta(k, cm, nup)
        half_turn4 = math.pi - math.atan2(2.0 * th4, nup)
        z4 = math.exp(nup * half_turn4 / (2.0 * th4))
        gap3 = w3 - nup / cm
        t4 = t3 - half_turn4 / th4
        w4 = nup / cm - (nup / math.sqrt(k * cm)) * gap3 * z4
        s4 = 1.0 / cm - (1.0 / math.sqrt(k * cm)) * gap3 * z4
        data.update(t4=t4, w4=w4, s4=s4, z4=z4)
        _check_exit(traj4, t4, w4, s4, "subcritical step 4")
        if s4 <= 0.0:
            t_star = t4 if s4 == 0.0 else _s_zero_time(traj4, t4, t3)
            data.update(t_star=t_star, w_star=traj4(t_star)[0])
        else:
            reason = "inadmissible parameters: AC3 fails"
            unavailable.extend([("t_star", reason), ("w_star", reason)])
            notes.append(reason)
    else:
        # median alignment: the fourth arc is monotone and reaches s = 0
        # with positive w; there is no tangency corner
        for name in ("t4", "w4", "s4", "z4"):
            unavailable.append((name, "median alignment: the fourth arc has no tangency corner"))
        t_lo = _march_to_negative_s(traj4, t3, 1.0 / (nup + math.sqrt(k * cm)))
        t_star = _s_zero_time(traj4, t_lo, t3)
        data.update(t_star=t_star, w_star=traj4(t_star)[0])
    if data.get("w_star") is not None and data["w_star"] < 0.0:
        raise InternalInvariantError("boundary intercept at s = 0 has negative w")
    return CornerSet(**data, unavailable=tuple(unavailable), notes=tuple(notes))


def supercritical_corners(p: Params) -> CornerSet:
    """Corners of the supercritical boundary chain (tilde fields).

    Step 1 always exists (frozen ``(c_minus, nu_minus)`` system).  In scenario
    III the chain stops there; in scenario IV the remaining corners always
    exist, and the structural inequalities ``st2 > 1/c_plus``,
    ``wt3 > nu_minus/c_plus`` and ``wt_star > nu_minus/(2 c_plus)`` are
    asserted rather than conditioned on.
    """
    regime = classify_regime(p)
    k, cm, cp, num, nup = p.k, p.c_minus, p.c_plus, p.nu_minus, p.nu_plus
    data: dict = {}
    unavailable: list[tuple[str, str]] = []
    notes: list[str] = []

    tt1, wt1, _, _ = _step1(k, cm, num)
    data.update(tt1=tt1, wt1=wt1, st1=1.0 / cm)
    traj1 = local_trajectory(cm, num, k, 0.0, 0.0, 0.0)
    _check_exit(traj1, tt1, wt1, 1.0 / cm, "supercritical step 1")

    if regime.scenario_sup == "III":
        for name in ("tt2", "wt2", "st2", "tt3", "wt3", "st3", "tt_star", "wt_star"):
            unavailable.append((name, f"scenario III: {name} undefined"))
        notes.append("scenario III: boundary continues unbounded along the second arc")
        return CornerSet(**data, unavailable=tuple(unavailable), notes=tuple(notes))

    # step 2: oscillatory (c_minus, nu_plus) arc back to tangency with w = nu_plus s
    th4 = _theta(k, cm, nup)
    half_turn4 = math.pi - math.atan2(2.0 * th4, nup)
    z4 = math.exp(nup * half_turn4 / (2.0 * th4))
    gap1 = nup / cm - wt1
    tt2 = tt1 - half_turn4 / th4
    wt2 = nup / cm + (nup / math.sqrt(k * cm)) * gap1 * z4
    st2 = 1.0 / cm + (1.0 / math.sqrt(k * cm)) * gap1 * z4
    data.update(tt2=tt2, wt2=wt2, st2=st2)
    traj2 = local_trajectory(cm, nup, k, wt1, 1.0 / cm, tt1)
    _check_exit(traj2, tt2, wt2, st2, "supercritical step 2")
    if not st2 > 1.0 / cp:
        raise InternalInvariantError("supercritical chain: st2 <= 1/c_plus")

    # step 3: oscillatory (c_plus, nu_plus) arc back to s = 1/c_plus
    th1 = _theta(k, cp, nup)
    z1 = math.exp(nup * math.atan2(2.0 * th1, nup) / (2.0 * th1))
    tt3 = tt2 - math.atan2(2.0 * th1, nup) / th1
    wt3 = nup / cp + math.sqrt(k * cp) * (st2 - 1.0 / cp) * z1
    data.update(tt3=tt3, wt3=wt3, st3=1.0 / cp)
    traj3 = local_trajectory(cp, nup, k, wt2, st2, tt2)
    _check_exit(traj3, tt3, wt3, 1.0 / cp, "supercritical step 3")
    if not wt3 > num / cp:
        raise InternalInvariantError("supercritical chain: wt3 <= nu_minus/c_plus")

    # step 4: oscillatory (c_plus, nu_minus) arc back to s = 0
    th2 = _theta(k, cp, num)
    traj4 = local_trajectory(cp, num, k, wt3, 1.0 / cp, tt3)
    t_lo = tt3 - 0.5 * math.pi / th2
    expand = 0
    while traj4(t_lo)[1] >= 0.0:
        t_lo -= 0.5 * math.pi / th2
        expand += 1
        if expand > 4:
            raise InternalInvariantError(
                "supercritical chain: fourth arc fails to reach s = 0 within its quarter turn")
    tt_star = _s_zero_time(traj4, t_lo, tt3)
    wt_star = traj4(tt_star)[0]
    data.update(tt_star=tt_star, wt_star=wt_star)
    if not wt_star > 0.5 * num / cp:
        raise InternalInvariantError("supercritical chain: wt_star <= nu_minus/(2 c_plus)")
    return CornerSet(**data, unavailable=tuple(unavailable), notes=tuple(notes))


def corner_set(p: Params) -> CornerSet:
    """Both corner chains merged into one :class:`CornerSet`."""
    return subcritical_corners(p).merged_with(supercritical_corners(p))


# ----------------------------------------------------------------------------
# admissibility
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Admissibility:
    """Admissibility report for the subcritical chain.

    ``ac1``: the second corner clears the third arc's exit level
    (``s2 > 1/c_minus``); ``ac2``: the third corner clears the fourth arc's
    entry line (equivalently the explicit inequality on ``nu_plus - nu_minus``);
    ``ac3``: the fourth arc reaches ``s = 0`` before its tangency corner
    (``s4 <= 0``).  ``required`` lists the conditions the current scenario
    needs for the region to close; ``satisfied`` is their conjunction.
    ``ac3`` in weak alignment is evaluated from the fully explicit form in the
    four ``z`` constants, so it is reportable even when earlier conditions
    fail; each ``*_lhs``/``*_rhs`` pair reports the inequality actually tested.
    """

    ac1: bool
    ac2: bool
    ac3: bool
    required: tuple[str, ...]
    satisfied: bool
    ac1_lhs: float | None = None
    ac1_rhs: float | None = None
    ac2_lhs: float | None = None
    ac2_rhs: float | None = None
    ac3_lhs: float | None = None
    ac3_rhs: float | None = None
    ac3_explicit_lhs: float | None = None
    ac3_explicit_rhs: float | None = None
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        out = {
            "ac1": self.ac1, "ac2": self.ac2, "ac3": self.ac3,
            "required": list(self.required), "satisfied": self.satisfied,
        }
        for name in ("ac1_lhs", "ac1_rhs", "ac2_lhs", "ac2_rhs",
                     "ac3_lhs", "ac3_rhs", "ac3_explicit_lhs", "ac3_explicit_rhs"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def first_violated(self) -> tuple[str, float, float] | None:
        """Name and sides of the first required condition that fails, if any."""
        for name in self.required:
            if not getattr(self, name):
                lhs = getattr(self, f"{name}_lhs")
                rhs = getattr(self, f"{name}_rhs")
                if lhs is None:
                    lhs, rhs = getattr(self, "ac3_explicit_lhs"), getattr(self, "ac3_explicit_rhs")
                return name, lhs, rhs
        return None


def _explicit_ac3(p: Params, z1: float, z2: float, z3: float, z4: float) -> tuple[float, float]:
    """Both sides of the fully explicit weak-alignment closing inequality."""
    k, cm, cp, num, nup = p.k, p.c_minus, p.c_plus, p.nu_minus, p.nu_plus
    lhs = ((nup - num) * (1.0 / math.sqrt(k * cm))
           * (1.0 / cm + math.sqrt(cm / cp ** 3) * z2 * z3) * z4
           + (1.0 / cm - 1.0 / cp) * (z3 * z4 + 1.0))
    rhs = (1.0 / cp) * (z1 * z2 * z3 * z4 - 1.0)
    return lhs, rhs


def admissibility(p: Params, corners: CornerSet | None = None) -> Admissibility:
    """Evaluate the admissibility conditions for the subcritical chain of ``p``."""
    regime = classify_regime(p)
    if corners is None:
        corners = subcritical_corners(p)
    k, cm, cp, num, nup = p.k, p.c_minus, p.c_plus, p.nu_minus, p.nu_plus

    if regime.scenario_sub == "I":
        return Admissibility(
            ac1=True, ac2=True, ac3=True, required=(), satisfied=True,
            notes=("strong alignment: no admissibility conditions required",))

    s2 = corners.get("s2")
    h3 = corners.eta3 if corners.eta3 is not None else math.sqrt(k * cm) * corners.get("z3")
    ac1_lhs, ac1_rhs = s2, 1.0 / cm
    ac1 = ac1_lhs > ac1_rhs
    ac2_lhs, ac2_rhs = nup - num, cm * (s2 - 1.0 / cm) * h3
    ac2 = ac2_lhs < ac2_rhs
    notes: list[str] = []

    if regime.label == "median":
        ac3 = True
        ac3_lhs = ac3_rhs = None
        exp_lhs = exp_rhs = None
        required = ("ac1", "ac2")
        notes.append("median alignment: the fourth arc reaches s = 0 automatically; "
                     "ac3 reported as satisfied")
    else:
        z4 = corners.z4 if corners.z4 is not None else _weak_z4(p)
        exp_lhs, exp_rhs = _explicit_ac3(p, corners.get("z1"), corners.get("z2"),
                                         corners.get("z3"), z4)
        ac3 = exp_lhs <= exp_rhs
        required = ("ac1", "ac2", "ac3")
        if corners.w3 is not None:
            ac3_lhs = 1.0 / math.sqrt(cm)
            ac3_rhs = (1.0 / math.sqrt(k)) * (corners.w3 - nup / cm) * z4
            geo = ac3_lhs <= ac3_rhs
            if geo != ac3:
                resid = abs((ac3_rhs - ac3_lhs) * cp)
                if resid > 1e-9 * (1.0 + abs(exp_rhs)):
                    raise InternalInvariantError(
                        "explicit and geometric closing conditions disagree")
        else:
            ac3_lhs = ac3_rhs = None

    report = Admissibility(
        ac1=ac1, ac2=ac2, ac3=ac3, required=required,
        satisfied=all({"ac1": ac1, "ac2": ac2, "ac3": ac3}[name] for name in required),
        ac1_lhs=ac1_lhs, ac1_rhs=ac1_rhs, ac2_lhs=ac2_lhs, ac2_rhs=ac2_rhs,
        ac3_lhs=ac3_lhs, ac3_rhs=ac3_rhs,
        ac3_explicit_lhs=exp_lhs, ac3_explicit_rhs=exp_rhs,
        notes=tuple(notes))

    # chain property: ac3 implies ac2 implies ac1 (allowing knife-edge float
    # noise; the ac3 link only binds in weak alignment where ac3 is a real
    # inequality rather than the median convention)
    def _margin(lhs, rhs):
        return abs(rhs - lhs) / (1.0 + abs(rhs))
    if (regime.label == "weak" and report.ac3 and not report.ac2
            and _margin(ac2_lhs, ac2_rhs) > 1e-9):
        raise InternalInvariantError("admissibility chain broken: ac3 holds but ac2 fails")
    if report.ac2 and not report.ac1 and _margin(ac1_lhs, ac1_rhs) > 1e-9:
        raise InternalInvariantError("admissibility chain broken: ac2 holds but ac1 fails")
    return report


def _weak_z4(p: Params) -> float:
    th4 = _theta(p.k, p.c_minus, p.nu_plus)
    return math.exp(p.nu_plus * (math.pi - math.atan2(2.0 * th4, p.nu_plus)) / (2.0 * th4))


# ----------------------------------------------------------------------------
# asymptotic slope thresholds
# ----------------------------------------------------------------------------

def g_flat(p: Params) -> float:
    """Asymptotic slope threshold of the unbounded subcritical boundary.

    Defined in scenario I only: the backward asymptote of the second arc has
    slope ratio ``w/s -> g_flat``, the smaller root of
    ``x^2 - nu_minus x + k c_plus``.
    """
    regime = classify_regime(p)
    if regime.scenario_sub != "I":
        raise ValueError("g_flat undefined in this scenario (requires scenario I)")
    return -spectral(p.c_plus, p.nu_minus, p.k).lambda1


def g_sharp(p: Params) -> float:
    """Asymptotic slope threshold of the unbounded supercritical boundary.

    Defined in scenario III only: the smaller root of
    ``x^2 - nu_plus x + k c_minus``.
    """
    regime = classify_regime(p)
    if regime.scenario_sup != "III":
        raise ValueError("g_sharp undefined in this scenario (requires scenario III)")
    return -spectral(p.c_minus, p.nu_plus, p.k).lambda1
