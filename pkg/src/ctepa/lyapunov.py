"""Lyapunov value tables along frozen-coefficient boundary arcs.

Each boundary arc of a threshold region lies on the zero level set of a
Lyapunov function of the frozen ``(c, nu)`` system,

    value(s) = (w(s) - nu s)^2 / 2          along the arc,

where ``w(s)`` parametrizes the arc.  Rather than integrating the
square-root-singular ODE satisfied by ``value``, a table is built by running
the exact :class:`~ctepa.phaseplane.LocalTrajectory` through an anchor point
and recording ``(s, value)`` along it; the specific volume is strictly
monotone on each arc, so the pairs define a function of ``s``.

Families: a ``"plus"`` table describes an arc below its line ``w = nu s``
(lower boundary pieces, ``w = nu s - sqrt(2 value)``); a ``"minus"`` table an
arc above it (upper pieces, ``w = nu s + sqrt(2 value)``).  The comparison
functional is ``L = w - nu s + sqrt(2 value(s))`` for plus tables and
``L = w - nu s - sqrt(2 value(s))`` for minus tables; the generating arc sits
on ``L = 0``.

Interpolation uses a shape-preserving monotone cubic (PCHIP) on the recorded
nodes, with node clustering near ends where the value vanishes;
:meth:`LyapunovTable.value_exact` instead inverts the closed-form trajectory
with a bracketing root find and is used to spot-check the interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import InadmissibleError, InternalInvariantError
from .params import Params, classify_regime
from .phaseplane import (CornerSet, LocalTrajectory, admissibility, corner_set,
                         local_trajectory)

__all__ = [
    "LyapunovTable",
    "build_table",
    "canonical_tables",
]

_MAX_MARCH_STEPS = 200_000
_CLUSTER_LEVELS = 26


@dataclass(frozen=True, eq=False)
class LyapunovTable:
    """Tabulated Lyapunov value ``value(s)`` along one boundary arc.

    ``s_lo <= s <= s_hi`` is the covered specific-volume range; ``t_lo`` and
    ``t_hi`` the time endpoints of the generating arc (``t_hi`` is the anchor
    side when the march runs backward).  ``end_kind`` records how the march
    terminated: ``"s_stop"`` (reached the requested level) or ``"tangency"``
    (the arc touched its ``w = nu s`` line, where the value vanishes).
    """

    kind: str
    c: float
    nu: float
    k: float
    tag: str
    s_lo: float
    s_hi: float
    t_lo: float
    t_hi: float
    anchor_s: float
    anchor_value: float
    end_kind: str
    traj: LocalTrajectory = field(repr=False)
    s_nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    interp: PchipInterpolator = field(repr=False)

    # -- evaluation ---------------------------------------------------------

    def _check_domain(self, s) -> np.ndarray:
        s_arr = np.asarray(s, dtype=float)
        # match the arc-march termination budget: the terminal node is
        # snapped onto the requested stop level, which may sit up to
        # root-solve noise away from the generating trajectory's own
        # endpoint, so exact-trajectory samples can poke that far outside
        slack = 1e-9 * (1.0 + abs(self.s_hi) + (self.s_hi - self.s_lo))
        if np.any(s_arr < self.s_lo - slack) or np.any(s_arr > self.s_hi + slack):
            raise ValueError(
                f"s outside table domain [{self.s_lo:.6g}, {self.s_hi:.6g}] ({self.tag})")
        return np.clip(s_arr, self.s_lo, self.s_hi)

    def value(self, s):
        """Interpolated Lyapunov value at ``s`` (scalar or array)."""
        s_arr = self._check_domain(s)
        out = np.maximum(self.interp(s_arr), 0.0)
        if np.isscalar(s) or np.asarray(s).ndim == 0:
            return float(out)
        return out

    def value_exact(self, s: float) -> float:
        """Exact value at scalar ``s`` by inverting the generating trajectory."""
        s_arr = self._check_domain(s)
        s_val = float(s_arr)
        f = lambda t: self.traj(t)[1] - s_val
        f_lo, f_hi = f(self.t_lo), f(self.t_hi)
        if f_lo == 0.0:
            t_at = self.t_lo
        elif f_hi == 0.0:
            t_at = self.t_hi
        else:
            t_at = brentq(f, self.t_lo, self.t_hi, xtol=1e-15, rtol=8.9e-16)
        w, s_chk = self.traj(t_at)
        return 0.5 * (w - self.nu * s_chk) ** 2

    def w_boundary(self, s):
        """Boundary curve ``w = nu s -+ sqrt(2 value)`` described by the table."""
        v = self.value(s)
        root = np.sqrt(2.0 * np.maximum(np.asarray(v, dtype=float), 0.0))
        s_arr = np.asarray(s, dtype=float)
        out = self.nu * s_arr - root if self.kind == "plus" else self.nu * s_arr + root
        if np.isscalar(s) or s_arr.ndim == 0:
            return float(out)
        return out

    def eval_L(self, w, s):
        """Comparison functional ``L(w, s)``; the generating arc sits on zero."""
        v = np.maximum(np.asarray(self.value(s), dtype=float), 0.0)
        root = np.sqrt(2.0 * v)
        w_arr = np.asarray(w, dtype=float)
        s_arr = np.asarray(s, dtype=float)
        out = w_arr - self.nu * s_arr + (root if self.kind == "plus" else -root)
        if np.isscalar(w) and np.isscalar(s):
            return float(out)
        return out

    # -- diagnostics --------------------------------------------------------

    def zero_level_drift(self, n: int = 512) -> float:
        """Max |L| along the generating arc; measures table interpolation error."""
        ts = np.linspace(self.t_lo, self.t_hi, n)
        w, s = self.traj(ts)
        return float(np.max(np.abs(self.eval_L(w, s))))

    def to_json(self) -> dict:
        return {
            "kind": self.kind, "tag": self.tag, "c": self.c, "nu": self.nu,
            "k": self.k, "s_lo": self.s_lo, "s_hi": self.s_hi,
            "anchor_s": self.anchor_s, "anchor_value": self.anchor_value,
            "end_kind": self.end_kind, "n_nodes": int(self.s_nodes.size),
        }


def _march(traj: LocalTrajectory, nu: float, time_dir: float, s_stop: float,
           s_dir: float, h: float) -> tuple[float, str]:
    """Advance along the arc until ``s`` reaches ``s_stop`` or the arc touches
    its ``w = nu s`` line; return the end time and end kind."""
    f_line = lambda t: traj(t)[0] - nu * traj(t)[1]
    f_stop = lambda t: traj(t)[1] - s_stop
    t_prev = 0.0
    w_prev, s_prev = traj(0.0)
    line_prev = w_prev - nu * s_prev
    # an arc anchored at its own tangency starts with a roundoff-scale line
    # gap of arbitrary sign; snap it to zero so the sign-change test cannot
    # fire a spurious zero-length tangency at the anchor itself
    if abs(line_prev) <= 1e-13 * (1.0 + abs(w_prev) + abs(nu) * abs(s_prev)):
        line_prev = 0.0
    stop_prev = f_stop(0.0)
    for _ in range(_MAX_MARCH_STEPS):
        t_next = t_prev + time_dir * h
        w_next, s_next = traj(t_next)
        line_next = w_next - nu * s_next
        stop_next = s_next - s_stop
        if line_prev * line_next < 0.0:
            return brentq(f_line, t_prev, t_next, xtol=1e-15, rtol=8.9e-16), "tangency"
        if stop_next == 0.0:
            return t_next, "s_stop"
        if stop_prev * stop_next < 0.0:
            return brentq(f_stop, t_prev, t_next, xtol=1e-15, rtol=8.9e-16), "s_stop"
        if (s_next - s_prev) * s_dir < 0.0:
            raise InternalInvariantError(
                "arc march: specific volume reversed before reaching a stop condition")
        t_prev, line_prev, stop_prev, s_prev = t_next, line_next, stop_next, s_next
    raise InternalInvariantError("arc march exceeded its step budget")


def build_table(kind: str, c: float, nu: float, k: float,
                anchor: tuple[float, float], direction: str, s_stop: float,
                n: int = 3200, tag: str = "") -> LyapunovTable:
    """Build a Lyapunov value table along one frozen-coefficient arc.

    Parameters
    ----------
    kind : {"plus", "minus"}
        Family of the arc: below (``plus``) or above (``minus``) its line
        ``w = nu s``.
    anchor : (s_a, value_a)
        Known point of the value function; the generating trajectory passes
        through ``(nu s_a -+ sqrt(2 value_a), s_a)``.
    direction : {"up", "down"}
        Which way ``s`` runs from the anchor toward ``s_stop``.
    s_stop : float
        Target specific-volume level; the march also ends early at a tangency
        with the ``w = nu s`` line (where the value vanishes).
    n : int
        Approximate number of interpolation nodes.
    """
    if kind not in ("plus", "minus"):
        raise ValueError("kind must be 'plus' or 'minus'")
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    s_a, v_a = float(anchor[0]), float(anchor[1])
    if v_a < 0.0:
        raise ValueError("anchor value must be nonnegative")
    if n < 16:
        raise ValueError("n must be at least 16")
    s_dir = 1.0 if direction == "up" else -1.0
    if (s_stop - s_a) * s_dir <= 0.0:
        raise ValueError("s_stop must lie on the 'direction' side of the anchor")

    sgn = -1.0 if kind == "plus" else 1.0
    w_a = nu * s_a + sgn * math.sqrt(2.0 * v_a)
    traj = local_trajectory(c, nu, k, w_a, s_a, 0.0)

    curv = k * (1.0 - c * s_a)
    if v_a > 0.0:
        s_rate = w_a - nu * s_a  # = -+ sqrt(2 v_a), nonzero
        time_dir = 1.0 if s_rate * s_dir > 0.0 else -1.0
    else:
        # tangency anchor: s leaves quadratically toward sign(k (1 - c s_a))
        # in either time direction; the family picks the time orientation
        forced = math.copysign(1.0, curv)
        if forced != s_dir:
            raise ValueError(
                "direction incompatible with a tangency anchor: s can only move "
                f"{'up' if forced > 0 else 'down'} from s = {s_a:.6g}")
        time_dir = -forced if kind == "plus" else forced

    h = 0.02 / (nu + 2.0 * math.sqrt(k * c) + 1.0)
    t_end, end_kind = _march(traj, nu, time_dir, s_stop, s_dir, h)
    s_end = traj(t_end)[1]

    # nodes: a single t-grid -- uniform in t (quadratically clustered in s
    # near tangency ends, matching the half-power behavior of the value
    # there) plus geometric tails at vanishing-value ends, then adaptively
    # subdivided in t wherever the arc crosses a span of s too quickly.
    # Keeping one monotone parametrization avoids near-duplicate s nodes,
    # whose roundoff noise would corrupt the interpolant's slopes.
    base = max(n, 32)
    span_t = abs(t_end)
    parts = [np.linspace(0.0, t_end, base)]
    if v_a == 0.0:
        parts.append(np.array([time_dir * span_t * 0.5 ** j
                               for j in range(2, _CLUSTER_LEVELS)]))
    if end_kind == "tangency":
        parts.append(np.array([t_end - time_dir * span_t * 0.5 ** j
                               for j in range(2, _CLUSTER_LEVELS)]))
    t_nodes = np.unique(np.concatenate(parts))
    span_s = abs(s_end - s_a)
    target = span_s / base
    for _ in range(5):
        s_n = np.asarray(traj(t_nodes)[1])
        gaps = np.abs(np.diff(s_n))
        wide = np.nonzero(gaps > 1.6 * target)[0]
        if wide.size == 0:
            break
        extras = [np.linspace(t_nodes[i], t_nodes[i + 1],
                              min(int(gaps[i] / target), 12) + 2)[1:-1]
                  for i in wide]
        t_nodes = np.unique(np.concatenate([t_nodes] + extras))
    keep = np.ones(t_nodes.size, dtype=bool)
    keep[1:] = np.diff(t_nodes) > 1e-12 * (span_t + 1e-300)
    t_nodes = t_nodes[keep]

    w_arr, s_arr = traj(t_nodes)
    v_arr = 0.5 * (w_arr - nu * s_arr) ** 2
    i_end = 0 if time_dir < 0 else -1
    i_anchor = -1 if time_dir < 0 else 0
    # endpoint nodes keep the trajectory's own reconstructed coordinates
    # rather than the ideal anchor/tangency point: near a tangency the value
    # is linear in s, so an s-offset delta between the node grid and the
    # probe arithmetic surfaces in the boundary functional as
    # sqrt(2 slope delta) -- even one ulp of reconstruction roundoff at
    # s ~ 25 would read back as ~1e-7
    anchor_node = (float(s_arr[i_anchor]), float(v_arr[i_anchor]))
    end_s = float(s_arr[i_end])
    end_v = float(v_arr[i_end])
    if end_kind == "s_stop":
        # the march's root solve lands within roundoff of the requested
        # level, but that roundoff scales with |w| there; snap the terminal
        # node onto the level itself so the table's domain covers the exact
        # span its callers rely on (junction checks evaluate at the level);
        # away from a tangency the value slope is finite, so the snap does
        # not suffer the square-root amplification above
        off = abs(end_s - s_stop)
        if off > 1e-9 * (1.0 + abs(s_stop) + span_s):
            raise InternalInvariantError(
                f"arc march terminated {off:.3g} away from its stop level")
        end_s = s_stop

    # assemble the s-grid around the two protected endpoints, enforcing a
    # minimum node gap: near a tangency the t-grid collapses quadratically
    # in s, and near-duplicate s nodes would hand the interpolant a
    # roundoff staircase whose slopes corrupt the last polynomial piece
    (lo_s, lo_v), (hi_s, hi_v) = sorted([anchor_node, (end_s, end_v)])
    hi_guard = hi_s - 1e-12 * (1.0 + abs(hi_s))
    samples = sorted(zip(s_arr.tolist(), v_arr.tolist()),
                     key=lambda pair: pair[0])
    keep_s = [lo_s]
    keep_v = [lo_v]
    for s_i, v_i in samples:
        if s_i <= keep_s[-1] + 1e-12 * (1.0 + abs(s_i)) or s_i >= hi_guard:
            continue
        keep_s.append(s_i)
        keep_v.append(v_i)
    keep_s.append(hi_s)
    keep_v.append(hi_v)
    s_nodes = np.asarray(keep_s)
    values = np.asarray(keep_v)

    if s_nodes.size < 8:
        raise InternalInvariantError("arc produced too few distinct s nodes")
    if not np.all(np.diff(s_nodes) > 0.0):
        raise InternalInvariantError("arc nodes are not strictly increasing in s")
    interp = PchipInterpolator(s_nodes, values, extrapolate=False)

    t_lo, t_hi = (t_end, 0.0) if time_dir < 0 else (0.0, t_end)
    return LyapunovTable(
        kind=kind, c=float(c), nu=float(nu), k=float(k), tag=tag,
        s_lo=float(s_nodes[0]), s_hi=float(s_nodes[-1]),
        t_lo=float(t_lo), t_hi=float(t_hi),
        anchor_s=s_a, anchor_value=v_a, end_kind=end_kind,
        traj=traj, s_nodes=s_nodes, values=values, interp=interp)


def _half_square(w: float, nu: float, s: float) -> float:
    return 0.5 * (w - nu * s) ** 2


def _build_refined(kind: str, c: float, nu: float, k: float,
                   anchor: tuple[float, float], direction: str, s_stop: float,
                   n: int, tag: str, drift_target: float | None) -> LyapunovTable:
    """Build a table, doubling the node count until the zero-level drift of
    the interpolant meets ``drift_target`` (or the node budget runs out)."""
    nn = n
    while True:
        tb = build_table(kind, c, nu, k, anchor, direction, s_stop, n=nn, tag=tag)
        if drift_target is None or nn >= 8 * n:
            return tb
        if tb.zero_level_drift(1024) <= drift_target:
            return tb
        nn *= 2


def canonical_tables(p: Params, side: str, s_max: float | None = None,
                     n: int = 3200, corners: CornerSet | None = None,
                     drift_target: float | None = 4e-8) -> dict[str, LyapunovTable]:
    """The boundary tables of the subcritical (``side="sub"``) or
    supercritical (``side="sup"``) threshold region.

    Subcritical tables: ``P1`` and ``P2`` along the lower boundary (``plus``
    family), plus in scenario II ``N3`` and ``N4`` along the upper boundary
    (``minus`` family).  Supercritical tables carry a ``t`` suffix with the
    coefficient extremes swapped.  In the scenarios with an unbounded second
    arc the ``P2``/``P2t`` table is capped at ``s_max``
    (default ``10 max(1/c_minus, 1)``).

    Raises
    ------
    InadmissibleError
        If ``side="sub"`` in scenario II and a required admissibility
        condition fails.
    """
    if side not in ("sub", "sup"):
        raise ValueError("side must be 'sub' or 'sup'")
    regime = classify_regime(p)
    if corners is None:
        corners = corner_set(p)
    k, cm, cp, num, nup = p.k, p.c_minus, p.c_plus, p.nu_minus, p.nu_plus
    cap = s_max if s_max is not None else 10.0 * max(1.0 / cm, 1.0)
    tables: dict[str, LyapunovTable] = {}

    if side == "sub":
        if regime.scenario_sub == "II":
            adm = admissibility(p, corners)
            if not adm.satisfied:
                name, lhs, rhs = adm.first_violated()
                raise InadmissibleError(name, lhs, rhs)
        s1 = corners.get("s1")
        w1 = corners.get("w1")
        tables["P1"] = _build_refined("plus", cp, nup, k, (0.0, 0.0), "up", s1,
                                   n=n, tag="P1", drift_target=drift_target)
        if regime.scenario_sub == "I":
            stop2 = max(cap, 2.0 * s1)
        else:
            stop2 = corners.get("s2")
        tables["P2"] = _build_refined("plus", cp, num, k,
                                   (s1, _half_square(w1, num, s1)), "up", stop2,
                                   n=n, tag="P2", drift_target=drift_target)
        if regime.scenario_sub == "II":
            s2 = corners.get("s2")
            w3 = corners.get("w3")
            tables["N3"] = _build_refined("minus", cm, num, k, (s2, 0.0), "down",
                                       1.0 / cm, n=n, tag="N3", drift_target=drift_target)
            tables["N4"] = _build_refined("minus", cm, nup, k,
                                       (1.0 / cm, _half_square(w3, nup, 1.0 / cm)),
                                       "down", 0.0, n=n, tag="N4", drift_target=drift_target)
        return tables

    st1 = corners.get("st1")
    wt1 = corners.get("wt1")
    tables["P1t"] = _build_refined("plus", cm, num, k, (0.0, 0.0), "up", st1,
                                n=n, tag="P1t", drift_target=drift_target)
    if regime.scenario_sup == "III":
        stop2 = max(cap, 2.0 * st1)
    else:
        stop2 = corners.get("st2")
    tables["P2t"] = _build_refined("plus", cm, nup, k,
                                (st1, _half_square(wt1, nup, st1)), "up", stop2,
                                n=n, tag="P2t", drift_target=drift_target)
    if regime.scenario_sup == "IV":
        st2 = corners.get("st2")
        wt3 = corners.get("wt3")
        tables["N3t"] = _build_refined("minus", cp, nup, k, (st2, 0.0), "down",
                                    1.0 / cp, n=n, tag="N3t", drift_target=drift_target)
        tables["N4t"] = _build_refined("minus", cp, num, k,
                                    (1.0 / cp, _half_square(wt3, num, 1.0 / cp)),
                                    "down", 0.0, n=n, tag="N4t", drift_target=drift_target)
    return tables
