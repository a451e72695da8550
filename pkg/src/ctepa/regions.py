"""Threshold regions in the (w, s) half plane and point classification.

A subcritical region collects the initial characteristic states that stay
regular for every admissible time-dependent coefficient pair, a supercritical
region those that blow up in finite time; the two are disjoint and the strip
between them is genuinely undecided by the comparison method.  Each region is
bounded by arcs of frozen-coefficient trajectories assembled from
:mod:`~ctepa.lyapunov` tables:

* subcritical, scenario I (strong alignment): the open set above the lower
  boundary ``W_l``; unbounded to the right.
* subcritical, scenario II: the open lens ``W_l(s) < w < W_r(s)`` over
  ``0 < s < s2``, available only when the admissibility conditions hold.
* supercritical, scenario III: the closed set below ``W_l~``.
* supercritical, scenario IV: the closed complement of the open lens
  ``W_l~(s) < w < W_r~(s)``, ``0 < s < s2~``.

Membership comparisons are exact inequalities on the tabulated boundaries; no
epsilon fudging is applied, and a point on the subcritical boundary that is
not claimed by the supercritical region classifies as ``Indeterminate``.

In the unbounded scenarios the second lower arc is tabulated out to a finite
reach.  Beyond it, classification falls back to two rigorous bounds: the arc
lies strictly below the line through the frozen-system equilibrium with the
stable-slope ``g``, and the arc is strictly increasing in ``s``, so its value
at the reach bounds it from below.  Points between the two bounds report
``Indeterminate`` rather than guessing.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleError, InternalInvariantError
from .lyapunov import LyapunovTable, canonical_tables
from .params import Params, Regime, classify_regime, validate
from .phaseplane import (Admissibility, CornerSet, admissibility, corner_set,
                         g_flat, g_sharp)

__all__ = [
    "SUBCRITICAL",
    "SUPERCRITICAL",
    "INDETERMINATE",
    "Classification",
    "Region",
    "build_subcritical",
    "build_supercritical",
    "region_pair",
    "classify_ws",
    "classify_Grho",
    "export_region",
]

SUBCRITICAL = "Subcritical"
SUPERCRITICAL = "Supercritical"
INDETERMINATE = "Indeterminate"

# Corner junctions join square-root boundary branches at their common zero
# level, where a value-table error eps surfaces as sqrt(2 eps) in w; the
# junction tolerance therefore matches the corner acceptance budget rather
# than the interior evaluation budget.
_JUNCTION_TOL = 1e-6


@dataclass(frozen=True)
class Classification:
    """Verdict for one initial state, with the comparison that decided it."""

    verdict: str
    branch: str
    detail: str = ""

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "branch": self.branch}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass(frozen=True, eq=False)
class Region:
    """One threshold region with its boundary tables.

    ``s_cap`` is the lens top (``s2`` or ``s2~``) in the bounded scenarios and
    ``None`` otherwise; ``s_reach`` is the largest ``s`` covered by the second
    lower-boundary table, which matters only when the region is unbounded.
    Regions are immutable once built.
    """

    kind: str
    p: Params
    regime: Regime
    corners: CornerSet
    adm: Admissibility | None
    tables: dict[str, LyapunovTable] = field(repr=False)
    s_cap: float | None
    s_reach: float

    # -- structure ----------------------------------------------------------

    @property
    def scenario(self) -> str:
        if self.kind == SUBCRITICAL:
            return self.regime.scenario_sub
        return self.regime.scenario_sup

    @property
    def bounded(self) -> bool:
        return self.s_cap is not None

    def _tags(self) -> tuple[str, str, str, str]:
        if self.kind == SUBCRITICAL:
            return "P1", "P2", "N3", "N4"
        return "P1t", "P2t", "N3t", "N4t"

    @property
    def lower_break(self) -> float:
        """`s` where the lower boundary switches frozen systems."""
        c = self.p.c_plus if self.kind == SUBCRITICAL else self.p.c_minus
        return 1.0 / c

    @property
    def upper_break(self) -> float:
        """`s` where the upper boundary switches frozen systems."""
        c = self.p.c_minus if self.kind == SUBCRITICAL else self.p.c_plus
        return 1.0 / c

    # -- boundary evaluation ------------------------------------------------

    def _piecewise(self, s, low: LyapunovTable, high: LyapunovTable,
                  brk: float):
        s_arr = np.asarray(s, dtype=float)
        out = np.empty_like(s_arr, dtype=float)
        m = s_arr <= brk
        if np.any(m):
            out[m] = np.asarray(low.w_boundary(s_arr[m]), dtype=float)
        if np.any(~m):
            out[~m] = np.asarray(high.w_boundary(s_arr[~m]), dtype=float)
        if np.isscalar(s) or s_arr.ndim == 0:
            return float(out)
        return out

    def w_left(self, s):
        """Lower boundary ``W_l(s)`` (``W_l~`` for a supercritical region)."""
        t1, t2, _, _ = self._tags()
        hi = self.s_cap if self.s_cap is not None else self.s_reach
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0.0):
            raise ValueError("s must be nonnegative")
        if np.any(s_arr > hi * (1.0 + 1e-12) + 1e-300):
            raise ValueError(
                f"s beyond the region's covered range (max {hi:.6g})")
        return self._piecewise(s, self.tables[t1], self.tables[t2],
                               self.lower_break)

    def w_right(self, s):
        """Upper boundary ``W_r(s)`` (``W_r~``); bounded scenarios only."""
        _, _, t3, t4 = self._tags()
        if self.s_cap is None:
            raise ValueError(
                f"the region has no upper boundary in scenario {self.scenario}")
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0.0):
            raise ValueError("s must be nonnegative")
        if np.any(s_arr > self.s_cap * (1.0 + 1e-12)):
            raise ValueError(
                f"s beyond the lens cap ({self.s_cap:.6g})")
        return self._piecewise(s, self.tables[t4], self.tables[t3],
                               self.upper_break)

    # -- membership ---------------------------------------------------------

    def _far_field(self, w: float, s: float) -> tuple[bool | None, str]:
        """Classify beyond the tabulated reach of an unbounded region."""
        p = self.p
        if self.kind == SUBCRITICAL:
            slope = g_flat(p)
            line = slope * s + (p.nu_minus - slope) / p.c_plus
            if w >= line:
                return True, "at or above the asymptotic slope line of W_l"
            if w <= float(self.w_left(self.s_reach)):
                return False, "below W_l at its covered reach (W_l increases)"
            return None, f"beyond tabulated range (s > {self.s_reach:.6g})"
        slope = g_sharp(p)
        line = slope * s + (p.nu_plus - slope) / p.c_minus
        if w <= float(self.w_left(self.s_reach)):
            return True, "below W_l~ at its covered reach (W_l~ increases)"
        if w >= line:
            return False, "at or above the asymptotic slope line of W_l~"
        return None, f"beyond tabulated range (s > {self.s_reach:.6g})"

    def classify_point(self, w: float, s: float) -> tuple[bool | None, str]:
        """Membership of one state: (verdict, deciding comparison).

        The verdict is ``True``/``False``, or ``None`` when the point lies
        beyond the tabulated reach of an unbounded region and between the
        rigorous far-field bounds.
        """
        if not (s > 0.0):
            raise ValueError("specific volume s must be positive")
        if self.kind == SUBCRITICAL:
            if self.s_cap is not None:
                if s >= self.s_cap:
                    return False, f"s >= lens cap s2 = {self.s_cap:.6g}"
                wl = float(self.w_left(s))
                if not w > wl:
                    return False, "not strictly above the lower boundary W_l"
                wr = float(self.w_right(s))
                if not w < wr:
                    return False, "not strictly below the upper boundary W_r"
                return True, "inside the lens W_l < w < W_r"
            if s <= self.s_reach:
                wl = float(self.w_left(s))
                if w > wl:
                    return True, "strictly above the lower boundary W_l"
                return False, "not strictly above the lower boundary W_l"
            return self._far_field(w, s)
        # supercritical: closed comparisons
        if self.s_cap is not None:
            if s >= self.s_cap:
                return True, f"s >= lens cap s2~ = {self.s_cap:.6g}"
            wl = float(self.w_left(s))
            if w <= wl:
                return True, "at or below the lower boundary W_l~"
            wr = float(self.w_right(s))
            if w >= wr:
                return True, "at or above the upper boundary W_r~"
            return False, "inside the open lens W_l~ < w < W_r~"
        if s <= self.s_reach:
            wl = float(self.w_left(s))
            if w <= wl:
                return True, "at or below the lower boundary W_l~"
            return False, "strictly above the lower boundary W_l~"
        return self._far_field(w, s)

    def contains(self, w: float, s: float) -> bool:
        """Strict membership; a far-field undecided point counts as outside."""
        res, _ = self.classify_point(w, s)
        return res is True

    def contains_batch(self, w, s, margin: float = 0.0) -> np.ndarray:
        """Vectorized membership.  ``margin`` shifts the ``w``-direction
        comparisons: positive demands being inside by that much, negative
        tolerates boundary overshoot (useful for invariance monitoring)."""
        w_arr = np.asarray(w, dtype=float)
        s_arr = np.asarray(s, dtype=float)
        w_arr, s_arr = np.broadcast_arrays(w_arr, s_arr)
        if np.any(s_arr <= 0.0):
            raise ValueError("specific volume s must be positive")
        out = np.zeros(s_arr.shape, dtype=bool)
        reach = self.s_cap if self.s_cap is not None else self.s_reach
        inside_reach = s_arr <= reach
        far = ~inside_reach
        if self.kind == SUBCRITICAL:
            if self.s_cap is not None:
                m = s_arr < self.s_cap
                if np.any(m):
                    wl = np.asarray(self.w_left(s_arr[m]), dtype=float)
                    wr = np.asarray(self.w_right(s_arr[m]), dtype=float)
                    out[m] = (w_arr[m] > wl + margin) & (w_arr[m] < wr - margin)
                return out
            if np.any(inside_reach):
                wl = np.asarray(self.w_left(s_arr[inside_reach]), dtype=float)
                out[inside_reach] = w_arr[inside_reach] > wl + margin
            if np.any(far):
                out[far] = [self._far_field(float(wv), float(sv))[0] is True
                            for wv, sv in zip(w_arr[far], s_arr[far])]
            return out
        if self.s_cap is not None:
            cap = s_arr >= self.s_cap
            out[cap] = True
            m = ~cap
            if np.any(m):
                wl = np.asarray(self.w_left(s_arr[m]), dtype=float)
                wr = np.asarray(self.w_right(s_arr[m]), dtype=float)
                out[m] = (w_arr[m] <= wl - margin) | (w_arr[m] >= wr + margin)
            return out
        if np.any(inside_reach):
            wl = np.asarray(self.w_left(s_arr[inside_reach]), dtype=float)
            out[inside_reach] = w_arr[inside_reach] <= wl - margin
        if np.any(far):
            out[far] = [self._far_field(float(wv), float(sv))[0] is True
                        for wv, sv in zip(w_arr[far], s_arr[far])]
        return out

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "scenario": self.scenario,
            "regime": self.regime.label,
            "s_cap": self.s_cap,
            "s_reach": self.s_reach,
            "corners": self.corners.to_json(self.adm),
            "admissibility": None if self.adm is None else self.adm.to_json(),
            "tables": {tag: tb.to_json() for tag, tb in self.tables.items()},
        }


# -- construction -----------------------------------------------------------


def _check_junctions(region: Region) -> None:
    """The boundary arcs must join continuously at the corner points."""
    t1, t2, t3, t4 = region._tags()
    tabs = region.tables
    checks: list[tuple[str, float, float]] = []
    brk = region.lower_break
    checks.append(("lower-arc junction",
                   float(tabs[t1].w_boundary(brk)),
                   float(tabs[t2].w_boundary(brk))))
    if region.s_cap is not None:
        ubrk = region.upper_break
        checks.append(("upper-arc junction",
                       float(tabs[t3].w_boundary(ubrk)),
                       float(tabs[t4].w_boundary(ubrk))))
        checks.append(("lens-top corner",
                       float(tabs[t2].w_boundary(region.s_cap)),
                       float(tabs[t3].w_boundary(region.s_cap))))
        star = ("w_star" if region.kind == SUBCRITICAL else "wt_star")
        checks.append(("axis intercept",
                       float(tabs[t4].w_boundary(0.0)),
                       region.corners.get(star)))
    for name, a, b in checks:
        scale = 1.0 + max(abs(a), abs(b))
        if not abs(a - b) <= _JUNCTION_TOL * scale:
            raise InternalInvariantError(
                f"{name} of the {region.kind.lower()} boundary is discontinuous: "
                f"{a:.12g} vs {b:.12g}")
    if region.s_cap is not None:
        ss = np.linspace(0.02 * region.s_cap, 0.98 * region.s_cap, 65)
        gap = np.asarray(region.w_right(ss)) - np.asarray(region.w_left(ss))
        if not np.all(gap > 0.0):
            raise InternalInvariantError(
                "upper boundary fails to stay above the lower boundary")


def build_subcritical(p: Params, *, s_max: float | None = None, n: int = 3200,
                      drift_target: float | None = 4e-8) -> Region:
    """Assemble the subcritical region of ``p``.

    Raises
    ------
    InadmissibleError
        In scenario II when a required admissibility condition fails.
    """
    p = validate(p)
    regime = classify_regime(p)
    corners = corner_set(p)
    adm = admissibility(p, corners)
    tables = canonical_tables(p, "sub", s_max=s_max, n=n, corners=corners,
                              drift_target=drift_target)
    s_cap = corners.get("s2") if regime.scenario_sub == "II" else None
    region = Region(kind=SUBCRITICAL, p=p, regime=regime, corners=corners,
                    adm=adm, tables=tables, s_cap=s_cap,
                    s_reach=tables["P2"].s_hi)
    _check_junctions(region)
    return region


def build_supercritical(p: Params, *, s_max: float | None = None, n: int = 3200,
                        drift_target: float | None = 4e-8) -> Region:
    """Assemble the supercritical region of ``p``; defined for every valid ``p``."""
    p = validate(p)
    regime = classify_regime(p)
    corners = corner_set(p)
    tables = canonical_tables(p, "sup", s_max=s_max, n=n, corners=corners,
                              drift_target=drift_target)
    s_cap = corners.get("st2") if regime.scenario_sup == "IV" else None
    region = Region(kind=SUPERCRITICAL, p=p, regime=regime, corners=corners,
                    adm=None, tables=tables, s_cap=s_cap,
                    s_reach=tables["P2t"].s_hi)
    _check_junctions(region)
    return region


def _check_disjoint(sub: Region, sup: Region) -> None:
    """Probe interior subcritical points; none may lie in the supercritical set."""
    if sub.s_cap is not None:
        ss = np.linspace(0.03 * sub.s_cap, 0.97 * sub.s_cap, 33)
        ws = 0.5 * (np.asarray(sub.w_left(ss)) + np.asarray(sub.w_right(ss)))
    else:
        ss = np.linspace(0.05 * sub.s_reach, sub.s_reach, 33)
        ws = sub.p.nu_plus * ss  # strictly above W_l on every piece
    for wv, sv in zip(ws, ss):
        if sup.contains(float(wv), float(sv)):
            raise InternalInvariantError(
                f"subcritical and supercritical regions overlap at "
                f"(w, s) = ({wv:.6g}, {sv:.6g})")


@functools.lru_cache(maxsize=32)
def _region_pair_cached(p: Params) -> tuple[Region | None, Region, str | None]:
    sup = build_supercritical(p)
    try:
        sub: Region | None = build_subcritical(p)
        err = None
    except InadmissibleError as exc:
        sub, err = None, str(exc)
    if sub is not None:
        _check_disjoint(sub, sup)
    return sub, sup, err


def region_pair(p: Params) -> tuple[Region | None, Region, str | None]:
    """Both regions of ``p`` (cached).  The subcritical slot is ``None`` when
    admissibility fails, with the violation message in the third slot."""
    return _region_pair_cached(validate(p))


# -- point classification ---------------------------------------------------


def _require_finite(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite")
    return x


def classify_ws(p: Params, w: float, s: float) -> Classification:
    """Classify the initial state ``(w, s) = (G/rho, 1/rho)``.

    ``Subcritical`` initial states remain regular under every coefficient
    path within the parameter bounds; ``Supercritical`` ones blow up in
    finite time; everything else (the gap strip, the open subcritical
    boundary, and far-field points beyond rigorous bounds) is
    ``Indeterminate``.
    """
    w = _require_finite("w", w)
    s = _require_finite("s", s)
    if not s > 0.0:
        raise ValueError("specific volume s must be positive")
    sub, sup, sub_err = region_pair(p)
    in_sub, br_sub = (False, "") if sub is None else sub.classify_point(w, s)
    in_sup, br_sup = sup.classify_point(w, s)
    if in_sub is True and in_sup is True:
        raise InternalInvariantError(
            f"state (w, s) = ({w:.6g}, {s:.6g}) claimed by both regions")
    if in_sub is True:
        return Classification(SUBCRITICAL, br_sub)
    if in_sup is True:
        return Classification(SUPERCRITICAL, br_sup)
    bits = []
    if sub is None:
        bits.append(f"subcritical region unavailable ({sub_err})")
    elif br_sub:
        bits.append(f"not subcritical: {br_sub}")
    if br_sup:
        bits.append(f"not supercritical: {br_sup}")
    return Classification(INDETERMINATE, "between the threshold regions",
                          detail="; ".join(bits))


def _sqrt2(v: float) -> float:
    return math.sqrt(2.0 * max(v, 0.0))


def classify_Grho(p: Params, G: float, rho: float) -> Classification:
    """Classify an initial state given as ``(G, rho)``.

    Implemented directly from the threshold inequalities in ``(G, rho)``
    form, branching on ``rho`` against the background bounds; serves as an
    independent cross-check of :func:`classify_ws` through the change of
    variables ``w = G/rho``, ``s = 1/rho``.
    """
    G = _require_finite("G", G)
    rho = float(rho)
    if not rho > 0.0 or not math.isfinite(rho):
        raise ValueError(
            "density rho must be positive and finite; vacuum initial data is "
            "handled by the vacuum indicator dynamics, not by region lookup")
    sub, sup, sub_err = region_pair(p)
    cm, cp = p.c_minus, p.c_plus
    num, nup = p.nu_minus, p.nu_plus
    s = 1.0 / rho

    in_sub: bool | None = False
    br_sub = ""
    if sub is not None:
        if sub.s_cap is not None and s >= sub.s_cap:
            in_sub, br_sub = False, f"rho <= 1/s2 = {1.0 / sub.s_cap:.6g}"
        elif s > sub.s_reach:
            in_sub, br_sub = sub._far_field(G * s, s)
        else:
            if rho >= cp:
                lower = G > nup - rho * _sqrt2(sub.tables["P1"].value(s))
                br_low = "G > nu_plus - rho sqrt(2 P1(1/rho))"
            else:
                lower = G > num - rho * _sqrt2(sub.tables["P2"].value(s))
                br_low = "G > nu_minus - rho sqrt(2 P2(1/rho))"
            if sub.s_cap is None:
                in_sub, br_sub = lower, br_low
            elif not lower:
                in_sub, br_sub = False, f"fails {br_low}"
            else:
                if rho >= cm:
                    upper = G < nup + rho * _sqrt2(sub.tables["N4"].value(s))
                    br_up = "G < nu_plus + rho sqrt(2 N4(1/rho))"
                else:
                    upper = G < num + rho * _sqrt2(sub.tables["N3"].value(s))
                    br_up = "G < nu_minus + rho sqrt(2 N3(1/rho))"
                in_sub = upper
                br_sub = f"{br_low} and {br_up}" if upper else f"fails {br_up}"

    if sup.s_cap is not None and s >= sup.s_cap:
        in_sup: bool | None = True
        br_sup = f"rho <= 1/s2~ = {1.0 / sup.s_cap:.6g}"
    elif s > sup.s_reach:
        in_sup, br_sup = sup._far_field(G * s, s)
    else:
        if rho >= cm:
            low_ok = G <= num - rho * _sqrt2(sup.tables["P1t"].value(s))
            br_l = "G <= nu_minus - rho sqrt(2 P1~(1/rho))"
        else:
            low_ok = G <= nup - rho * _sqrt2(sup.tables["P2t"].value(s))
            br_l = "G <= nu_plus - rho sqrt(2 P2~(1/rho))"
        if low_ok:
            in_sup, br_sup = True, br_l
        elif sup.s_cap is None:
            in_sup, br_sup = False, f"fails {br_l}"
        else:
            if rho >= cp:
                up_ok = G >= num + rho * _sqrt2(sup.tables["N4t"].value(s))
                br_u = "G >= nu_minus + rho sqrt(2 N4~(1/rho))"
            else:
                up_ok = G >= nup + rho * _sqrt2(sup.tables["N3t"].value(s))
                br_u = "G >= nu_plus + rho sqrt(2 N3~(1/rho))"
            in_sup = up_ok
            br_sup = br_u if up_ok else f"fails {br_l} and {br_u}"

    if in_sub is True and in_sup is True:
        raise InternalInvariantError(
            f"state (G, rho) = ({G:.6g}, {rho:.6g}) claimed by both regions")
    if in_sub is True:
        return Classification(SUBCRITICAL, br_sub)
    if in_sup is True:
        return Classification(SUPERCRITICAL, br_sup)
    bits = []
    if sub is None:
        bits.append(f"subcritical region unavailable ({sub_err})")
    elif br_sub:
        bits.append(f"not subcritical: {br_sub}")
    if br_sup:
        bits.append(f"not supercritical: {br_sup}")
    return Classification(INDETERMINATE, "between the threshold regions",
                          detail="; ".join(bits))


# -- boundary export --------------------------------------------------------


def _segment_points(tb: LyapunovTable, s_from: float, s_to: float,
                    resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample one arc from the table's trajectory, oriented ``s_from -> s_to``,
    spaced uniformly in arc length with clustering near both junctions."""
    w_lo, s_lo = (float(x) for x in tb.traj(tb.t_lo))
    t_a, t_b = (tb.t_lo, tb.t_hi)
    if abs(s_lo - s_from) > abs(s_lo - s_to):
        t_a, t_b = t_b, t_a
    if resolution <= 2:
        ts = np.array([t_a, t_b])
        w, s = tb.traj(ts)
        return np.asarray(w, float), np.asarray(s, float)
    fine = np.linspace(t_a, t_b, 8 * resolution + 1)
    wf, sf = tb.traj(fine)
    seg = np.hypot(np.diff(wf), np.diff(sf))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    fracs = [np.linspace(0.0, 1.0, resolution)]
    tail = 0.01 * 0.5 ** np.arange(8, dtype=float)
    fracs += [tail, 1.0 - tail]
    f = np.unique(np.clip(np.concatenate(fracs), 0.0, 1.0))
    ts = np.interp(f * total, cum, fine)
    w, s = tb.traj(ts)
    return np.asarray(w, float), np.asarray(s, float)


def export_region(region: Region, resolution: int = 512) -> list[dict]:
    """Sample the boundary into ordered polyline segments.

    Segments follow the corner ordering (``C1``..``C4`` subcritical,
    ``Ct1``..``Ct4`` supercritical); unbounded scenarios emit only the two
    lower arcs.  Each segment dict carries arrays ``w``, ``s`` and the state
    variables ``G = w/s``, ``rho = 1/s`` (infinite on the ``s = 0`` axis).
    ``resolution`` is the base point count per segment; ``resolution=2``
    yields the bare junction endpoints.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    t1, t2, t3, t4 = region._tags()
    pre = "C" if region.kind == SUBCRITICAL else "Ct"
    stop2 = region.s_cap if region.s_cap is not None else region.s_reach
    plan = [
        (f"{pre}1", region.tables[t1], 0.0, region.lower_break),
        (f"{pre}2", region.tables[t2], region.lower_break, stop2),
    ]
    if region.s_cap is not None:
        plan.append((f"{pre}3", region.tables[t3], region.s_cap,
                     region.upper_break))
        plan.append((f"{pre}4", region.tables[t4], region.upper_break, 0.0))
    out = []
    for rid, tb, s_from, s_to in plan:
        w, s = _segment_points(tb, s_from, s_to, resolution)
        with np.errstate(divide="ignore", invalid="ignore"):
            G = w / s
            rho = 1.0 / s
        out.append({"segment_id": rid, "w": w, "s": s, "G": G, "rho": rho})
    return out
