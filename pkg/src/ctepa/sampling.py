"""Seeded random draws of parameters, starting points and coefficient paths.

Every verification suite and acceptance test needs streams of random but
well-formed inputs: parameter sets pinned to an alignment regime or a
boundary scenario, starting points strictly inside a threshold region, and
admissible time-varying coefficient paths.  This module centralizes those
draws so that each consumer only carries a :class:`numpy.random.Generator`
and the intent ("a weak-regime parameter set", "a point inside the
supercritical region") rather than range constants.

All draws are functions of the supplied generator alone, so a fixed seed
reproduces the exact stream regardless of call site.
"""

from __future__ import annotations

import math

import numpy as np

from .params import Params, classify_regime, validate
from .phaseplane import admissibility
from .regions import Region, region_pair
from .dynamics import CoefficientPath, vacuum_thresholds

__all__ = [
    "params_regime",
    "params_any",
    "params_scenario",
    "params_equal_background",
    "params_equal_alignment",
    "params_sharp_limit",
    "subcritical_params",
    "supercritical_params",
    "start_subcritical",
    "start_supercritical",
    "coefficient_path",
    "vacuum_case",
]

_MAX_REJECT = 2000


def _draw_kc(rng: np.random.Generator, ratio_hi: float = 3.0
             ) -> tuple[float, float, float]:
    """Repulsion strength and background bounds, log-uniform and ratio-capped."""
    k = math.exp(rng.uniform(math.log(0.25), math.log(4.0)))
    c_minus = math.exp(rng.uniform(math.log(0.2), math.log(1.5)))
    c_plus = c_minus * (1.0 + rng.uniform(0.0, ratio_hi - 1.0))
    return k, c_minus, c_plus


def params_regime(rng: np.random.Generator, regime: str, *,
                  admissible: bool | None = None) -> Params:
    """One random parameter set in the requested alignment regime.

    Parameters
    ----------
    regime:
        ``"strong"``, ``"median"`` or ``"weak"``.
    admissible:
        ``True`` rejects draws until the subcritical chain closes
        (``admissibility(p).satisfied``), ``False`` rejects until it does
        not, ``None`` applies no filter.  Strong alignment needs no
        conditions, so ``admissible=False`` is rejected there.
    """
    if regime == "strong" and admissible is False:
        raise ValueError("strong alignment has no admissibility conditions to fail")
    for _ in range(_MAX_REJECT):
        if regime == "strong":
            k, c_minus, c_plus = _draw_kc(rng)
            floor = 2.0 * math.sqrt(k * c_plus)
            nu_minus = floor * (1.0 + rng.uniform(0.005, 1.0))
            nu_plus = nu_minus * (1.0 + rng.uniform(0.0, 0.5))
        elif regime == "weak":
            # admissibility prefers a narrow background band and gentle
            # alignment, so bias the raw draw that way when filtering
            ratio_hi = 1.35 if admissible else 2.0
            k, c_minus, c_plus = _draw_kc(rng, ratio_hi=ratio_hi)
            cap = 2.0 * math.sqrt(k * c_minus)
            hi = 0.5 if admissible else 0.995
            nu_plus = cap * rng.uniform(0.05, hi)
            nu_minus = nu_plus * (1.0 - rng.uniform(0.0, 0.5))
        elif regime == "median":
            ratio_hi = 3.0 if admissible else 2.5
            k, c_minus, c_plus = _draw_kc(rng, ratio_hi=max(ratio_hi, 1.2))
            weak_cap = 2.0 * math.sqrt(k * c_minus)
            strong_floor = 2.0 * math.sqrt(k * c_plus)
            nu_plus = weak_cap * (1.0 + rng.uniform(0.01, 1.0))
            nu_minus = rng.uniform(0.3 * nu_plus, min(nu_plus, 0.995 * strong_floor))
        else:
            raise ValueError(f"unknown regime {regime!r}")
        try:
            p = validate(dict(k=k, c_minus=c_minus, c_plus=c_plus,
                              nu_minus=nu_minus, nu_plus=nu_plus))
        except ValueError:
            continue
        if classify_regime(p).label != regime:
            continue
        if admissible is None:
            return p
        if admissibility(p).satisfied == admissible:
            return p
    raise RuntimeError(f"could not draw a {regime!r} parameter set "
                       f"(admissible={admissible}) in {_MAX_REJECT} attempts")


def params_any(rng: np.random.Generator) -> Params:
    """One random parameter set with a uniformly chosen regime."""
    return params_regime(rng, rng.choice(["strong", "median", "weak"]))


def params_scenario(rng: np.random.Generator, scenario: str) -> Params:
    """One random parameter set whose boundary follows the given scenario.

    ``"I"`` is the unbounded subcritical boundary (strong alignment),
    ``"II"`` the closed lens (median or weak, admissibility enforced so the
    full corner chain exists), ``"III"`` the unbounded supercritical
    boundary (everything but weak), ``"IV"`` the closed supercritical
    complement (weak).
    """
    if scenario == "I":
        return params_regime(rng, "strong")
    if scenario == "II":
        regime = rng.choice(["median", "weak"])
        return params_regime(rng, regime, admissible=True)
    if scenario == "III":
        regime = rng.choice(["strong", "median"])
        return params_regime(rng, regime)
    if scenario == "IV":
        return params_regime(rng, "weak")
    raise ValueError(f"unknown scenario {scenario!r}")


def params_equal_background(rng: np.random.Generator, *,
                            regime: str | None = None,
                            admissible: bool | None = None) -> Params:
    """Random parameters with a constant background (``c_minus == c_plus``).

    ``regime`` restricts the alignment regime to ``"weak"`` or ``"median"``
    (``None`` mixes the two); strong sets need no admissibility conditions
    and so have nothing to compare against the constant-background forms.
    """
    if regime not in (None, "weak", "median"):
        raise ValueError("regime must be None, 'weak' or 'median'")
    for _ in range(_MAX_REJECT):
        want = regime if regime is not None else str(rng.choice(["weak", "median"]))
        k = math.exp(rng.uniform(math.log(0.25), math.log(4.0)))
        c = math.exp(rng.uniform(math.log(0.2), math.log(1.5)))
        cap = 2.0 * math.sqrt(k * c)
        if want == "weak":
            nu_plus = cap * rng.uniform(0.05, 0.7)
            nu_minus = nu_plus * (1.0 - rng.uniform(0.0, 0.6))
        else:
            nu_plus = cap * (1.0 + rng.uniform(0.01, 0.9))
            nu_minus = cap * rng.uniform(0.3, 0.98)
        p = validate(dict(k=k, c_minus=c, c_plus=c,
                          nu_minus=nu_minus, nu_plus=nu_plus))
        if admissible is None or admissibility(p).satisfied == admissible:
            return p
    raise RuntimeError("could not draw an equal-background parameter set")


def params_equal_alignment(rng: np.random.Generator, *,
                           admissible: bool | None = None) -> Params:
    """Random parameters with a constant alignment rate (``nu_minus == nu_plus``)."""
    for _ in range(_MAX_REJECT):
        k, c_minus, c_plus = _draw_kc(rng, ratio_hi=1.5)
        cap = 2.0 * math.sqrt(k * c_minus)
        nu = cap * rng.uniform(0.05, 0.95)
        p = validate(dict(k=k, c_minus=c_minus, c_plus=c_plus,
                          nu_minus=nu, nu_plus=nu))
        if admissible is None or admissibility(p).satisfied == admissible:
            return p
    raise RuntimeError("could not draw an equal-alignment parameter set")


def params_sharp_limit(rng: np.random.Generator) -> Params:
    """Random parameters with both coefficients constant (the sharp case)."""
    k = math.exp(rng.uniform(math.log(0.25), math.log(4.0)))
    c = math.exp(rng.uniform(math.log(0.2), math.log(1.5)))
    cap = 2.0 * math.sqrt(k * c)
    nu = cap * rng.uniform(0.05, 2.0)
    return validate(dict(k=k, c_minus=c, c_plus=c, nu_minus=nu, nu_plus=nu))


# Near a regime threshold the lens top expands like exp(pi nu / (2 theta))
# with theta -> 0, so an uncapped draw can hand back a region whose cap sits
# at 1e7 and beyond; runs started at that scale reach the breakdown cutoff
# with |s'| so large that localizing the crossing needs steps below the
# machine floor.  Redraw instead of handing out such regions.
_REGION_SCALE_CAP = 100.0


def subcritical_params(rng: np.random.Generator) -> tuple[Params, Region]:
    """Random parameters together with their (existing) subcritical region."""
    for _ in range(_MAX_REJECT):
        scenario = rng.choice(["I", "II"])
        p = params_scenario(rng, scenario)
        sub, _, _ = region_pair(p)
        if sub is None:
            continue
        if sub.s_cap is not None and sub.s_cap > _REGION_SCALE_CAP:
            continue
        return p, sub
    raise RuntimeError("could not draw parameters with a subcritical region")


def supercritical_params(rng: np.random.Generator) -> tuple[Params, Region]:
    """Random parameters together with their supercritical region."""
    for _ in range(_MAX_REJECT):
        scenario = rng.choice(["III", "IV"])
        p = params_scenario(rng, scenario)
        _, sup, _ = region_pair(p)
        if sup.s_cap is not None and sup.s_cap > _REGION_SCALE_CAP:
            continue
        return p, sup
    raise RuntimeError("could not draw parameters with a bounded supercritical region")


def start_subcritical(rng: np.random.Generator, region: Region
                      ) -> tuple[float, float]:
    """A point strictly inside a subcritical region.

    Lens interiors are sampled by relative height between the two arcs;
    unbounded regions by a band above the lower boundary.
    """
    if region.kind != "Subcritical":
        raise ValueError("start_subcritical needs a subcritical region")
    p = region.p
    if region.scenario == "II":
        for _ in range(_MAX_REJECT):
            s = float(region.s_cap * rng.uniform(0.08, 0.92))
            wl, wr = region.w_left(s), region.w_right(s)
            w = float(wl + rng.uniform(0.1, 0.9) * (wr - wl))
            if region.contains(w, s):
                return w, s
        raise RuntimeError("lens sampling failed to land inside the region")
    s_hi = min(region.s_reach, 4.0 / p.c_minus)
    for _ in range(_MAX_REJECT):
        s = float(s_hi * rng.uniform(0.2, 0.9))
        wl = region.w_left(s)
        w = float(wl + rng.uniform(0.05, 1.5) * (1.0 + abs(wl)))
        if region.contains(w, s):
            return w, s
    raise RuntimeError("band sampling failed to land inside the region")


def start_supercritical(rng: np.random.Generator, region: Region
                        ) -> tuple[float, float]:
    """A point strictly inside a supercritical region (closed complement or tail)."""
    if region.kind != "Supercritical":
        raise ValueError("start_supercritical needs a supercritical region")
    p = region.p
    for _ in range(_MAX_REJECT):
        if region.scenario == "IV" and rng.uniform() < 0.5:
            s = float(region.s_cap * (1.02 + rng.uniform(0.0, 1.0)))
            w = float(rng.uniform(-1.0, 1.0) * (1.0 + p.nu_plus * s))
        else:
            s_hi = region.s_cap if region.s_cap is not None else min(
                region.s_reach, 4.0 / p.c_minus)
            s = float(s_hi * rng.uniform(0.05, 0.9))
            wl = region.w_left(s)
            w = float(wl - rng.uniform(0.05, 1.5) * (1.0 + abs(wl)))
        if region.contains(w, s):
            return w, s
    raise RuntimeError("sampling failed to land inside the supercritical region")


def coefficient_path(rng: np.random.Generator, p: Params, T: float,
                     mode: str | None = None) -> CoefficientPath:
    """A random admissible coefficient path ``(c(t), nu(t))`` on ``[0, T]``.

    ``mode`` picks the family (``"const"``, ``"sine"`` or ``"switching"``);
    by default one is chosen at random.  Every path respects the parameter
    bounds pointwise by construction.
    """
    if mode is None:
        mode = rng.choice(["const", "sine", "switching"])
    if mode == "const":
        c = float(rng.uniform(p.c_minus, p.c_plus))
        nu = float(rng.uniform(p.nu_minus, p.nu_plus))
        return CoefficientPath.const(p, c=c, nu=nu)
    if mode == "sine":
        return CoefficientPath.sine(
            p,
            omega_c=float(rng.uniform(0.3, 3.0)),
            omega_nu=float(rng.uniform(0.3, 3.0)),
            phase_c=float(rng.uniform(0.0, 2.0 * math.pi)),
            phase_nu=float(rng.uniform(0.0, 2.0 * math.pi)),
            amp=float(rng.uniform(0.3, 1.0)),
        )
    if mode == "switching":
        seed = int(rng.integers(0, 2**31 - 1))
        return CoefficientPath.random_switching(p, seed=seed, T=T)
    raise ValueError(f"unknown coefficient mode {mode!r}")


def vacuum_case(rng: np.random.Generator, case: str
                ) -> tuple[Params, float]:
    """Parameters and an initial vacuum slope with a known expected verdict.

    ``case`` is ``"bounded"`` (strong alignment, slope at or above the
    decay threshold), ``"blowup"`` (below the blowup threshold, or weak
    alignment where every slope blows up) or ``"indeterminate"`` (between
    the two thresholds).
    """
    if case == "bounded":
        p = params_regime(rng, "strong")
        g_flat = vacuum_thresholds(p)["G_flat"]
        return p, float(g_flat + rng.uniform(0.01, 2.0) * (1.0 + abs(g_flat)))
    if case == "blowup":
        if rng.uniform() < 0.5:
            p = params_regime(rng, "weak")
            return p, float(rng.uniform(-2.0, 2.0))
        p = params_regime(rng, rng.choice(["strong", "median"]))
        g_sharp = vacuum_thresholds(p)["G_sharp"]
        return p, float(g_sharp - rng.uniform(0.01, 2.0) * (1.0 + abs(g_sharp)))
    if case == "indeterminate":
        if rng.uniform() < 0.5:
            p = params_regime(rng, "strong")
            th = vacuum_thresholds(p)
            g_sharp, g_flat = th["G_sharp"], th["G_flat"]
            if not g_flat > g_sharp:
                raise RuntimeError("vacuum thresholds out of order")
            return p, float(g_sharp + rng.uniform(0.05, 0.95) * (g_flat - g_sharp))
        p = params_regime(rng, "median")
        g_sharp = vacuum_thresholds(p)["G_sharp"]
        return p, float(g_sharp + rng.uniform(0.05, 2.0) * (1.0 + abs(g_sharp)))
    raise ValueError(f"unknown vacuum case {case!r}")
