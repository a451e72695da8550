"""Parameter validation, alignment-regime classification and frozen-system spectra.

The model is parametrized by five positive numbers: the forcing strength ``k``,
the background-density range ``[c_minus, c_plus]`` and the alignment-strength
range ``[nu_minus, nu_plus]`` (kernel bounds times conserved mass).  The
characteristic dynamics freeze, piece by piece, into linear systems around the
equilibrium ``(nu/c, 1/c)`` whose spectrum decides between monotone and
oscillatory local behaviour; everything downstream branches on that spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import ConfigError

__all__ = [
    "Params",
    "Regime",
    "Spectral",
    "validate",
    "classify_regime",
    "nu_bounds",
    "spectral",
    "BORDERLINE_RTOL",
]

#: Relative tolerance (against 4*k*c) within which nu^2 - 4*k*c counts as zero
#: and the frozen system is flagged borderline with repeated root -nu/2.
BORDERLINE_RTOL = 1e-9

_PARAM_FIELDS = ("k", "c_minus", "c_plus", "nu_minus", "nu_plus")


@dataclass(frozen=True)
class Params:
    """Validated model parameters.

    Attributes
    ----------
    k : float
        Forcing strength, positive.
    c_minus, c_plus : float
        Lower and upper bounds of the background profile, ``0 < c_minus <= c_plus``.
    nu_minus, nu_plus : float
        Lower and upper bounds of the nonlocal alignment coefficient,
        ``0 < nu_minus <= nu_plus``.
    """

    k: float
    c_minus: float
    c_plus: float
    nu_minus: float
    nu_plus: float

    def to_json(self) -> dict:
        return {name: getattr(self, name) for name in _PARAM_FIELDS}


@dataclass(frozen=True)
class Regime:
    """Alignment-regime classification of a parameter set.

    ``label`` is one of ``"weak"``, ``"median"``, ``"strong"``;
    ``scenario_sub`` (``"I"`` or ``"II"``) selects the shape of the subcritical
    region and ``scenario_sup`` (``"III"`` or ``"IV"``) the shape of the
    supercritical region.  ``strong_threshold`` and ``weak_threshold`` are the
    two comparison values ``2*sqrt(k*c_plus)`` and ``2*sqrt(k*c_minus)``.
    """

    label: str
    scenario_sub: str
    scenario_sup: str
    strong_threshold: float
    weak_threshold: float

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "scenario_sub": self.scenario_sub,
            "scenario_sup": self.scenario_sup,
            "strong_threshold": self.strong_threshold,
            "weak_threshold": self.weak_threshold,
        }


@dataclass(frozen=True)
class Spectral:
    """Spectrum of one frozen linearized system with coefficients ``(c, nu, k)``.

    ``branch`` is ``"real"`` (two distinct real eigenvalues ``lambda1 >= lambda2``),
    ``"complex"`` (conjugate pair with real part ``-nu/2`` and imaginary part
    ``theta = sqrt(4*k*c - nu^2)/2``) or ``"borderline"`` (repeated root
    ``-nu/2``, selected when ``|nu^2 - 4*k*c| <= BORDERLINE_RTOL * 4*k*c``).
    Fields that do not exist on a branch are ``None``.
    """

    branch: str
    lambda1: float | None
    lambda2: float | None
    theta: float | None
    real_part: float
    disc: float

    def to_json(self) -> dict:
        return {
            "branch": self.branch,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "theta": self.theta,
            "real_part": self.real_part,
            "disc": self.disc,
        }


def _as_float(raw: Mapping, name: str) -> float:
    try:
        value = raw[name]
    except KeyError:
        raise ConfigError(f"missing parameter: {name}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"parameter {name} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"parameter {name} must be finite, got {value!r}")
    return value


def validate(raw: Mapping | Params) -> Params:
    """Validate raw parameters and return a frozen :class:`Params`.

    Accepts a mapping with exactly the keys ``k, c_minus, c_plus, nu_minus,
    nu_plus`` (or an existing :class:`Params`, which is revalidated).  Raises
    ``ValueError`` naming the first violated inequality, or
    :class:`~ctepa.errors.ConfigError` for structural problems.
    """
    if isinstance(raw, Params):
        raw = raw.to_json()
    extra = set(raw) - set(_PARAM_FIELDS)
    if extra:
        raise ConfigError(f"unknown parameter keys: {sorted(extra)}")
    vals = {name: _as_float(raw, name) for name in _PARAM_FIELDS}

    if not vals["k"] > 0:
        raise ValueError("k must be positive")
    if not vals["c_minus"] > 0:
        raise ValueError("c_minus must be positive")
    if vals["c_minus"] > vals["c_plus"]:
        raise ValueError("c_minus exceeds c_plus")
    if not vals["nu_minus"] > 0:
        raise ValueError("nu_minus must be positive")
    if vals["nu_minus"] > vals["nu_plus"]:
        raise ValueError("nu_minus exceeds nu_plus")
    return Params(**vals)


def nu_bounds(psi_minus: float, psi_plus: float, mass: float) -> tuple[float, float]:
    """Alignment-coefficient bounds induced by kernel bounds and total mass.

    The nonlocal coefficient is the kernel convolved with the density, so with
    ``psi_minus <= psi <= psi_plus`` and conserved total mass ``m`` it stays in
    ``[psi_minus * m, psi_plus * m]``.
    """
    if not psi_minus > 0:
        raise ValueError("psi_minus must be positive")
    if psi_minus > psi_plus:
        raise ValueError("psi_minus exceeds psi_plus")
    if not mass > 0:
        raise ValueError("mass must be positive")
    return psi_minus * mass, psi_plus * mass


def classify_regime(p: Params) -> Regime:
    """Classify the alignment strength of validated parameters.

    strong   iff ``nu_minus >= 2*sqrt(k*c_plus)``   (scenario I / III),
    weak     iff ``nu_plus  <  2*sqrt(k*c_minus)``  (scenario II / IV),
    median   otherwise                              (scenario II / III).
    """
    thr_strong = 2.0 * math.sqrt(p.k * p.c_plus)
    thr_weak = 2.0 * math.sqrt(p.k * p.c_minus)
    if p.nu_minus >= thr_strong:
        label = "strong"
    elif p.nu_plus < thr_weak:
        label = "weak"
    else:
        label = "median"
    scenario_sub = "I" if label == "strong" else "II"
    scenario_sup = "III" if p.nu_plus >= thr_weak else "IV"
    return Regime(label, scenario_sub, scenario_sup, thr_strong, thr_weak)


def spectral(c: float, nu: float, k: float) -> Spectral:
    """Spectrum of the frozen system with coefficients ``(c, nu, k)``.

    The linearization around ``(nu/c, 1/c)`` has the characteristic polynomial
    ``lambda^2 + nu*lambda + k*c``.  The real branch uses the cancellation-free
    form ``lambda1 = -2*k*c / (nu + sqrt(disc))`` so that the product identity
    ``lambda1 * lambda2 = k*c`` holds to machine precision.
    """
    if not (c > 0 and k > 0):
        raise ValueError("c and k must be positive")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    four_kc = 4.0 * k * c
    disc = nu * nu - four_kc
    if abs(disc) <= BORDERLINE_RTOL * four_kc:
        lam = -0.5 * nu
        return Spectral("borderline", lam, lam, None, lam, disc)
    if disc > 0:
        root = math.sqrt(disc)
        lam1 = -2.0 * k * c / (nu + root)
        lam2 = -0.5 * (nu + root)
        return Spectral("real", lam1, lam2, None, -0.5 * nu, disc)
    theta = 0.5 * math.sqrt(-disc)
    return Spectral("complex", None, None, theta, -0.5 * nu, disc)
