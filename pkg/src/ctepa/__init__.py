"""Critical-threshold analysis for 1D pressureless Euler-Poisson-alignment flows.

The package computes, for a repulsive Euler-Poisson system with nonlocal
velocity alignment and a variable background profile, the subcritical region
(initial slopes guaranteeing global regularity) and the supercritical region
(initial slopes guaranteeing finite-time blowup) of the characteristic-plane
dynamics, together with the machinery used to verify both claims numerically:
closed-form corner chains, Lyapunov-type barrier functions, comparison-principle
monitors, a blowup certificate, and a desk-scale Lagrangian solver for the full
PDE system.

Modules
-------
params
    Parameter validation, alignment-regime classification, frozen-system spectra.
phaseplane
    Closed-form local trajectories, boundary corner chains, admissibility.
lyapunov
    Barrier-function tables built from generating trajectories.
regions
    Threshold-region assembly, point classification, boundary export.
dynamics
    Characteristic ODE integration, comparison monitors, blowup certificates.
pde
    Lagrangian particle solver for the full system on a periodic domain.
cli
    Command-line front end.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import ConfigError, InadmissibleError, InternalInvariantError

__all__ = [
    "__version__",
    "ConfigError",
    "InadmissibleError",
    "InternalInvariantError",
]
