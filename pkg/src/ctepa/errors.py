"""Exception types shared across the package."""

from __future__ import annotations

__all__ = ["ConfigError", "InadmissibleError", "InternalInvariantError"]


class ConfigError(ValueError):
    """Raised for malformed configuration input (files, JSON payloads, CLI args)."""


class InadmissibleError(ValueError):
    """Raised when a region construction is blocked by a failed admissibility condition.

    Attributes
    ----------
    condition : str
        Name of the violated condition ("ac1", "ac2" or "ac3").
    lhs, rhs : float
        The two sides of the violated inequality, for reporting.
    """

    def __init__(self, condition: str, lhs: float, rhs: float, detail: str = ""):
        self.condition = condition
        self.lhs = lhs
        self.rhs = rhs
        msg = (f"inadmissible parameters: {condition.upper()} fails "
               f"(lhs={lhs:.6g}, rhs={rhs:.6g})")
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class InternalInvariantError(RuntimeError):
    """Raised when a computed quantity violates a structural identity it must satisfy."""
