"""Exception types shared by the solver suite."""


class VislimError(Exception):
    """Base class for all package errors."""


class ConfigError(VislimError):
    """Invalid run or sweep configuration."""


class CFLViolation(VislimError):
    """Time step exceeds the advective CFL bound."""


class DensityFloorError(VislimError):
    """Density fell below the configured lower bound c0."""


class BlowUpError(VislimError):
    """Gradient blow-up detector tripped."""

    def __init__(self, t, norm):
        super().__init__(f"blow-up detected at t={t:.6g} (sup|grad u|={norm:.3g})")
        self.t = t
        self.norm = norm


class NumericalError(VislimError):
    """Generic numerical failure (NaN, non-convergence, tail truncation)."""
