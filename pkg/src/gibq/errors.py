"""Exception types shared across the package."""


class GibqError(Exception):
    """Base class for all package errors."""


class LatticeMismatchError(GibqError):
    """Two fields or trajectories live on different frequency lattices."""


class CutoffOverflowError(GibqError):
    """An operation produced a frequency beyond the lattice cutoff."""

    def __init__(self, frequency: int, cutoff: int):
        self.frequency = frequency
        self.cutoff = cutoff
        super().__init__(
            f"frequency {frequency} exceeds lattice cutoff {cutoff}"
        )


class CapacityError(GibqError):
    """An enumeration would exceed its declared size guard."""


class DivergenceError(GibqError):
    """Fixed-point iteration is expanding instead of contracting."""

    def __init__(self, message: str, contraction_factor: float):
        self.contraction_factor = contraction_factor
        super().__init__(message)


class SeriesDivergenceError(GibqError):
    """The power-series ledger shows non-decaying terms."""

    def __init__(self, message: str, ratios: list):
        self.ratios = ratios
        super().__init__(message)


class TruncationTailError(GibqError):
    """ODE support truncation lost more mass than the monitor allows."""


class ConfigError(GibqError):
    """A run configuration failed schema validation."""
