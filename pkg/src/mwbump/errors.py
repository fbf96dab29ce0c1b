"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class MveeError(RuntimeError):
    """Minimum-volume ellipsoid construction failed (degenerate or stalled)."""


class PackingError(ValueError):
    """A cube family violates the Carleson packing condition."""

    def __init__(self, cube, message=None):
        self.cube = cube
        super().__init__(message or f"packing violation at cube {cube}")


class FieldError(ValueError):
    """A weight field cell is invalid (non-symmetric, non-PD, or non-finite)."""

    def __init__(self, cell, message=None):
        self.cell = cell
        super().__init__(message or f"invalid cell {cell}")
