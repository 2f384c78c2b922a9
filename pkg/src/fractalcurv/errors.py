"""Exception types shared across the package."""


class FractalCurvError(Exception):
    """Base class for all computation errors raised by this package."""


class SchemaError(FractalCurvError):
    """Malformed input file or JSON document."""


class SampleBudgetError(FractalCurvError):
    """Attractor sampling would exceed the point budget."""


class DegenerateArrangementError(FractalCurvError):
    """Disk arrangement stayed degenerate after a perturbation retry."""


class AccuracyGuardError(FractalCurvError):
    """Requested radius is too small for the sample resolution."""


class ScaleRangeError(FractalCurvError):
    """Insufficient scale range for an exponent fit."""


class GridMemoryError(FractalCurvError):
    """Occupancy raster would exceed the cell budget."""
