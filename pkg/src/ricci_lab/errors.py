"""Exception hierarchy shared by all ricci_lab modules."""

from __future__ import annotations


class RicciLabError(Exception):
    """Base class for every error raised by this package."""


class InputError(RicciLabError):
    """Bad user input; the CLI maps these to exit code 2."""


# geometry
class NonPositiveWarping(RicciLabError):
    """The warping function is not positive where it has to be."""


class PoleRegularityViolated(RicciLabError):
    def __init__(self, slope: float, tol: float):
        super().__init__(f"|w_s| at a pole is {slope!r}, expected 1 within {tol!r}")
        self.slope = slope
        self.tol = tol


# flow
class InvalidProfileParameters(InputError):
    pass


class SphereExtinct(RicciLabError):
    pass


class NumericalBlowup(RicciLabError):
    pass


class InsufficientSnapshots(RicciLabError):
    pass


# tensor algebra
class DimensionTooSmall(InputError):
    pass


class BianchiViolation(RicciLabError):
    """The candidate tensor fails the contracted second Bianchi identity."""

    def __init__(self, defect: float, scale: float):
        super().__init__(f"trace defect {defect:.3e} exceeds tolerance (|T| = {scale:.3e})")
        self.defect = defect
        self.scale = scale


# monitors
class EmptyHistory(RicciLabError):
    pass


class NoViolation(RicciLabError):
    """No space-time point exceeds the picking threshold."""


class RadiusTooLarge(InputError):
    pass


class HorizonExceeded(RicciLabError):
    pass


# config / io
class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class RangeError(InputError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class IoError(RicciLabError):
    pass
