"""Exception hierarchy shared by every lattice module.

`InputError` subclasses mean the caller asked for something invalid (CLI exit
status 2); `NumericalError` subclasses mean a well-posed computation could not
be carried out reliably (CLI exit status 3).
"""


class LatticeError(Exception):
    exit_status = 1


class InputError(LatticeError):
    exit_status = 2


class NumericalError(LatticeError):
    exit_status = 3


class ConfigError(InputError):
    pass


class DomainError(InputError):
    pass


class SizeError(InputError):
    pass


class GainNotSupported(InputError):
    pass


class ZeroVelocity(InputError):
    pass


class UnknownFigure(InputError):
    pass


class WindowTooNarrow(InputError):
    pass


class ExceptionalPoint(NumericalError):
    pass


class NonDiagonalizable(NumericalError):
    pass


class OnSpectrum(NumericalError):
    pass


class WindingError(NumericalError):
    pass


class BandDiscontinuity(NumericalError):
    pass


class DegenerateLeadingCoefficient(NumericalError):
    pass


class BranchPointCollision(NumericalError):
    pass


class OrderUndetermined(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class StallError(NumericalError):
    def __init__(self, message, partial_path=None):
        super().__init__(message)
        self.partial_path = partial_path


class NoContributingSaddle(NumericalError):
    pass


class VanishingResidue(NumericalError):
    pass


class TooFewPeaks(NumericalError):
    pass
