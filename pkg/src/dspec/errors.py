"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end and a
``details`` mapping that is serialized into the JSON diagnostic stream.
"""

from __future__ import annotations

from typing import Any


class DspecError(Exception):
    exit_code = 1

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message or self.__class__.__name__)
        self.details = details

    def as_record(self) -> dict:
        return {"error": self.__class__.__name__, "message": str(self), **self.details}


# -- invalid input (exit 2) ---------------------------------------------------

class InvalidInput(DspecError):
    exit_code = 2


class ConfigError(InvalidInput):
    pass


class NonMonotonePartition(InvalidInput):
    pass


class LengthMismatch(InvalidInput):
    pass


class PieceGap(InvalidInput):
    pass


class IndexOutOfRange(InvalidInput):
    pass


class JumpAtContinuityPoint(InvalidInput):
    pass


class UnsupportedKind(InvalidInput):
    pass


class ZeroFunction(InvalidInput):
    pass


class DomainViolation(InvalidInput):
    pass


class InfiniteBeta(InvalidInput):
    pass


# -- numerical failure (exit 3) -----------------------------------------------

class NumericalFailure(DspecError):
    exit_code = 3


class InconsistentCount(NumericalFailure):
    pass


class WindowTooWide(NumericalFailure):
    pass


class TooLarge(NumericalFailure):
    pass


class NearEigenvalue(NumericalFailure):
    pass


class CutoffTooLow(NumericalFailure):
    pass


class SingularMass(NumericalFailure):
    pass


# -- undecidable (exit 4) -----------------------------------------------------

class Undecidable(DspecError):
    exit_code = 4


class UndecidableTail(Undecidable):
    pass


class HypothesisNotMet(Undecidable):
    pass


class TailMismatch(InvalidInput):
    pass
