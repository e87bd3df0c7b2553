"""
Error types raised by the ddenorm toolkit.

Every failure carries a machine-readable ``kind`` and a ``details`` dict so the
CLI can serialize it into ``error.json``.
"""

from typing import Any, Dict, Optional


class DDENormError(Exception):
    """Base class for all toolkit failures"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = dict(details or {})

    @property
    def kind(self) -> str:
        return type(self).__name__

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "message": self.message, "details": _jsonable(self.details)}


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    return value


# Input and configuration

class InvalidInput(DDENormError, ValueError):
    """Dimension mismatch, out-of-domain argument or bad option"""


class ConfigError(DDENormError):
    """Run configuration could not be loaded or is inconsistent"""


class UnknownModel(ConfigError):
    """Requested model name is not registered"""


# Points and spectra

class NotAnEquilibrium(DDENormError):
    """Base point of a derivative bundle is not a steady state"""


class NoBifurcation(DDENormError):
    pass


class NoConvergence(DDENormError):
    pass


class DefectiveEigenvalue(DDENormError):
    """pDelta'(lambda)q vanishes, the eigenvalue is not simple"""


class ImaginaryAxisLost(DDENormError):
    pass


class AmbiguousPattern(DDENormError):
    """Critical spectrum does not match exactly one codimension-two pattern"""


# Linear algebra

class InconsistentSystem(DDENormError):
    """Right-hand side violates the Fredholm solvability condition"""


class SingularBorder(DDENormError):
    pass


class NearSingularResolvent(DDENormError):
    """Resolvent evaluated too close to a characteristic root"""


# Normal forms and predictors

class SingularParameterMatrix(DDENormError):
    """Transversality failure: the beta -> alpha map is not regular"""


class Degenerate(DDENormError):
    pass


class DegenerateL2(Degenerate):
    pass


class TorusAbsent(DDENormError):
    pass


class ResonanceDetected(DDENormError):
    pass


# Continuation and simulation

class StallDetected(DDENormError):
    pass


class BoxExit(DDENormError):
    pass


class BisectionFailure(DDENormError):
    pass


class NonFiniteState(DDENormError):
    pass


class InvalidArtifact(DDENormError):
    """An output document does not match its schema"""
