"""
Exception hierarchy for the macrodiv engine.

Every error carries the process exit code the CLI maps it to.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple


class MacrodivError(Exception):
    """Base class for all engine errors"""

    exit_code: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self), "exit_code": self.exit_code}


class ConfigError(MacrodivError):
    """Invalid run configuration or unreadable config file"""


class DomainError(MacrodivError, ValueError):
    """Argument outside the domain of a function"""


class InvalidModulationError(DomainError):
    pass


class AnomalyError(MacrodivError):
    """Zero-probability channel event (e.g. vanishing interferer column)"""


class DegeneracyError(MacrodivError):
    """Closed-form denominator below the degeneracy threshold"""

    exit_code = 2

    def __init__(self, message: str, pairs: Optional[Sequence[Tuple[int, ...]]] = None):
        self.pairs: List[Tuple[int, ...]] = list(pairs or [])
        if self.pairs:
            named = ", ".join("(" + ",".join(str(i) for i in p) + ")" for p in self.pairs)
            message = f"{message}; offending antenna indices: {named}"
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        out = super().to_dict()
        out["pairs"] = [list(p) for p in self.pairs]
        return out


class AccuracyError(MacrodivError):
    """Quadrature failed to reach the requested tolerance"""

    def __init__(self, message: str, best_estimate: float, abs_error: Optional[float] = None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.abs_error = abs_error


class ValidationFailure(MacrodivError):
    """One or more validation properties failed"""

    exit_code = 3

    def __init__(self, message: str, report: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.report = report or []
