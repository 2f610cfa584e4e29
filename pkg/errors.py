"""Exception hierarchy with structured diagnostics.

Every library error is a ``ValueError`` subclass so callers that only care
about bad input can keep catching ``ValueError``. The CLI turns any of them
into a ``{code, message, context}`` diagnostic.
"""
from typing import Any, Dict, Optional


class RobustTError(ValueError):
    """Base error carrying a stable code and a context dictionary."""

    code: str = "robust_t_error"

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None, code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context or {})
        if code is not None:
            self.code = code

    def to_diagnostic(self) -> Dict[str, Any]:
        """Return the JSON-ready diagnostic for this error."""
        return {"code": self.code, "message": self.message, "context": self.context}


class GroupError(RobustTError):
    code = "group_error"


class AlgebraError(RobustTError):
    code = "algebra_error"


class SpectrumError(RobustTError):
    code = "spectrum_error"


class ProjectionError(RobustTError):
    code = "projection_error"


class HypothesisError(RobustTError):
    """A convergence or criterion hypothesis does not hold.

    ``context["violated"]`` holds the failed inequality as text.
    """

    code = "hypothesis_violated"


class CriterionError(RobustTError):
    code = "criterion_error"


class ExpanderError(RobustTError):
    code = "expander_error"


class ConfigError(RobustTError):
    """Unreadable input file or invalid run configuration."""

    code = "bad_config"
