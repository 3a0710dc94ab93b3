"""
Error hierarchy for geostab.

Configuration problems map to CLI exit code 2, numerical failures to exit code 3.
"""
from typing import Any, Dict, Optional


class GeostabError(RuntimeError):
    """Base class for all library errors."""

    exit_code = 1

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})

    def to_dict(self) -> Dict[str, Any]:
        """Structured error object written by the CLI."""
        return {
            "error": type(self).__name__,
            "category": "configuration" if isinstance(self, ConfigurationError) else "numerical",
            "module": self.context.get("module"),
            "message": self.message,
            "context": {key: _plain(value) for key, value in self.context.items() if key != "module"},
        }


def _plain(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)


class ConfigurationError(GeostabError):
    exit_code = 2


class ExpressionSyntaxError(ConfigurationError):
    """Malformed expression text; `offset` is a byte offset into the UTF-8 source."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at byte {offset}", {"offset": offset, "text": text})
        self.offset = offset


class UnknownSymbol(ConfigurationError):
    def __init__(self, name: str, offset: Optional[int] = None):
        super().__init__(f"Unknown symbol: {name}", {"symbol": name, "offset": offset})
        self.name = name


class DimensionMismatch(ConfigurationError):
    pass


class ScenarioError(ConfigurationError):
    pass


class NumericalError(GeostabError):
    exit_code = 3


class DomainError(NumericalError):
    """Evaluation left the real domain (log/sqrt of a negative, division by zero)."""

    def __init__(self, message: str, node: Any = None):
        super().__init__(message, {"node": str(node) if node is not None else None})
        self.node = node


class EvaluationError(NumericalError):
    pass


class SingularMatrix(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class DegenerateMetric(NumericalError):
    pass


class DegenerateLagrangian(NumericalError):
    pass


class BoundaryPoint(NumericalError):
    pass


class FixedPointUntranslatable(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class MaxStepsExceeded(NumericalError):
    pass


class DegenerateStart(NumericalError):
    pass


class NegativeForm(NumericalError):
    pass


class DegenerateSeminorm(NumericalError):
    pass


class SeminormCollapse(NumericalError):
    """The propagated perturbation vanished under the seminorm; `partial` holds the estimate so far."""

    def __init__(self, message: str, partial: Any = None, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, context)
        self.partial = partial
