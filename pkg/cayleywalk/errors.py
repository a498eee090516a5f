import logging
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class CayleyWalkError(Exception):
    exit_code = 1

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}
        logger.error(f"{type(self).__name__}: {message}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": type(self).__name__,
            "message": self.message,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return str(value)


class ValidationError(CayleyWalkError):
    exit_code = 2


class PresentationSyntaxError(ValidationError):
    def __init__(self, message: str, line: int = 0, column: int = 0, context=None):
        ctx = dict(context or {})
        ctx.update({"line": line, "column": column})
        super().__init__(f"line {line}, column {column}: {message}", ctx)
        self.line = line
        self.column = column


class UnknownGroupError(ValidationError):
    pass


class UnsupportedGroupError(ValidationError):
    pass


class GeneratorMismatchError(ValidationError):
    pass


class WordError(ValidationError):
    pass


class InvalidParameterError(ValidationError):
    pass


class InsufficientRadiusError(ValidationError):
    pass


class InsufficientHeadroomError(ValidationError):
    pass


class PathDependenceError(ValidationError):
    pass


class NotExtendableError(ValidationError):
    pass


class CapExceededError(CayleyWalkError):
    exit_code = 3


class BallCapExceededError(CapExceededError):
    pass


class StabilizerCapExceededError(CapExceededError):
    pass


class InconclusiveError(CayleyWalkError):
    exit_code = 3


class ExtendabilityUnknownError(InconclusiveError):
    pass
