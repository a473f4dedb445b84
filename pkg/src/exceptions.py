"""Custom exceptions for the Lola stream monitor."""

from typing import Any, Dict, List, Optional


class LolaError(Exception):
    """Base exception for the stream monitor."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigurationError(LolaError):
    """Raised when configuration is invalid."""
    pass


class ParseError(LolaError):
    """Raised on lexical or syntax errors in a specification source."""

    def __init__(self, message: str, location: Any = None, details: Optional[Dict[str, Any]] = None):
        self.location = location
        text = f"{location}: {message}" if location is not None else message
        super().__init__(text, details)


class ExpandError(LolaError):
    """Raised when template expansion fails.

    ``reason`` is a short machine-readable tag (``depth``, ``guard``,
    ``unknown_template``, ``arity``, ``argument``, ``unknown_name``,
    ``duplicate`` or ``type``).
    """

    def __init__(
        self,
        message: str,
        reason: str,
        location: Any = None,
        backtrace: Optional[List[str]] = None,
    ):
        self.reason = reason
        self.location = location
        self.backtrace = list(backtrace or [])
        text = f"{location}: {message}" if location is not None else message
        if self.backtrace:
            text += "\n  while expanding:\n    " + "\n    ".join(reversed(self.backtrace))
        super().__init__(text, {"reason": reason})


class SpecificationError(LolaError):
    """Raised when stream names are duplicated or a reference is dangling."""
    pass


class TypeCheckError(LolaError):
    """Raised when one or more output bodies fail to elaborate."""

    def __init__(self, issues: List[Any]):
        self.issues = list(issues)
        lines = "\n".join(f"  {issue}" for issue in self.issues)
        super().__init__(f"{len(self.issues)} type error(s):\n{lines}")


class DuplicateFunction(LolaError):
    """Raised when a function symbol is registered twice."""
    pass


class ContractViolation(LolaError):
    """Raised when a function symbol is applied to ill-typed arguments."""
    pass


class EvaluationError(LolaError):
    """Raised when a function application fails at runtime (division by zero)."""

    def __init__(self, message: str, stream: Optional[str] = None, instant: Optional[int] = None):
        self.reason = message
        self.stream = stream
        self.instant = instant
        text = message if stream is None else f"{stream}@{instant}: {message}"
        super().__init__(text, {"stream": stream, "instant": instant})

    def at(self, stream: str, instant: int) -> "EvaluationError":
        """Return a copy located at a stream cell."""
        return EvaluationError(self.reason, stream=stream, instant=instant)


class IllDefinedSpecification(LolaError):
    """Raised when the dependency graph has a zero-weight closed path."""
    pass


class NotEfficientlyMonitorable(LolaError):
    """Raised when the engine is given a specification with a positive cycle."""
    pass


class EngineError(LolaError):
    """Base class for incremental engine failures."""
    pass


class MissingInput(EngineError):
    """Raised when an event lacks a declared input."""
    pass


class UnknownInput(EngineError):
    """Raised when an event carries a field that is not a declared input."""
    pass


class TypeMismatch(EngineError):
    """Raised when an event value has the wrong type."""
    pass


class EventAfterFinish(EngineError):
    """Raised when an event is pushed after end of input."""
    pass


class DoubleFinish(EngineError):
    """Raised when finish is called twice."""
    pass


class WindowViolation(EngineError):
    """Raised when an evicted instant is demanded."""
    pass


class WriteOnceViolation(EngineError):
    """Raised when a resolved cell would be overwritten."""
    pass


class InputError(LolaError):
    """Raised when a trace line cannot be converted into an event."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        text = f"line {line_number}: {message}" if line_number is not None else message
        super().__init__(text, {"line": line_number})
