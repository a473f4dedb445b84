"""JSON Lines traces: input events in, output rows out."""

import json
from pathlib import Path
from typing import Any, Dict, Iterator, List, Literal, Optional, TextIO, Tuple, Type, Union

from pydantic import (
    BaseModel, ConfigDict, Field, StrictBool, StrictFloat, StrictInt, StrictStr, ValidationError, create_model,
)

from src.engine import OutputRow
from src.exceptions import InputError
from src.syntax import Specification
from src.values import (
    INT_MAX, INT_MIN, Kind, Value, ValueType, bool_value, enum_value, float_value, int_value, text_value,
)

Event = Dict[str, Value]


def _field_type(value_type: ValueType) -> Any:
    kind = value_type.kind
    if kind is Kind.BOOL:
        return StrictBool
    if kind is Kind.INT:
        return StrictInt
    if kind is Kind.FLOAT:
        return Union[StrictInt, StrictFloat]
    if kind is Kind.TEXT:
        return StrictStr
    return Literal[value_type.variants]


def _field_info(value_type: ValueType, name: str) -> Any:
    if value_type.kind is Kind.INT:
        return Field(..., alias=name, ge=INT_MIN, le=INT_MAX)
    return Field(..., alias=name)


def _to_value(value_type: ValueType, raw: Any) -> Value:
    kind = value_type.kind
    if kind is Kind.BOOL:
        return bool_value(raw)
    if kind is Kind.INT:
        return int_value(raw)
    if kind is Kind.FLOAT:
        return float_value(raw)
    if kind is Kind.TEXT:
        return text_value(raw)
    return enum_value(value_type, raw)


class EventDecoder:
    """Validates trace lines against the declared inputs of a specification."""

    def __init__(self, spec: Specification):
        self.inputs: List[Tuple[str, str, ValueType]] = [
            (f"input_{i}", decl.name, decl.type) for i, decl in enumerate(spec.inputs)
        ]
        fields = {
            attr: (_field_type(value_type), _field_info(value_type, name))
            for attr, name, value_type in self.inputs
        }
        self.model: Type[BaseModel] = create_model(
            "TraceEvent", __config__=ConfigDict(extra="forbid"), **fields)

    def decode(self, line: str, line_number: Optional[int] = None) -> Event:
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"malformed JSON: {e.msg}", line_number)
        if not isinstance(payload, dict):
            raise InputError("expected a JSON object with one field per input", line_number)
        try:
            record = self.model.model_validate(payload)
        except ValidationError as e:
            error = e.errors()[0]
            where = ".".join(str(part) for part in error["loc"])
            if error["type"] == "missing":
                message = f"missing field {where}"
            elif error["type"] == "extra_forbidden":
                message = f"unknown field {where}"
            else:
                message = f"{where}: {error['msg']}"
            raise InputError(message, line_number)
        return {name: _to_value(value_type, getattr(record, attr)) for attr, name, value_type in self.inputs}


def read_event_line(line: str, spec: Specification, line_number: Optional[int] = None) -> Event:
    """Parse one JSON object into an input event."""
    return EventDecoder(spec).decode(line, line_number)


def iter_events(stream: TextIO, spec: Specification) -> Iterator[Tuple[int, Event]]:
    """(line number, event) for every non-blank line."""
    decoder = EventDecoder(spec)
    for number, line in enumerate(stream, start=1):
        if line.strip():
            yield number, decoder.decode(line, number)


def load_trace(path: Union[str, Path], spec: Specification) -> List[Event]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return [event for _, event in iter_events(handle, spec)]
    except OSError as e:
        raise InputError(f"cannot read {path}: {str(e)}")
    except UnicodeDecodeError as e:
        raise InputError(f"{path} is not valid UTF-8: {str(e)}")


def write_row(row: OutputRow) -> str:
    """One compact JSON object; ``instant`` first, then outputs in declaration order."""
    return json.dumps(row.to_dict(), separators=(",", ":"), ensure_ascii=False)


def write_trace(events: List[Event]) -> str:
    """JSON Lines text for a list of events."""
    return "".join(
        json.dumps({name: value.to_json() for name, value in event.items()}, separators=(",", ":")) + "\n"
        for event in events
    )
