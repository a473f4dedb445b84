"""Runtime value universe for the Lola stream monitor."""

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Tuple

from src.exceptions import SpecificationError

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1


class Kind(Enum):
    """The five kinds of stream payload."""
    BOOL = "bool"
    INT = "int"
    FLOAT = "float"
    TEXT = "text"
    ENUM = "enum"


@dataclass(frozen=True)
class ValueType:
    """Type of a stream. Enum types carry their name and ordered variants."""
    kind: Kind
    name: str = ""
    variants: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind is Kind.ENUM:
            if not self.name:
                raise SpecificationError("enum type needs a name")
            if not self.variants:
                raise SpecificationError(f"enum {self.name} has no variants")
            if len(set(self.variants)) != len(self.variants):
                raise SpecificationError(f"enum {self.name} repeats a variant")
        elif self.name or self.variants:
            raise SpecificationError(f"{self.kind.value} type takes no name or variants")

    @property
    def is_enum(self) -> bool:
        return self.kind is Kind.ENUM

    def __str__(self) -> str:
        return self.name if self.is_enum else self.kind.value


BOOL = ValueType(Kind.BOOL)
INT = ValueType(Kind.INT)
FLOAT = ValueType(Kind.FLOAT)
TEXT = ValueType(Kind.TEXT)
SCALAR_TYPES = (BOOL, INT, FLOAT, TEXT)


def enum_type(name: str, variants: Iterable[str]) -> ValueType:
    """Build an enum ValueType."""
    return ValueType(Kind.ENUM, name, tuple(variants))


def wrap_int(n: int) -> int:
    """Two's complement wrap into the signed 64-bit range."""
    return ((n - INT_MIN) % (2 ** 64)) + INT_MIN


@dataclass(frozen=True)
class Value:
    """A typed runtime value."""
    type: ValueType
    payload: Any

    def to_json(self) -> Any:
        """Plain JSON-compatible payload; enum values become variant strings."""
        return self.payload

    def __str__(self) -> str:
        kind = self.type.kind
        if kind is Kind.BOOL:
            return "true" if self.payload else "false"
        if kind is Kind.TEXT:
            return json.dumps(self.payload)
        return str(self.payload)


def type_of(value: Value) -> ValueType:
    return value.type


def bool_value(b: bool) -> Value:
    return Value(BOOL, bool(b))


def int_value(n: int) -> Value:
    return Value(INT, wrap_int(int(n)))


def float_value(x: float) -> Value:
    return Value(FLOAT, float(x))


def text_value(s: str) -> Value:
    return Value(TEXT, str(s))


def enum_value(value_type: ValueType, variant: str) -> Value:
    """Build an enum value; the variant must belong to the type."""
    if not value_type.is_enum:
        raise SpecificationError(f"{value_type} is not an enum type")
    if variant not in value_type.variants:
        raise SpecificationError(f"{variant} is not a variant of {value_type.name}")
    return Value(value_type, variant)


TRUE = bool_value(True)
FALSE = bool_value(False)
