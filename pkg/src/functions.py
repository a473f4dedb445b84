"""Interpreted function symbols and their registry."""

import operator
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from src.exceptions import ContractViolation, DuplicateFunction, EvaluationError
from src.values import (
    BOOL, FALSE, FLOAT, INT, SCALAR_TYPES, TRUE,
    Value, ValueType, bool_value, float_value, int_value,
)

TotalEval = Callable[[Sequence[Value]], Value]
Simplifier = Callable[[Sequence[Optional[Value]]], Optional[Value]]
SymbolKey = Tuple[str, Tuple[ValueType, ...]]


@dataclass(frozen=True)
class FunctionSymbol:
    """A function of the data theory with an optional partial-application rule.

    Symbols compare by signature; the callables are not part of identity.
    """
    name: str
    param_types: Tuple[ValueType, ...]
    result_type: ValueType
    total_eval: TotalEval = field(compare=False, repr=False)
    simplify: Optional[Simplifier] = field(default=None, compare=False, repr=False)
    # may raise EvaluationError on some arguments
    may_fail: bool = field(default=False, compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.param_types)

    @property
    def key(self) -> SymbolKey:
        return (self.name, self.param_types)

    def __str__(self) -> str:
        params = ", ".join(str(t) for t in self.param_types)
        return f"{self.name}({params}) -> {self.result_type}"


class FunctionRegistry:
    """Symbols keyed by (name, parameter types). Never mutated after construction."""

    def __init__(self, symbols: Iterable[FunctionSymbol] = ()):
        self._symbols: Dict[SymbolKey, FunctionSymbol] = {}
        for symbol in symbols:
            if symbol.key in self._symbols:
                raise DuplicateFunction(f"function {symbol} is already registered")
            self._symbols[symbol.key] = symbol

    def lookup(self, name: str, param_types: Sequence[ValueType]) -> Optional[FunctionSymbol]:
        return self._symbols.get((name, tuple(param_types)))

    def register(self, symbol: FunctionSymbol) -> "FunctionRegistry":
        """Return a new registry extended with ``symbol``."""
        return FunctionRegistry([*self._symbols.values(), symbol])

    def names(self) -> Set[str]:
        return {name for name, _ in self._symbols}

    def __contains__(self, key: SymbolKey) -> bool:
        return key in self._symbols

    def __iter__(self) -> Iterator[FunctionSymbol]:
        return iter(self._symbols.values())

    def __len__(self) -> int:
        return len(self._symbols)


def register_function(registry: FunctionRegistry, symbol: FunctionSymbol) -> FunctionRegistry:
    """Extend a registry; duplicates raise DuplicateFunction."""
    return registry.register(symbol)


def _check_arguments(symbol: FunctionSymbol, args: Sequence[Optional[Value]]) -> None:
    if len(args) != symbol.arity:
        raise ContractViolation(f"{symbol} applied to {len(args)} argument(s)")
    for arg, expected in zip(args, symbol.param_types):
        if arg is not None and arg.type != expected:
            raise ContractViolation(f"{symbol} applied to a {arg.type} argument")


def apply_total(symbol: FunctionSymbol, args: Sequence[Value]) -> Value:
    """Apply the total interpretation of ``symbol``."""
    if any(arg is None for arg in args):
        raise ContractViolation(f"{symbol} needs every argument")
    _check_arguments(symbol, args)
    return symbol.total_eval(args)


def apply_partial(symbol: FunctionSymbol, args: Sequence[Optional[Value]]) -> Optional[Value]:
    """Apply ``symbol`` to possibly absent arguments.

    With every argument present this is apply_total. Otherwise the symbol's
    simplifier decides, and symbols without one stay unresolved.
    """
    _check_arguments(symbol, args)
    if all(arg is not None for arg in args):
        return symbol.total_eval(args)
    if symbol.simplify is None:
        return None
    return symbol.simplify(args)


# Simplifiers

def _simplify_or(args: Sequence[Optional[Value]]) -> Optional[Value]:
    if any(arg is not None and arg.payload for arg in args):
        return TRUE
    return None


def _simplify_and(args: Sequence[Optional[Value]]) -> Optional[Value]:
    if any(arg is not None and not arg.payload for arg in args):
        return FALSE
    return None


def _simplify_ite(args: Sequence[Optional[Value]]) -> Optional[Value]:
    condition = args[0]
    if condition is None:
        return None
    return args[1] if condition.payload else args[2]


# Integer division truncates toward zero

def _int_div(a: int, b: int) -> Value:
    if b == 0:
        raise EvaluationError("division by zero")
    quotient = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        quotient = -quotient
    return int_value(quotient)


def _int_mod(a: int, b: int) -> Value:
    if b == 0:
        raise EvaluationError("modulo by zero")
    quotient = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        quotient = -quotient
    return int_value(a - b * quotient)


def _unary(name: str, arg_type: ValueType, result_type: ValueType,
           fn: Callable[[object], Value]) -> FunctionSymbol:
    return FunctionSymbol(name, (arg_type,), result_type, lambda args: fn(args[0].payload))


def _binary(name: str, arg_type: ValueType, result_type: ValueType,
            fn: Callable[[object, object], Value],
            simplify: Optional[Simplifier] = None, may_fail: bool = False) -> FunctionSymbol:
    return FunctionSymbol(
        name, (arg_type, arg_type), result_type,
        lambda args: fn(args[0].payload, args[1].payload),
        simplify, may_fail,
    )


def ite_symbol(value_type: ValueType) -> FunctionSymbol:
    """if-then-else returning ``value_type``."""
    return FunctionSymbol(
        "ite", (BOOL, value_type, value_type), value_type,
        lambda args: args[1] if args[0].payload else args[2],
        _simplify_ite,
    )


def equality_symbols(value_type: ValueType) -> List[FunctionSymbol]:
    """eq and neq over one type; enums only compare within themselves."""
    return [
        _binary("eq", value_type, BOOL, lambda a, b: bool_value(a == b)),
        _binary("neq", value_type, BOOL, lambda a, b: bool_value(a != b)),
    ]


def _numeric_symbols(value_type: ValueType, make: Callable[[object], Value]) -> List[FunctionSymbol]:
    symbols = [
        _binary(name, value_type, BOOL, lambda a, b, op=op: bool_value(op(a, b)))
        for name, op in (("lt", operator.lt), ("leq", operator.le),
                         ("gt", operator.gt), ("geq", operator.ge))
    ]
    symbols += [
        _binary(name, value_type, value_type, lambda a, b, op=op: make(op(a, b)))
        for name, op in (("add", operator.add), ("sub", operator.sub), ("mul", operator.mul))
    ]
    symbols.append(_unary("neg", value_type, value_type, lambda a: make(-a)))
    return symbols


def builtin_registry() -> FunctionRegistry:
    """Registry of the built-in theory: Booleans, arithmetic, equality and ite."""
    symbols = [
        _unary("not", BOOL, BOOL, lambda a: bool_value(not a)),
        _binary("and", BOOL, BOOL, lambda a, b: bool_value(a and b), _simplify_and),
        _binary("or", BOOL, BOOL, lambda a, b: bool_value(a or b), _simplify_or),
        _binary("implies", BOOL, BOOL, lambda a, b: bool_value((not a) or b)),
        _unary("toint", BOOL, INT, lambda a: int_value(1 if a else 0)),
        _binary("div", INT, INT, _int_div, may_fail=True),
        _binary("mod", INT, INT, _int_mod, may_fail=True),
    ]
    symbols += _numeric_symbols(INT, int_value)
    symbols += _numeric_symbols(FLOAT, float_value)
    for value_type in SCALAR_TYPES:
        symbols += equality_symbols(value_type)
        symbols.append(ite_symbol(value_type))
    return FunctionRegistry(symbols)


def registry_with_enums(registry: FunctionRegistry, enums: Iterable[ValueType]) -> FunctionRegistry:
    """Add eq, neq and ite for each enum type not yet covered."""
    symbols = list(registry)
    known = {s.key for s in symbols}
    for enum in enums:
        for symbol in equality_symbols(enum) + [ite_symbol(enum)]:
            if symbol.key not in known:
                symbols.append(symbol)
                known.add(symbol.key)
    return FunctionRegistry(symbols)


# Surface operators and the symbols they denote
BINARY_OPERATORS: Dict[str, str] = {
    "||": "or", "&&": "and", "->": "implies",
    "==": "eq", "/=": "neq", "<": "lt", "<=": "leq", ">": "gt", ">=": "geq",
    "+": "add", "-": "sub", "*": "mul", "/": "div",
}
UNARY_OPERATORS: Dict[str, str] = {"-": "neg", "!": "not"}
