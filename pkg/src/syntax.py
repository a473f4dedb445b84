"""Expression trees, stream declarations and the typed specification."""

import json
import re
from dataclasses import dataclass, field, replace
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

from src.exceptions import SpecificationError, TypeCheckError
from src.functions import BINARY_OPERATORS, FunctionRegistry, FunctionSymbol, builtin_registry
from src.values import Kind, Value, ValueType

KEYWORDS = frozenset({
    "data", "input", "output", "define", "inline", "if", "then", "else",
    "true", "false", "bool", "int", "float", "text", "stream", "value", "otherwise",
})
IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


# Expressions

@dataclass(frozen=True)
class Leaf:
    value: Value


@dataclass(frozen=True)
class App:
    """Function application. ``symbol`` is filled in by type checking."""
    name: str
    args: Tuple["Expr", ...]
    symbol: Optional[FunctionSymbol] = None


@dataclass(frozen=True)
class Now:
    stream: str


@dataclass(frozen=True)
class At:
    """Offset access ``stream[offset, default]``; the default is evaluated at the current instant."""
    stream: str
    offset: int
    default: "Expr"


Expr = Union[Leaf, App, Now, At]


# Declarations

@dataclass(frozen=True)
class Input:
    name: str
    type: ValueType


@dataclass(frozen=True)
class Output:
    name: str
    type: ValueType
    body: Expr


StreamDecl = Union[Input, Output]


@dataclass(frozen=True)
class Specification:
    """Ordered stream declarations plus the function registry they are checked against."""
    decls: Tuple[StreamDecl, ...]
    registry: FunctionRegistry = field(default_factory=builtin_registry, compare=False, repr=False)
    enums: Tuple[ValueType, ...] = ()
    typed: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "decls", tuple(self.decls))
        object.__setattr__(self, "enums", tuple(self.enums))
        index: Dict[str, StreamDecl] = {}
        for decl in self.decls:
            if decl.name in index:
                raise SpecificationError(f"stream {decl.name} is declared twice")
            index[decl.name] = decl
        object.__setattr__(self, "_index", index)
        for decl in self.outputs:
            for stream, _ in free_streams(decl.body):
                if stream not in index:
                    raise SpecificationError(f"{decl.name} refers to undeclared stream {stream}")

    @property
    def inputs(self) -> List[Input]:
        return [d for d in self.decls if isinstance(d, Input)]

    @property
    def outputs(self) -> List[Output]:
        return [d for d in self.decls if isinstance(d, Output)]

    @property
    def names(self) -> List[str]:
        return [d.name for d in self.decls]

    def decl(self, name: str) -> StreamDecl:
        return self._index[name]

    def stream_type(self, name: str) -> ValueType:
        return self._index[name].type

    def __contains__(self, name: str) -> bool:
        return name in self._index


# Type checking

@dataclass(frozen=True)
class TypeCheckIssue:
    """A type error located by stream name and child-index path into the body."""
    stream: str
    path: Tuple[int, ...]
    expected: Optional[ValueType]
    found: Optional[ValueType]
    message: str

    def __str__(self) -> str:
        where = self.stream + "".join(f".{i}" for i in self.path)
        parts = [f"{where}: {self.message}"]
        if self.expected is not None:
            parts.append(f"expected {self.expected}")
        if self.found is not None:
            parts.append(f"found {self.found}")
        return ", ".join(parts)


class _Elaborator:
    def __init__(self, spec: Specification, stream: str, issues: List[TypeCheckIssue]):
        self.spec = spec
        self.stream = stream
        self.issues = issues

    def _issue(self, path, expected, found, message):
        self.issues.append(TypeCheckIssue(self.stream, path, expected, found, message))

    def elaborate(self, expr: Expr, path: Tuple[int, ...]) -> Tuple[Expr, Optional[ValueType]]:
        if isinstance(expr, Leaf):
            return expr, expr.value.type
        if isinstance(expr, Now):
            return expr, self.spec.stream_type(expr.stream)
        if isinstance(expr, At):
            stream_type = self.spec.stream_type(expr.stream)
            default, found = self.elaborate(expr.default, path + (0,))
            if found is not None and found != stream_type:
                self._issue(path + (0,), stream_type, found,
                            f"default of {expr.stream}[{expr.offset}, ...] has the wrong type")
            return replace(expr, default=default), stream_type

        elaborated = [self.elaborate(arg, path + (i,)) for i, arg in enumerate(expr.args)]
        args = tuple(arg for arg, _ in elaborated)
        arg_types = [t for _, t in elaborated]
        if any(t is None for t in arg_types):
            return replace(expr, args=args), None
        symbol = self.spec.registry.lookup(expr.name, arg_types)
        if symbol is None:
            signature = ", ".join(str(t) for t in arg_types)
            self._issue(path, None, None, f"unknown function {expr.name}({signature})")
            return replace(expr, args=args), None
        return App(expr.name, args, symbol), symbol.result_type


def type_check(spec: Specification) -> Specification:
    """Elaborate every output body; raises TypeCheckError listing all issues."""
    issues: List[TypeCheckIssue] = []
    decls: List[StreamDecl] = []
    for decl in spec.decls:
        if isinstance(decl, Input):
            decls.append(decl)
            continue
        body, found = _Elaborator(spec, decl.name, issues).elaborate(decl.body, ())
        if found is not None and found != decl.type:
            issues.append(TypeCheckIssue(decl.name, (), decl.type, found,
                                         "body does not have the declared type"))
        decls.append(replace(decl, body=body))
    if issues:
        raise TypeCheckError(issues)
    return replace(spec, decls=tuple(decls), typed=True)


# Names

def _render_parameter(param: Any) -> str:
    if isinstance(param, Value):
        text = render_value(param)
    elif isinstance(param, bool):
        text = "true" if param else "false"
    else:
        text = str(param)
    return text.replace("<", "\\u003c").replace(">", "\\u003e")


def mangle_name(base: str, params: Sequence[Any] = ()) -> str:
    """Name of a template instance, e.g. ``since<p><q>`` or ``carrier_prd<3><p>``."""
    if not base:
        raise ValueError("mangle_name needs a base name")
    return base + "".join(f"<{_render_parameter(p)}>" for p in params)


def free_streams(expr: Expr) -> Set[Tuple[str, int]]:
    """(stream, offset) pairs read by ``expr``, defaults included."""
    if isinstance(expr, Leaf):
        return set()
    if isinstance(expr, Now):
        return {(expr.stream, 0)}
    if isinstance(expr, At):
        return {(expr.stream, expr.offset)} | free_streams(expr.default)
    found: Set[Tuple[str, int]] = set()
    for arg in expr.args:
        found |= free_streams(arg)
    return found


def referenced_streams(expr: Expr) -> FrozenSet[str]:
    return frozenset(name for name, _ in free_streams(expr))


def may_fail(expr: Expr) -> bool:
    """Whether evaluating ``expr`` can raise an EvaluationError (division or modulo)."""
    if isinstance(expr, At):
        return may_fail(expr.default)
    if isinstance(expr, App):
        return (expr.symbol is not None and expr.symbol.may_fail) or any(may_fail(a) for a in expr.args)
    return False


# Pretty printing

_INFIX = {symbol: op for op, symbol in BINARY_OPERATORS.items()}


def render_name(name: str) -> str:
    if IDENTIFIER.match(name) and name not in KEYWORDS:
        return name
    return f"`{name}`"


def render_value(value: Value) -> str:
    kind = value.type.kind
    if kind is Kind.BOOL:
        return "true" if value.payload else "false"
    if kind is Kind.FLOAT:
        return repr(value.payload)
    if kind is Kind.TEXT:
        return json.dumps(value.payload)
    return str(value.payload)


def render_type(value_type: ValueType) -> str:
    return str(value_type)


def _render(expr: Expr, top: bool) -> str:
    if isinstance(expr, Leaf):
        text = render_value(expr.value)
        return f"({text})" if text.startswith("-") and not top else text
    if isinstance(expr, Now):
        return render_name(expr.stream)
    if isinstance(expr, At):
        return f"{render_name(expr.stream)}[{expr.offset}, {_render(expr.default, True)}]"
    if len(expr.args) == 2 and expr.name in _INFIX:
        text = f"{_render(expr.args[0], False)} {_INFIX[expr.name]} {_render(expr.args[1], False)}"
    elif len(expr.args) == 3 and expr.name == "ite":
        cond, then, other = (_render(arg, True) for arg in expr.args)
        text = f"if {cond} then {then} else {other}"
    else:
        args = ", ".join(_render(arg, True) for arg in expr.args)
        return f"{render_name(expr.name)}({args})"
    return text if top else f"({text})"


def render_expr(expr: Expr) -> str:
    """Surface syntax for ``expr``; nested operators are fully parenthesized."""
    return _render(expr, True)


def render_spec(spec: Specification) -> str:
    """Surface syntax for a flat specification. Re-parsing yields an equal one."""
    lines = [f"data {e.name} = {' | '.join(e.variants)}" for e in spec.enums]
    for decl in spec.decls:
        if isinstance(decl, Input):
            lines.append(f"input {render_type(decl.type)} {render_name(decl.name)}")
        else:
            lines.append(f"output {render_type(decl.type)} {render_name(decl.name)} = {render_expr(decl.body)}")
    return "\n".join(lines) + "\n"
