"""Template expansion: surface specifications to flat stream declarations."""

from collections import deque
from dataclasses import dataclass, replace
from typing import Deque, Dict, List, Optional, Tuple, Union

from src.config import settings
from src.exceptions import ExpandError, SpecificationError
from src.functions import BINARY_OPERATORS, UNARY_OPERATORS, builtin_registry, registry_with_enums
from src.logger import app_logger
from src.parser import (
    ParamKind, SBinary, SCall, SExpr, SIf, SIndex, SLiteral, SName, SUnary,
    SourceLocation, SurfaceSpec, Template, TypeRef,
)
from src.syntax import App, At, Expr, Input, Leaf, Now, Output, Specification, mangle_name
from src.values import BOOL, FLOAT, INT, TEXT, Value, ValueType, enum_type, enum_value, int_value

_SCALARS = {"bool": BOOL, "int": INT, "float": FLOAT, "text": TEXT}


@dataclass(frozen=True)
class _IntArg:
    value: int


@dataclass(frozen=True)
class _StreamArg:
    name: str


@dataclass(frozen=True)
class _ValueArg:
    expr: Expr


Binding = Union[_IntArg, _StreamArg, _ValueArg]
Env = Dict[str, Binding]


@dataclass
class _Instance:
    """A pending stream instantiation; ``parent`` links the backtrace."""
    name: str
    body: SExpr
    env: Env
    depth: int
    frame: str
    parent: Optional["_Instance"]


@dataclass(frozen=True)
class _Context:
    instance: Optional[_Instance] = None
    inline_trail: Tuple[str, ...] = ()

    @property
    def depth(self) -> int:
        return self.instance.depth if self.instance else 0

    def backtrace(self, *extra: str) -> List[str]:
        frames: List[str] = []
        node = self.instance
        while node is not None:
            frames.append(node.frame)
            node = node.parent
        frames.reverse()
        return frames + list(self.inline_trail) + list(extra)


class Expander:
    """Expands templates into memoized, mangled output streams."""

    def __init__(self, surface: SurfaceSpec, max_depth: Optional[int] = None):
        self.surface = surface
        self.max_depth = max_depth or settings.max_expansion_depth
        self.templates = surface.templates
        self.enums: Dict[str, ValueType] = {}
        self.variants: Dict[str, Optional[Value]] = {}
        self.stream_types: Dict[str, ValueType] = {}
        self.user_streams: set = set()
        self.generated: Dict[str, Optional[Output]] = {}
        self.worklist: Deque[_Instance] = deque()
        self.function_names: set = set()

    # Declarations

    def _declare_enums(self) -> None:
        for decl in self.surface.enums:
            try:
                declared = enum_type(decl.name, decl.variants)
            except SpecificationError as e:
                raise ExpandError(e.message, "type", decl.loc)
            existing = self.enums.get(decl.name)
            if existing is not None and existing != declared:
                raise ExpandError(f"enum {decl.name} declared twice with different variants",
                                  "duplicate", decl.loc)
            if existing is not None:
                continue
            self.enums[decl.name] = declared
            for variant in declared.variants:
                # a variant shared by two enums is ambiguous when written bare
                self.variants[variant] = None if variant in self.variants else enum_value(declared, variant)

    def resolve_type(self, ref: TypeRef) -> ValueType:
        if ref.name in _SCALARS:
            return _SCALARS[ref.name]
        if ref.name in self.enums:
            return self.enums[ref.name]
        raise ExpandError(f"unknown type {ref.name}", "type", ref.loc)

    def _declare_stream(self, name: str, ref: TypeRef, loc: SourceLocation) -> None:
        if name in self.stream_types:
            raise ExpandError(f"stream {name} is declared twice", "duplicate", loc)
        if name in self.templates:
            raise ExpandError(f"stream {name} has the name of a template", "duplicate", loc)
        if name in self.variants:
            raise ExpandError(f"stream {name} has the name of an enum variant", "duplicate", loc)
        self.stream_types[name] = self.resolve_type(ref)
        self.user_streams.add(name)

    # Entry point

    def expand(self) -> Specification:
        self._declare_enums()
        registry = registry_with_enums(builtin_registry(), self.enums.values())
        self.function_names = registry.names()
        for decl in self.surface.inputs:
            self._declare_stream(decl.name, decl.type, decl.loc)
        for decl in self.surface.outputs:
            self._declare_stream(decl.name, decl.type, decl.loc)

        inputs = [Input(d.name, self.stream_types[d.name]) for d in self.surface.inputs]
        outputs: List[Output] = []
        try:
            for decl in self.surface.outputs:
                body = self.translate(decl.body, {}, _Context())
                outputs.append(Output(decl.name, self.stream_types[decl.name], body))
                self._drain()
        except RecursionError:
            raise ExpandError("template unfolding exceeds the interpreter recursion limit", "depth")

        generated = [self.generated[name] for name in sorted(self.generated)]
        app_logger.debug(f"expanded {len(outputs)} outputs into {len(generated)} generated streams")
        return Specification(tuple(inputs + outputs + generated), registry, tuple(self.enums.values()))

    def _drain(self) -> None:
        while self.worklist:
            instance = self.worklist.popleft()
            body = self.translate(instance.body, instance.env, _Context(instance))
            self.generated[instance.name] = Output(instance.name, self.stream_types[instance.name], body)

    # Expressions

    def translate(self, expr: SExpr, env: Env, ctx: _Context) -> Expr:
        if isinstance(expr, SLiteral):
            return Leaf(expr.value)
        if isinstance(expr, SName):
            return self._name(expr, env, ctx)
        if isinstance(expr, SIndex):
            stream = self._stream_of(expr.target, env, ctx)
            offset = self.eval_int(expr.offset, env, ctx)
            return At(stream, offset, self.translate(expr.default, env, ctx))
        if isinstance(expr, SCall):
            return self._call(expr, env, ctx)
        if isinstance(expr, SUnary):
            return App(UNARY_OPERATORS[expr.op], (self.translate(expr.operand, env, ctx),))
        if isinstance(expr, SBinary):
            left = self.translate(expr.left, env, ctx)
            return App(BINARY_OPERATORS[expr.op], (left, self.translate(expr.right, env, ctx)))
        if isinstance(expr, SIf):
            args = tuple(self.translate(part, env, ctx) for part in (expr.cond, expr.then, expr.other))
            return App("ite", args)
        raise ExpandError(f"unsupported expression {expr!r}", "argument")

    def _name(self, expr: SName, env: Env, ctx: _Context) -> Expr:
        binding = env.get(expr.name)
        if isinstance(binding, _IntArg):
            return Leaf(int_value(binding.value))
        if isinstance(binding, _StreamArg):
            return Now(binding.name)
        if isinstance(binding, _ValueArg):
            return binding.expr
        if expr.name in self.stream_types:
            return Now(expr.name)
        if expr.name in self.variants:
            value = self.variants[expr.name]
            if value is None:
                raise ExpandError(f"variant {expr.name} belongs to several enums", "unknown_name",
                                  expr.loc, ctx.backtrace())
            return Leaf(value)
        if expr.name in self.templates:
            return self._call(SCall(expr.name, (), expr.loc), env, ctx)
        raise ExpandError(f"unknown name {expr.name}", "unknown_name", expr.loc, ctx.backtrace())

    def _call(self, call: SCall, env: Env, ctx: _Context) -> Expr:
        template = self.templates.get(call.name)
        if template is None:
            if call.name not in self.function_names:
                raise ExpandError(f"unknown template or function {call.name}", "unknown_template",
                                  call.loc, ctx.backtrace())
            return App(call.name, tuple(self.translate(arg, env, ctx) for arg in call.args))
        if template.inline:
            return self._inline(template, call, env, ctx)
        return Now(self._instantiate(template, call, env, ctx, at_now=True))

    def _stream_of(self, target: SExpr, env: Env, ctx: _Context) -> str:
        """Stream name denoted by an argument or an offset-access target."""
        if isinstance(target, SName):
            binding = env.get(target.name)
            if isinstance(binding, _StreamArg):
                return binding.name
            if binding is not None:
                raise ExpandError(f"parameter {target.name} is not a stream", "argument",
                                  target.loc, ctx.backtrace())
            if target.name in self.stream_types:
                return target.name
            template = self.templates.get(target.name)
            if template is not None:
                return self._stream_of(SCall(target.name, (), target.loc), env, ctx)
            raise ExpandError(f"unknown stream {target.name}", "unknown_name", target.loc, ctx.backtrace())
        if isinstance(target, SCall):
            template = self.templates.get(target.name)
            if template is None:
                raise ExpandError(f"{target.name}(...) does not denote a stream", "argument",
                                  target.loc, ctx.backtrace())
            if template.inline:
                result = self._inline(template, target, env, ctx)
                if isinstance(result, Now):
                    return result.stream
                raise ExpandError(f"inline template {target.name} does not denote a stream", "argument",
                                  target.loc, ctx.backtrace())
            return self._instantiate(template, target, env, ctx, at_now=False)
        raise ExpandError("expected a stream", "argument", getattr(target, "loc", None), ctx.backtrace())

    # Instantiation

    def _bind(self, template: Template, call: SCall, env: Env, ctx: _Context) -> Tuple[Env, list]:
        if len(call.args) != len(template.params):
            raise ExpandError(
                f"{template.name} takes {len(template.params)} argument(s), got {len(call.args)}",
                "arity", call.loc, ctx.backtrace())
        bound: Env = {}
        mangled: list = []
        for param, arg in zip(template.params, call.args):
            if param.kind is ParamKind.INT:
                number = self.eval_int(arg, env, ctx)
                bound[param.name] = _IntArg(number)
                mangled.append(number)
            elif param.kind is ParamKind.STREAM:
                stream = self._stream_of(arg, env, ctx)
                expected = self.resolve_type(param.type)
                if self.stream_types[stream] != expected:
                    raise ExpandError(
                        f"{template.name}: stream {stream} has type {self.stream_types[stream]}, "
                        f"parameter {param.name} needs {expected}", "type", call.loc, ctx.backtrace())
                bound[param.name] = _StreamArg(stream)
                mangled.append(stream)
            else:
                expr = self.translate(arg, env, ctx)
                if not isinstance(expr, Leaf):
                    if not template.inline:
                        raise ExpandError(
                            f"value parameter {param.name} of {template.name} needs a constant",
                            "argument", call.loc, ctx.backtrace())
                elif expr.value.type != self.resolve_type(param.type):
                    raise ExpandError(
                        f"{template.name}: parameter {param.name} needs {param.type.name}, "
                        f"got {expr.value.type}", "type", call.loc, ctx.backtrace())
                bound[param.name] = _ValueArg(expr)
                mangled.append(expr.value if isinstance(expr, Leaf) else None)
        return bound, mangled

    def _select(self, template: Template, bound: Env, call: SCall, ctx: _Context) -> SExpr:
        for clause in template.clauses:
            if clause.guard is None or self.eval_guard(clause.guard, bound, ctx):
                return clause.body
        shown = ", ".join(f"{k}={v.value}" for k, v in bound.items() if isinstance(v, _IntArg))
        raise ExpandError(f"no guard of {template.name} holds for {shown or 'these arguments'}",
                          "guard", call.loc, ctx.backtrace())

    def _instantiate(self, template: Template, call: SCall, env: Env, ctx: _Context, at_now: bool) -> str:
        bound, params = self._bind(template, call, env, ctx)
        name = mangle_name(template.name, params)
        frame = f"{name} at {call.loc}"
        if at_now and ctx.instance is not None and ctx.instance.name == name:
            raise ExpandError(f"{name} is defined by itself at the same instant and never unfolds",
                              "depth", call.loc, ctx.backtrace(frame))
        if name in self.generated:
            return name
        if name in self.user_streams:
            raise ExpandError(f"instance {name} clashes with a declared stream", "duplicate",
                              call.loc, ctx.backtrace())
        depth = ctx.depth + 1
        if depth > self.max_depth:
            raise ExpandError(f"template expansion deeper than {self.max_depth}", "depth",
                              call.loc, ctx.backtrace(frame))
        body = self._select(template, bound, call, ctx)
        self.generated[name] = None
        self.stream_types[name] = self.resolve_type(template.result)
        self.worklist.append(_Instance(name, body, bound, depth, frame, ctx.instance))
        return name

    def _inline(self, template: Template, call: SCall, env: Env, ctx: _Context) -> Expr:
        bound, _ = self._bind(template, call, env, ctx)
        frame = f"inline {template.name} at {call.loc}"
        if len(ctx.inline_trail) >= self.max_depth:
            raise ExpandError(f"inline unfolding deeper than {self.max_depth}", "depth",
                              call.loc, ctx.backtrace(frame))
        body = self._select(template, bound, call, ctx)
        return self.translate(body, bound, replace(ctx, inline_trail=ctx.inline_trail + (frame,)))

    # Compile-time integer arithmetic

    def eval_int(self, expr: SExpr, env: Env, ctx: _Context) -> int:
        if isinstance(expr, SLiteral) and expr.value.type == INT:
            return expr.value.payload
        if isinstance(expr, SName):
            binding = env.get(expr.name)
            if isinstance(binding, _IntArg):
                return binding.value
            raise ExpandError(f"{expr.name} is not an integer parameter", "guard",
                              expr.loc, ctx.backtrace())
        if isinstance(expr, SUnary) and expr.op == "-":
            return -self.eval_int(expr.operand, env, ctx)
        if isinstance(expr, SBinary) and expr.op in ("+", "-", "*", "/"):
            left = self.eval_int(expr.left, env, ctx)
            right = self.eval_int(expr.right, env, ctx)
            if expr.op == "+":
                return left + right
            if expr.op == "-":
                return left - right
            if expr.op == "*":
                return left * right
            if right == 0:
                raise ExpandError("division by zero in integer parameter arithmetic", "guard",
                                  expr.loc, ctx.backtrace())
            quotient = abs(left) // abs(right)
            return -quotient if (left < 0) != (right < 0) else quotient
        raise ExpandError("expected integer arithmetic over integer parameters", "guard",
                          getattr(expr, "loc", None), ctx.backtrace())

    def eval_guard(self, expr: SExpr, env: Env, ctx: _Context) -> bool:
        if isinstance(expr, SLiteral) and expr.value.type == BOOL:
            return expr.value.payload
        if isinstance(expr, SUnary) and expr.op == "!":
            return not self.eval_guard(expr.operand, env, ctx)
        if isinstance(expr, SBinary):
            if expr.op == "&&":
                return self.eval_guard(expr.left, env, ctx) and self.eval_guard(expr.right, env, ctx)
            if expr.op == "||":
                return self.eval_guard(expr.left, env, ctx) or self.eval_guard(expr.right, env, ctx)
            if expr.op == "->":
                return (not self.eval_guard(expr.left, env, ctx)) or self.eval_guard(expr.right, env, ctx)
            comparisons = {
                "==": lambda a, b: a == b, "/=": lambda a, b: a != b,
                "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
                ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
            }
            if expr.op in comparisons:
                return comparisons[expr.op](self.eval_int(expr.left, env, ctx), self.eval_int(expr.right, env, ctx))
        raise ExpandError("guards compare integer parameters", "guard",
                          getattr(expr, "loc", None), ctx.backtrace())


def expand(surface: SurfaceSpec, max_depth: Optional[int] = None) -> Specification:
    """Flatten ``surface`` into an untyped Specification."""
    return Expander(surface, max_depth).expand()
