"""Lexer and recursive-descent parser for ``.lola`` specification sources."""

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from src.exceptions import ParseError
from src.logger import app_logger
from src.syntax import IDENTIFIER, KEYWORDS
from src.values import INT_MAX, INT_MIN, FALSE, TRUE, Value, float_value, int_value, text_value


@dataclass(frozen=True)
class SourceLocation:
    line: int
    column: int
    source: str = "<spec>"

    def __str__(self) -> str:
        return f"{self.source}:{self.line}:{self.column}"


# Surface syntax

@dataclass(frozen=True)
class SLiteral:
    value: Value
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class SName:
    name: str
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class SCall:
    name: str
    args: Tuple["SExpr", ...]
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class SIndex:
    target: Union[SName, SCall]
    offset: "SExpr"
    default: "SExpr"
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class SUnary:
    op: str
    operand: "SExpr"
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class SBinary:
    op: str
    left: "SExpr"
    right: "SExpr"
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class SIf:
    cond: "SExpr"
    then: "SExpr"
    other: "SExpr"
    loc: SourceLocation = field(compare=False)


SExpr = Union[SLiteral, SName, SCall, SIndex, SUnary, SBinary, SIf]


@dataclass(frozen=True)
class TypeRef:
    name: str
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class EnumDecl:
    name: str
    variants: Tuple[str, ...]
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class InputDecl:
    type: TypeRef
    name: str
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class OutputDecl:
    type: TypeRef
    name: str
    body: SExpr
    loc: SourceLocation = field(compare=False)


class ParamKind(Enum):
    INT = "int"
    STREAM = "stream"
    VALUE = "value"


@dataclass(frozen=True)
class TemplateParam:
    name: str
    kind: ParamKind
    type: Optional[TypeRef]
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class GuardedBody:
    guard: Optional[SExpr]  # None means unconditional / otherwise
    body: SExpr
    loc: SourceLocation = field(compare=False)


@dataclass(frozen=True)
class Template:
    name: str
    params: Tuple[TemplateParam, ...]
    result: TypeRef
    clauses: Tuple[GuardedBody, ...]
    inline: bool
    loc: SourceLocation = field(compare=False)


@dataclass
class SurfaceSpec:
    """Parsed declarations of one or more sources, in order."""
    enums: List[EnumDecl] = field(default_factory=list)
    inputs: List[InputDecl] = field(default_factory=list)
    templates: Dict[str, Template] = field(default_factory=dict)
    outputs: List[OutputDecl] = field(default_factory=list)

    def merge(self, other: "SurfaceSpec") -> "SurfaceSpec":
        """Combine with a later source; its templates shadow earlier ones."""
        templates = dict(self.templates)
        for name, template in other.templates.items():
            if name in templates:
                app_logger.debug(f"template {name} at {template.loc} shadows {templates[name].loc}")
            templates[name] = template
        return SurfaceSpec(
            enums=self.enums + other.enums,
            inputs=self.inputs + other.inputs,
            templates=templates,
            outputs=self.outputs + other.outputs,
        )


# Lexer

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    loc: SourceLocation

    def describe(self) -> str:
        return "end of input" if self.kind == "EOF" else repr(self.text)


_TOKEN_SPEC = [
    ("COMMENT", r"--[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r\f]+"),
    ("FLOAT", r"\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+"),
    ("INT", r"\d+"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("QUOTED", r"`[^`\n]+`"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"\|\||&&|==|/=|<=|>=|->|[<>+\-*/!()\[\],=|]"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))
_MANGLED = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(<.*>)?\Z")


def tokenize(source: str, source_name: str = "<spec>") -> List[Token]:
    tokens: List[Token] = []
    line, line_start = 1, 0
    for match in _TOKEN_RE.finditer(source):
        kind, text = match.lastgroup, match.group()
        loc = SourceLocation(line, match.start() - line_start + 1, source_name)
        if kind == "NEWLINE":
            line, line_start = line + 1, match.end()
            continue
        if kind in ("SKIP", "COMMENT"):
            continue
        if kind == "MISMATCH":
            raise ParseError(f"unexpected character {text!r}", loc)
        if kind == "QUOTED":
            text = text[1:-1]
            if not _MANGLED.match(text):
                raise ParseError(f"malformed quoted name {text!r}", loc)
            kind = "IDENT"
        elif kind == "IDENT" and text in KEYWORDS:
            kind = "KEYWORD"
        tokens.append(Token(kind, text, loc))
    tokens.append(Token("EOF", "", SourceLocation(line, len(source) - line_start + 1, source_name)))
    return tokens


# Parser

_DECL_KEYWORDS = ("data", "input", "output", "define")
_COMPARISONS = ("==", "/=", "<", "<=", ">", ">=")
_SCALAR_TYPE_KEYWORDS = ("bool", "int", "float", "text")


class Parser:
    """Recursive-descent parser producing a SurfaceSpec."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != "EOF":
            self.pos += 1
        return token

    def check(self, kind: str, text: Optional[str] = None) -> bool:
        token = self.peek()
        return token.kind == kind and (text is None or token.text == text)

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.check(kind, text):
            return self.advance()
        return None

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        if self.check(kind, text):
            return self.advance()
        token = self.peek()
        wanted = what or (repr(text) if text else kind.lower())
        raise ParseError(f"expected {wanted}, found {token.describe()}", token.loc)

    def _unclosed(self, opener: Token) -> ParseError:
        return ParseError(f"unclosed {opener.text!r}", opener.loc, {"unclosed": True})

    def _close(self, closer: str, opener: Token) -> Token:
        if self.check("EOF"):
            raise self._unclosed(opener)
        return self.expect("OP", closer)

    def _enclosed(self, opener: Token, parse):
        try:
            return parse()
        except ParseError as e:
            if self.check("EOF") and not e.details.get("unclosed"):
                raise self._unclosed(opener) from None
            raise

    # Declarations

    def parse_spec(self) -> SurfaceSpec:
        surface = SurfaceSpec()
        while not self.check("EOF"):
            token = self.peek()
            if token.kind != "KEYWORD" or token.text not in _DECL_KEYWORDS:
                raise ParseError(f"expected a declaration, found {token.describe()}", token.loc)
            if token.text == "data":
                surface.enums.append(self.parse_enum())
            elif token.text == "input":
                surface.inputs.append(self.parse_input())
            elif token.text == "output":
                surface.outputs.append(self.parse_output())
            else:
                template = self.parse_template()
                if template.name in surface.templates:
                    raise ParseError(f"template {template.name} is defined twice", template.loc)
                surface.templates[template.name] = template
        return surface

    def parse_name(self, what: str = "identifier") -> Token:
        token = self.expect("IDENT", what=what)
        return token

    def parse_type(self) -> TypeRef:
        token = self.peek()
        if token.kind == "KEYWORD" and token.text in _SCALAR_TYPE_KEYWORDS:
            self.advance()
            return TypeRef(token.text, token.loc)
        if token.kind == "IDENT" and IDENTIFIER.match(token.text):
            self.advance()
            return TypeRef(token.text, token.loc)
        raise ParseError(f"expected a type, found {token.describe()}", token.loc)

    def parse_enum(self) -> EnumDecl:
        start = self.expect("KEYWORD", "data")
        name = self.parse_name("enum name")
        self.expect("OP", "=")
        variants = [self.parse_name("variant").text]
        while self.accept("OP", "|"):
            variants.append(self.parse_name("variant").text)
        return EnumDecl(name.text, tuple(variants), start.loc)

    def parse_input(self) -> InputDecl:
        start = self.expect("KEYWORD", "input")
        value_type = self.parse_type()
        name = self.parse_name("stream name")
        return InputDecl(value_type, name.text, start.loc)

    def parse_output(self) -> OutputDecl:
        start = self.expect("KEYWORD", "output")
        value_type = self.parse_type()
        name = self.parse_name("stream name")
        self.expect("OP", "=")
        return OutputDecl(value_type, name.text, self.parse_expr(), start.loc)

    def parse_param(self) -> TemplateParam:
        token = self.peek()
        if self.accept("KEYWORD", "int"):
            return TemplateParam(self.parse_name("parameter name").text, ParamKind.INT, None, token.loc)
        for keyword, kind in (("stream", ParamKind.STREAM), ("value", ParamKind.VALUE)):
            if self.accept("KEYWORD", keyword):
                value_type = self.parse_type()
                return TemplateParam(self.parse_name("parameter name").text, kind, value_type, token.loc)
        raise ParseError(f"expected a parameter (int, stream or value), found {token.describe()}", token.loc)

    def parse_template(self) -> Template:
        start = self.expect("KEYWORD", "define")
        inline = self.accept("KEYWORD", "inline") is not None
        result = self.parse_type()
        name = self.parse_name("template name")
        opener = self.expect("OP", "(")
        params: List[TemplateParam] = []
        if not self.check("OP", ")"):
            params.append(self.parse_param())
            while self.accept("OP", ","):
                params.append(self.parse_param())
        self._close(")", opener)
        seen = set()
        for param in params:
            if param.name in seen:
                raise ParseError(f"parameter {param.name} repeated in {name.text}", param.loc)
            seen.add(param.name)

        clauses: List[GuardedBody] = []
        if self.accept("OP", "="):
            clauses.append(GuardedBody(None, self.parse_expr(), start.loc))
        else:
            while self.check("OP", "|"):
                bar = self.advance()
                guard = None if self.accept("KEYWORD", "otherwise") else self.parse_expr()
                self.expect("OP", "=")
                clauses.append(GuardedBody(guard, self.parse_expr(), bar.loc))
            if not clauses:
                token = self.peek()
                raise ParseError(f"expected '=' or a guard, found {token.describe()}", token.loc)
        return Template(name.text, tuple(params), result, tuple(clauses), inline, start.loc)

    # Expressions, loosest to tightest

    def parse_expr(self) -> SExpr:
        if self.check("KEYWORD", "if"):
            return self.parse_if()
        return self.parse_implies()

    def parse_if(self) -> SIf:
        start = self.expect("KEYWORD", "if")
        cond = self.parse_expr()
        self.expect("KEYWORD", "then")
        then = self.parse_expr()
        self.expect("KEYWORD", "else")
        return SIf(cond, then, self.parse_expr(), start.loc)

    def parse_implies(self) -> SExpr:
        left = self.parse_or()
        token = self.accept("OP", "->")
        if token:
            right = self.parse_expr()
            return SBinary("->", left, right, token.loc)
        return left

    def _left_assoc(self, operators, operand) -> SExpr:
        left = operand()
        while self.peek().kind == "OP" and self.peek().text in operators:
            token = self.advance()
            left = SBinary(token.text, left, operand(), token.loc)
        return left

    def parse_or(self) -> SExpr:
        return self._left_assoc(("||",), self.parse_and)

    def parse_and(self) -> SExpr:
        return self._left_assoc(("&&",), self.parse_comparison)

    def parse_comparison(self) -> SExpr:
        left = self.parse_additive()
        if self.peek().kind == "OP" and self.peek().text in _COMPARISONS:
            token = self.advance()
            return SBinary(token.text, left, self.parse_additive(), token.loc)
        return left

    def parse_additive(self) -> SExpr:
        return self._left_assoc(("+", "-"), self.parse_multiplicative)

    def parse_multiplicative(self) -> SExpr:
        return self._left_assoc(("*", "/"), self.parse_unary)

    def parse_unary(self) -> SExpr:
        token = self.peek()
        if self.accept("OP", "-"):
            if self.peek().kind in ("INT", "FLOAT"):
                return self.parse_number(negative=True, loc=token.loc)
            return SUnary("-", self.parse_unary(), token.loc)
        if self.accept("OP", "!"):
            return SUnary("!", self.parse_unary(), token.loc)
        return self.parse_postfix()

    def parse_number(self, negative: bool = False, loc: Optional[SourceLocation] = None) -> SLiteral:
        token = self.advance()
        loc = loc or token.loc
        if token.kind == "FLOAT":
            number = float(token.text)
            return SLiteral(float_value(-number if negative else number), loc)
        number = -int(token.text) if negative else int(token.text)
        if not INT_MIN <= number <= INT_MAX:
            raise ParseError(f"integer literal {number} out of 64-bit range", loc)
        return SLiteral(int_value(number), loc)

    def parse_postfix(self) -> SExpr:
        token = self.peek()
        if token.kind != "IDENT":
            return self.parse_primary()
        self.advance()
        target: Union[SName, SCall] = SName(token.text, token.loc)
        if self.check("OP", "("):
            opener = self.advance()
            args = self._enclosed(opener, self.parse_arguments)
            self._close(")", opener)
            target = SCall(token.text, tuple(args), token.loc)
        if self.check("OP", "["):
            opener = self.advance()

            def parse_access():
                offset = self.parse_expr()
                self.expect("OP", ",")
                return offset, self.parse_expr()

            offset, default = self._enclosed(opener, parse_access)
            self._close("]", opener)
            return SIndex(target, offset, default, opener.loc)
        return target

    def parse_arguments(self) -> List[SExpr]:
        if self.check("OP", ")"):
            return []
        args = [self.parse_expr()]
        while self.accept("OP", ","):
            args.append(self.parse_expr())
        return args

    def parse_primary(self) -> SExpr:
        token = self.peek()
        if token.kind in ("INT", "FLOAT"):
            return self.parse_number()
        if token.kind == "STRING":
            self.advance()
            return SLiteral(text_value(json.loads(token.text)), token.loc)
        if self.accept("KEYWORD", "true"):
            return SLiteral(TRUE, token.loc)
        if self.accept("KEYWORD", "false"):
            return SLiteral(FALSE, token.loc)
        if self.check("KEYWORD", "if"):
            return self.parse_if()
        if self.check("OP", "("):
            opener = self.advance()
            inner = self._enclosed(opener, self.parse_expr)
            self._close(")", opener)
            return inner
        raise ParseError(f"expected an expression, found {token.describe()}", token.loc)


def parse_spec(source: str, source_name: str = "<spec>") -> SurfaceSpec:
    """Parse one specification source."""
    surface = Parser(tokenize(source, source_name)).parse_spec()
    app_logger.debug(
        f"parsed {source_name}: {len(surface.inputs)} inputs, {len(surface.outputs)} outputs, "
        f"{len(surface.templates)} templates"
    )
    return surface


def parse_file(path: Union[str, Path]) -> SurfaceSpec:
    path = Path(path)
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {str(e)}")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not valid UTF-8: {str(e)}")
    return parse_spec(source, str(path))
