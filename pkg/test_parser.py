"""
Test Parser
===========

Tokens, declarations, templates, precedence and error locations.
"""

import pytest

from src.exceptions import ParseError
from src.parser import (
    ParamKind, SBinary, SCall, SIf, SIndex, SLiteral, SName, SUnary, parse_file, parse_spec, tokenize,
)
from src.values import FALSE, float_value, int_value, text_value

ONCE = "input bool s\noutput bool once_s = once_s[-1,false] || s\n"


def body(text):
    return parse_spec(f"output bool x = {text}").outputs[0].body


def test_parses_once_example():
    surface = parse_spec(ONCE)
    assert len(surface.inputs) == 1 and len(surface.outputs) == 1
    assert surface.inputs[0].name == "s" and surface.inputs[0].type.name == "bool"
    output = surface.outputs[0]
    assert output.name == "once_s"
    assert output.body == SBinary(
        "||", SIndex(SName("once_s", None), SLiteral(int_value(-1), None), SLiteral(FALSE, None), None),
        SName("s", None), None)


def test_parses_counter_example():
    surface = parse_spec("input bool s\noutput int n_once_s = n_once_s[-1,0] + toint(s)")
    access, call = surface.outputs[0].body.left, surface.outputs[0].body.right
    assert isinstance(access, SIndex)
    assert access.offset == SLiteral(int_value(-1), None)
    assert access.default == SLiteral(int_value(0), None)
    assert call == SCall("toint", (SName("s", None),), None)


def test_unclosed_bracket_is_reported_at_the_bracket():
    with pytest.raises(ParseError) as info:
        parse_spec("output bool x = x[")
    assert info.value.location.line == 1
    assert info.value.location.column == 18
    assert "unclosed" in str(info.value)


def test_unclosed_paren_inside_brackets_reports_the_inner_one():
    with pytest.raises(ParseError) as info:
        parse_spec("output bool x = x[-1, (true")
    assert info.value.location.column == 23


def test_literals():
    assert body("1.5") == SLiteral(float_value(1.5), None)
    assert body("2e3") == SLiteral(float_value(2000.0), None)
    assert body('"a\\"b"') == SLiteral(text_value('a"b'), None)
    assert body("-3") == SLiteral(int_value(-3), None)
    assert body("-x") == SUnary("-", SName("x", None), None)
    with pytest.raises(ParseError):
        body("99999999999999999999")


def test_precedence_and_associativity():
    assert body("a || b && c") == SBinary("||", SName("a", None),
                                          SBinary("&&", SName("b", None), SName("c", None), None), None)
    implies = body("a -> b -> c")
    assert implies.op == "->" and implies.right.op == "->"
    assert body("a + b * c").right.op == "*"
    assert body("a - b - c").left.op == "-"
    assert body("1 + 2 < 4").op == "<"
    assert body("!a && b").left == SUnary("!", SName("a", None), None)
    conditional = body("if a then 1 else if b then 2 else 3")
    assert isinstance(conditional, SIf) and isinstance(conditional.other, SIf)


def test_comparisons_do_not_chain():
    with pytest.raises(ParseError):
        parse_spec("output bool x = 1 < 2 < 3")


def test_comments_and_blank_lines_are_skipped():
    surface = parse_spec("-- header\n\ninput bool s -- trailing\n\noutput bool y = s\n")
    assert [o.name for o in surface.outputs] == ["y"]


def test_lexical_errors_carry_line_and_column():
    with pytest.raises(ParseError) as info:
        parse_spec("input bool s\noutput bool y = s # s")
    assert info.value.location.line == 2
    assert info.value.location.column == 19
    with pytest.raises(ParseError):
        parse_spec("output bool if = true")


def test_backquoted_names_are_identifiers():
    tokens = tokenize("`historically<p>`[-1, true]")
    assert tokens[0].kind == "IDENT" and tokens[0].text == "historically<p>"
    assert body("`once<s>`[-1, false]").target == SName("once<s>", None)
    with pytest.raises(ParseError):
        tokenize("`1abc`")


def test_enum_declarations():
    surface = parse_spec("data SndrState = Get | Send | WaitForAck\ninput SndrState st")
    assert surface.enums[0].variants == ("Get", "Send", "WaitForAck")
    assert surface.inputs[0].type.name == "SndrState"


def test_template_declarations():
    surface = parse_spec(
        "define bool until(int a, int b, stream bool p, stream bool q)\n"
        "  | a == b = q[b, false]\n"
        "  | otherwise = q[a, false] || (p[a, true] && until(a + 1, b, p, q))\n"
        "define inline bool same(value int c, stream int s) = c == s\n"
    )
    until = surface.templates["until"]
    assert [p.kind for p in until.params] == [ParamKind.INT, ParamKind.INT, ParamKind.STREAM, ParamKind.STREAM]
    assert until.params[2].type.name == "bool"
    assert not until.inline
    assert until.clauses[0].guard.op == "=="
    assert until.clauses[1].guard is None
    same = surface.templates["same"]
    assert same.inline and same.params[0].kind is ParamKind.VALUE
    assert len(same.clauses) == 1 and same.clauses[0].guard is None


def test_template_errors():
    with pytest.raises(ParseError):
        parse_spec("define bool t(stream bool p) = p\ndefine bool t(stream bool p) = p")
    with pytest.raises(ParseError):
        parse_spec("define bool t(stream bool p, int p) = p")
    with pytest.raises(ParseError):
        parse_spec("define bool t(bool p) = p")
    with pytest.raises(ParseError):
        parse_spec("define bool t(stream bool p) p")


def test_merge_lets_later_templates_shadow_earlier_ones():
    first = parse_spec("define bool t(stream bool p) = p\ninput bool a")
    second = parse_spec("define bool t(stream bool p) = !p\ninput bool b")
    merged = first.merge(second)
    assert isinstance(merged.templates["t"].clauses[0].body, SUnary)
    assert [i.name for i in merged.inputs] == ["a", "b"]
    assert isinstance(first.templates["t"].clauses[0].body, SName)


def test_parse_file(tmp_path):
    path = tmp_path / "once.lola"
    path.write_text(ONCE, encoding="utf-8")
    assert parse_file(path).outputs[0].name == "once_s"
    with pytest.raises(ParseError):
        parse_file(tmp_path / "missing.lola")
