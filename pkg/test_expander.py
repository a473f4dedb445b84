"""
Test Template Expansion
=======================

Stream and inline templates, memoized instances, guards and expansion errors.
"""

import pytest

from src.exceptions import ExpandError
from src.expander import expand
from src.parser import parse_spec
from src.stdlib import (
    compile_source, experiment_templates, ltl_past_templates, mtl_templates, mtltl_templates,
    utils_templates,
)
from src.syntax import Now, Output, render_expr, render_spec, type_check

CHAIN = (
    "define bool chain(int n, stream bool p)\n"
    "  | n == 0 = p\n"
    "  | n > 0 = chain(n - 1, p)[-1, false]\n"
    "input bool s\n"
)


def body_of(spec, name):
    return render_expr(spec.decl(name).body)


def expand_error(compile_spec, text, **options):
    with pytest.raises(ExpandError) as info:
        compile_spec(text, **options)
    return info.value


def test_once_instantiates_a_mangled_stream(compile_spec):
    spec = compile_spec("input bool s\noutput bool o = once(s)")
    assert spec.names == ["s", "o", "once<s>"]
    assert spec.decl("o").body == Now("once<s>")
    assert body_of(spec, "once<s>") == "`once<s>`[-1, false] || s"


def test_equal_instances_share_one_stream(compile_spec):
    spec = compile_spec("input bool s\noutput bool a = once(s)\noutput bool b = !once(s)")
    assert [d.name for d in spec.outputs] == ["a", "b", "once<s>"]


def test_eventually_unfolds_in_place(compile_spec):
    spec = compile_spec("input bool p\noutput bool e = eventually(0, 2, p)")
    assert spec.names == ["p", "e"]
    assert body_of(spec, "e") == "(p[0, false] || p[1, false]) || p[2, false]"


def test_eventually_and_always_unfold_into_balanced_trees(compile_spec):
    spec = compile_spec("input bool p\noutput bool e = eventually(0, 3, p)\noutput bool a = always(-1, 2, p)")
    assert body_of(spec, "e") == "(p[0, false] || p[1, false]) || (p[2, false] || p[3, false])"
    assert body_of(spec, "a") == "(p[-1, true] && p[0, true]) && (p[1, true] && p[2, true])"


@pytest.mark.parametrize("call, leaves", [
    ("eventually(0, 1000, p)", 1001),
    ("always(0, 1000, p)", 1001),
    ("mt_eventually(300, p)", 301),
])
def test_wide_intervals_unfold_within_the_depth_limit(compile_spec, call, leaves):
    spec = compile_spec(f"input bool p\noutput bool o = {call}")
    assert spec.names == ["p", "o"]
    assert body_of(spec, "o").count("p[") == leaves


def test_until_builds_a_chain_of_streams(compile_spec):
    spec = compile_spec("input bool p\ninput bool q\noutput bool u = until(-1, 1, p, q)")
    chain = ["until<-1><1><p><q>", "until<0><1><p><q>", "until<1><1><p><q>"]
    assert spec.names == ["p", "q", "u"] + chain
    assert body_of(spec, chain[2]) == "q[1, false]"
    assert body_of(spec, chain[0]) == "q[-1, false] || (p[-1, true] && `until<0><1><p><q>`)"


def test_mission_time_operators_delegate_to_bounded_ones(compile_spec):
    spec = compile_spec("input bool p\noutput bool e = mt_eventually(0, p)\noutput bool a = mt_always(1, p)")
    assert body_of(spec, "e") == "p[0, false]"
    assert body_of(spec, "a") == "p[0, true] && p[1, true]"


def test_self_recursion_at_the_same_instant_is_rejected(compile_spec):
    error = expand_error(compile_spec, "define bool loop(stream bool p) = loop(p)\ninput bool s\noutput bool o = loop(s)")
    assert error.reason == "depth"
    assert any("loop<s>" in frame for frame in error.backtrace)


def test_max_depth_bounds_instantiation(compile_spec):
    error = expand_error(compile_spec, CHAIN + "output bool c = chain(50, s)", max_depth=10)
    assert error.reason == "depth"
    assert len(error.backtrace) >= 10
    assert "while expanding" in str(error)


def test_long_chains_expand_without_native_recursion(compile_spec):
    spec = compile_spec(CHAIN + "output bool c = chain(2000, s)")
    assert len(spec.outputs) == 2002
    assert body_of(spec, "chain<0><s>") == "s"
    assert body_of(spec, "chain<1><s>") == "`chain<0><s>`[-1, false]"


@pytest.mark.parametrize("text, reason", [
    ("input bool p\ninput bool q\noutput bool u = until(2, 1, p, q)", "guard"),
    ("input bool p\noutput bool e = mt_eventually(-1, p)", "guard"),
    ("input bool s\noutput bool o = foo(s)", "unknown_template"),
    ("input bool s\noutput bool o = once(s, s)", "arity"),
    ("input int n\noutput bool o = once(n)", "type"),
    ("input bool s\noutput bool o = t", "unknown_name"),
    ("input bool once\noutput bool o = once", "duplicate"),
    ("input bool s\noutput bool s = true", "duplicate"),
    ("data A = X | Y\ndata B = X\noutput bool o = X == X", "unknown_name"),
    ("data A = X | Y\ninput bool X", "duplicate"),
    ("input Missing m", "type"),
])
def test_expansion_errors(compile_spec, text, reason):
    assert expand_error(compile_spec, text).reason == reason


def test_value_parameters_of_stream_templates_need_constants(compile_spec):
    template = "define int plus(value int c, stream int s) = s + c\ninput int s\n"
    assert expand_error(compile_spec, template + "output int o = plus(s, s)").reason == "argument"
    spec = compile_spec(template + "output int o = plus(3, s)")
    assert body_of(spec, "plus<3><s>") == "s + 3"


def test_user_templates_shadow_library_templates(compile_spec):
    spec = compile_spec("define bool once(stream bool p) = p\ninput bool s\noutput bool o = once(s)")
    assert body_of(spec, "once<s>") == "s"


def test_expansion_is_independent_of_output_order(compile_spec):
    first = compile_spec("input bool a\ninput bool b\noutput bool x = once(a)\noutput bool y = since(a, b)")
    second = compile_spec("input bool a\ninput bool b\noutput bool y = since(a, b)\noutput bool x = once(a)")
    assert first.decls[4:] == second.decls[4:]
    assert set(first.decls) == set(second.decls)


def test_expanded_specs_are_flat_and_round_trip(compile_spec):
    spec = compile_spec(
        "data SndrState = Get | Send | WaitForAck\n"
        "input SndrState st\ninput bool p\ninput bool q\ninput int n\n"
        "output bool h = historically(since(p, q))\n"
        "output bool u = until(-1, 1, p, q)\n"
        "output int total = nsum(n, 3) - (-2)\n"
        "output bool w = if st == WaitForAck then yesterday(p) else mt_always(2, q)\n"
    )
    assert all(isinstance(d, Output) or d.name in ("st", "p", "q", "n") for d in spec.decls)
    again = compile_source(render_spec(spec), "<rendered>", include_stdlib=False)
    assert again == spec


def test_type_check_is_idempotent_after_expansion():
    surface = parse_spec("input bool s\noutput int n = n[-1, 0] + toint(s)")
    typed = type_check(expand(surface))
    assert type_check(typed) == typed


@pytest.mark.parametrize("loader", [
    ltl_past_templates, mtl_templates, mtltl_templates, utils_templates, experiment_templates,
])
def test_library_bundles_load(loader):
    templates = loader()
    assert templates
    assert all(template.clauses for template in templates.values())


@pytest.mark.parametrize("call", [
    "once(p)", "historically(p)", "yesterday(p)", "since(p, q)",
    "eventually(-3, 5, p)", "always(0, 4, q)", "until(-2, 3, p, q)",
    "mt_eventually(3, p)", "mt_always(0, p)", "mt_until(2, p, q)",
])
def test_library_templates_expand_and_type_check(compile_spec, call):
    spec = compile_spec(f"input bool p\ninput bool q\noutput bool o = {call}")
    assert spec.typed
    assert all(isinstance(d, Output) for d in spec.decls[2:])


def test_without_the_standard_library_templates_are_unknown(compile_spec):
    error = expand_error(compile_spec, "input bool s\noutput bool o = once(s)", include_stdlib=False)
    assert error.reason == "unknown_template"
