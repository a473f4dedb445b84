"""
Test Value Model
================

Value types, the built-in function registry and simplifier soundness.
"""

import itertools

import pytest

from src.exceptions import ContractViolation, DuplicateFunction, EvaluationError, SpecificationError
from src.functions import (
    FunctionSymbol, apply_partial, apply_total, builtin_registry, register_function, registry_with_enums,
)
from src.values import (
    BOOL, FALSE, FLOAT, INT, INT_MAX, INT_MIN, TEXT, TRUE, Kind, ValueType,
    enum_type, enum_value, float_value, int_value, text_value, type_of,
)

SNDR = enum_type("SndrState", ["Get", "Send", "WaitForAck"])

DOMAINS = {
    BOOL: [TRUE, FALSE],
    INT: [int_value(n) for n in range(-2, 3)],
    FLOAT: [float_value(-1.5), float_value(0.0), float_value(2.0)],
    TEXT: [text_value(""), text_value("a")],
}


def lookup(name, *types):
    return builtin_registry().lookup(name, list(types))


def test_enum_types_validate_variants():
    with pytest.raises(SpecificationError):
        enum_type("Empty", [])
    with pytest.raises(SpecificationError):
        enum_type("Twice", ["A", "A"])
    with pytest.raises(SpecificationError):
        ValueType(Kind.INT, name="Int")
    assert enum_type("S", ["A", "B"]) == enum_type("S", ["A", "B"])
    assert enum_type("S", ["A", "B"]) != enum_type("S", ["B", "A"])


def test_enum_value_requires_a_member_variant():
    assert enum_value(SNDR, "Send").payload == "Send"
    assert type_of(enum_value(SNDR, "Get")) == SNDR
    with pytest.raises(SpecificationError):
        enum_value(SNDR, "Ack")


def test_int_values_wrap_to_64_bits():
    assert int_value(INT_MAX + 1).payload == INT_MIN
    assert int_value(INT_MIN - 1).payload == INT_MAX
    add = lookup("add", INT, INT)
    assert apply_total(add, [int_value(INT_MAX), int_value(1)]).payload == INT_MIN


def test_apply_total_examples():
    assert apply_total(lookup("or", BOOL, BOOL), [TRUE, FALSE]) == TRUE
    assert apply_total(lookup("toint", BOOL), [FALSE]) == int_value(0)
    assert apply_total(lookup("toint", BOOL), [TRUE]) == int_value(1)
    assert apply_total(lookup("ite", BOOL, INT, INT), [FALSE, int_value(3), int_value(7)]) == int_value(7)


def test_apply_total_rejects_ill_typed_arguments():
    with pytest.raises(ContractViolation):
        apply_total(lookup("or", BOOL, BOOL), [TRUE, int_value(1)])
    with pytest.raises(ContractViolation):
        apply_total(lookup("not", BOOL), [TRUE, TRUE])
    with pytest.raises(ContractViolation):
        apply_total(lookup("not", BOOL), [None])


def test_apply_partial_examples():
    ite = lookup("ite", BOOL, INT, INT)
    assert apply_partial(ite, [TRUE, None, int_value(5)]) is None
    assert apply_partial(ite, [FALSE, None, int_value(5)]) == int_value(5)
    assert apply_partial(lookup("or", BOOL, BOOL), [TRUE, None]) == TRUE
    assert apply_partial(lookup("and", BOOL, BOOL), [None, FALSE]) == FALSE
    assert apply_partial(lookup("add", INT, INT), [int_value(1), None]) is None
    assert apply_partial(lookup("implies", BOOL, BOOL), [FALSE, None]) is None


def test_integer_division_truncates_toward_zero():
    div, mod = lookup("div", INT, INT), lookup("mod", INT, INT)
    assert apply_total(div, [int_value(-7), int_value(2)]) == int_value(-3)
    assert apply_total(mod, [int_value(-7), int_value(2)]) == int_value(-1)
    assert apply_total(div, [int_value(7), int_value(-2)]) == int_value(-3)
    assert apply_total(mod, [int_value(7), int_value(-2)]) == int_value(1)
    with pytest.raises(EvaluationError):
        apply_total(div, [int_value(1), int_value(0)])
    with pytest.raises(EvaluationError):
        apply_total(mod, [int_value(1), int_value(0)])


def test_builtin_registry_lookup():
    assert lookup("or", BOOL, BOOL).simplify is not None
    assert lookup("add", INT, INT).simplify is None
    assert lookup("add", BOOL, BOOL) is None
    for value_type in (BOOL, INT, FLOAT, TEXT):
        assert lookup("eq", value_type, value_type) is not None
        assert lookup("ite", BOOL, value_type, value_type).result_type == value_type
    with_simplifier = {s.name for s in builtin_registry() if s.simplify is not None}
    assert with_simplifier == {"and", "or", "ite"}


def test_register_function():
    registry = builtin_registry()
    maximum = FunctionSymbol("max", (INT, INT), INT,
                             lambda args: int_value(max(a.payload for a in args)))
    extended = register_function(registry, maximum)
    assert extended.lookup("max", [INT, INT]) is maximum
    assert registry.lookup("max", [INT, INT]) is None
    assert len(extended) == len(registry) + 1

    with pytest.raises(DuplicateFunction):
        register_function(registry, FunctionSymbol("or", (BOOL, BOOL), BOOL, lambda args: TRUE))

    eq_state = FunctionSymbol("eqState", (SNDR, SNDR), BOOL,
                              lambda args: TRUE if args[0] == args[1] else FALSE)
    assert register_function(registry, eq_state).lookup("eqState", [SNDR, SNDR]) is eq_state


def test_registry_with_enums_adds_equality_and_ite():
    registry = registry_with_enums(builtin_registry(), [SNDR, SNDR])
    eq = registry.lookup("eq", [SNDR, SNDR])
    assert apply_total(eq, [enum_value(SNDR, "Get"), enum_value(SNDR, "Get")]) == TRUE
    assert registry.lookup("ite", [BOOL, SNDR, SNDR]) is not None
    other = enum_type("Other", ["Get"])
    assert registry.lookup("eq", [SNDR, other]) is None


def _completions(symbol, args):
    slots = [DOMAINS[t] if arg is None else [arg] for arg, t in zip(args, symbol.param_types)]
    return itertools.product(*slots)


def test_simplifiers_are_sound_exhaustively():
    checked = 0
    for symbol in builtin_registry():
        if symbol.simplify is None:
            continue
        options = [DOMAINS[t] + [None] for t in symbol.param_types]
        for args in itertools.product(*options):
            result = apply_partial(symbol, list(args))
            if all(arg is not None for arg in args):
                assert result == apply_total(symbol, list(args))
                assert type_of(result) == symbol.result_type
            elif result is not None:
                for completion in _completions(symbol, args):
                    assert apply_total(symbol, list(completion)) == result
                checked += 1
    assert checked > 0


def test_results_have_the_declared_result_type():
    for symbol in builtin_registry():
        if symbol.name in ("div", "mod"):
            continue
        for args in itertools.product(*(DOMAINS[t] for t in symbol.param_types)):
            assert type_of(apply_total(symbol, list(args))) == symbol.result_type
