import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ql1sim.errors import ParseError
from ql1sim.expr import (
    FUNCTIONS,
    BinOp,
    Call,
    CoeffFunction,
    Neg,
    Num,
    Pi,
    Var,
    evaluate,
    format_expr,
    parse_coeff_expr,
)


def test_sum_of_constant_and_tau():
    assert parse_coeff_expr("1+tau") == BinOp("+", Num(1.0), Var())


def test_power_of_function_call():
    assert parse_coeff_expr("sin(pi*tau)^2") == BinOp("^", Call("sin", BinOp("*", Pi(), Var())), Num(2.0))


def test_spike_expression_evaluates_at_peak():
    node = parse_coeff_expr("1/(1e-9+abs(tau-1))")
    assert evaluate(node, 1.0) == pytest.approx(1e9, rel=1e-12)


def test_precedence_and_associativity():
    f = CoeffFunction("-2^2 + 2^3^2 - 8/4/2")
    assert f(0.0) == pytest.approx(-4 + 512 - 1)
    assert CoeffFunction("2^-1")(0.0) == 0.5


def test_vectorized_evaluation():
    f = CoeffFunction("cos(pi*tau) + sqrt(tau) * exp(-tau)")
    taus = np.linspace(0, 2, 11)
    np.testing.assert_allclose(f(taus), np.cos(np.pi * taus) + np.sqrt(taus) * np.exp(-taus))


@pytest.mark.parametrize(
    "text, offset",
    [("1+", 2), ("(tau", 4), ("foo(tau)", 0), ("1 $ 2", 2), ("sin tau", 4), ("", 0), ("tau tau", 4)],
)
def test_parse_errors_carry_offset(text, offset):
    with pytest.raises(ParseError) as info:
        parse_coeff_expr(text)
    assert info.value.offset == offset
    assert info.value.expected


def _exprs(depth):
    leaves = st.one_of(
        st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(Num),
        st.just(Var()),
        st.just(Pi()),
    )
    if depth == 0:
        return leaves
    sub = st.deferred(lambda: _exprs(depth - 1))
    return st.one_of(
        leaves,
        sub.map(Neg),
        st.tuples(st.sampled_from(FUNCTIONS), sub).map(lambda p: Call(*p)),
        st.tuples(st.sampled_from("+-*/^"), sub, sub).map(lambda p: BinOp(*p)),
    )


@settings(max_examples=10_000, deadline=None)
@given(_exprs(8))
def test_print_parse_print_fixpoint(node):
    text = format_expr(node)
    again = parse_coeff_expr(text)
    assert format_expr(again) == text
    assert again == node
