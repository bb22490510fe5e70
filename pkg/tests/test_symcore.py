import math
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from jetfactor.symcore import (
    Add,
    Const,
    InconclusiveDomain,
    Mul,
    NonZero,
    OrderTooHigh,
    ParseError,
    Pow,
    ProbablyZero,
    ProbeBox,
    ProvenZero,
    SingularPoint,
    T,
    UnboundVariable,
    UnknownIdentifier,
    Var,
    Y,
    diff,
    eval_at,
    is_zero,
    parse_expr,
    print_expr,
    simplify,
    substitute,
)

from strategies import poly_trees, trees

t, y, y1, y2, y3 = Var(T), Var(Y(0)), Var(Y(1)), Var(Y(2)), Var(Y(3))


# ---- parse / print


def test_parse_power():
    assert parse_expr("y^3", max_order=3) == Pow(y, Const(3))


def test_parse_product_is_canonical():
    assert parse_expr("-2*t*y1") == Mul((Const(-2), t, y1))


def test_parse_scaled_example2_has_four_terms():
    e = parse_expr("y3 + y2 - 2*t*y^(-3)*y1 + y^(-2)", max_order=3)
    assert isinstance(e, Add) and len(e.args) == 4


def test_print_negative_power_and_zero():
    assert print_expr(Pow(y, Const(-3))) == "y^(-3)"
    assert print_expr(Const(0)) == "0"


def test_prime_sugar_and_whitespace():
    assert parse_expr("y''' +  y'") == parse_expr("y3+y1")


def test_decimal_literal_is_exact():
    assert parse_expr("0.1*t") == Mul((Const(Fraction(1, 10)), t))


def test_power_is_right_associative():
    assert parse_expr("t^2^2") == parse_expr("t^4")


def test_sqrt_becomes_half_power():
    assert parse_expr("sqrt(t)") == Pow(t, Const(Fraction(1, 2)))


def test_implicit_multiplication_rejected_with_offset():
    with pytest.raises(ParseError) as info:
        parse_expr("y2 + 2t")
    assert info.value.offset == 6
    assert "*" in str(info.value)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse_expr("foo(y)")


def test_order_too_high():
    with pytest.raises(OrderTooHigh):
        parse_expr("y4", max_order=3)


def test_dangling_operator():
    with pytest.raises(ParseError) as info:
        parse_expr("y +")
    assert info.value.offset == 3


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(trees)
def test_print_parse_round_trip(e):
    s = simplify(e)
    assert parse_expr(print_expr(s)) == s
    assert parse_expr(print_expr(e)) == s


# ---- diff


def test_diff_examples():
    assert diff(parse_expr("y^3"), Y(0)) == parse_expr("3*y^2")
    assert diff(parse_expr("-2*t"), T) == Const(-2)


def test_diff_treats_other_coordinates_as_constants():
    assert diff(parse_expr("t*y1^2"), Y(0)) == Const(0)


def _fd(e, v, point, h=1e-6):
    lo = dict(point)
    hi = dict(point)
    lo[v] -= h
    hi[v] += h
    return (eval_at(e, hi) - eval_at(e, lo)) / (2 * h)


@settings(max_examples=60, deadline=None)
@given(trees, st.sampled_from([T, Y(0), Y(1)]), st.floats(0.2, 1.5), st.floats(0.2, 1.5), st.floats(0.2, 1.5))
def test_diff_matches_finite_differences(e, v, a, b, c):
    point = {T: a, Y(0): b, Y(1): c}
    try:
        exact = eval_at(diff(e, v), point)
        approx = _fd(e, v, point)
    except SingularPoint:
        return
    if not (math.isfinite(exact) and abs(exact) < 1e6):
        return
    assert abs(exact - approx) <= 1e-6 * max(1.0, abs(exact)) + 1e-6


@settings(max_examples=50, deadline=None)
@given(trees, trees, st.fractions(-3, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4))
def test_diff_is_linear(f, g, a, b):
    lhs = diff(Const(a) * f + Const(b) * g, Y(0))
    rhs = Const(a) * diff(f, Y(0)) + Const(b) * diff(g, Y(0))
    try:
        assert is_zero(lhs - rhs).is_zero
    except InconclusiveDomain:
        pass


@settings(max_examples=100, deadline=None)
@given(trees)
def test_mixed_partials_commute(f):
    r = diff(diff(f, T), Y(1)) - diff(diff(f, Y(1)), T)
    try:
        assert is_zero(r).is_zero
    except InconclusiveDomain:
        pass


# ---- simplify / substitute / eval


def test_simplify_examples():
    assert simplify(y**3 * y ** (-3)) == Const(1)
    assert simplify(parse_expr("3*y^2") - parse_expr("3*y^2")) == Const(0)
    assert simplify((y**3 * y ** (-3) - 1) * parse_expr("exp(t)")) == Const(0)


def test_expansion_bound():
    assert isinstance(parse_expr("(t+y)^9"), Pow)
    assert isinstance(parse_expr("(t+y)^8"), Add)


@settings(max_examples=100, deadline=None)
@given(trees)
def test_simplify_idempotent(e):
    s = simplify(e)
    assert simplify(s) == s


@settings(max_examples=100, deadline=None)
@given(trees, st.floats(0.2, 1.5), st.floats(-1.5, -0.2), st.floats(0.2, 1.5))
def test_simplify_preserves_value(e, a, b, c):
    point = {T: a, Y(0): b, Y(1): c}
    try:
        raw = eval_at(e, point)
        canon = eval_at(simplify(e), point)
    except SingularPoint:
        return
    assert canon == pytest.approx(raw, rel=1e-12, abs=1e-12)


def test_substitute_examples():
    eta = Var(Y(0))
    e = Const(-2) * t * eta ** (-3)
    assert substitute(e, {T: 1}) == parse_expr("-2*y^(-3)")
    assert substitute(parse_expr("y*y1"), {Y(0): 0}) == Const(0)


def test_substitute_is_simultaneous():
    assert substitute(parse_expr("t + y"), {T: y, Y(0): t}) == parse_expr("t + y")


def test_substitute_agrees_with_eval():
    psi = parse_expr("y2 + y1 + t*y^(-2) + sin(t*y1)")
    pt = {T: Fraction(3, 10), Y(0): Fraction(-7, 5), Y(1): Fraction(1, 2), Y(2): Fraction(2)}
    folded = substitute(psi, {k: Const(v) for k, v in pt.items()})
    assert eval_at(folded, {}) == pytest.approx(eval_at(psi, pt), rel=1e-14)


def test_eval_examples():
    assert eval_at(parse_expr("y^(-3)"), {"y": 2}) == 0.125
    assert eval_at(parse_expr("y2 + y1 + t*y^(-2)"), {"t": 0, "y": 1, "y1": 1, "y2": 1}) == 2.0


def test_eval_errors():
    with pytest.raises(SingularPoint):
        eval_at(parse_expr("ln(y)"), {"y": -1})
    with pytest.raises(SingularPoint):
        eval_at(parse_expr("1/y"), {"y": 0})
    with pytest.raises(UnboundVariable):
        eval_at(parse_expr("t*y"), {"t": 1})


# ---- is_zero


def test_is_zero_exact_cancellation():
    assert isinstance(is_zero(parse_expr("3*y^2") - parse_expr("3*y^2")), ProvenZero)


def test_is_zero_example2_time_pair_is_nonzero():
    # dF1/dt - dF0/dy = -2 - 1
    v = is_zero(diff(parse_expr("-2*t"), T) - diff(y, Y(0)))
    assert isinstance(v, NonZero) and v.value == -3


def test_is_zero_square_expansion():
    v = is_zero(parse_expr("(y+1)^2 - y^2 - 2*y - 1"))
    # small integer powers are expanded, so the cancellation is exact
    assert isinstance(v, ProvenZero)


def test_is_zero_probes_identities_simplify_misses():
    v = is_zero(parse_expr("sin(t)^2 + cos(t)^2 - 1"))
    assert isinstance(v, ProbablyZero) and v.probes == 32 and v.max_residual < 1e-12


def test_nonzero_witness_reevaluates_above_tolerance():
    e = parse_expr("t*y - y*t + 1/1000*t^2")
    v = is_zero(e)
    assert isinstance(v, NonZero)
    assert abs(eval_at(e, v.witness)) > 1e-9


def test_is_zero_resamples_singular_points():
    # ln(t) is singular on half the default box; the identity is invisible to simplify
    v = is_zero(parse_expr("ln(t)*sin(y)^2 + ln(t)*cos(y)^2 - ln(t)"))
    assert isinstance(v, ProbablyZero) and v.probes == 32


def test_is_zero_inconclusive_domain():
    box = ProbeBox.uniform(-2, -0.1)
    with pytest.raises(InconclusiveDomain):
        is_zero(parse_expr("ln(t) + ln(t)^2"), box=box)


def test_is_zero_seed_determinism():
    e = parse_expr("exp(t) - 1 - t")
    assert is_zero(e, seed=7) == is_zero(e, seed=7)


@settings(max_examples=40, deadline=None)
@given(poly_trees)
def test_polynomial_identities_are_proven(e):
    # a polynomial minus its own expansion is an exact zero
    assert isinstance(is_zero(Add((e, Mul((Const(-1), simplify(e)))))), ProvenZero)
