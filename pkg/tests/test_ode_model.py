from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetfactor.calculus import total_derivative
from jetfactor.ode_model import (
    BasePointSingular,
    HighestCoeffZero,
    NotExact,
    NotQuasiLinear,
    OdeFormatError,
    VariableOutOfRange,
    WrongArity,
    ZeroFactor,
    apply_factor,
    defining_residual,
    exactness_report,
    first_integral,
    format_ode,
    make_ode,
    ode_from_first_integral,
    parse_ode_text,
    reduce_order,
    split_equation,
)
from jetfactor.symcore import Const, ProvenZero, T, Y, diff, is_zero, parse_expr

P = parse_expr


def coeffs(ode):
    return list(ode.coeffs)


def differs_by_constant(a, b, n):
    d = a - b
    return all(is_zero(diff(d, v)).is_zero for v in [T] + [Y(k) for k in range(n)])


# ---- construction


def test_make_ode_example2():
    ode = make_ode(3, [P("y"), P("-2*t"), P("y^3"), P("y^3")])
    assert ode.n == 3 and ode.lhs() == P("y^3*y3 + y^3*y2 - 2*t*y1 + y")


def test_make_ode_trivial_and_linear(linear_instance):
    assert coeffs(make_ode(1, [0, 1])) == [Const(0), Const(1)]
    assert coeffs(linear_instance) == [P("t*y - t"), P("t^2"), P("t")]


def test_make_ode_errors():
    with pytest.raises(WrongArity):
        make_ode(2, [P("y"), P("t")])
    with pytest.raises(HighestCoeffZero):
        make_ode(2, [P("y"), P("t"), P("t - t")])
    with pytest.raises(HighestCoeffZero):
        make_ode(1, [P("y"), P("sin(t)^2 + cos(t)^2 - 1")])
    with pytest.raises(VariableOutOfRange):
        make_ode(2, [P("y2"), P("t"), P("1")])


def test_split_example2(example2):
    assert coeffs(example2) == [P("y"), P("-2*t"), P("y^3"), P("y^3")]


def test_split_single_term():
    assert coeffs(split_equation(P("y2"), 2)) == [Const(0), Const(0), Const(1)]


def test_split_rejects_nonlinear_top():
    with pytest.raises(NotQuasiLinear):
        split_equation(P("(y2)^2"), 2)
    with pytest.raises(NotQuasiLinear):
        split_equation(P("y + sin(y2)"), 2)


def test_split_assigns_products_to_highest():
    ode = split_equation(P("y1*y2 + y1^2 + y"), 2)
    assert coeffs(ode) == [P("y"), P("y1"), P("y1")]


# ---- exactness


def test_example2_violates_exactly_three(example2):
    report = exactness_report(example2)
    assert not report.exact
    assert len(report.conditions) == 6
    assert sorted(c.pair for c in report.violated) == [(1, 0), (2, 1), (3, 1)]
    assert [c.label for c in report.violated] == [
        "dF1/dt = dF0/dy",
        "dF2/dy = dF1/dy1",
        "dF3/dy = dF1/dy2",
    ]


def test_exact_by_construction():
    ode = split_equation(total_derivative(P("y*y1"), 2), 2)
    assert exactness_report(ode).exact


def test_scaled_example2_is_exact(example2_scaled):
    assert exactness_report(example2_scaled).exact


def test_report_carries_count_note_and_seed(example2):
    report = exactness_report(example2)
    assert report.seed == 0
    assert "6 compatibility conditions" in report.notes[0]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_condition_count(n):
    ode = make_ode(n, [P("y")] + [Const(1)] * n)
    assert len(exactness_report(ode).conditions) == n * (n + 1) // 2


def test_constant_scaling_invariance(example2):
    a = exactness_report(example2)
    b = exactness_report(apply_factor(example2, Const(-7)))
    assert [c.holds for c in a.conditions] == [c.holds for c in b.conditions]


# ---- first integrals


def test_first_integral_scaled_example2(example2_scaled):
    fi = first_integral(example2_scaled, {"t": 0, "y": 1, "y1": 0, "y2": 0})
    assert fi.status == "Closed"
    assert fi.psi == P("y2 + y1 + t*y^(-2)")


def test_first_integral_product():
    ode = split_equation(total_derivative(P("y*y1"), 2), 2)
    assert first_integral(ode, {"t": 0, "y": 0, "y1": 0}).psi == P("y*y1")


def test_first_integral_trivial():
    ode = make_ode(1, [0, 1])
    assert first_integral(ode, {"t": 5, "y": 2}).psi == P("y - 2")


def test_default_base_retry(example2_scaled):
    fi = first_integral(example2_scaled)
    assert fi.base_point == {"t": 1, "y": 1, "y1": 1, "y2": 1}
    assert len(fi.attempts) == 1 and "F0" in fi.attempts[0]
    assert differs_by_constant(fi.psi, P("y2 + y1 + t*y^(-2)"), 3)


def test_explicit_singular_base(example2_scaled):
    with pytest.raises(BasePointSingular) as info:
        first_integral(example2_scaled, {"t": 0, "y": 0, "y1": 0, "y2": 0})
    assert info.value.base["y"] == 0


def test_all_defaults_singular():
    # singular at t=0 and at t=1, so zeros, ones and (0, 1) all fail
    ode = ode_from_first_integral(P("ln(y^2) + ln((t - 1)^2) + ln(t^2)"), 1)
    with pytest.raises(BasePointSingular) as info:
        first_integral(ode)
    assert "every default base point" in str(info.value)


def test_first_integral_requires_exactness(example2):
    with pytest.raises(NotExact):
        first_integral(example2)


def test_partially_closed():
    ode = ode_from_first_integral(P("y1 + y*exp(t^2)"), 2)
    fi = first_integral(ode, {"t": 0, "y": 0, "y1": 0})
    # the t-integral of 2*t*y*exp(t^2) is outside the table
    assert fi.status == "PartiallyClosed" and len(fi.blocked) == 1
    assert fi.psi == P("y + y1")


def test_base_point_independence(example2_scaled):
    a = first_integral(example2_scaled, {"t": 0, "y": 1, "y1": 0, "y2": 0}).psi
    b = first_integral(example2_scaled, {"t": 2, "y": -1, "y1": 3, "y2": 1}).psi
    assert differs_by_constant(a, b, 3)


# ---- factors and reduction


def test_apply_factor(example2, linear_instance):
    assert coeffs(apply_factor(example2, P("y^(-3)"))) == [P("y^(-2)"), P("-2*t*y^(-3)"), Const(1), Const(1)]
    assert apply_factor(example2, Const(1)) == example2
    assert coeffs(apply_factor(linear_instance, P("1/t"))) == [P("y - 1"), P("t"), Const(1)]
    with pytest.raises(ZeroFactor):
        apply_factor(example2, P("t - t"))


def test_reduce_order_examples(example2, linear_instance):
    red = reduce_order(example2, P("y^(-3)"), {"t": 0, "y": 1, "y1": 0, "y2": 0})
    assert str(red) == "y1 + y2 + t*y^(-2) = c"
    ode = split_equation(P("y*y2 + y1^2"), 2)
    assert str(reduce_order(ode)) == "y*y1 = c"
    assert reduce_order(linear_instance, P("1/t")).psi == P("y1 + t*y - t")


def test_reduce_order_without_factor_needs_exactness(example2):
    with pytest.raises(NotExact):
        reduce_order(example2)


coef = st.integers(-3, 3)
monomials = [P(m) for m in ["1", "t", "y", "y1", "t*y", "t*y1", "y*y1", "y^2", "y1^2", "t^2", "y^2*y1", "t*y1^2", "y1^3", "t*y*y1"]]


@settings(max_examples=30, deadline=None)
@given(st.lists(coef, min_size=len(monomials), max_size=len(monomials)))
def test_round_trip_exactness(cs):
    psi = sum((Const(c) * m for c, m in zip(cs, monomials)), Const(0))
    try:
        ode = ode_from_first_integral(psi, 2)
    except HighestCoeffZero:
        return
    assert exactness_report(ode).exact
    fi = first_integral(ode, {"t": 0, "y": 0, "y1": 0})
    assert fi.closed
    assert isinstance(is_zero(defining_residual(fi.psi, ode)), ProvenZero)
    assert is_zero(total_derivative(fi.psi, 2) - total_derivative(psi, 2)).is_zero


# ---- text format


def test_parse_file_forms():
    ode, base = parse_ode_text("order: 3\nequation: y^3*y3 + y^3*y2 - 2*t*y1 + y\n")
    assert coeffs(ode) == [P("y"), P("-2*t"), P("y^3"), P("y^3")] and base is None
    ode2, base2 = parse_ode_text("# linear\norder: 2\nF0: t*y - t\nF1: t^2\nF2: t\nbase: t0=1, y0=1/2, y1=0\n")
    assert base2 == {"t": 1, "y": Fraction(1, 2), "y1": 0}
    assert parse_ode_text(format_ode(ode2, base2)) == (ode2, base2)


@pytest.mark.parametrize(
    "text, line",
    [
        ("order: 2\nequation: y2 + 2t\n", 2),
        ("order: x\n", 1),
        ("order: 1\nfoo: 1\n", 2),
        ("order: 1\nthis is not a key value line\n", 2),
        ("order: 1\nequation: y1\nF0: 0\n", 2),
        ("order: 1\nequation: y1\nbase: t0\n", 3),
    ],
)
def test_format_errors_name_the_line(text, line):
    with pytest.raises(OdeFormatError) as info:
        parse_ode_text(text)
    assert info.value.line == line


def test_missing_coefficient_line():
    with pytest.raises(WrongArity):
        parse_ode_text("order: 2\nF0: y\nF2: 1\n")
