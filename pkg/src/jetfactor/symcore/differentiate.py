from __future__ import annotations

from .expr import (
    MINUS_ONE,
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Fun,
    JetVar,
    Mul,
    Neg,
    Pow,
    Var,
    add,
    as_var,
    fun,
    mul,
    neg,
    power,
    simplify,
)


def diff(e: Expr, v) -> Expr:
    """Partial derivative of e in v, all other jet coordinates held fixed."""
    return _diff(simplify(e), as_var(v))


def _diff(e: Expr, v: JetVar) -> Expr:
    if v not in e.free_vars:
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return add(*[_diff(a, v) for a in e.args])
    if isinstance(e, Mul):
        terms = []
        for i, f in enumerate(e.args):
            df = _diff(f, v)
            if df != ZERO:
                terms.append(mul(*e.args[:i], df, *e.args[i + 1 :]))
        return add(*terms)
    if isinstance(e, Neg):
        return neg(_diff(e.arg, v))
    if isinstance(e, Pow):
        b, x = e.base, e.exp
        db = _diff(b, v)
        if v not in x.free_vars:
            return mul(x, power(b, add(x, MINUS_ONE)), db)
        dx = _diff(x, v)
        return mul(e, add(mul(dx, fun("ln", b)), mul(x, db, power(b, MINUS_ONE))))
    if isinstance(e, Fun):
        a = e.arg
        da = _diff(a, v)
        if e.name == "exp":
            return mul(e, da)
        if e.name == "ln":
            return mul(da, power(a, MINUS_ONE))
        if e.name == "sin":
            return mul(fun("cos", a), da)
        if e.name == "cos":
            return neg(mul(fun("sin", a), da))
        if e.name == "atan":
            return mul(da, power(add(ONE, power(a, Const(2))), MINUS_ONE))
        if e.name == "abs":
            return mul(e, power(a, MINUS_ONE), da)
    raise TypeError(f"cannot differentiate {e!r}")
