"""Text form of expressions; the output re-parses to the same canonical tree."""

from __future__ import annotations

from fractions import Fraction

from .expr import Add, Const, Expr, Fun, Mul, Neg, Pow, Var

ADD, MUL, NEG, POW, ATOM = 1, 2, 3, 4, 5


def _const(v: Fraction):
    if v.denominator == 1:
        return str(v.numerator), ATOM if v >= 0 else NEG
    if v < 0:
        return f"-{-v.numerator}/{v.denominator}", NEG
    return f"{v.numerator}/{v.denominator}", MUL


def _negated(e: Expr):
    """If e prints with a leading minus, return its positive counterpart."""
    if isinstance(e, Const) and e.value < 0:
        return Const(-e.value)
    if isinstance(e, Neg):
        return e.arg
    if isinstance(e, Mul) and isinstance(e.args[0], Const) and e.args[0].value < 0:
        c = -e.args[0].value
        rest = e.args[1:]
        if c == 1:
            return rest[0] if len(rest) == 1 else Mul(rest)
        return Mul((Const(c),) + rest)
    return None


def _fmt(e: Expr):
    """Return (text, precedence level)."""
    if isinstance(e, Const):
        return _const(e.value)
    if isinstance(e, Var):
        return e.var.label, ATOM
    if isinstance(e, Fun):
        inner = _wrap(e.arg, 0)
        if e.name == "abs":
            return f"|{inner}|", ATOM
        return f"{e.name}({inner})", ATOM
    if isinstance(e, Pow):
        return f"{_wrap(e.base, ATOM)}^{_wrap(e.exp, ATOM)}", POW
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, NEG + 1), NEG
    if isinstance(e, Mul):
        pos = _negated(e)
        if pos is not None:
            return "-" + _wrap(pos, NEG + 1) if not isinstance(pos, Mul) else "-" + _fmt_mul(pos), NEG
        return _fmt_mul(e), MUL
    if isinstance(e, Add):
        terms = [a for a in e.args if not isinstance(a, Const)] + [a for a in e.args if isinstance(a, Const)]
        parts = []
        for i, term in enumerate(terms):
            pos = _negated(term)
            if pos is not None:
                parts.append(("-" if i == 0 else " - ") + _wrap(pos, MUL))
            else:
                parts.append(("" if i == 0 else " + ") + _wrap(term, ADD + 1))
        return "".join(parts), ADD
    raise TypeError(f"not an expression: {e!r}")


def _fmt_mul(e: Mul) -> str:
    out = []
    for i, f in enumerate(e.args):
        level = MUL if i == 0 else MUL + 1
        if i > 0 and _negated(f) is not None:
            level = ATOM
        out.append(_wrap(f, level))
    return "*".join(out)


def _wrap(e: Expr, min_level: int) -> str:
    text, level = _fmt(e)
    if level < min_level:
        return f"({text})"
    return text


def print_expr(e: Expr) -> str:
    return _fmt(e)[0]
