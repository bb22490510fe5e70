"""Symbolic core: expressions over jet coordinates."""

from .differentiate import diff
from .evaluate import EvaluationError, Program, SingularPoint, UnboundVariable, compile_expr, eval_at
from .expr import (
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
    T,
    Var,
    Y,
    add,
    as_var,
    fun,
    max_order,
    mul,
    neg,
    power,
    simplify,
    substitute,
    sym,
    to_expr,
)
from .parser import OrderTooHigh, ParseError, UnknownIdentifier, parse_expr, parse_raw
from .printer import print_expr
from .zero import (
    InconclusiveDomain,
    NonZero,
    ProbablyZero,
    ProbeBox,
    ProbeSettings,
    ProvenZero,
    ZeroVerdict,
    check_zero,
    is_zero,
)

__all__ = [
    "Add",
    "Const",
    "EvaluationError",
    "Expr",
    "Fun",
    "InconclusiveDomain",
    "JetVar",
    "Mul",
    "Neg",
    "NonZero",
    "ONE",
    "OrderTooHigh",
    "ParseError",
    "Pow",
    "ProbablyZero",
    "ProbeBox",
    "ProbeSettings",
    "Program",
    "ProvenZero",
    "SingularPoint",
    "T",
    "UnboundVariable",
    "UnknownIdentifier",
    "Var",
    "Y",
    "ZERO",
    "ZeroVerdict",
    "add",
    "as_var",
    "check_zero",
    "compile_expr",
    "diff",
    "eval_at",
    "fun",
    "is_zero",
    "max_order",
    "mul",
    "neg",
    "parse_expr",
    "parse_raw",
    "power",
    "print_expr",
    "simplify",
    "substitute",
    "sym",
    "to_expr",
]
