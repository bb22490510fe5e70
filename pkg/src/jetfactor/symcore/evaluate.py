"""Floating-point evaluation: tree walking and compilation to kernel bytecode."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..kernels import opcodes as op
from .expr import Add, Const, Expr, Fun, JetVar, Mul, Neg, Pow, Var, as_var


class EvaluationError(ValueError):
    pass


class SingularPoint(EvaluationError):
    def __init__(self, expr: Expr, reason: str = "singular"):
        super().__init__(f"{reason} at sub-expression {expr}")
        self.expr = expr
        self.reason = reason


class UnboundVariable(EvaluationError):
    def __init__(self, var: JetVar):
        super().__init__(f"variable {var.label} is not bound")
        self.var = var


def _pow(base: float, exponent: float, node: Expr) -> float:
    if base == 0.0 and exponent < 0:
        raise SingularPoint(node, "division by zero")
    if base < 0 and exponent != math.floor(exponent):
        raise SingularPoint(node, "non-integer power of a negative number")
    try:
        return base**exponent
    except (OverflowError, ZeroDivisionError):
        raise SingularPoint(node, "overflow") from None


def _eval(e: Expr, env: Mapping[JetVar, float]) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return env[e.var]
        except KeyError:
            raise UnboundVariable(e.var) from None
    if isinstance(e, Add):
        return math.fsum(_eval(a, env) for a in e.args)
    if isinstance(e, Mul):
        out = 1.0
        for a in e.args:
            out *= _eval(a, env)
        return out
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, Pow):
        if isinstance(e.exp, Const) and e.exp.value.denominator == 1:
            b = _eval(e.base, env)
            return _pow(b, float(e.exp.value), e)
        return _pow(_eval(e.base, env), _eval(e.exp, env), e)
    if isinstance(e, Fun):
        x = _eval(e.arg, env)
        if e.name == "exp":
            try:
                return math.exp(x)
            except OverflowError:
                raise SingularPoint(e, "overflow") from None
        if e.name == "ln":
            if x <= 0:
                raise SingularPoint(e, "logarithm of a non-positive number")
            return math.log(x)
        if e.name == "sin":
            return math.sin(x)
        if e.name == "cos":
            return math.cos(x)
        if e.name == "atan":
            return math.atan(x)
        if e.name == "abs":
            return abs(x)
    raise TypeError(f"not an expression: {e!r}")


def eval_at(e: Expr, point: Mapping) -> float:
    """Evaluate e at a point given as a mapping from variables (or labels) to numbers."""
    env = {as_var(k): float(v) for k, v in point.items()}
    value = _eval(e, env)
    if not math.isfinite(value):
        raise SingularPoint(e, "non-finite value")
    return value


@dataclass(frozen=True)
class Program:
    """Postfix bytecode for one expression over a fixed variable layout."""

    ops: np.ndarray  # int32
    args: np.ndarray  # float64
    depth: int
    variables: tuple

    def __len__(self):
        return len(self.ops)


def compile_expr(e: Expr, variables: Sequence) -> Program:
    layout = tuple(as_var(v) for v in variables)
    index = {v: i for i, v in enumerate(layout)}
    ops: list = []
    args: list = []
    depth = 0
    max_depth = 0

    def emit(code, arg=0.0, delta=0):
        nonlocal depth, max_depth
        ops.append(code)
        args.append(float(arg))
        depth += delta
        max_depth = max(max_depth, depth)

    def walk(node: Expr):
        if isinstance(node, Const):
            emit(op.CONST, float(node.value), 1)
        elif isinstance(node, Var):
            if node.var not in index:
                raise UnboundVariable(node.var)
            emit(op.VAR, index[node.var], 1)
        elif isinstance(node, (Add, Mul)):
            walk(node.args[0])
            for a in node.args[1:]:
                walk(a)
                emit(op.ADD if isinstance(node, Add) else op.MUL, 0, -1)
        elif isinstance(node, Neg):
            walk(node.arg)
            emit(op.NEG)
        elif isinstance(node, Pow):
            walk(node.base)
            if isinstance(node.exp, Const) and node.exp.value.denominator == 1:
                emit(op.POWI, float(node.exp.value))
            else:
                walk(node.exp)
                emit(op.POW, 0, -1)
        elif isinstance(node, Fun):
            walk(node.arg)
            emit(op.FUNCS[node.name])
        else:
            raise TypeError(f"not an expression: {node!r}")

    walk(e)
    return Program(
        np.asarray(ops, dtype=np.int32),
        np.asarray(args, dtype=np.float64),
        max(max_depth, 1),
        layout,
    )
