"""Immutable expression trees over jet coordinates.

Raw nodes (``Const``, ``Var``, ``Add``, ``Mul``, ``Pow``, ``Neg``, ``Fun``) can be
built directly and may be in any shape.  The lower-case constructors
(``add``, ``mul``, ``power``, ``fun``, ``neg``) assume canonical children and
always return canonical trees; ``simplify`` rebuilds an arbitrary tree with
them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

#: Largest integer power of a sum that is multiplied out.
EXPAND_DEGREE_BOUND = 8

FUNCTIONS = ("exp", "ln", "sin", "cos", "atan", "abs")


@dataclass(frozen=True)
class JetVar:
    """A coordinate of the jet space: ``t``, ``y^(k)``, or an auxiliary symbol."""

    kind: str  # "t" | "y" | "sym"
    k: int = 0
    name: str = ""

    @property
    def label(self) -> str:
        if self.kind == "t":
            return "t"
        if self.kind == "y":
            return "y" if self.k == 0 else f"y{self.k}"
        return self.name

    @property
    def rank(self) -> tuple:
        if self.kind == "t":
            return (0,)
        if self.kind == "y":
            return (1, self.k)
        return (2, self.name)

    def __repr__(self) -> str:
        return self.label


T = JetVar("t")


def Y(k: int = 0) -> JetVar:
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    return JetVar("y", k)


def sym(name: str) -> JetVar:
    return JetVar("sym", 0, name)


def as_var(v: Union[JetVar, str]) -> JetVar:
    """Accept a JetVar or its printed label (``t``, ``y``, ``y0``, ``y3``, ``y'``)."""
    if isinstance(v, JetVar):
        return v
    s = v.strip()
    if s in ("t", "t0"):
        return T
    if s.startswith("y"):
        rest = s[1:]
        if rest == "":
            return Y(0)
        if set(rest) == {"'"}:
            return Y(len(rest))
        if rest.isdigit():
            return Y(int(rest))
    return sym(s)


# --------------------------------------------------------------------------
# nodes


class Expr:
    __slots__ = ("_hash", "_key", "_free")

    def _sig(self) -> tuple:
        raise NotImplementedError

    def _init(self):
        self._hash = hash((type(self).__name__,) + self._sig())
        self._key = None
        self._free = None

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._sig() == other._sig()

    def __ne__(self, other):
        return not self == other

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = self._make_key()
        return self._key

    @property
    def free_vars(self) -> frozenset:
        if self._free is None:
            out = set()
            for c in self.children():
                out |= c.free_vars
            self._free = frozenset(out)
        return self._free

    def children(self) -> tuple:
        return ()

    def depends_on(self, v: JetVar) -> bool:
        return v in self.free_vars

    # arithmetic builds canonical trees
    def __add__(self, other):
        return add(self, to_expr(other))

    def __radd__(self, other):
        return add(to_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(to_expr(other)))

    def __rsub__(self, other):
        return add(to_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, to_expr(other))

    def __rmul__(self, other):
        return mul(to_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(to_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(to_expr(other), power(self, MINUS_ONE))

    def __pow__(self, other):
        return power(self, to_expr(other))

    def __rpow__(self, other):
        return power(to_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        from .printer import print_expr

        return print_expr(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = Fraction(value)
        self._init()

    def _sig(self):
        return (self.value,)

    def _make_key(self):
        return (0, self.value)

    @property
    def free_vars(self):
        return frozenset()

    def __repr__(self):
        return f"Const({self.value})"


class Var(Expr):
    __slots__ = ("var",)

    def __init__(self, var: JetVar):
        self.var = var
        self._init()

    def _sig(self):
        return (self.var,)

    def _make_key(self):
        return (1, self.var.rank)

    @property
    def free_vars(self):
        return frozenset((self.var,))

    def __repr__(self):
        return f"Var({self.var.label})"


class Fun(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg
        self._init()

    def _sig(self):
        return (self.name, self.arg)

    def _make_key(self):
        return (2, self.name, self.arg.key)

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"Fun({self.name}, {self.arg!r})"


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Expr):
        self.base = base
        self.exp = exp
        self._init()

    def _sig(self):
        return (self.base, self.exp)

    def _make_key(self):
        return (3, self.base.key, self.exp.key)

    def children(self):
        return (self.base, self.exp)

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp!r})"


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, args: Iterable[Expr]):
        self.args = tuple(args)
        self._init()

    def _sig(self):
        return self.args

    def _make_key(self):
        return (4, tuple(a.key for a in self.args))

    def children(self):
        return self.args

    def __repr__(self):
        return f"Mul({', '.join(map(repr, self.args))})"


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, args: Iterable[Expr]):
        self.args = tuple(args)
        self._init()

    def _sig(self):
        return self.args

    def _make_key(self):
        return (5, tuple(a.key for a in self.args))

    def children(self):
        return self.args

    def __repr__(self):
        return f"Add({', '.join(map(repr, self.args))})"


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg
        self._init()

    def _sig(self):
        return (self.arg,)

    def _make_key(self):
        return (6, self.arg.key)

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"Neg({self.arg!r})"


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)
HALF = Const(Fraction(1, 2))


def to_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, JetVar):
        return Var(x)
    if isinstance(x, bool):
        raise TypeError("bool is not an expression")
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, float):
        return Const(Fraction(repr(x)))
    if isinstance(x, str):
        from .parser import parse_expr

        return parse_expr(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def is_const(e: Expr) -> bool:
    return isinstance(e, Const)


def is_int_const(e: Expr) -> bool:
    return isinstance(e, Const) and e.value.denominator == 1


# --------------------------------------------------------------------------
# canonical constructors


def _split_coeff(e: Expr):
    if isinstance(e, Mul) and isinstance(e.args[0], Const):
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), e


def _scaled(c: Fraction, rest: Expr) -> Expr:
    if c == 1:
        return rest
    if isinstance(rest, Mul):
        return Mul((Const(c),) + rest.args)
    return Mul((Const(c), rest))


def add(*args: Expr) -> Expr:
    const = Fraction(0)
    terms: dict = {}
    stack = list(args)
    while stack:
        a = stack.pop(0)
        if isinstance(a, Add):
            stack[0:0] = list(a.args)
            continue
        if isinstance(a, Const):
            const += a.value
            continue
        c, rest = _split_coeff(a)
        terms[rest] = terms.get(rest, 0) + c
    out = [_scaled(c, rest) for rest, c in terms.items() if c != 0]
    if const != 0:
        out.append(Const(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=lambda e: e.key)
    return Add(out)


def _flatten_mul(args):
    for a in args:
        if isinstance(a, Mul):
            yield from a.args
        else:
            yield a


def mul(*args: Expr) -> Expr:
    coeff = Fraction(1)
    groups: dict = {}
    exp_args = []
    for f in _flatten_mul(args):
        if isinstance(f, Const):
            coeff *= f.value
            continue
        if isinstance(f, Fun) and f.name == "exp":
            exp_args.append(f.arg)
            continue
        if isinstance(f, Pow):
            b, e = f.base, f.exp
        else:
            b, e = f, ONE
        groups.setdefault(b, []).append((e, f))
    if coeff == 0:
        return ZERO
    factors = []
    extra = []

    def place(p):
        nonlocal coeff
        if isinstance(p, Const):
            coeff *= p.value
        elif isinstance(p, Mul) or (isinstance(p, Fun) and p.name == "exp"):
            extra.append(p)
        else:
            factors.append(p)

    for b, entries in groups.items():
        if len(entries) == 1:
            factors.append(entries[0][1])
        else:
            place(power(b, add(*[e for e, _ in entries])))
    if len(exp_args) == 1:
        factors.append(Fun("exp", exp_args[0]))
    elif exp_args:
        place(fun("exp", add(*exp_args)))
    if coeff == 0:
        return ZERO
    if extra:
        return mul(Const(coeff), *factors, *extra)
    sums = [f for f in factors if isinstance(f, Add)]
    if sums and (len(factors) > 1 or coeff != 1):
        target = sums[0]
        others = [f for f in factors if f is not target]
        if coeff != 1:
            others.append(Const(coeff))
        return add(*[mul(term, *others) for term in target.args])
    factors.sort(key=lambda e: e.key)
    if coeff != 1:
        factors.insert(0, Const(coeff))
    if not factors:
        return Const(coeff)
    if len(factors) == 1:
        return factors[0]
    return Mul(factors)


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def _int_root(n: int, q: int):
    if n < 0:
        return None
    r = round(n ** (1.0 / q))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**q == n:
            return c
    return None


def _fold_const_pow(b: Fraction, e: Fraction):
    """Exact value of b**e when it is rational, else None."""
    if e.denominator == 1:
        if b == 0 and e < 0:
            return None
        return b ** int(e)
    if b < 0:
        return None
    q = e.denominator
    num = _int_root(b.numerator, q)
    den = _int_root(b.denominator, q)
    if num is None or den is None:
        return None
    root = Fraction(num, den)
    if root == 0 and e < 0:
        return None
    return root ** e.numerator


def power(b: Expr, e: Expr) -> Expr:
    if e == ZERO:
        return ONE
    if e == ONE:
        return b
    if b == ONE:
        return ONE
    if isinstance(b, Const) and isinstance(e, Const):
        v = _fold_const_pow(b.value, e.value)
        return Const(v) if v is not None else Pow(b, e)
    if b == ZERO:
        if isinstance(e, Const) and e.value > 0:
            return ZERO
        return Pow(b, e)
    if isinstance(b, Fun) and b.name == "exp":
        return fun("exp", mul(e, b.arg))
    if is_int_const(e):
        if isinstance(b, Pow):
            return power(b.base, mul(b.exp, e))
        if isinstance(b, Mul):
            return mul(*[power(f, e) for f in b.args])
        k = int(e.value)
        if isinstance(b, Add) and 2 <= k <= EXPAND_DEGREE_BOUND:
            out = b
            for _ in range(k - 1):
                out = add(*[mul(x, y) for x in terms_of(out) for y in b.args])
            return out
    return Pow(b, e)


def _ln_part(term: Expr):
    """Return (c, x) when term == c*ln(x) with c a constant, else None."""
    if isinstance(term, Fun) and term.name == "ln":
        return ONE, term.arg
    if isinstance(term, Mul) and len(term.args) == 2 and isinstance(term.args[0], Const):
        f = term.args[1]
        if isinstance(f, Fun) and f.name == "ln":
            return term.args[0], f.arg
    return None


def fun(name: str, arg: Expr) -> Expr:
    if name == "sqrt":
        return power(arg, HALF)
    if name == "exp":
        if arg == ZERO:
            return ONE
        terms = arg.args if isinstance(arg, Add) else (arg,)
        pows = []
        rest = []
        for term in terms:
            lp = _ln_part(term)
            if lp is None:
                rest.append(term)
            else:
                pows.append(power(lp[1], lp[0]))
        if pows:
            return mul(*pows, fun("exp", add(*rest)))
        return Fun("exp", arg)
    if name == "ln":
        if arg == ONE:
            return ZERO
        if isinstance(arg, Fun) and arg.name == "exp":
            return arg.arg
        return Fun("ln", arg)
    if name in ("sin", "atan"):
        return ZERO if arg == ZERO else Fun(name, arg)
    if name == "cos":
        return ONE if arg == ZERO else Fun(name, arg)
    if name == "abs":
        if isinstance(arg, Const):
            return Const(abs(arg.value))
        if isinstance(arg, Fun) and arg.name in ("abs", "exp"):
            return arg
        return Fun("abs", arg)
    raise ValueError(f"unknown function {name!r}")


# --------------------------------------------------------------------------
# whole-tree operations


@lru_cache(maxsize=1 << 16)
def simplify(e: Expr) -> Expr:
    """Canonical form of e; idempotent."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Add):
        return add(*[simplify(a) for a in e.args])
    if isinstance(e, Mul):
        return mul(*[simplify(a) for a in e.args])
    if isinstance(e, Pow):
        return power(simplify(e.base), simplify(e.exp))
    if isinstance(e, Neg):
        return neg(simplify(e.arg))
    if isinstance(e, Fun):
        return fun(e.name, simplify(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def rebuild(e: Expr, leaf) -> Expr:
    """Bottom-up rebuild through the canonical constructors; ``leaf`` maps Var nodes."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        return leaf(e)
    if isinstance(e, Add):
        return add(*[rebuild(a, leaf) for a in e.args])
    if isinstance(e, Mul):
        return mul(*[rebuild(a, leaf) for a in e.args])
    if isinstance(e, Pow):
        return power(rebuild(e.base, leaf), rebuild(e.exp, leaf))
    if isinstance(e, Neg):
        return neg(rebuild(e.arg, leaf))
    if isinstance(e, Fun):
        return fun(e.name, rebuild(e.arg, leaf))
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution of jet variables, then canonicalisation."""
    table = {as_var(k): to_expr(v) for k, v in bindings.items()}
    return rebuild(e, lambda node: table.get(node.var, node))


def terms_of(e: Expr) -> tuple:
    return e.args if isinstance(e, Add) else (e,)


def factors_of(e: Expr) -> tuple:
    return e.args if isinstance(e, Mul) else (e,)


def max_order(e: Expr) -> int:
    """Highest derivative order of y present in e, or -1."""
    ks = [v.k for v in e.free_vars if v.kind == "y"]
    return max(ks) if ks else -1
