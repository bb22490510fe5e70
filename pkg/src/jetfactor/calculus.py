"""Univariate integration, total time-derivative along the jet, Wronskian.

Integration covers polynomials, table patterns under linear substitution,
polynomial times exp/sin/cos, and rational functions whose denominators
split over the rationals into linear and quadratic factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Dict, List, Optional, Tuple

from .symcore import diff
from .symcore.expr import (
    HALF,
    MINUS_ONE,
    ONE,
    ZERO,
    Const,
    Expr,
    Fun,
    JetVar,
    Pow,
    T,
    Var,
    Y,
    add,
    as_var,
    factors_of,
    fun,
    mul,
    neg,
    power,
    simplify,
    terms_of,
)


@dataclass(frozen=True)
class IntegralResult:
    antiderivative: Optional[Expr] = None
    reason: str = ""

    @property
    def closed(self) -> bool:
        return self.antiderivative is not None

    @property
    def status(self) -> str:
        return "Closed" if self.closed else "Unsupported"


def Closed(e: Expr) -> IntegralResult:
    return IntegralResult(antiderivative=e)


def Unsupported(reason: str) -> IntegralResult:
    return IntegralResult(reason=reason)


class _Unsupported(Exception):
    pass


# --------------------------------------------------------------------------
# polynomials


def as_poly(e: Expr, v: JetVar) -> Optional[Dict[int, Expr]]:
    """Coefficients of e as a polynomial in v (coefficients may hold other symbols)."""
    out: Dict[int, Expr] = {}
    for term in terms_of(e):
        deg = 0
        coeff = []
        for f in factors_of(term):
            if v not in f.free_vars:
                coeff.append(f)
            elif isinstance(f, Var):
                deg += 1
            elif (
                isinstance(f, Pow)
                and isinstance(f.base, Var)
                and isinstance(f.exp, Const)
                and f.exp.value.denominator == 1
                and f.exp.value > 0
            ):
                deg += int(f.exp.value)
            else:
                return None
        out[deg] = add(out.get(deg, ZERO), mul(*coeff))
    return {k: c for k, c in out.items() if c != ZERO}


def _linear(e: Expr, v: JetVar) -> Optional[Tuple[Expr, Expr]]:
    p = as_poly(e, v)
    if p is None or not p or max(p) != 1:
        return None
    return p[1], p.get(0, ZERO)


def _trim(p: List[Fraction]) -> List[Fraction]:
    while p and p[-1] == 0:
        p = p[:-1]
    return p


def _pmul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _pdivmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        c = a[-1] / b[-1]
        d = len(a) - len(b)
        q[d] = c
        for i, y in enumerate(b):
            a[i + d] -= c * y
        a = _trim(a)
    return _trim(q), a


def _peval(p, x):
    out = Fraction(0)
    for c in reversed(p):
        out = out * x + c
    return out


def _divisors(n: int) -> List[int]:
    n = abs(n)
    out = []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            out.append(d)
            out.append(n // d)
    return sorted(set(out))


def _rational_roots(p: List[Fraction]):
    """Rational roots with multiplicity, plus the remaining cofactor."""
    roots: List[Tuple[Fraction, int]] = []
    p = _trim(list(p))
    while len(p) > 1 and p[0] == 0:
        p = p[1:]
        if roots and roots[-1][0] == 0:
            roots[-1] = (Fraction(0), roots[-1][1] + 1)
        else:
            roots.append((Fraction(0), 1))
    changed = True
    while changed and len(p) > 1:
        changed = False
        den = 1
        for c in p:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = [int(c * den) for c in p]
        for a in _divisors(ints[0]):
            for b in _divisors(ints[-1]):
                for r in (Fraction(a, b), Fraction(-a, b)):
                    if _peval(p, r) == 0:
                        q, _ = _pdivmod(p, [-r, Fraction(1)])
                        p = q
                        for i, (rr, m) in enumerate(roots):
                            if rr == r:
                                roots[i] = (r, m + 1)
                                break
                        else:
                            roots.append((r, 1))
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    return roots, p


def _is_square(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    n, d = isqrt(x.numerator), isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


def _split_cofactor(p: List[Fraction]) -> List[List[Fraction]]:
    """Monic quadratic factors of a root-free cofactor of degree 0, 2 or biquadratic 4."""
    deg = len(p) - 1
    if deg <= 0:
        return []
    if deg == 2:
        return [[c / p[2] for c in p]]
    if deg == 4 and p[1] == 0 and p[3] == 0:
        a, c, e = p[4], p[2], p[0]
        root = _is_square(c * c - 4 * a * e)
        if root is not None:
            u1 = (-c + root) / (2 * a)
            u2 = (-c - root) / (2 * a)
            if u1 != u2:
                return [[-u1, Fraction(0), Fraction(1)], [-u2, Fraction(0), Fraction(1)]]
    raise _Unsupported(f"denominator factor of degree {deg} does not split into distinct quadratics")


def _solve(rows: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    n = len(rows)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(i for i in range(col, n) if m[i][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return [m[i][n] for i in range(n)]


def _const(x: Fraction) -> Expr:
    return Const(x)


def _int_rational(num: List[Fraction], den: List[Fraction], v: JetVar) -> Expr:
    """Antiderivative of num/den for rational coefficient polynomials."""
    x = Var(v)
    q, r = _pdivmod(num, den)
    out = [mul(_const(c / (k + 1)), power(x, Const(k + 1))) for k, c in enumerate(q) if c != 0]
    if not r:
        return add(*out)
    lc = den[-1]
    monic = [c / lc for c in den]
    r = [c / lc for c in r]
    roots, rest = _rational_roots(monic)
    quads = _split_cofactor(rest)
    for qd in quads:
        if len(quads) > 1 and quads.count(qd) > 1:
            raise _Unsupported("repeated quadratic factor")
    # basis: monic / (x - r)^k and (x, 1) * monic / quad
    basis = []
    labels = []
    for root, mult in roots:
        lin = [-root, Fraction(1)]
        for k in range(1, mult + 1):
            cof = monic
            for _ in range(k):
                cof, _rem = _pdivmod(cof, lin)
            basis.append(cof)
            labels.append(("lin", root, k))
    for qd in quads:
        cof, _rem = _pdivmod(monic, qd)
        basis.append(_pmul(cof, [Fraction(0), Fraction(1)]))
        labels.append(("quad_x", qd, 1))
        basis.append(cof)
        labels.append(("quad_1", qd, 1))
    n = len(monic) - 1
    rows = [[(b[i] if i < len(b) else Fraction(0)) for b in basis] for i in range(n)]
    rhs = [(r[i] if i < len(r) else Fraction(0)) for i in range(n)]
    coeffs = _solve(rows, rhs)
    quad_parts: Dict[tuple, List[Fraction]] = {}
    for c, (kind, data, k) in zip(coeffs, labels):
        if kind == "lin":
            if c == 0:
                continue
            base = add(x, Const(-data))
            if k == 1:
                out.append(mul(Const(c), fun("ln", fun("abs", base))))
            else:
                out.append(mul(Const(c / (1 - k)), power(base, Const(1 - k))))
        else:
            slot = quad_parts.setdefault(tuple(data), [Fraction(0), Fraction(0)])
            slot[0 if kind == "quad_x" else 1] = c
    for qd, (b, c) in quad_parts.items():
        out.append(_int_linear_over_quad(b, c, list(qd), x))
    return add(*out)


def _int_linear_over_quad(b: Fraction, c: Fraction, qd: List[Fraction], x: Expr) -> Expr:
    """Antiderivative of (b x + c) / (x^2 + p x + s)."""
    s, p = qd[0], qd[1]
    quad = add(power(x, Const(2)), mul(Const(p), x), Const(s))
    parts = []
    if b != 0:
        parts.append(mul(Const(b / 2), fun("ln", fun("abs", quad))))
    k = c - b * p / 2
    if k != 0:
        disc = p * p - 4 * s
        shifted = add(mul(Const(2), x), Const(p))
        if disc < 0:
            w = power(Const(-disc), HALF)
            parts.append(mul(Const(2 * k), power(w, MINUS_ONE), fun("atan", mul(shifted, power(w, MINUS_ONE)))))
        else:
            w = power(Const(disc), HALF)
            parts.append(
                mul(
                    Const(k),
                    power(w, MINUS_ONE),
                    add(
                        fun("ln", fun("abs", add(shifted, neg(w)))),
                        neg(fun("ln", fun("abs", add(shifted, w)))),
                    ),
                )
            )
    return add(*parts)


def _rational_parts(dep: List[Expr], v: JetVar):
    """Split v-dependent factors into rational numerator/denominator polynomials."""
    num = [Fraction(1)]
    den = [Fraction(1)]
    for f in dep:
        base, k = (f.base, f.exp) if isinstance(f, Pow) else (f, ONE)
        if not (isinstance(k, Const) and k.value.denominator == 1):
            return None
        p = as_poly(base, v)
        if p is None or any(not isinstance(c, Const) for c in p.values()):
            return None
        dense = [Fraction(0)] * (max(p) + 1)
        for d, c in p.items():
            dense[d] = c.value
        exp = int(k.value)
        for _ in range(abs(exp)):
            if exp > 0:
                num = _pmul(num, dense)
            else:
                den = _pmul(den, dense)
    return num, den


# --------------------------------------------------------------------------
# table


def _table(f: Expr, v: JetVar) -> Optional[Expr]:
    """Antiderivative of a single v-dependent factor, or None."""
    x = Var(v)
    if f == x:
        return mul(HALF, power(x, Const(2)))
    if isinstance(f, Pow):
        if v not in f.exp.free_vars:
            lin = _linear(f.base, v)
            if lin is None:
                return None
            a, _ = lin
            if f.exp == MINUS_ONE:
                return mul(power(a, MINUS_ONE), fun("ln", fun("abs", f.base)))
            e1 = add(f.exp, ONE)
            return mul(power(mul(a, e1), MINUS_ONE), power(f.base, e1))
        if v not in f.base.free_vars:
            lin = _linear(f.exp, v)
            if lin is None:
                return None
            a, _ = lin
            return mul(f, power(mul(a, fun("ln", f.base)), MINUS_ONE))
        return None
    if isinstance(f, Fun):
        lin = _linear(f.arg, v)
        if lin is None:
            return None
        a, _ = lin
        inv = power(a, MINUS_ONE)
        if f.name == "exp":
            return mul(inv, f)
        if f.name == "sin":
            return neg(mul(inv, fun("cos", f.arg)))
        if f.name == "cos":
            return mul(inv, fun("sin", f.arg))
        if f.name == "ln":
            return mul(inv, add(mul(f.arg, f), neg(f.arg)))
    return None


def _by_parts(poly: Expr, f: Expr, v: JetVar) -> Optional[Expr]:
    """Antiderivative of poly(v) * f for f in {exp, sin, cos} of a linear argument."""
    if not (isinstance(f, Fun) and f.name in ("exp", "sin", "cos")) or _linear(f.arg, v) is None:
        return None
    p = as_poly(poly, v)
    if p is None:
        return None
    out = []
    sign = 1
    current = f
    deriv = poly
    while deriv != ZERO:
        try:
            current = _integrate_term(current, v)
        except _Unsupported:
            return None
        out.append(mul(Const(sign), deriv, current))
        deriv = diff(deriv, v)
        sign = -sign
    return add(*out)


def _integrate_term(term: Expr, v: JetVar) -> Expr:
    coeff = []
    dep = []
    for f in factors_of(term):
        (dep if v in f.free_vars else coeff).append(f)
    c = mul(*coeff)
    if not dep:
        return mul(c, Var(v))
    if len(dep) == 1:
        found = _table(dep[0], v)
        if found is not None:
            return mul(c, found)
    polys = [f for f in dep if as_poly(f, v) is not None]
    others = [f for f in dep if as_poly(f, v) is None]
    if len(others) == 1:
        found = _by_parts(mul(*polys), others[0], v)
        if found is not None:
            return mul(c, found)
    parts = _rational_parts(dep, v)
    if parts is not None:
        return mul(c, _int_rational(parts[0], parts[1], v))
    raise _Unsupported(f"no rule for {mul(*dep)}")


def integrate_uni(f: Expr, v) -> IntegralResult:
    """Antiderivative of f in v, other symbols treated as constants."""
    v = as_var(v)
    f = simplify(f)
    if f == ZERO:
        return Closed(ZERO)
    out = []
    try:
        for term in terms_of(f):
            out.append(_integrate_term(term, v))
    except _Unsupported as exc:
        return Unsupported(str(exc))
    return Closed(add(*out))


# --------------------------------------------------------------------------
# jet calculus


class JetOrderError(ValueError):
    pass


def total_derivative(psi: Expr, n: int) -> Expr:
    """d/dt along the jet: dpsi/dt + sum_k dpsi/dy^(k) * y^(k+1), k < n."""
    psi = simplify(psi)
    for var in psi.free_vars:
        if var.kind == "y" and var.k >= n:
            raise JetOrderError(f"{var.label} is not allowed in a function of order {n} jets")
        if var.kind == "sym":
            raise JetOrderError(f"unexpected symbol {var.label}")
    out = [diff(psi, T)]
    for k in range(n):
        out.append(mul(diff(psi, Y(k)), Var(Y(k + 1))))
    return add(*out)


def wronskian(u: Expr, w: Expr) -> Expr:
    """u' w - u w' (orientation matching W(P1, P) = P0 P for linear equations)."""
    u, w = simplify(u), simplify(w)
    for e in (u, w):
        extra = [x for x in e.free_vars if x != T]
        if extra:
            raise JetOrderError(f"wronskian expects functions of t only, got {extra[0].label}")
    return add(mul(diff(u, T), w), neg(mul(u, diff(w, T))))
