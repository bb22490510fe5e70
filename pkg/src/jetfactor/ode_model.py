"""Quasi-linear ODEs F_n y^(n) + ... + F_1 y' + F_0 = 0.

Exactness is certified by the compatibility conditions

    dF_i/dt = dF_0/dy^(i-1)                 i = 1..n
    dF_i/dy^(j-1) = dF_j/dy^(i-1)           i = 2..n, j < i

and the first integral is built by integrating along coordinate lines from a
base point.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .calculus import integrate_uni, total_derivative
from .symcore import (
    ZERO,
    Expr,
    JetVar,
    ParseError,
    ProbeSettings,
    SingularPoint,
    T,
    Var,
    Y,
    ZeroVerdict,
    add,
    as_var,
    check_zero,
    diff,
    eval_at,
    max_order,
    mul,
    neg,
    parse_expr,
    print_expr,
    simplify,
    substitute,
    to_expr,
)
from .symcore.expr import Const, Pow, factors_of, power, terms_of


class OdeError(ValueError):
    pass


class WrongArity(OdeError):
    pass


class HighestCoeffZero(OdeError):
    pass


class VariableOutOfRange(OdeError):
    pass


class NotQuasiLinear(OdeError):
    def __init__(self, term: Expr, why: str = ""):
        super().__init__(f"term {print_expr(term)} is not quasi-linear" + (f": {why}" if why else ""))
        self.term = term


class NotExact(OdeError):
    pass


class ZeroFactor(OdeError):
    pass


class BasePointSingular(OdeError):
    def __init__(self, coordinate: str, base: Mapping[str, Fraction], what: str = ""):
        what = what or f"the integral along {coordinate}"
        super().__init__(f"base point {format_point(base)} is singular for {what}")
        self.coordinate = coordinate
        self.base = dict(base)


class OdeFormatError(OdeError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class QuasiLinearOde:
    n: int
    coeffs: Tuple[Expr, ...]

    def coordinates(self) -> List[JetVar]:
        """Jet coordinates the coefficients may depend on: t, y, ..., y^(n-1)."""
        return [T] + [Y(k) for k in range(self.n)]

    def lhs(self) -> Expr:
        return add(self.coeffs[0], *[mul(self.coeffs[i], Var(Y(i))) for i in range(1, self.n + 1)])

    def __str__(self) -> str:
        return f"{print_expr(self.lhs())} = 0"


def make_ode(n: int, coeffs: Sequence, settings: Optional[ProbeSettings] = None) -> QuasiLinearOde:
    if n < 1:
        raise WrongArity("order must be at least 1")
    if len(coeffs) != n + 1:
        raise WrongArity(f"order {n} needs {n + 1} coefficients, got {len(coeffs)}")
    cs = tuple(simplify(to_expr(c)) for c in coeffs)
    for i, c in enumerate(cs):
        for v in c.free_vars:
            if v.kind == "sym" or (v.kind == "y" and v.k >= n):
                raise VariableOutOfRange(f"F{i} depends on {v.label}; order {n} allows t, y..y{n - 1}")
    if cs[n] == ZERO or check_zero(cs[n], settings).is_zero:
        raise HighestCoeffZero(f"F{n} vanishes identically")
    return QuasiLinearOde(n, cs)


def split_equation(e, n: int, settings: Optional[ProbeSettings] = None) -> QuasiLinearOde:
    """Read F_0..F_n off a single expression."""
    e = simplify(to_expr(e))
    if max_order(e) > n:
        raise VariableOutOfRange(f"expression uses y{max_order(e)} but the order is {n}")
    buckets: List[List[Expr]] = [[] for _ in range(n + 1)]
    for term in terms_of(e):
        top = max_order(term)
        if top < 1:
            buckets[0].append(term)
            continue
        target = Var(Y(top))
        factors = list(factors_of(term))
        coeff = None
        for idx, f in enumerate(factors):
            if f == target:
                coeff = mul(*(factors[:idx] + factors[idx + 1 :]))
            elif isinstance(f, Pow) and f.base == target and top < n:
                p = f.exp
                if isinstance(p, Const) and p.value.denominator == 1 and p.value > 1:
                    coeff = mul(*(factors[:idx] + factors[idx + 1 :]), power(target, Const(p.value - 1)))
        if coeff is not None and max_order(coeff) < n:
            buckets[top].append(coeff)
        elif top == n:
            raise NotQuasiLinear(term, f"highest derivative y{n} must appear linearly")
        else:
            buckets[0].append(term)
    return make_ode(n, [add(*b) for b in buckets], settings)


# --------------------------------------------------------------------------
# exactness


@dataclass(frozen=True)
class Condition:
    kind: str  # "time" | "cross"
    i: int
    j: int
    lhs_label: str
    rhs_label: str
    residual: Expr
    verdict: ZeroVerdict

    @property
    def holds(self) -> bool:
        return self.verdict.is_zero

    @property
    def label(self) -> str:
        return f"{self.lhs_label} = {self.rhs_label}"

    @property
    def pair(self) -> Tuple[int, int]:
        """(i, 0) for time conditions, (i, j) for cross conditions."""
        return (self.i, self.j)


def _dvar_label(k: int) -> str:
    return "y" if k == 0 else f"y{k}"


@dataclass(frozen=True)
class ExactnessReport:
    n: int
    conditions: Tuple[Condition, ...]
    seed: int
    notes: Tuple[str, ...] = ()

    @property
    def exact(self) -> bool:
        return all(c.holds for c in self.conditions)

    @property
    def violated(self) -> List[Condition]:
        return [c for c in self.conditions if not c.holds]


def condition_count_note(n: int) -> str:
    count = n * (n + 1) // 2
    fact = math.factorial(n)
    rel = f"not n! = {fact}" if count != fact else "n! agrees only for n = 1 and n = 3"
    return f"order {n}: {count} compatibility conditions (n time pairs + n(n-1)/2 cross pairs); {rel}"


def exactness_conditions(ode: QuasiLinearOde) -> List[Tuple[str, int, int, str, str, Expr]]:
    F = ode.coeffs
    out = []
    for i in range(1, ode.n + 1):
        out.append(
            (
                "time",
                i,
                0,
                f"dF{i}/dt",
                f"dF0/d{_dvar_label(i - 1)}",
                add(diff(F[i], T), neg(diff(F[0], Y(i - 1)))),
            )
        )
    for i in range(2, ode.n + 1):
        for j in range(1, i):
            out.append(
                (
                    "cross",
                    i,
                    j,
                    f"dF{i}/d{_dvar_label(j - 1)}",
                    f"dF{j}/d{_dvar_label(i - 1)}",
                    add(diff(F[i], Y(j - 1)), neg(diff(F[j], Y(i - 1)))),
                )
            )
    return out


def exactness_report(ode: QuasiLinearOde, settings: Optional[ProbeSettings] = None) -> ExactnessReport:
    settings = settings or ProbeSettings()
    conds = []
    for idx, (kind, i, j, lhs, rhs, residual) in enumerate(exactness_conditions(ode)):
        conds.append(Condition(kind, i, j, lhs, rhs, residual, check_zero(residual, settings, idx)))
    return ExactnessReport(ode.n, tuple(conds), settings.seed, (condition_count_note(ode.n),))


# --------------------------------------------------------------------------
# first integrals


def format_point(point: Mapping) -> str:
    return ", ".join(f"{k}={_fmt_num(v)}" for k, v in point.items())


def _fmt_num(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _normalize_base(ode: QuasiLinearOde, base: Mapping) -> Dict[str, Fraction]:
    given = {as_var(k): Fraction(str(v)) if isinstance(v, float) else Fraction(v) for k, v in base.items()}
    out = {}
    for c in ode.coordinates():
        if c not in given:
            raise OdeError(f"base point is missing {c.label}")
        out[c.label] = given[c]
    return out


@dataclass(frozen=True)
class FirstIntegral:
    psi: Expr
    base_point: Dict[str, Fraction]
    blocked: Tuple[str, ...] = ()
    attempts: Tuple[str, ...] = ()

    @property
    def status(self) -> str:
        return "Closed" if not self.blocked else "PartiallyClosed"

    @property
    def closed(self) -> bool:
        return not self.blocked


def default_bases(n: int) -> List[Dict[str, int]]:
    labels = ["t"] + [_dvar_label(k) for k in range(n)]
    zeros = {k: 0 for k in labels}
    ones = {k: 1 for k in labels}
    mixed = dict(ones, t=0)
    return [zeros, ones, mixed]


def _first_integral_at(ode: QuasiLinearOde, base: Dict[str, Fraction]) -> FirstIntegral:
    coords = ode.coordinates()
    point = {c: float(base[c.label]) for c in coords}
    for c, F in zip(coords, ode.coeffs):
        try:
            eval_at(F, point)
        except SingularPoint:
            raise BasePointSingular(c.label, base, f"coefficient F{coords.index(c)} = {print_expr(F)}") from None
    pieces = []
    blocked = []
    for pos, (c, F) in enumerate(zip(coords, ode.coeffs)):
        fixed = {coords[j]: base[coords[j].label] for j in range(pos)}
        integrand = substitute(F, fixed)
        if integrand == ZERO:
            continue
        res = integrate_uni(integrand, c)
        if not res.closed:
            blocked.append(f"integral of {print_expr(integrand)} d{c.label}: {res.reason}")
            continue
        anti = res.antiderivative
        at_base = substitute(anti, {c: base[c.label]})
        try:
            eval_at(anti, point)
        except SingularPoint:
            raise BasePointSingular(c.label, base) from None
        pieces.append(add(anti, neg(at_base)))
    return FirstIntegral(add(*pieces), base, tuple(blocked))


def first_integral(
    ode: QuasiLinearOde,
    base_point: Optional[Mapping] = None,
    settings: Optional[ProbeSettings] = None,
    check: bool = True,
) -> FirstIntegral:
    """Psi with dPsi/dt = lhs of the (exact) equation.

    Without a base point the zeros, ones, and (t=0, rest 1) points are tried
    in turn.
    """
    if check:
        report = exactness_report(ode, settings)
        if not report.exact:
            bad = "; ".join(c.label for c in report.violated)
            raise NotExact(f"exactness conditions violated: {bad}")
    if base_point is not None:
        return _first_integral_at(ode, _normalize_base(ode, base_point))
    attempts = []
    last = None
    for cand in default_bases(ode.n):
        base = _normalize_base(ode, cand)
        try:
            fi = _first_integral_at(ode, base)
        except BasePointSingular as exc:
            attempts.append(str(exc))
            last = exc
            continue
        return FirstIntegral(fi.psi, fi.base_point, fi.blocked, tuple(attempts))
    exc = BasePointSingular(last.coordinate, last.base)
    exc.args = ("every default base point is singular; give one explicitly (" + "; ".join(attempts) + ")",)
    raise exc


def apply_factor(ode: QuasiLinearOde, mu, settings: Optional[ProbeSettings] = None) -> QuasiLinearOde:
    mu = simplify(to_expr(mu))
    if mu == ZERO or check_zero(mu, settings).is_zero:
        raise ZeroFactor("integrating factor vanishes identically")
    for v in mu.free_vars:
        if v.kind == "sym" or (v.kind == "y" and v.k >= ode.n):
            raise VariableOutOfRange(f"factor depends on {v.label}")
    return QuasiLinearOde(ode.n, tuple(mul(mu, c) for c in ode.coeffs))


@dataclass(frozen=True)
class ReducedEquation:
    psi: Expr
    first_integral: FirstIntegral
    ode: QuasiLinearOde
    mu: Optional[Expr] = None
    constant_name: str = "c"

    def __str__(self) -> str:
        return f"{print_expr(self.psi)} = {self.constant_name}"


def reduce_order(
    ode: QuasiLinearOde,
    mu=None,
    base_point: Optional[Mapping] = None,
    settings: Optional[ProbeSettings] = None,
) -> ReducedEquation:
    """Order n-1 equation Psi = c from an exact (or factor-scaled) equation."""
    scaled = apply_factor(ode, mu, settings) if mu is not None else ode
    fi = first_integral(scaled, base_point, settings)
    return ReducedEquation(fi.psi, fi, scaled, simplify(to_expr(mu)) if mu is not None else None)


def ode_from_first_integral(psi, n: int, settings: Optional[ProbeSettings] = None) -> QuasiLinearOde:
    """The exact equation dPsi/dt = 0 with F0 = dPsi/dt and Fk = dPsi/dy^(k-1)."""
    psi = simplify(to_expr(psi))
    return make_ode(n, [diff(psi, T)] + [diff(psi, Y(k)) for k in range(n)], settings)


def defining_residual(psi: Expr, ode: QuasiLinearOde) -> Expr:
    """dPsi/dt minus the equation's left-hand side; zero for a true first integral."""
    return add(total_derivative(psi, ode.n), neg(ode.lhs()))


# --------------------------------------------------------------------------
# text format

_LINE_RE = re.compile(r"^\s*([A-Za-z]\w*)\s*:\s*(.*?)\s*$")


def parse_ode_text(text: str, settings: Optional[ProbeSettings] = None):
    """Parse the ODE file format; returns (ode, base point or None)."""
    order = None
    equation = None
    coeffs: Dict[int, Tuple[str, int]] = {}
    base = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise OdeFormatError(f"expected 'key: value', got {raw.strip()!r}", lineno)
        key, value = m.group(1), m.group(2)
        if key == "order":
            try:
                order = int(value)
            except ValueError:
                raise OdeFormatError(f"order must be an integer, got {value!r}", lineno) from None
        elif key == "equation":
            equation = (value, lineno)
        elif re.fullmatch(r"F\d+", key):
            coeffs[int(key[1:])] = (value, lineno)
        elif key == "base":
            base = _parse_base(value, lineno)
        else:
            raise OdeFormatError(f"unknown key {key!r}", lineno)
    if order is None:
        raise OdeFormatError("missing 'order:' line", 1)
    if equation is not None and coeffs:
        raise OdeFormatError("give either 'equation:' or F0..Fn lines, not both", equation[1])

    def parse_at(src, lineno):
        try:
            return parse_expr(src, max_order=order)
        except ParseError as exc:
            raise OdeFormatError(str(exc), lineno) from exc

    if equation is not None:
        ode = split_equation(parse_at(*equation), order, settings)
    else:
        missing = [i for i in range(order + 1) if i not in coeffs]
        if missing or len(coeffs) != order + 1:
            raise WrongArity(f"order {order} needs lines F0..F{order}")
        ode = make_ode(order, [parse_at(*coeffs[i]) for i in range(order + 1)], settings)
    return ode, base


def _parse_base(value: str, lineno: int) -> Dict[str, Fraction]:
    out = {}
    for part in value.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise OdeFormatError(f"base entries look like 't0=0', got {part.strip()!r}", lineno)
        k, v = (s.strip() for s in part.split("=", 1))
        try:
            out[as_var(k).label] = Fraction(v)
        except ValueError:
            raise OdeFormatError(f"bad number {v!r} in base point", lineno) from None
    return out


def parse_base(text: str) -> Dict[str, Fraction]:
    """Base point from text such as 't0=0, y0=1, y1=0'."""
    return _parse_base(text, 0)


def format_ode(ode: QuasiLinearOde, base: Optional[Mapping] = None) -> str:
    lines = [f"order: {ode.n}"]
    lines += [f"F{i}: {print_expr(c)}" for i, c in enumerate(ode.coeffs)]
    if base:
        lines.append(f"base: {format_point({as_var(k).label: v for k, v in base.items()})}")
    return "\n".join(lines) + "\n"


def read_ode_file(path, settings: Optional[ProbeSettings] = None):
    with open(path, encoding="utf-8") as fh:
        return parse_ode_text(fh.read(), settings)
