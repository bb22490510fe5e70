"""Integrating factors mu(xi) for quasi-linear ODEs.

For xi = alpha(t) * prod_k alpha_k(y^(k-1)) the scaled equation mu(xi)*ODE is
exact when every ratio

    (dF0/dy^(i-1) - dFi/dt) / (xi_t Fi - xi_{y^(i-1)} F0)
    (dFj/dy^(i-1) - dFi/dy^(j-1)) / (xi_{y^(j-1)} Fi - xi_{y^(i-1)} Fj)

equals one function g(xi); then mu = exp(int g dxi).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .calculus import _linear, integrate_uni, wronskian
from .ode_model import (
    ExactnessReport,
    OdeError,
    QuasiLinearOde,
    apply_factor,
    exactness_report,
)
from .symcore import (
    ONE,
    ZERO,
    Const,
    Expr,
    Fun,
    JetVar,
    NonZero,
    Pow,
    ProbeSettings,
    SingularPoint,
    T,
    Var,
    Y,
    add,
    check_zero,
    diff,
    eval_at,
    fun,
    mul,
    neg,
    power,
    print_expr,
    simplify,
    substitute,
    sym,
    to_expr,
)
from .symcore.expr import factors_of, terms_of

S = sym("s")
S_EXPR = Var(S)
DEFAULT_BOUND = 12


class MuFinderError(OdeError):
    pass


class DegenerateInconsistent(MuFinderError):
    def __init__(self, index: Tuple[int, int], verdict: NonZero):
        super().__init__(
            f"pair {index}: denominator vanishes identically but numerator does not ({verdict.describe()})"
        )
        self.index = index
        self.verdict = verdict


class NotFunctionOfXi(MuFinderError):
    def __init__(self, ratio: Expr, xi: Expr, minor: Expr, verdict: NonZero):
        super().__init__(
            f"{print_expr(ratio)} is not a function of xi = {print_expr(xi)}: "
            f"Jacobian minor {print_expr(minor)} is {verdict.describe()}"
        )
        self.ratio = ratio
        self.minor = minor
        self.verdict = verdict


class RewriteFailed(MuFinderError):
    def __init__(self, ratio: Expr, xi: Expr, table: List[Tuple[float, float]]):
        rows = ", ".join(f"({a:.4g}, {b:.4g})" for a, b in table[:4])
        super().__init__(
            f"{print_expr(ratio)} depends on xi = {print_expr(xi)} but no closed form was found; "
            f"samples (xi, ratio): {rows}"
        )
        self.ratio = ratio
        self.table = table


class RatiosDisagree(MuFinderError):
    def __init__(self, first: Tuple[int, int], second: Tuple[int, int], verdict: NonZero):
        super().__init__(f"ratios of pairs {first} and {second} differ: {verdict.describe()}")
        self.pairs = (first, second)
        self.verdict = verdict


class IntegrationUnsupported(MuFinderError):
    pass


class CertificateFailed(MuFinderError):
    def __init__(self, mu: Expr, report: ExactnessReport):
        bad = "; ".join(c.label for c in report.violated)
        super().__init__(f"mu = {print_expr(mu)} does not make the equation exact: {bad}")
        self.mu = mu
        self.report = report


class CrossConditionsFail(MuFinderError):
    def __init__(self, labels: Sequence[str], what: str = "mu(t)"):
        super().__init__(f"{what} needs these conditions, which fail: " + "; ".join(labels))
        self.labels = list(labels)


class NoSolution(MuFinderError):
    pass


class ConditionFailed(MuFinderError):
    def __init__(self, which: str, detail: str):
        super().__init__(f"{which} condition failed: {detail}")
        self.which = which


# --------------------------------------------------------------------------
# xi shapes


@dataclass(frozen=True)
class XiSpec:
    """xi = alpha(t) * alphas[0](y) * alphas[1](y1) * ...; unused components are 1."""

    alpha: Expr
    alphas: Tuple[Expr, ...]

    def __post_init__(self):
        comps = [(T, self.alpha)] + [(Y(k), a) for k, a in enumerate(self.alphas)]
        for v, c in comps:
            extra = c.free_vars - {v}
            if extra:
                raise ValueError(f"component for {v.label} also depends on {sorted(x.label for x in extra)}")
            if c != ONE and v not in c.free_vars:
                raise ValueError(f"component for {v.label} must be 1 or depend on {v.label}")

    @classmethod
    def time(cls, n: int, alpha=None) -> "XiSpec":
        return cls(simplify(to_expr(alpha)) if alpha is not None else Var(T), (ONE,) * n)

    @classmethod
    def jet(cls, n: int, k: int, alpha_k=None) -> "XiSpec":
        if not 1 <= k <= n:
            raise ValueError(f"jet index must be in 1..{n}, got {k}")
        comps = [ONE] * n
        comps[k - 1] = simplify(to_expr(alpha_k)) if alpha_k is not None else Var(Y(k - 1))
        return cls(ONE, tuple(comps))

    @classmethod
    def product(cls, alpha, alphas: Sequence) -> "XiSpec":
        return cls(simplify(to_expr(alpha)), tuple(simplify(to_expr(a)) for a in alphas))

    @classmethod
    def from_expr(cls, e, n: int) -> "XiSpec":
        """Split a product expression into per-variable components."""
        e = simplify(to_expr(e))
        groups: Dict[JetVar, List[Expr]] = {}
        const = Fraction(1)
        for f in factors_of(e):
            if isinstance(f, Const):
                const *= f.value
                continue
            vs = f.free_vars
            if len(vs) != 1:
                raise ValueError(f"xi factor {print_expr(f)} is not a function of a single coordinate")
            (v,) = vs
            if v.kind == "sym" or (v.kind == "y" and v.k >= n):
                raise ValueError(f"xi may only use t, y..y{n - 1}, got {v.label}")
            groups.setdefault(v, []).append(f)
        if not groups:
            raise ValueError("xi must not be constant")
        alpha = mul(*groups.get(T, [ONE]))
        alphas = [mul(*groups.get(Y(k), [ONE])) for k in range(n)]
        if const != 1:
            first = next(iter(sorted(groups, key=lambda v: v.rank)))
            if first == T:
                alpha = mul(Const(const), alpha)
            else:
                alphas[first.k] = mul(Const(const), alphas[first.k])
        return cls(alpha, tuple(alphas))

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def xi(self) -> Expr:
        return mul(self.alpha, *self.alphas)

    @property
    def kind(self) -> str:
        active = [self.alpha != ONE] + [a != ONE for a in self.alphas]
        if sum(active) == 1 and active[0]:
            return "time"
        if sum(active) == 1:
            return "jet"
        return "product"

    def describe(self) -> str:
        return f"{self.kind} xi = {print_expr(self.xi)}"


# --------------------------------------------------------------------------
# ratio conditions


@dataclass(frozen=True)
class RatioCondition:
    index: Tuple[int, int]  # (i, 0) time pair, (i, j) cross pair
    numerator: Expr
    denominator: Expr
    status: str  # "Active" | "Degenerate"

    @property
    def ratio(self) -> Expr:
        return mul(self.numerator, power(self.denominator, Const(-1)))


def _raw_ratios(ode: QuasiLinearOde, xi: Expr):
    F = ode.coeffs
    d = {v: diff(xi, v) for v in ode.coordinates()}
    out = []
    for i in range(1, ode.n + 1):
        yi = Y(i - 1)
        num = add(diff(F[0], yi), neg(diff(F[i], T)))
        den = add(mul(d[T], F[i]), neg(mul(d[yi], F[0])))
        out.append(((i, 0), num, den))
    for i in range(2, ode.n + 1):
        for j in range(1, i):
            yi, yj = Y(i - 1), Y(j - 1)
            num = add(diff(F[j], yi), neg(diff(F[i], yj)))
            den = add(mul(d[yj], F[i]), neg(mul(d[yi], F[j])))
            out.append(((i, j), num, den))
    return out


def ratio_conditions(
    ode: QuasiLinearOde, xi: XiSpec, settings: Optional[ProbeSettings] = None
) -> List[RatioCondition]:
    out = []
    for salt, (index, num, den) in enumerate(_raw_ratios(ode, xi.xi)):
        if check_zero(den, settings, 101 + salt).is_zero:
            verdict = check_zero(num, settings, 211 + salt)
            if not verdict.is_zero:
                raise DegenerateInconsistent(index, verdict)
            out.append(RatioCondition(index, num, den, "Degenerate"))
        else:
            out.append(RatioCondition(index, num, den, "Active"))
    return out


# --------------------------------------------------------------------------
# rewriting a ratio as g(xi)


def _invert(xi_w: Expr, w: JetVar) -> Optional[Expr]:
    """Solve xi_w(w) = s for w when xi_w is c*w^p, a*w + b or c*exp(a*w)."""
    lin = _linear(xi_w, w)
    if lin is not None and lin[0] != ZERO:
        a, b = lin
        return mul(add(S_EXPR, neg(b)), power(a, Const(-1)))
    coeff: List[Expr] = []
    p = None
    ex = None
    for f in factors_of(xi_w):
        if w not in f.free_vars:
            coeff.append(f)
        elif f == Var(w):
            p = Fraction(1) if p is None else None
        elif isinstance(f, Pow) and f.base == Var(w) and isinstance(f.exp, Const) and p is None:
            p = f.exp.value
        elif isinstance(f, Fun) and f.name == "exp" and ex is None:
            ex = _linear(f.arg, w)
            if ex is None:
                return None
        else:
            return None
    c = mul(*coeff)
    if p is not None and ex is None:
        return power(mul(S_EXPR, power(c, Const(-1))), Const(1 / p))
    if ex is not None and p is None:
        a, b = ex
        return mul(add(fun("ln", mul(S_EXPR, power(c, Const(-1)))), neg(b)), power(a, Const(-1)))
    return None


def _sample_table(r: Expr, xi: Expr, settings: ProbeSettings, rows: int = 8) -> List[Tuple[float, float]]:
    variables = sorted(r.free_vars | xi.free_vars, key=lambda v: v.rank)
    rng = np.random.default_rng(settings.seed)
    pts = settings.box.sample(variables, 4 * rows, rng)
    table = []
    for p in pts:
        point = dict(zip(variables, p))
        try:
            table.append((eval_at(xi, point), eval_at(r, point)))
        except SingularPoint:
            continue
        if len(table) == rows:
            break
    return sorted(table)


_REFERENCE_VALUES = (Fraction(1), Fraction(2), Fraction(1, 2), Fraction(-1), Fraction(3, 2))


def rewrite_in_xi(r, xi: XiSpec, settings: Optional[ProbeSettings] = None) -> Expr:
    """Express r as g(s) with g(xi) = r; s is a fresh symbol."""
    settings = settings or ProbeSettings()
    r = simplify(to_expr(r))
    x = xi.xi
    if not r.free_vars:
        return r
    coords = sorted(r.free_vars | x.free_vars, key=lambda v: v.rank)
    dr = {v: diff(r, v) for v in coords}
    dx = {v: diff(x, v) for v in coords}
    for salt, (u, v) in enumerate(combinations(coords, 2)):
        minor = add(mul(dr[u], dx[v]), neg(mul(dr[v], dx[u])))
        verdict = check_zero(minor, settings, 307 + salt)
        if not verdict.is_zero:
            raise NotFunctionOfXi(r, x, minor, verdict)
    if not x.free_vars:
        raise NotFunctionOfXi(r, x, r, check_zero(dr[coords[0]], settings))
    for w in sorted(x.free_vars, key=lambda v: v.rank):
        others = [v for v in coords if v != w]
        for ref in _REFERENCE_VALUES:
            fixed = {v: ref for v in others}
            xi_w = substitute(x, fixed)
            if w not in xi_w.free_vars:
                continue
            inv = _invert(xi_w, w)
            if inv is None:
                continue
            g = substitute(substitute(r, fixed), {w: inv})
            if check_zero(add(substitute(g, {S: x}), neg(r)), settings, 401).is_zero:
                return g
    raise RewriteFailed(r, x, _sample_table(r, x, settings))


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class FactorResult:
    mu: Expr
    g: Expr
    xi: Optional[XiSpec]
    certificate: ExactnessReport
    path: str  # "exact" | "time" | "jet:k" | "ansatz" | "given"
    exponents: Optional[Tuple[Fraction, ...]] = None
    family: Tuple[Tuple[Fraction, ...], ...] = ()
    notes: Tuple[str, ...] = ()

    @property
    def trivial(self) -> bool:
        return not self.mu.free_vars


def _exact_result(report: ExactnessReport, path: str, xi: Optional[XiSpec] = None) -> FactorResult:
    return FactorResult(ONE, ZERO, xi, report, path, notes=("equation is already exact; mu = 1",))


def _strip_abs_ln(term: Expr) -> Tuple[Fraction, Optional[Expr]]:
    """c*ln(u) or c*ln|u| -> (c, u); abs is dropped when c is an integer."""
    c = Fraction(1)
    rest = []
    for f in factors_of(term):
        if isinstance(f, Const):
            c *= f.value
        else:
            rest.append(f)
    if len(rest) == 1 and isinstance(rest[0], Fun) and rest[0].name == "ln":
        arg = rest[0].arg
        if isinstance(arg, Fun) and arg.name == "abs" and c.denominator == 1:
            arg = arg.arg
        return c, arg
    return c, None


def mu_from_antiderivative(G: Expr, xi: Expr) -> Expr:
    """exp(G(s)) at s = xi, dropping constant factors."""
    factors = []
    for term in terms_of(simplify(G)):
        if not term.free_vars:
            continue
        c, u = _strip_abs_ln(term)
        if u is not None:
            factors.append(power(u, Const(c)))
        else:
            factors.append(fun("exp", term))
    return substitute(mul(*factors), {S: xi})


def _certify(ode: QuasiLinearOde, mu: Expr, settings: Optional[ProbeSettings]) -> ExactnessReport:
    report = exactness_report(apply_factor(ode, mu, settings), settings)
    if not report.exact:
        raise CertificateFailed(mu, report)
    return report


def find_mu_given_xi(
    ode: QuasiLinearOde,
    xi: XiSpec,
    settings: Optional[ProbeSettings] = None,
    path: str = "given",
) -> FactorResult:
    report = exactness_report(ode, settings)
    if report.exact:
        return _exact_result(report, path, xi)
    if xi.n != ode.n:
        raise ValueError(f"xi is declared for order {xi.n}, equation has order {ode.n}")
    conds = ratio_conditions(ode, xi, settings)
    active = [c for c in conds if c.status == "Active"]
    first = min(active, key=lambda c: len(print_expr(c.ratio)))
    for salt, c in enumerate(active):
        if c is first:
            continue
        cross = add(mul(first.numerator, c.denominator), neg(mul(c.numerator, first.denominator)))
        verdict = check_zero(cross, settings, 503 + salt)
        if not verdict.is_zero:
            raise RatiosDisagree(first.index, c.index, verdict)
    g = rewrite_in_xi(first.ratio, xi, settings)
    res = integrate_uni(g, S)
    if not res.closed:
        raise IntegrationUnsupported(f"cannot integrate g(s) = {print_expr(g)}: {res.reason}")
    mu = mu_from_antiderivative(res.antiderivative, xi.xi)
    cert = _certify(ode, mu, settings)
    degenerate = [c.index for c in conds if c.status == "Degenerate"]
    notes = (f"degenerate pairs (0/0, no constraint): {degenerate}",) if degenerate else ()
    return FactorResult(mu, g, xi, cert, path, notes=notes)


def _require(ode: QuasiLinearOde, keep, what: str, settings) -> ExactnessReport:
    report = exactness_report(ode, settings)
    bad = [c.label for c in report.conditions if keep(c) and not c.holds]
    if bad and not report.exact:
        raise CrossConditionsFail(bad, what)
    return report


def find_mu_time(ode: QuasiLinearOde, settings: Optional[ProbeSettings] = None, alpha=None) -> FactorResult:
    report = _require(ode, lambda c: c.kind == "cross", "mu(t)", settings)
    if report.exact:
        return _exact_result(report, "time")
    return find_mu_given_xi(ode, XiSpec.time(ode.n, alpha), settings, "time")


def find_mu_jet(ode: QuasiLinearOde, k: int, settings: Optional[ProbeSettings] = None, alpha_k=None) -> FactorResult:
    if not 1 <= k <= ode.n:
        raise ValueError(f"jet index must be in 1..{ode.n}, got {k}")
    label = "y" if k == 1 else f"y{k - 1}"
    report = _require(ode, lambda c: k not in (c.i, c.j), f"mu({label})", settings)
    if report.exact:
        return _exact_result(report, f"jet:{k}")
    return find_mu_given_xi(ode, XiSpec.jet(ode.n, k, alpha_k), settings, f"jet:{k}")


# --------------------------------------------------------------------------
# power ansatz mu = t^a0 * y^a1 * y1^a2 * ...


def _ansatz_rows(ode: QuasiLinearOde) -> List[List[Expr]]:
    """Per condition: [E0, E_t, E_y, ...] with E0 + sum a_m E_m == 0."""
    F = ode.coeffs
    coords = ode.coordinates()
    inv = [power(Var(v), Const(-1)) for v in coords]
    rows = []
    for i in range(1, ode.n + 1):
        row = [ZERO] * (ode.n + 2)
        row[0] = add(diff(F[i], T), neg(diff(F[0], Y(i - 1))))
        row[1] = mul(F[i], inv[0])
        row[1 + i] = add(row[1 + i], neg(mul(F[0], inv[i])))
        rows.append(row)
    for i in range(2, ode.n + 1):
        for j in range(1, i):
            row = [ZERO] * (ode.n + 2)
            row[0] = add(diff(F[i], Y(j - 1)), neg(diff(F[j], Y(i - 1))))
            row[1 + j] = add(row[1 + j], mul(F[i], inv[j]))
            row[1 + i] = add(row[1 + i], neg(mul(F[j], inv[i])))
            rows.append(row)
    return rows


def _split_const(term: Expr) -> Tuple[Fraction, Expr]:
    c = Fraction(1)
    rest = []
    for f in factors_of(term):
        if isinstance(f, Const):
            c *= f.value
        else:
            rest.append(f)
    return c, mul(*rest)


def _linear_system(rows: List[List[Expr]], unknowns: int):
    """Collect coefficients of each distinct non-constant monomial."""
    eqs: List[List[Fraction]] = []
    for row in rows:
        table: Dict[Expr, List[Fraction]] = {}
        for m, e in enumerate(row):
            for term in terms_of(simplify(e)):
                if term == ZERO:
                    continue
                c, key = _split_const(term)
                table.setdefault(key, [Fraction(0)] * (unknowns + 1))[m] += c
        eqs.extend(v for v in table.values() if any(v))
    return eqs


def _rref_solve(eqs: List[List[Fraction]], unknowns: int):
    """Solve sum_m a_m c_m = -c_0 exactly; returns (particular, null basis) or None."""
    A = [[Fraction(x) for x in e[1:]] + [-Fraction(e[0])] for e in eqs]
    pivots = []
    r = 0
    for col in range(unknowns):
        pr = next((k for k in range(r, len(A)) if A[k][col] != 0), None)
        if pr is None:
            continue
        A[r], A[pr] = A[pr], A[r]
        pv = A[r][col]
        A[r] = [x / pv for x in A[r]]
        for k in range(len(A)):
            if k != r and A[k][col] != 0:
                f = A[k][col]
                A[k] = [a - f * b for a, b in zip(A[k], A[r])]
        pivots.append(col)
        r += 1
    if any(all(x == 0 for x in row[:-1]) and row[-1] != 0 for row in A):
        return None
    part = [Fraction(0)] * unknowns
    for k, col in enumerate(pivots):
        part[col] = A[k][-1]
    free = [c for c in range(unknowns) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * unknowns
        vec[fc] = Fraction(1)
        for k, col in enumerate(pivots):
            vec[col] = -A[k][fc]
        basis.append(tuple(vec))
    return tuple(part), basis


def _numeric_solve(rows: List[List[Expr]], ode: QuasiLinearOde, settings: ProbeSettings, bound: int):
    coords = ode.coordinates()
    rng = np.random.default_rng(settings.seed + 17)
    pts = settings.box.sample(coords, 4 * settings.probes, rng)
    A, b = [], []
    for p in pts:
        point = dict(zip(coords, p))
        try:
            vals = [[eval_at(e, point) for e in row] for row in rows]
        except SingularPoint:
            continue
        for v in vals:
            A.append(v[1:])
            b.append(-v[0])
    if not A:
        return None
    sol, *_ = np.linalg.lstsq(np.array(A), np.array(b), rcond=None)
    return tuple(Fraction(float(x)).limit_denominator(bound) for x in sol)


def _in_bounds(a: Sequence[Fraction], bound: int) -> bool:
    return all(abs(x.numerator) <= bound and x.denominator <= bound for x in a)


def monomial(ode_n: int, exponents: Sequence[Fraction]) -> Expr:
    coords = [T] + [Y(k) for k in range(ode_n)]
    return mul(*[power(Var(v), Const(a)) for v, a in zip(coords, exponents) if a != 0])


def _ansatz_xi(n: int, a: Sequence[Fraction]) -> XiSpec:
    comps = [power(Var(v), Const(x)) if x != 0 else ONE for v, x in zip([T] + [Y(k) for k in range(n)], a)]
    return XiSpec(comps[0], tuple(comps[1:]))


def find_mu_power_ansatz(
    ode: QuasiLinearOde, bound: int = DEFAULT_BOUND, settings: Optional[ProbeSettings] = None
) -> FactorResult:
    settings = settings or ProbeSettings()
    unknowns = ode.n + 1
    rows = _ansatz_rows(ode)
    solved = _rref_solve(_linear_system(rows, unknowns), unknowns)
    notes = []
    if solved is None:
        approx = _numeric_solve(rows, ode, settings, bound)
        if approx is None:
            raise NoSolution("no monomial factor t^a0*y^a1*... solves the exactness conditions")
        part, basis = approx, []
        notes.append("coefficient matching was inconsistent; exponents from a least-squares fit")
    else:
        part, basis = solved
    if not _in_bounds(part, bound):
        raise NoSolution(f"exponents {[str(x) for x in part]} exceed the bound {bound}")
    mu = monomial(ode.n, part)
    try:
        cert = exactness_report(apply_factor(ode, mu, settings), settings)
    except OdeError as exc:
        raise NoSolution(str(exc)) from exc
    if not cert.exact:
        if solved is None:
            raise NoSolution("least-squares exponents do not certify")
        raise CertificateFailed(mu, cert)
    if basis:
        notes.append(f"solution space has dimension {len(basis)}; certified the representative with free exponents 0")
    if not mu.free_vars:
        return FactorResult(ONE, ZERO, None, cert, "ansatz", tuple(part), tuple(basis), tuple(notes))
    return FactorResult(
        mu, power(S_EXPR, Const(-1)), _ansatz_xi(ode.n, part), cert, "ansatz", tuple(part), tuple(basis), tuple(notes)
    )


# --------------------------------------------------------------------------
# linear equations P_n y^(n) + ... + P_1 y' + P_0 y = h


@dataclass(frozen=True)
class LinearFactor:
    mu: Expr
    first_integral_rhs: Expr
    trivial: bool


def linear_ode_factor(P: Sequence, h, settings: Optional[ProbeSettings] = None) -> LinearFactor:
    P = [simplify(to_expr(p)) for p in P]
    h = simplify(to_expr(h))
    for e in P + [h]:
        if any(v != T for v in e.free_vars):
            raise ValueError(f"linear coefficients must depend on t only, got {print_expr(e)}")
    if len(P) < 3:
        raise ValueError("need P0, P1 and at least P2")
    Pn = P[-1]
    if check_zero(Pn, settings).is_zero:
        raise ConditionFailed("leading coefficient", "P_n vanishes identically")
    for k in range(2, len(P) - 1):
        verdict = check_zero(wronskian(P[k], Pn), settings, 601 + k)
        if not verdict.is_zero:
            raise ConditionFailed("proportionality", f"P{k} is not proportional to P{len(P) - 1}: {verdict.describe()}")
    verdict = check_zero(add(wronskian(P[1], Pn), neg(mul(P[0], Pn))), settings, 701)
    if not verdict.is_zero:
        raise ConditionFailed("wronskian", f"W(P1, Pn) - P0*Pn is {verdict.describe()}")
    mu = power(Pn, Const(-1))
    res = integrate_uni(mul(h, mu), T)
    if not res.closed:
        raise IntegrationUnsupported(f"cannot integrate h/P = {print_expr(mul(h, mu))}: {res.reason}")
    return LinearFactor(mu, res.antiderivative, not mu.free_vars)


# --------------------------------------------------------------------------
# auto search


@dataclass(frozen=True)
class SearchOutcome:
    result: Optional[FactorResult]
    attempts: Tuple[Tuple[str, str], ...]  # (path, failure message)


def search_order(n: int) -> List[str]:
    return ["exact", "time"] + [f"jet:{k}" for k in range(1, n + 1)] + ["ansatz"]


def find_mu_auto(
    ode: QuasiLinearOde,
    settings: Optional[ProbeSettings] = None,
    bound: int = DEFAULT_BOUND,
    user_xi: Optional[XiSpec] = None,
) -> SearchOutcome:
    """Try each shape in the documented order; the first certified factor wins."""
    attempts = []
    paths = search_order(ode.n) + (["given"] if user_xi is not None else [])
    for path in paths:
        try:
            if path == "exact":
                report = exactness_report(ode, settings)
                if report.exact:
                    return SearchOutcome(_exact_result(report, "exact"), tuple(attempts))
                attempts.append((path, f"{len(report.violated)} exactness conditions violated"))
                continue
            if path == "time":
                res = find_mu_time(ode, settings)
            elif path.startswith("jet:"):
                res = find_mu_jet(ode, int(path[4:]), settings)
            elif path == "ansatz":
                res = find_mu_power_ansatz(ode, bound, settings)
            else:
                res = find_mu_given_xi(ode, user_xi, settings)
            return SearchOutcome(res, tuple(attempts))
        except MuFinderError as exc:
            attempts.append((path, str(exc)))
    return SearchOutcome(None, tuple(attempts))
