"""Zero testing: exact simplification first, then random probing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .. import kernels
from .evaluate import compile_expr
from .expr import ZERO, Expr, JetVar, as_var, simplify, terms_of

Interval = Tuple[float, float]
DEFAULT_INTERVALS: Tuple[Interval, ...] = ((-2.0, -0.1), (0.1, 2.0))


class InconclusiveDomain(ValueError):
    def __init__(self, expr: Expr, singular: int, sampled: int):
        super().__init__(f"{singular} of {sampled} probe points were singular for {expr}")
        self.expr = expr
        self.singular = singular
        self.sampled = sampled


@dataclass(frozen=True)
class ProbeBox:
    """Per-variable sampling intervals; unlisted variables use ``default``."""

    default: Tuple[Interval, ...] = DEFAULT_INTERVALS
    per_var: Tuple[Tuple[JetVar, Tuple[Interval, ...]], ...] = ()

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "ProbeBox":
        if not hi > lo:
            raise ValueError("box needs lo < hi")
        return cls(default=((float(lo), float(hi)),))

    def with_var(self, v, intervals: Sequence[Interval]) -> "ProbeBox":
        items = dict(self.per_var)
        items[as_var(v)] = tuple((float(a), float(b)) for a, b in intervals)
        return ProbeBox(self.default, tuple(sorted(items.items(), key=lambda kv: kv[0].rank)))

    def intervals(self, v: JetVar) -> Tuple[Interval, ...]:
        return dict(self.per_var).get(v, self.default)

    def sample(self, variables: Sequence[JetVar], count: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty((count, len(variables)))
        for j, v in enumerate(variables):
            ivs = self.intervals(v)
            lengths = np.array([b - a for a, b in ivs])
            which = rng.choice(len(ivs), size=count, p=lengths / lengths.sum())
            u = rng.random(count)
            lo = np.array([a for a, _ in ivs])[which]
            out[:, j] = lo + u * lengths[which]
        return out


@dataclass(frozen=True)
class ProbeSettings:
    probes: int = 32
    tol: float = 1e-9
    box: ProbeBox = field(default_factory=ProbeBox)
    seed: int = 0


class ZeroVerdict:
    is_zero: bool = False


@dataclass(frozen=True)
class ProvenZero(ZeroVerdict):
    is_zero = True

    def describe(self) -> str:
        return "proven zero"


@dataclass(frozen=True)
class ProbablyZero(ZeroVerdict):
    probes: int
    max_residual: float
    is_zero = True

    def describe(self) -> str:
        return f"probably zero ({self.probes} probes, max residual {self.max_residual:.3g})"


@dataclass(frozen=True)
class NonZero(ZeroVerdict):
    witness: Dict[str, float]
    value: float
    is_zero = False

    def describe(self) -> str:
        at = ", ".join(f"{k}={v:.6g}" for k, v in self.witness.items())
        return f"nonzero: {self.value:.6g} at ({at})"


def is_zero(
    e: Expr,
    box: Optional[ProbeBox] = None,
    probes: int = 32,
    tol: float = 1e-9,
    seed: int = 0,
) -> ZeroVerdict:
    s = simplify(e)
    if s == ZERO:
        return ProvenZero()
    box = box or ProbeBox()
    variables = sorted(s.free_vars, key=lambda v: v.rank)
    rng = np.random.default_rng(seed)
    budget = 10 * probes
    points = box.sample(variables, budget, rng)
    terms = terms_of(s)
    values = np.empty((len(terms), budget))
    for i, term in enumerate(terms):
        prog = compile_expr(term, variables)
        values[i] = kernels.eval_batch(prog.ops, prog.args, prog.depth, points)
    good = 0
    singular = 0
    max_residual = 0.0
    for r in range(budget):
        col = values[:, r]
        if np.isnan(col).any():
            singular += 1
            continue
        value = float(col.sum())
        scale = float(np.abs(col).max())
        if not np.isfinite(value) or abs(value) > tol * (1.0 + scale):
            witness = {v.label: float(x) for v, x in zip(variables, points[r])}
            return NonZero(witness, value)
        max_residual = max(max_residual, abs(value))
        good += 1
        if good == probes:
            break
    if good == 0 or singular > 0.9 * (good + singular):
        raise InconclusiveDomain(s, singular, good + singular)
    return ProbablyZero(good, max_residual)


def check_zero(e: Expr, settings: Optional[ProbeSettings] = None, salt: int = 0) -> ZeroVerdict:
    """is_zero driven by a settings bundle; ``salt`` decorrelates repeated calls."""
    st = settings or ProbeSettings()
    return is_zero(e, st.box, st.probes, st.tol, st.seed * 7919 + salt)
