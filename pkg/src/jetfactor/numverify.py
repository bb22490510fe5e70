"""Numeric witnesses: fixed-step RK4 trajectories and first-integral drift."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .kernels.opcodes import STOP_PIVOT, STOP_SINGULAR
from .ode_model import QuasiLinearOde
from .symcore import Expr, ProbeSettings, SingularPoint, T, Y, compile_expr, eval_at

EPS_PIVOT = 1e-8
NOISE_FLOOR = 1e-13
DEFAULT_SPAN = 0.5
DEFAULT_STEP = 1e-3
DEFAULT_TOL = 1e-6
DEFAULT_RUNS = 5
RESOLUTION_TOL = 1e-6


class NumVerifyError(ValueError):
    pass


class PivotTooSmall(NumVerifyError):
    def __init__(self, state: Sequence[float], fn: float):
        super().__init__(f"|F_n| = {abs(fn):.3g} is below the pivot threshold at state {tuple(state)}")
        self.state = tuple(state)
        self.fn = fn


class ImmediateSingularity(NumVerifyError):
    pass


class DriftBelowNoiseFloor(NumVerifyError):
    pass


@dataclass(frozen=True)
class _OdeProgram:
    ops: np.ndarray
    args: np.ndarray
    starts: np.ndarray
    depth: int


@lru_cache(maxsize=64)
def _compile_ode(ode: QuasiLinearOde) -> _OdeProgram:
    coords = ode.coordinates()
    progs = [compile_expr(c, coords) for c in ode.coeffs]
    starts = np.cumsum([0] + [len(p) for p in progs]).astype(np.int32)
    return _OdeProgram(
        np.concatenate([p.ops for p in progs]).astype(np.int32),
        np.concatenate([p.args for p in progs]),
        starts,
        max(p.depth for p in progs),
    )


def solve_highest(ode: QuasiLinearOde, state: Sequence[float]) -> float:
    """y^(n) from (t, y, ..., y^(n-1)) by solving the equation for it."""
    state = [float(x) for x in state]
    if len(state) != ode.n + 1:
        raise ValueError(f"state needs {ode.n + 1} entries (t, y, ..., y{ode.n - 1})")
    point = dict(zip(ode.coordinates(), state))
    F = [eval_at(c, point) for c in ode.coeffs]
    scale = max(abs(f) for f in F)
    fn = F[ode.n]
    if fn == 0.0 or abs(fn) < EPS_PIVOT * scale:
        raise PivotTooSmall(state, fn)
    acc = math.fsum([F[0]] + [F[i] * state[i + 1] for i in range(1, ode.n)])
    return -acc / fn


@dataclass(frozen=True)
class Trajectory:
    t_grid: np.ndarray
    states: np.ndarray  # rows (y, y1, ..., y^(n-1))
    step: float
    method: str = "RK4"
    stop_reason: Optional[str] = None

    @property
    def early_stop(self) -> bool:
        return self.stop_reason is not None


def rk4_trajectory(
    ode: QuasiLinearOde,
    init: Sequence[float],
    t_span: Tuple[float, float],
    h: float,
) -> Trajectory:
    """Classical RK4 with fixed step h from y(t0) = init over t_span = (t0, t1)."""
    t0, t1 = (float(x) for x in t_span)
    if not h > 0 or not math.isfinite(t1 - t0) or t1 < t0:
        raise ValueError("need h > 0 and a finite span with t1 >= t0")
    init = [float(x) for x in init]
    if len(init) != ode.n:
        raise ValueError(f"initial state needs {ode.n} entries (y, ..., y{ode.n - 1})")
    try:
        solve_highest(ode, [t0] + init)
    except (PivotTooSmall, SingularPoint) as exc:
        raise ImmediateSingularity(f"initial state is singular: {exc}") from exc
    steps = int(round((t1 - t0) / h))
    prog = _compile_ode(ode)
    ts, states, done, code = kernels.rk4(
        prog.ops, prog.args, prog.starts, prog.depth, ode.n, t0, np.asarray(init, dtype=np.float64), h, steps, EPS_PIVOT
    )
    reason = None
    if code == STOP_PIVOT:
        reason = f"pivot |F{ode.n}| too small after {done} steps (t={ts[-1]:.6g})"
    elif code == STOP_SINGULAR:
        reason = f"non-finite value after {done} steps (t={ts[-1]:.6g})"
    return Trajectory(np.asarray(ts), np.asarray(states), h, "RK4", reason)


@dataclass(frozen=True)
class DriftReport:
    psi0: float
    max_drift: float
    normalized_drift: float
    steps_used: int
    tol: float
    early_stop: Optional[str] = None
    t0: Optional[float] = None
    init: Tuple[float, ...] = ()
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.early_stop is None and self.normalized_drift <= self.tol


def resolution_error(ode: QuasiLinearOde, traj: Trajectory) -> float:
    """Max state gap between traj and a rerun at half its step, relative to 1 + |state|."""
    half = rk4_trajectory(ode, traj.states[0], (traj.t_grid[0], traj.t_grid[-1]), traj.step / 2)
    if half.early_stop or len(half.t_grid) != 2 * len(traj.t_grid) - 1:
        return math.inf
    gap = np.abs(half.states[::2] - traj.states) / (1.0 + np.abs(traj.states))
    return float(np.max(gap))


def psi_along(psi: Expr, traj: Trajectory) -> np.ndarray:
    n = traj.states.shape[1]
    coords = [T] + [Y(k) for k in range(n)]
    extra = [v for v in psi.free_vars if v not in coords]
    if extra:
        raise ValueError(f"psi uses {sorted(v.label for v in extra)}, beyond the trajectory's jet")
    pts = np.column_stack([traj.t_grid, traj.states])
    prog = compile_expr(psi, coords)
    vals = kernels.eval_batch(prog.ops, prog.args, prog.depth, pts)
    bad = np.flatnonzero(np.isnan(vals))
    if bad.size:
        eval_at(psi, dict(zip(coords, pts[bad[0]])))  # raises SingularPoint with the sub-expression
        raise SingularPoint(psi, f"non-finite value at t={pts[bad[0], 0]:.6g}")
    return vals


def check_first_integral(psi: Expr, traj: Trajectory, tol: float = DEFAULT_TOL) -> DriftReport:
    vals = psi_along(psi, traj)
    psi0 = float(vals[0])
    max_drift = float(np.max(np.abs(vals - psi0)))
    return DriftReport(
        psi0,
        max_drift,
        max_drift / (1.0 + abs(psi0)),
        len(vals) - 1,
        tol,
        traj.stop_reason,
        float(traj.t_grid[0]),
        tuple(float(x) for x in traj.states[0]),
    )


def h_refinement_check(
    ode: QuasiLinearOde, psi: Expr, init: Sequence[float], t_span: Tuple[float, float], h: float
) -> float:
    """max_drift(h) / max_drift(h/2); about 16 to 32 for a fourth-order method."""
    coarse = check_first_integral(psi, rk4_trajectory(ode, init, t_span, h))
    fine = check_first_integral(psi, rk4_trajectory(ode, init, t_span, h / 2))
    for rep in (coarse, fine):
        if rep.early_stop:
            raise NumVerifyError(f"trajectory stopped early: {rep.early_stop}")
    if coarse.max_drift < NOISE_FLOOR and fine.max_drift < NOISE_FLOOR:
        raise DriftBelowNoiseFloor(
            f"drifts {coarse.max_drift:.3g} and {fine.max_drift:.3g} are below {NOISE_FLOOR:g}"
        )
    if fine.max_drift == 0.0:
        return math.inf
    return coarse.max_drift / fine.max_drift


def verify_first_integral(
    ode: QuasiLinearOde,
    psi: Expr,
    settings: Optional[ProbeSettings] = None,
    runs: int = DEFAULT_RUNS,
    span: float = DEFAULT_SPAN,
    h: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
    max_draws: int = 200,
) -> List[DriftReport]:
    """Drift of psi along ``runs`` trajectories from random states in the probe box.

    Starting states whose trajectory leaves the nonsingular region, or grazes it so
    closely that step h no longer resolves the solution, are redrawn.
    Run i draws from its own generator seeded with (seed, i).
    """
    settings = settings or ProbeSettings()
    coords = [T] + [Y(k) for k in range(ode.n)]
    reports = []
    for run in range(runs):
        rng = np.random.default_rng([settings.seed, run])
        last = "no draws"
        for _ in range(max_draws):
            state = settings.box.sample(coords, 1, rng)[0]
            t0 = float(state[0])
            try:
                traj = rk4_trajectory(ode, state[1:], (t0, t0 + span), h)
            except ImmediateSingularity as exc:
                last = str(exc)
                continue
            if traj.early_stop:
                last = traj.stop_reason
                continue
            gap = resolution_error(ode, traj)
            if gap > RESOLUTION_TOL:
                last = f"step {h:g} does not resolve the trajectory (half-step gap {gap:.3g})"
                continue
            try:
                rep = check_first_integral(psi, traj, tol)
            except SingularPoint as exc:
                last = f"psi singular along trajectory: {exc}"
                continue
            reports.append(
                DriftReport(
                    rep.psi0, rep.max_drift, rep.normalized_drift, rep.steps_used, tol, None, t0, rep.init, run
                )
            )
            break
        else:
            raise NumVerifyError(f"no usable initial state for run {run} after {max_draws} draws ({last})")
    return reports


def write_trajectory_csv(fh, traj: Trajectory, psi: Optional[Expr] = None) -> None:
    """Columns t, y, y1, ..., plus psi when given."""
    n = traj.states.shape[1]
    header = ["t"] + ["y" if k == 0 else f"y{k}" for k in range(n)]
    vals = None
    if psi is not None:
        header.append("psi")
        vals = psi_along(psi, traj)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in range(len(traj.t_grid)):
        row = [repr(float(traj.t_grid[r]))] + [repr(float(x)) for x in traj.states[r]]
        if vals is not None:
            row.append(repr(float(vals[r])))
        w.writerow(row)

