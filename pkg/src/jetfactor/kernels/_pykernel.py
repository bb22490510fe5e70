"""Pure-Python kernels; same contract as the compiled ``_ckernel``."""

import math

import numpy as np

from .opcodes import ABS, ADD, ATAN, CONST, COS, EXP, LN, MUL, NEG, POW, POWI, SIN, VAR

NAN = float("nan")


def _run(ops, args, start, stop, x):
    stack = []
    push = stack.append
    pop = stack.pop
    for pc in range(start, stop):
        code = ops[pc]
        if code == CONST:
            push(args[pc])
        elif code == VAR:
            push(x[int(args[pc])])
        elif code == ADD:
            b = pop()
            stack[-1] += b
        elif code == MUL:
            b = pop()
            stack[-1] *= b
        elif code == NEG:
            stack[-1] = -stack[-1]
        elif code == POWI:
            b = stack[-1]
            e = args[pc]
            if b == 0.0 and e < 0:
                return NAN
            try:
                stack[-1] = b ** int(e)
            except OverflowError:
                return NAN
        elif code == POW:
            e = pop()
            b = stack[-1]
            if (b == 0.0 and e < 0) or (b < 0 and e != math.floor(e)):
                return NAN
            try:
                stack[-1] = b**e
            except OverflowError:
                return NAN
        else:
            a = stack[-1]
            if code == EXP:
                if a > 709.0:
                    return NAN
                stack[-1] = math.exp(a)
            elif code == LN:
                if a <= 0.0:
                    return NAN
                stack[-1] = math.log(a)
            elif code == SIN:
                stack[-1] = math.sin(a)
            elif code == COS:
                stack[-1] = math.cos(a)
            elif code == ATAN:
                stack[-1] = math.atan(a)
            elif code == ABS:
                stack[-1] = abs(a)
    v = stack[-1]
    if isinstance(v, complex) or not math.isfinite(v):
        return NAN
    return v


def eval_batch(ops, args, depth, points):
    """Evaluate one program at every row of ``points``; NaN marks a singular row."""
    ops = ops.tolist()
    args = args.tolist()
    pts = np.asarray(points, dtype=np.float64)
    n = len(ops)
    return np.array([_run(ops, args, 0, n, row) for row in pts.tolist()], dtype=np.float64)


def rk4(ops, args, starts, depth, n, t0, y0, h, steps, eps_rel):
    """Fixed-step RK4 for F_n y^(n) + ... + F_1 y' + F_0 = 0.

    ``starts`` delimits the programs for F_0..F_n inside ``ops``/``args``;
    every program reads the layout (t, y, y', ..., y^(n-1)).
    Returns (times, states, steps_done, stop_code).
    """
    ops = ops.tolist()
    args = args.tolist()
    starts = [int(s) for s in starts]
    ts = np.empty(steps + 1)
    states = np.empty((steps + 1, n))
    t = float(t0)
    y = [float(v) for v in y0]
    ts[0] = t
    states[0] = y

    def rhs(tt, yy):
        x = [tt] + yy
        fs = []
        for i in range(n + 1):
            v = _run(ops, args, starts[i], starts[i + 1], x)
            if v != v:
                return None, 2
            fs.append(v)
        fn = fs[n]
        scale = max(abs(v) for v in fs)
        if fn == 0.0 or abs(fn) < eps_rel * scale:
            return None, 1
        acc = fs[0]
        for i in range(1, n):
            acc += fs[i] * yy[i]
        top = -acc / fn
        if not math.isfinite(top):
            return None, 2
        return yy[1:] + [top], 0

    for step in range(steps):
        k1, code = rhs(t, y)
        if code:
            return ts[: step + 1], states[: step + 1], step, code
        k2, code = rhs(t + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k1)])
        if code:
            return ts[: step + 1], states[: step + 1], step, code
        k3, code = rhs(t + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k2)])
        if code:
            return ts[: step + 1], states[: step + 1], step, code
        k4, code = rhs(t + h, [a + h * b for a, b in zip(y, k3)])
        if code:
            return ts[: step + 1], states[: step + 1], step, code
        y = [a + h / 6.0 * (b + 2.0 * c + 2.0 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4)]
        if not all(math.isfinite(v) for v in y):
            return ts[: step + 1], states[: step + 1], step, 2
        t = t0 + (step + 1) * h
        ts[step + 1] = t
        states[step + 1] = y
    return ts, states, steps, 0
