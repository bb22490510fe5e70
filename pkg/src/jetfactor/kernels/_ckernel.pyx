# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: bytecode evaluation and fixed-step RK4."""

import numpy as np

from libc.math cimport atan, cos, exp, fabs, floor, isfinite, log, pow, sin, NAN
from libc.stdlib cimport free, malloc

cdef enum:
    CONST = 0
    VAR = 1
    ADD = 2
    MUL = 3
    NEG = 4
    POWI = 5
    POW = 6
    EXP = 7
    LN = 8
    SIN = 9
    COS = 10
    ATAN = 11
    ABS = 12


cdef double _run(const int[::1] ops, const double[::1] args, Py_ssize_t start,
                 Py_ssize_t stop, const double* x, double* stack) noexcept nogil:
    cdef Py_ssize_t pc
    cdef int sp = -1
    cdef int code
    cdef double a, b, e
    for pc in range(start, stop):
        code = ops[pc]
        if code == CONST:
            sp += 1
            stack[sp] = args[pc]
        elif code == VAR:
            sp += 1
            stack[sp] = x[<Py_ssize_t>args[pc]]
        elif code == ADD:
            sp -= 1
            stack[sp] = stack[sp] + stack[sp + 1]
        elif code == MUL:
            sp -= 1
            stack[sp] = stack[sp] * stack[sp + 1]
        elif code == NEG:
            stack[sp] = -stack[sp]
        elif code == POWI:
            b = stack[sp]
            e = args[pc]
            if b == 0.0 and e < 0:
                return NAN
            stack[sp] = pow(b, e)
        elif code == POW:
            sp -= 1
            b = stack[sp]
            e = stack[sp + 1]
            if (b == 0.0 and e < 0) or (b < 0 and e != floor(e)):
                return NAN
            stack[sp] = pow(b, e)
        else:
            a = stack[sp]
            if code == EXP:
                if a > 709.0:
                    return NAN
                stack[sp] = exp(a)
            elif code == LN:
                if a <= 0.0:
                    return NAN
                stack[sp] = log(a)
            elif code == SIN:
                stack[sp] = sin(a)
            elif code == COS:
                stack[sp] = cos(a)
            elif code == ATAN:
                stack[sp] = atan(a)
            elif code == ABS:
                stack[sp] = fabs(a)
    a = stack[sp]
    if not isfinite(a):
        return NAN
    return a


def eval_batch(const int[::1] ops, const double[::1] args, int depth, points):
    """Evaluate one program at every row of ``points``; NaN marks a singular row."""
    cdef const double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t n = ops.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    cdef double* stack = <double*>malloc((depth + 1) * sizeof(double))
    cdef Py_ssize_t r
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(m):
                res[r] = _run(ops, args, 0, n, &pts[r, 0] if pts.shape[1] > 0 else NULL, stack)
    finally:
        free(stack)
    return out


cdef int _rhs(const int[::1] ops, const double[::1] args, const int[::1] starts, int n,
              double t, const double* y, double* x, double* fs, double* stack,
              double eps_rel, double* out) noexcept nogil:
    cdef int i
    cdef double v, scale, acc, fn
    x[0] = t
    for i in range(n):
        x[i + 1] = y[i]
    scale = 0.0
    for i in range(n + 1):
        v = _run(ops, args, starts[i], starts[i + 1], x, stack)
        if v != v:
            return 2
        fs[i] = v
        if fabs(v) > scale:
            scale = fabs(v)
    fn = fs[n]
    if fn == 0.0 or fabs(fn) < eps_rel * scale:
        return 1
    acc = fs[0]
    for i in range(1, n):
        acc += fs[i] * y[i]
    for i in range(n - 1):
        out[i] = y[i + 1]
    out[n - 1] = -acc / fn
    if not isfinite(out[n - 1]):
        return 2
    return 0


def rk4(const int[::1] ops, const double[::1] args, const int[::1] starts, int depth,
        int n, double t0, y0, double h, int steps, double eps_rel):
    """Fixed-step RK4 for F_n y^(n) + ... + F_1 y' + F_0 = 0.

    Returns (times, states, steps_done, stop_code).
    """
    ts_arr = np.empty(steps + 1, dtype=np.float64)
    st_arr = np.empty((steps + 1, n), dtype=np.float64)
    cdef double[::1] ts = ts_arr
    cdef double[:, ::1] st = st_arr
    cdef double* work = <double*>malloc((8 * n + 2 * (n + 2) + depth + 1) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef double* y = work
    cdef double* tmp = work + n
    cdef double* k1 = work + 2 * n
    cdef double* k2 = work + 3 * n
    cdef double* k3 = work + 4 * n
    cdef double* k4 = work + 5 * n
    cdef double* x = work + 8 * n
    cdef double* fs = x + (n + 2)
    cdef double* stack = fs + (n + 2)
    cdef int i, step, code = 0, done = steps
    cdef double t = t0
    for i in range(n):
        y[i] = y0[i]
        st[0, i] = y[i]
    ts[0] = t0
    try:
        with nogil:
            for step in range(steps):
                code = _rhs(ops, args, starts, n, t, y, x, fs, stack, eps_rel, k1)
                if code:
                    done = step
                    break
                for i in range(n):
                    tmp[i] = y[i] + 0.5 * h * k1[i]
                code = _rhs(ops, args, starts, n, t + 0.5 * h, tmp, x, fs, stack, eps_rel, k2)
                if code:
                    done = step
                    break
                for i in range(n):
                    tmp[i] = y[i] + 0.5 * h * k2[i]
                code = _rhs(ops, args, starts, n, t + 0.5 * h, tmp, x, fs, stack, eps_rel, k3)
                if code:
                    done = step
                    break
                for i in range(n):
                    tmp[i] = y[i] + h * k3[i]
                code = _rhs(ops, args, starts, n, t + h, tmp, x, fs, stack, eps_rel, k4)
                if code:
                    done = step
                    break
                for i in range(n):
                    y[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                    if not isfinite(y[i]):
                        code = 2
                if code:
                    done = step
                    break
                t = t0 + (step + 1) * h
                ts[step + 1] = t
                for i in range(n):
                    st[step + 1, i] = y[i]
    finally:
        free(work)
    return ts_arr[: done + 1], st_arr[: done + 1], done, code
