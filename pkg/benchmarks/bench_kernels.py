"""Compare the compiled and pure-Python kernels on the two hot loops.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from jetfactor.kernels import available_backends
from jetfactor.numverify import _compile_ode
from jetfactor.ode_model import split_equation
from jetfactor.symcore import ProbeBox, T, Y, compile_expr, parse_expr


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--steps", type=int, default=5000)
    args = ap.parse_args()

    ode = split_equation(parse_expr("y3 + y2 - 2*t*y^(-3)*y1 + y^(-2)"), 3)
    coords = [T, Y(0), Y(1), Y(2)]
    psi = compile_expr(parse_expr("y2 + y1 + t*y^(-2) + sin(t)*exp(y1)"), coords)
    pts = ProbeBox().sample(coords, args.points, np.random.default_rng(0))
    prog = _compile_ode(ode)
    init = np.array([1.0, 1.0, 1.0])

    backends = available_backends()
    results = {}
    for name, mod in backends.items():
        t_eval = best_of(lambda: mod.eval_batch(psi.ops, psi.args, psi.depth, pts), args.repeat)
        t_rk4 = best_of(
            lambda: mod.rk4(prog.ops, prog.args, prog.starts, prog.depth, 3, 0.0, init, 1e-4, args.steps, 1e-8),
            args.repeat,
        )
        results[name] = (t_eval, t_rk4)

    print(f"{'backend':<8} {'eval_batch [ms]':>16} {'rk4 [ms]':>10}")
    for name, (a, b) in results.items():
        print(f"{name:<8} {a * 1e3:>16.2f} {b * 1e3:>10.2f}")
    if "cython" in results:
        py, cy = results["python"], results["cython"]
        print(f"speedup  {py[0] / cy[0]:>15.1f}x {py[1] / cy[1]:>9.1f}x")
    else:
        print("compiled backend not built; only the fallback was timed")

    # both backends must agree before the timings mean anything
    if "cython" in backends:
        a = backends["python"].eval_batch(psi.ops, psi.args, psi.depth, pts[:500])
        b = backends["cython"].eval_batch(psi.ops, psi.args, psi.depth, pts[:500])
        assert np.allclose(a, b, rtol=1e-13, equal_nan=True)


if __name__ == "__main__":
    main()
