"""Compiled (numba) vs numpy fallback on the two hot paths.

    python3 benchmarks/bench_accel.py [--m 40] [--reps 200000] [--repeat 3]

Kernel assembly builds the class rows of the Nystrom operator at the reference
configuration; the Monte Carlo run tallies running maxima for n up to 50.
Both paths must agree (bitwise for Monte Carlo, to 1e-14 for the kernel).
"""
import argparse
import time

import numpy as np

from ar2max import _accel
from ar2max.kernel import KernelContext
from ar2max.mc import simulate_max_cdf
from ar2max.model import gaussian_innovation, validate_params
from ar2max.quadrature import tensor_grid, truncation_box
from ar2max.spectral import build_operator


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=40)
    ap.add_argument("--reps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    params = validate_params(0.5, 0.3)
    innov = gaussian_innovation(1.0)
    ctx = KernelContext(params, innov, 3.0)
    grid = tensor_grid(args.m, truncation_box(innov, params, 3.0))

    cases = {
        "kernel assembly": lambda: build_operator(ctx, grid).class_rows,
        "monte carlo tally": lambda: np.array([e.p_hat for e in simulate_max_cdf(
            params, innov, "gaussian-stationary", list(range(1, 51)), [2.0, 3.0], args.reps, seed=1)]),
    }
    if not _accel.NUMBA_AVAILABLE:
        print("numba not installed; only the numpy path is timed")

    print(f"{'case':<20}{'numpy [s]':>12}{'numba [s]':>12}{'speed-up':>10}{'max diff':>12}")
    previous = _accel.numba_enabled()
    try:
        for name, fn in cases.items():
            _accel.set_numba(False)
            t_np, ref = best_of(fn, args.repeat)
            if _accel.NUMBA_AVAILABLE:
                _accel.set_numba(True)
                fn()  # compile outside the timing
                t_nb, out = best_of(fn, args.repeat)
                diff = float(np.abs(out - ref).max())
                print(f"{name:<20}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x{diff:>12.1e}")
            else:
                print(f"{name:<20}{t_np:>12.3f}{'-':>12}{'-':>10}{'-':>12}")
    finally:
        _accel.set_numba(previous)


if __name__ == "__main__":
    main()
