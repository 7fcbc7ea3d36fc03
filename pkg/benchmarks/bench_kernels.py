"""Time the numba relaxation kernels against the numpy fallbacks.

Run from the repository root::

    python benchmarks/bench_kernels.py [--size 200] [--repeat 5]

Each kernel variant is called on the same random problem; the script prints
the best wall time per pass and the speed-up of the compiled loop.  A full
preset solve is then timed in two subprocesses, one with
``FIELDLAB_DISABLE_NUMBA=1``.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from fieldlab import _accel, kernels


def _problem(n, seed=0):
    rng = np.random.default_rng(seed)
    phi = rng.uniform(-100, 100, (n, n))
    w = rng.uniform(0.2, 0.3, (4, n, n))
    src = rng.uniform(-1, 1, (n, n))
    free = np.zeros((n, n), dtype=np.uint8)
    free[1:-1, 1:-1] = 1
    return phi, w, src, free


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench_kernels(n, repeat):
    phi, w, src, free = _problem(n)
    out = phi.copy()
    variants = {
        "gauss-seidel loop": lambda: kernels._gs_sweep_loop(phi, *w, src, free, 0),
        "gauss-seidel wavefront": lambda: kernels._gs_sweep_wavefront(phi, *w, src, free, 0),
        "jacobi loop": lambda: kernels._jacobi_sweep_loop(phi, out, *w, src, free),
        "jacobi numpy": lambda: kernels._jacobi_sweep_numpy(phi, out, *w, src, free),
    }
    # first call compiles
    for fn in variants.values():
        fn()
    times = {name: _best(fn, repeat) for name, fn in variants.items()}
    compiled = "numba" if _accel.USE_NUMBA else "python"
    print(f"{n}x{n} grid, one pass, best of {repeat} (loops are {compiled})")
    for name, t in times.items():
        print(f"  {name:24s} {t * 1e3:9.3f} ms")
    print(f"  gauss-seidel speed-up    {times['gauss-seidel wavefront'] / times['gauss-seidel loop']:9.1f}x")
    print(f"  jacobi speed-up          {times['jacobi numpy'] / times['jacobi loop']:9.1f}x")


_SOLVE = """
import sys, time
from fieldlab import _accel
from fieldlab.scene import preset, solve_scene
scene = preset(sys.argv[1])
solve_scene(scene)
t = time.perf_counter()
res = solve_scene(scene)
print(_accel.backend_name(), res.iterations_run, time.perf_counter() - t)
"""


def bench_solve(name):
    print(f"full solve of preset {name} (second run, after compilation)")
    for disable in (False, True):
        env = dict(os.environ)
        env.pop("FIELDLAB_DISABLE_NUMBA", None)
        if disable:
            env["FIELDLAB_DISABLE_NUMBA"] = "1"
        proc = subprocess.run([sys.executable, "-c", _SOLVE, name], capture_output=True, text=True,
                              env=env, check=True)
        backend, iterations, seconds = proc.stdout.split()
        print(f"  {backend:6s} {int(iterations):6d} iterations {float(seconds):8.3f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--preset", default="pr2_tube")
    args = ap.parse_args()
    bench_kernels(args.size, args.repeat)
    bench_solve(args.preset)


if __name__ == "__main__":
    main()
