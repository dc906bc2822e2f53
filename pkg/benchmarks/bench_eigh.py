"""Benchmark the compiled Jacobi eigensolver against the NumPy fallback.

Runs both backends on dense random Hermitian matrices and on a structured
case from the package's own workload (a pure-state projector, mostly zero
off-diagonal), with numpy.linalg.eigh timings as context. Usage:

    python3 benchmarks/bench_eigh.py [--repeats R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qmarg._backend import KERNEL_BACKEND
from qmarg._jacobi_py import jacobi_eigh as jacobi_py
from qmarg.marginals import DensityMatrix
from qmarg.states import make_g

try:
    from qmarg._jacobi import jacobi_eigh as jacobi_c
except ImportError:
    jacobi_c = None


def _best(fn, arg, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(arg)
        times.append(time.perf_counter() - t0)
    return min(times)


def _dense(rng, n: int) -> np.ndarray:
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (m + m.conj().T)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    cases = [(f"dense {n}x{n}", _dense(np.random.default_rng(n), n))
             for n in (16, 32, 64, 128)]
    cases.append(("projector 256x256",
                  DensityMatrix.from_pure(make_g(8)).matrix))

    print(f"default backend: {KERNEL_BACKEND}")
    header = f"{'case':<20}{'numpy eigh':>12}{'python':>12}{'compiled':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, h in cases:
        t_np = _best(np.linalg.eigh, h, args.repeats)
        t_py = _best(jacobi_py, h, args.repeats)
        if jacobi_c is None:
            print(f"{name:<20}{t_np:>11.4f}s{t_py:>11.4f}s{'n/a':>12}{'n/a':>9}")
            continue
        t_c = _best(jacobi_c, h, args.repeats)
        wp, *_ = jacobi_py(h)
        wc, *_ = jacobi_c(h)
        dev = float(np.max(np.abs(np.sort(wp) - np.sort(wc))))
        assert dev <= 1e-10 * max(1.0, float(np.linalg.norm(h))), dev
        print(f"{name:<20}{t_np:>11.4f}s{t_py:>11.4f}s{t_c:>11.4f}s"
              f"{t_py / t_c:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
