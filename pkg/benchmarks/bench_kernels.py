"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from parabolic_screen import _kernels_py

try:
    from parabolic_screen import _ckernels
except ImportError:
    _ckernels = None


def _cases():
    rng = np.random.default_rng(0)
    n = 2000
    g = rng.normal(size=n) + 1j * rng.normal(size=n)
    kern = (rng.normal(size=n) + 1j * rng.normal(size=n)) / np.arange(1, n + 1)
    z = 0.9 * np.exp(2j * np.pi * rng.random(400))
    return {
        "convolution_recursion(n=2000)": lambda m: m.convolution_recursion(g, kern, 0.3 + 0.1j, 0.05),
        "polylog_series(400 points, |z|=0.9)": lambda m: m.polylog_series(0.5, z),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; only the fallback is timed")
    for name, fn in _cases().items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        line = f"{name:40s} python {t_py * 1e3:9.2f} ms"
        if _ckernels is not None:
            t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
            diff = np.max(np.abs(fn(_ckernels) - fn(_kernels_py)))
            line += f"   cython {t_c * 1e3:9.2f} ms   speedup {t_py / t_c:6.1f}x   max diff {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
