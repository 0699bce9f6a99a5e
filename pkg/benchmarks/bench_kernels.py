"""Compare the compiled kernels with the NumPy/SciPy fallback.

Run ``python benchmarks/bench_kernels.py``. Each kernel is timed on the same
inputs with both backends; outputs are checked for agreement first.
"""
import argparse
import timeit

import numpy as np

from funcineq import _kernels_py

try:
    from funcineq import _kernels
except ImportError:
    _kernels = None


def diffusion_case(n=2001, nsteps=2000, seed=0):
    rng = np.random.default_rng(seed)
    k = 0.5
    lower = -k * np.exp(rng.normal(scale=0.1, size=n - 1))
    upper = -k * np.exp(rng.normal(scale=0.1, size=n - 1))
    diag = 1.0 - np.concatenate([[0.0], lower]) - np.concatenate([upper, [0.0]])
    u0 = rng.random(n)
    return (lower, diag, upper, u0, nsteps)


def assignment_case(k=8, seed=0):
    rng = np.random.default_rng(seed)
    return (rng.random((k, k)),)


CASES = {
    "implicit_diffusion_steps": diffusion_case,
    "min_assignment_cost": assignment_case,
}


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-14)


def run(repeat=3):
    rows = []
    for name, make in CASES.items():
        args = make()
        py = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py(*args), number=1, repeat=repeat))
        if _kernels is None:
            rows.append((name, t_py, None, None))
            continue
        c = getattr(_kernels, name)
        if not _same(py(*args), c(*args)):
            raise AssertionError(f"{name}: backends disagree")
        t_c = min(timeit.repeat(lambda: c(*args), number=1, repeat=repeat))
        rows.append((name, t_py, t_c, t_py / t_c))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"{'kernel':<26}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for name, t_py, t_c, ratio in run(args.repeat):
        if t_c is None:
            print(f"{name:<26}{t_py:>12.4f}{'n/a':>14}{'n/a':>10}")
        else:
            print(f"{name:<26}{t_py:>12.4f}{t_c:>14.4f}{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
