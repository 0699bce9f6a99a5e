"""Pure-Python/NumPy versions of the compiled kernels (same contracts)."""
import itertools

import numpy as np
from scipy.linalg import solve_banded


def implicit_diffusion_steps(lower, diag, upper, u0, nsteps):
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    u = np.array(u0, dtype=float, copy=True)
    for _ in range(int(nsteps)):
        u = solve_banded((1, 1), ab, u, check_finite=False)
    return u


def min_assignment_cost(cost):
    cost = np.asarray(cost, dtype=float)
    k = cost.shape[0]
    if k == 0:
        return 0.0, np.arange(0, dtype=np.int64)
    perms = np.array(list(itertools.permutations(range(k))), dtype=np.int64)
    total = cost[0, perms[:, 0]]
    for i in range(1, k):
        total = total + cost[i, perms[:, i]]
    idx = int(np.argmin(total))
    return float(total[idx]), perms[idx].copy()
