# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics are defined by ``_kernels_py``; both must agree."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def implicit_diffusion_steps(double[::1] lower, double[::1] diag, double[::1] upper,
                             double[::1] u0, Py_ssize_t nsteps):
    """Apply ``nsteps`` solves of the tridiagonal system ``A u_new = u_old``.

    ``lower[i]`` couples row ``i + 1`` to column ``i``; ``upper[i]`` couples
    row ``i`` to column ``i + 1``. The Thomas factorization is computed once.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i, step
    cdef double[::1] cp = np.empty(n, dtype=np.float64)
    cdef double[::1] inv = np.empty(n, dtype=np.float64)
    out = np.array(u0, dtype=np.float64, copy=True)
    cdef double[::1] u = out
    cdef double m
    inv[0] = 1.0 / diag[0]
    cp[0] = upper[0] * inv[0] if n > 1 else 0.0
    for i in range(1, n):
        m = diag[i] - lower[i - 1] * cp[i - 1]
        inv[i] = 1.0 / m
        if i < n - 1:
            cp[i] = upper[i] * inv[i]
    with nogil:
        for step in range(nsteps):
            u[0] = u[0] * inv[0]
            for i in range(1, n):
                u[i] = (u[i] - lower[i - 1] * u[i - 1]) * inv[i]
            for i in range(n - 2, -1, -1):
                u[i] = u[i] - cp[i] * u[i + 1]
    return out


def min_assignment_cost(double[:, ::1] cost):
    """Exhaustive minimum of ``sum_i cost[i, perm[i]]`` over all permutations.

    Permutations are visited in lexicographic order and only a strictly
    smaller sum replaces the incumbent, so ties resolve to the
    lexicographically first optimal permutation.
    """
    cdef Py_ssize_t k = cost.shape[0]
    cdef Py_ssize_t i, j, l
    cdef long[::1] perm = np.arange(k, dtype=np.int64)
    best_perm = np.arange(k, dtype=np.int64)
    cdef long[::1] best = best_perm
    cdef double total, best_total = 0.0
    cdef long tmp
    cdef bint first = True
    if k == 0:
        return 0.0, best_perm
    while True:
        total = cost[0, perm[0]]
        for i in range(1, k):
            total = total + cost[i, perm[i]]
        if first or total < best_total:
            best_total = total
            for i in range(k):
                best[i] = perm[i]
            first = False
        # next lexicographic permutation
        i = k - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            break
        j = k - 1
        while perm[j] <= perm[i]:
            j -= 1
        tmp = perm[i]; perm[i] = perm[j]; perm[j] = tmp
        l = i + 1
        j = k - 1
        while l < j:
            tmp = perm[l]; perm[l] = perm[j]; perm[j] = tmp
            l += 1
            j -= 1
    return best_total, best_perm
