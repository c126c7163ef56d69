# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: AHP power iteration, concentration statistics over
sorted balance vectors, and transfer-log replay.

Semantics mirror defi_rank._pure exactly; defi_rank.kernels picks whichever
backend imports.
"""

from libc.math cimport fabs

import numpy as np

from defi_rank.errors import NegativeBalance


def power_iteration(const double[:, :] m, double tol, int max_iter):
    """Power iteration from the uniform vector, L1-normalized each step.

    Returns (weights, lambda_max, iterations, converged); lambda_max is the
    mean of component-wise ratios (M w)_i / w_i at the final vector.
    """
    cdef Py_ssize_t n = m.shape[0]
    w_arr = np.full(n, 1.0 / n)
    cdef double[:] w = w_arr
    cdef double[:] v = np.empty(n)
    cdef double s, d, diff, lam
    cdef Py_ssize_t i, j
    cdef int it, iterations = 0
    cdef bint converged = False

    for it in range(max_iter):
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += m[i, j] * w[j]
            v[i] = s
        s = 0.0
        for i in range(n):
            s += v[i]
        diff = 0.0
        for i in range(n):
            d = v[i] / s
            if fabs(d - w[i]) > diff:
                diff = fabs(d - w[i])
            w[i] = d
        iterations += 1
        if diff < tol:
            converged = True
            break

    lam = 0.0
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += m[i, j] * w[j]
        lam += s / w[i]
    lam /= n
    return w_arr, lam, iterations, converged


def gini_sorted(const double[:] a):
    """Population Gini of an ascending-sorted nonnegative vector."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0, num = 0.0, g
    if n == 0:
        raise ValueError("empty distribution")
    for i in range(n):
        total += a[i]
        num += (2.0 * (i + 1) - n - 1.0) * a[i]
    if total <= 0.0:
        raise ValueError("gini requires a positive total")
    g = num / (n * total)
    return g if g > 0.0 else 0.0


def nakamoto_sorted(const double[:] a):
    """Smallest k whose descending prefix strictly exceeds half the total."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0, prefix = 0.0
    if n == 0:
        raise ValueError("empty distribution")
    for i in range(n):
        total += a[i]
    if total <= 0.0:
        raise ValueError("nakamoto requires a positive total")
    for i in range(n):
        prefix += a[i]
        if 2.0 * prefix > total:
            return int(i + 1)
    return int(n)


def top_share_sorted(const double[:] a, int k):
    """Share of the total held by the first min(k, n) descending entries."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, kk
    cdef double total = 0.0, num = 0.0
    if n == 0:
        raise ValueError("empty distribution")
    for i in range(n):
        total += a[i]
    if total <= 0.0:
        raise ValueError("top share requires a positive total")
    kk = k if k < n else n
    for i in range(kk):
        num += a[i]
    return num / total


def replay(list froms, list tos, list amounts, dict balances, str zero):
    """Apply transfer rows to ``balances`` in place; Python-int amounts.

    Raises NegativeBalance with the offending address and row index.
    """
    cdef Py_ssize_t i, n = len(froms)
    for i in range(n):
        amt = amounts[i]
        src = froms[i]
        if src != zero:
            nb = balances.get(src, 0) - amt
            if nb < 0:
                raise NegativeBalance(src, i)
            if nb == 0:
                balances.pop(src, None)
            else:
                balances[src] = nb
        dst = tos[i]
        if dst != zero and amt != 0:
            balances[dst] = balances.get(dst, 0) + amt
    return balances
