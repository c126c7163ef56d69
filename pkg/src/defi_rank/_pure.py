"""Numpy/pure-Python fallback kernels.

Mirrors the semantics of the compiled core in ``_native._kernels`` so the
two backends are interchangeable behind :mod:`defi_rank.kernels`.
"""

from __future__ import annotations

import numpy as np

from defi_rank.errors import NegativeBalance


def power_iteration(m: np.ndarray, tol: float, max_iter: int):
    """Power iteration from the uniform vector, L1-normalized each step.

    Returns ``(weights, lambda_max, iterations, converged)``. Convergence is
    declared when successive normalized vectors differ by less than ``tol``
    in max-norm. ``lambda_max`` is the mean of component-wise ratios
    ``(M w)_i / w_i`` at the final vector.

    Accumulations run left to right in plain loops rather than vectorized
    numpy calls, so results match the compiled backend bit for bit. The
    matrices are tiny (n <= 10); speed is irrelevant here.
    """
    n = m.shape[0]
    rows = [[float(m[i, j]) for j in range(n)] for i in range(n)]
    w = [1.0 / n] * n
    v = [0.0] * n
    converged = False
    iterations = 0
    for _ in range(max_iter):
        for i in range(n):
            s = 0.0
            row = rows[i]
            for j in range(n):
                s += row[j] * w[j]
            v[i] = s
        s = 0.0
        for i in range(n):
            s += v[i]
        diff = 0.0
        for i in range(n):
            d = v[i] / s
            if abs(d - w[i]) > diff:
                diff = abs(d - w[i])
            w[i] = d
        iterations += 1
        if diff < tol:
            converged = True
            break
    lam = 0.0
    for i in range(n):
        s = 0.0
        row = rows[i]
        for j in range(n):
            s += row[j] * w[j]
        lam += s / w[i]
    lam /= n
    return np.array(w, dtype=np.float64), lam, iterations, converged


def gini_sorted(a: np.ndarray) -> float:
    """Population Gini of an ascending-sorted nonnegative vector.

    Equivalent to sum_ij |x_i - x_j| / (2 n^2 mu), computed in O(n).
    """
    n = a.shape[0]
    if n == 0:
        raise ValueError("empty distribution")
    total = float(np.cumsum(a)[-1])
    if total <= 0.0:
        raise ValueError("gini requires a positive total")
    idx = np.arange(1, n + 1, dtype=np.float64)
    num = float(np.cumsum((2.0 * idx - n - 1.0) * a)[-1])
    g = num / (n * total)
    return g if g > 0.0 else 0.0


def nakamoto_sorted(a: np.ndarray) -> int:
    """Smallest k such that the top-k prefix strictly exceeds half the total.

    ``a`` must be sorted descending with a positive total.
    """
    if a.shape[0] == 0:
        raise ValueError("empty distribution")
    cs = np.cumsum(a)
    total = float(cs[-1])
    if total <= 0.0:
        raise ValueError("nakamoto requires a positive total")
    return int(np.argmax(2.0 * cs > total)) + 1


def top_share_sorted(a: np.ndarray, k: int) -> float:
    """Share of the total held by the first min(k, n) entries of a
    descending-sorted vector."""
    n = a.shape[0]
    if n == 0:
        raise ValueError("empty distribution")
    cs = np.cumsum(a)
    total = float(cs[-1])
    if total <= 0.0:
        raise ValueError("top share requires a positive total")
    return float(cs[min(k, n) - 1]) / total


def replay(froms: list, tos: list, amounts: list, balances: dict, zero: str) -> dict:
    """Apply transfer rows to ``balances`` in place.

    Amounts are arbitrary-precision ints; the zero address mints/burns.
    Zero balances are dropped as they occur. Raises
    :class:`NegativeBalance` with the offending address and row index.
    """
    get = balances.get
    for i in range(len(froms)):
        amt = amounts[i]
        src = froms[i]
        if src != zero:
            nb = get(src, 0) - amt
            if nb < 0:
                raise NegativeBalance(src, i)
            if nb == 0:
                balances.pop(src, None)
            else:
                balances[src] = nb
        dst = tos[i]
        if dst != zero and amt != 0:
            balances[dst] = get(dst, 0) + amt
    return balances
