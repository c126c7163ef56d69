"""Kernel dispatch: compiled core when available, numpy fallback otherwise.

Set ``DEFI_RANK_PURE=1`` to force the fallback. ``BACKEND`` names the active
implementation ("native" or "pure").
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("DEFI_RANK_PURE"):
    from defi_rank import _pure as _backend

    BACKEND = "pure"
else:
    try:
        from defi_rank._native import _kernels as _backend  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        from defi_rank import _pure as _backend  # type: ignore[no-redef]

        BACKEND = "pure"


def power_iteration(matrix, tol: float, max_iter: int):
    """Dominant eigenpair of a positive matrix; see backend docstring."""
    m = np.ascontiguousarray(matrix, dtype=np.float64)
    weights, lam, iterations, converged = _backend.power_iteration(
        m, float(tol), int(max_iter)
    )
    return np.asarray(weights), float(lam), int(iterations), bool(converged)


def gini(values) -> float:
    """Population Gini coefficient of a nonnegative vector."""
    a = np.ascontiguousarray(np.sort(np.asarray(values, dtype=np.float64)))
    return float(_backend.gini_sorted(a))


def nakamoto(values) -> int:
    """Minimum number of largest holders controlling strictly more than half."""
    a = np.ascontiguousarray(np.sort(np.asarray(values, dtype=np.float64))[::-1])
    return int(_backend.nakamoto_sorted(a))


def top_share(values, k: int = 10) -> float:
    """Fraction of the total held by the k largest entries."""
    a = np.ascontiguousarray(np.sort(np.asarray(values, dtype=np.float64))[::-1])
    return float(_backend.top_share_sorted(a, int(k)))


def replay(froms: list, tos: list, amounts: list, balances: dict, zero: str) -> dict:
    """Apply transfer rows to ``balances`` in place (exact int arithmetic)."""
    return _backend.replay(froms, tos, amounts, balances, zero)
