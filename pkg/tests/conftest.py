"""Shared test helpers: independent oracles and synthetic data builders.

The oracle functions here deliberately avoid the package's kernel code
paths. Gini, Nakamoto, and top-k oracles are brute force over pairs or
explicit sorts; the eigen oracle uses dense eigendecomposition.
"""

from __future__ import annotations

from math import fsum
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def addr(i: int) -> str:
    """Deterministic 40-hex address for test row construction."""
    return f"{i:040x}"


def random_reciprocal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random positive reciprocal matrix with entries in roughly [1/9, 9]."""
    m = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = np.exp(rng.uniform(-np.log(9.0), np.log(9.0)))
            m[j, i] = 1.0 / m[i, j]
    return m


def eigen_oracle(m: np.ndarray) -> tuple[float, np.ndarray]:
    """Dense eigendecomposition: dominant eigenvalue and its L1-normalized
    positive eigenvector."""
    values, vectors = np.linalg.eig(m)
    k = int(np.argmax(values.real))
    lam = float(values[k].real)
    vec = np.abs(vectors[:, k].real)
    return lam, vec / vec.sum()


def gini_oracle(values: list[float]) -> float:
    """Population Gini by the O(n^2) definition: sum of absolute pairwise
    differences over 2 n^2 mu."""
    n = len(values)
    total = fsum(values)
    if total <= 0:
        raise ValueError("positive total required")
    diffs = fsum(abs(a - b) for a in values for b in values)
    return diffs / (2.0 * n * total)


def nakamoto_oracle(values: list[float]) -> int:
    ordered = sorted(values, reverse=True)
    total = fsum(ordered)
    prefix = 0.0
    for k, v in enumerate(ordered, start=1):
        prefix += v
        if 2.0 * prefix > total:
            return k
    return len(ordered)


def top_share_oracle(values: list[float], k: int = 10) -> float:
    ordered = sorted(values, reverse=True)
    return fsum(ordered[:k]) / fsum(ordered)


def transfer_row(
    block: int,
    log_index: int,
    timestamp: int,
    from_addr: str,
    to_addr: str,
    amount: int,
) -> str:
    return f"{block},{log_index},{timestamp},{from_addr},{to_addr},{amount}"


def write_csv(path: Path, header: str, rows: list[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260821)
