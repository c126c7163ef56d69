"""Pairwise-comparison matrices, eigenvector weights, consistency checks,
and hierarchical score composition.

Weight vectors come from the principal eigenvector of positive reciprocal
matrices (power iteration); consistency is the classic CI/CR test against
the fixed random-index table. Level scores compose as weighted sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from defi_rank import kernels
from defi_rank.errors import (
    DimensionOutOfRange,
    LengthMismatch,
    NonPositiveWeight,
    NonSaatyEntry,
    NotConverged,
    ReciprocityViolation,
)

MIN_DIM = 2
MAX_DIM = 10

# Random consistency indices for dimensions 1..10 (standard table).
RI_TABLE = {
    1: 0.0,
    2: 0.0,
    3: 0.58,
    4: 0.90,
    5: 1.12,
    6: 1.24,
    7: 1.32,
    8: 1.41,
    9: 1.45,
    10: 1.49,
}

# Admissible judgment entries: integers 1..9 and their reciprocals.
SAATY_VALUES = tuple(float(k) for k in range(1, 10)) + tuple(
    1.0 / k for k in range(2, 10)
)

RECIPROCITY_RTOL = 1e-12
SAATY_RTOL = 1e-9

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
CR_THRESHOLD = 0.1


class MatrixOrigin(str, Enum):
    USER_JUDGMENT = "user_judgment"
    FROM_WEIGHTS = "from_weights"
    FROM_SCORES = "from_scores"


def _is_saaty(value: float) -> bool:
    return any(abs(value - s) <= SAATY_RTOL * s for s in SAATY_VALUES)


@dataclass(frozen=True)
class PairwiseMatrix:
    """Square positive reciprocal judgment matrix."""

    entries: np.ndarray
    origin: MatrixOrigin

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionOutOfRange(f"matrix must be square, got shape {m.shape}")
        n = m.shape[0]
        if not MIN_DIM <= n <= MAX_DIM:
            raise DimensionOutOfRange(
                f"dimension {n} outside [{MIN_DIM}, {MAX_DIM}]"
            )
        if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
            raise ReciprocityViolation("entries must be finite and strictly positive")
        if np.any(np.abs(np.diag(m) - 1.0) > RECIPROCITY_RTOL):
            raise ReciprocityViolation("diagonal entries must equal 1")
        for i in range(n):
            for j in range(i + 1, n):
                if abs(m[j, i] - 1.0 / m[i, j]) > RECIPROCITY_RTOL * m[j, i]:
                    raise ReciprocityViolation(
                        f"a[{j}][{i}] is not the reciprocal of a[{i}][{j}]"
                    )
        if self.origin is MatrixOrigin.USER_JUDGMENT:
            for i in range(n):
                for j in range(n):
                    if i != j and not _is_saaty(m[i, j]):
                        raise NonSaatyEntry(
                            f"a[{i}][{j}] = {m[i, j]!r} is not on the 9-level scale"
                        )
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def rows(self) -> list[list[float]]:
        """Row-major nested lists (wire format)."""
        return [[float(x) for x in row] for row in self.entries]


@dataclass(frozen=True)
class EigenResult:
    """Principal eigenpair: lambda_max plus the normalized weight vector."""

    lambda_max: float
    weights: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ConsistencyReport:
    """CI/RI/CR for one judgment matrix; passed means CR < 0.1."""

    n: int
    lambda_max: float
    ci: float
    ri: float
    cr: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda_max": self.lambda_max,
            "ci": self.ci,
            "ri": self.ri,
            "cr": self.cr,
            "pass": self.passed,
        }


def matrix_from_weights(weights) -> PairwiseMatrix:
    """Perfectly consistent matrix a_ij = w_i / w_j from positive weights."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or not MIN_DIM <= w.size <= MAX_DIM:
        raise DimensionOutOfRange(f"need between {MIN_DIM} and {MAX_DIM} weights")
    if np.any(~np.isfinite(w)) or np.any(w <= 0.0):
        raise NonPositiveWeight("weights must be finite and strictly positive")
    return PairwiseMatrix(w[:, None] / w[None, :], MatrixOrigin.FROM_WEIGHTS)


def matrix_from_scores(scores, epsilon: float = 1e-9) -> PairwiseMatrix:
    """Consistent matrix of score ratios, with scores floored at epsilon.

    Entries are deliberately not clamped to the 9-level scale: clamping
    would destroy consistency and lose ordering for extreme ratios.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or not MIN_DIM <= s.size <= MAX_DIM:
        raise DimensionOutOfRange(f"need between {MIN_DIM} and {MAX_DIM} scores")
    if epsilon <= 0.0:
        raise NonPositiveWeight("epsilon must be positive")
    if np.any(~np.isfinite(s)) or np.any(s < 0.0):
        raise NonPositiveWeight("scores must be finite and nonnegative")
    f = np.maximum(s, epsilon)
    return PairwiseMatrix(f[:, None] / f[None, :], MatrixOrigin.FROM_SCORES)


def principal_eigen(
    m: PairwiseMatrix,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    strict: bool = False,
) -> EigenResult:
    """Normalized principal eigenvector and lambda_max via power iteration.

    With ``strict=True`` a run that exhausts ``max_iter`` raises
    :class:`NotConverged` carrying the best estimate; otherwise the result
    is returned with ``converged=False``.
    """
    weights, lam, iterations, converged = kernels.power_iteration(
        m.entries, tol, max_iter
    )
    result = EigenResult(lam, weights, iterations, converged)
    if strict and not converged:
        raise NotConverged(
            f"power iteration did not converge in {max_iter} iterations",
            result=result,
        )
    return result


def consistency(m: PairwiseMatrix, eig: EigenResult) -> ConsistencyReport:
    """CI = (lambda_max - n)/(n - 1), CR = CI/RI; n <= 2 passes by definition."""
    n = m.n
    if n <= 2:
        return ConsistencyReport(n, eig.lambda_max, 0.0, RI_TABLE[n], 0.0, True)
    ci = (eig.lambda_max - n) / (n - 1)
    ri = RI_TABLE[n]
    cr = ci / ri
    return ConsistencyReport(n, eig.lambda_max, ci, ri, cr, cr < CR_THRESHOLD)


def compose_level(indicator_weights, indicator_scores) -> float:
    """Weighted sum of one level's scores: c = sum_j w_j * x_j."""
    w = np.asarray(indicator_weights, dtype=np.float64)
    x = np.asarray(indicator_scores, dtype=np.float64)
    if w.shape != x.shape:
        raise LengthMismatch(
            f"{w.size} weights vs {x.size} scores"
        )
    return float(np.dot(w, x))


def final_score(criterion_weights, criterion_scores) -> float:
    """Final score across first-level criteria: sum_i w_i * c_i."""
    w = np.asarray(criterion_weights, dtype=np.float64)
    c = np.asarray(criterion_scores, dtype=np.float64)
    if w.shape != c.shape:
        raise LengthMismatch(
            f"{w.size} weights vs {c.size} criterion scores"
        )
    return float(np.dot(w, c))


@dataclass(frozen=True)
class Hierarchy:
    """First-level criteria with their indicator children and derived weights."""

    criteria: tuple[str, ...]
    children: dict[str, tuple[str, ...]]
    criterion_weights: np.ndarray
    indicator_weights: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if abs(float(np.sum(self.criterion_weights)) - 1.0) > 1e-9:
            raise NonPositiveWeight("criterion weights must sum to 1")
        for name in self.criteria:
            w = self.indicator_weights[name]
            if len(w) != len(self.children[name]):
                raise LengthMismatch(f"criterion {name}: weights vs children")
            if abs(float(np.sum(w)) - 1.0) > 1e-9:
                raise NonPositiveWeight(
                    f"indicator weights under {name} must sum to 1"
                )
