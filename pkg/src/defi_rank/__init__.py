"""Time-series ranking of DeFi lending protocols.

Reconstructs token-holder distributions from transfer logs, aligns
off-chain metric series, and ranks protocols date by date with a
four-layer analytic hierarchy: goal, criteria, indicators, schemes.
"""

from defi_rank.ahp import (
    ConsistencyReport,
    EigenResult,
    MatrixOrigin,
    PairwiseMatrix,
    consistency,
    matrix_from_scores,
    matrix_from_weights,
    principal_eigen,
)
from defi_rank.evaluator import (
    EvaluationConfig,
    Granularity,
    RankSeries,
    ScoreReport,
    SeriesResult,
    evaluate_at,
    evaluate_series,
    load_dataset,
    sample_dates,
)
from defi_rank.kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConsistencyReport",
    "EigenResult",
    "EvaluationConfig",
    "Granularity",
    "MatrixOrigin",
    "PairwiseMatrix",
    "RankSeries",
    "ScoreReport",
    "SeriesResult",
    "__version__",
    "consistency",
    "evaluate_at",
    "evaluate_series",
    "load_dataset",
    "matrix_from_scores",
    "matrix_from_weights",
    "principal_eigen",
    "sample_dates",
]
