"""The ten second-level indicators: market-share metrics, valuation ratios,
and token-distribution decentralization statistics, plus direction
adjustment and per-column share normalization.

Raw indicator values are optional (missing data propagates, never turns
into infinity); adjusted values are uniformly "higher is better"; scores
share-normalize each indicator column over the protocols that have data.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from enum import Enum
from math import fsum

from defi_rank import kernels
from defi_rank.errors import AllMissing, EmptyDistribution
from defi_rank.ledger import FilteredSnapshot

DEFAULT_EPSILON = 1e-9

TOP_HOLDER_COUNT = 10


class Direction(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class IndicatorSpec:
    """One second-level indicator: identity, criterion, and direction.

    ``bounded`` marks values confined to [0, 1], where the negative-direction
    adjustment is 1 - x; unbounded negatives use the reciprocal instead.
    """

    code: str
    key: str
    criterion: str
    direction: Direction
    bounded: bool = False


MARKET_SHARE = "market_share"
VALUATION = "valuation"
DECENTRALIZATION = "decentralization"

CRITERIA = (MARKET_SHARE, VALUATION, DECENTRALIZATION)

INDICATORS = (
    IndicatorSpec("I11", "mcap", MARKET_SHARE, Direction.POSITIVE),
    IndicatorSpec("I12", "borrow", MARKET_SHARE, Direction.POSITIVE),
    IndicatorSpec("I13", "revenue", MARKET_SHARE, Direction.POSITIVE),
    IndicatorSpec("I14", "volume", MARKET_SHARE, Direction.POSITIVE),
    IndicatorSpec("I21", "ps_ratio", VALUATION, Direction.POSITIVE),
    IndicatorSpec("I22", "capital_efficiency", VALUATION, Direction.NEGATIVE),
    IndicatorSpec("I23", "mcap_over_tvl", VALUATION, Direction.POSITIVE),
    IndicatorSpec("I31", "gini", DECENTRALIZATION, Direction.NEGATIVE, bounded=True),
    IndicatorSpec("I32", "nakamoto", DECENTRALIZATION, Direction.POSITIVE),
    IndicatorSpec("I33", "top10", DECENTRALIZATION, Direction.NEGATIVE, bounded=True),
)

BY_CODE = {spec.code: spec for spec in INDICATORS}
CRITERION_CHILDREN = {
    crit: tuple(s.code for s in INDICATORS if s.criterion == crit) for crit in CRITERIA
}


def gini(snap: FilteredSnapshot) -> float:
    """Population Gini of the filtered holder balances, in [0, (n-1)/n]."""
    if not snap.balances:
        raise EmptyDistribution(f"{snap.base.token}: no holders after filtering")
    return gini_values(list(snap.balances.values()))


def nakamoto(snap: FilteredSnapshot) -> int:
    """Minimum number of holders jointly holding strictly more than 50%."""
    if not snap.balances:
        raise EmptyDistribution(f"{snap.base.token}: no holders after filtering")
    # exact integer arithmetic: balances are smallest-unit ints
    total = sum(snap.balances.values())
    prefix = 0
    for k, bal in enumerate(sorted(snap.balances.values(), reverse=True), start=1):
        prefix += bal
        if 2 * prefix > total:
            return k
    return len(snap.balances)


def top10_share(snap: FilteredSnapshot) -> float:
    """Fraction held by the ten largest holders (all of them if fewer).

    Ties are broken by address ascending so reported holder sets are
    reproducible; the share itself is tie-insensitive.
    """
    if not snap.balances:
        raise EmptyDistribution(f"{snap.base.token}: no holders after filtering")
    ranked = sorted(snap.balances.items(), key=lambda kv: (-kv[1], kv[0]))
    top = sum(bal for _, bal in ranked[:TOP_HOLDER_COUNT])
    return top / sum(snap.balances.values())


def gini_values(values) -> float:
    """Gini over a plain balance vector (kernel-backed)."""
    if len(values) == 0:
        raise EmptyDistribution("empty balance vector")
    return kernels.gini(values)


def nakamoto_values(values) -> int:
    """Nakamoto count over a plain balance vector (kernel-backed)."""
    if len(values) == 0:
        raise EmptyDistribution("empty balance vector")
    return kernels.nakamoto(values)


def top_share_values(values, k: int = TOP_HOLDER_COUNT) -> float:
    """Top-k share over a plain balance vector (kernel-backed)."""
    if len(values) == 0:
        raise EmptyDistribution("empty balance vector")
    return kernels.top_share(values, k)


def valuation_raw(
    mcap: float | None,
    fdv: float | None,
    tvl: float | None,
    annualized_revenue: float | None,
) -> tuple[float | None, float | None, float | None]:
    """(ps_ratio, capital_efficiency, mcap_over_tvl) from point-in-time metrics.

    Any zero or missing denominator yields a missing value, never infinity.
    """

    def ratio(num, den):
        if num is None or den is None or den == 0.0:
            return None
        return num / den

    ps = ratio(fdv, annualized_revenue)
    efficiency = ratio(tvl, annualized_revenue)
    mc_tvl = ratio(mcap, tvl)
    return ps, efficiency, mc_tvl


def direction_adjust(
    raw: float,
    spec: IndicatorSpec,
    direction: Direction | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    """Map a raw value so that higher is always better.

    Negative bounded indicators map to 1 - x; negative unbounded ones to the
    reciprocal (floored at epsilon); positive indicators pass through.
    ``direction`` overrides ``spec.direction`` when given.
    """
    d = direction or spec.direction
    if d is Direction.POSITIVE:
        return raw
    if spec.bounded:
        return 1.0 - raw
    return 1.0 / max(raw, epsilon)


def normalize_panel(column, epsilon: float = DEFAULT_EPSILON):
    """Share-normalize one adjusted column: v_p / sum_q v_q over non-missing
    entries, with values floored at epsilon first. Missing stays missing."""
    present = [v for v in column if v is not None]
    if not present:
        raise AllMissing("no protocol has data in this column")
    floored = [max(v, epsilon) for v in present]
    total = fsum(floored)
    it = iter(floored)
    return [None if v is None else next(it) / total for v in column]


@dataclass(frozen=True)
class IndicatorPanel:
    """Per-timestamp raw, direction-adjusted, and share-normalized values.

    Columns are keyed by indicator code and aligned with ``protocols``;
    ``all_missing`` lists columns where no protocol had data.
    """

    as_of: date
    protocols: tuple[str, ...]
    raw: dict[str, tuple[float | None, ...]]
    adjusted: dict[str, tuple[float | None, ...]]
    scores: dict[str, tuple[float | None, ...]]
    all_missing: frozenset[str]


def compute_panel(
    as_of: date,
    protocols,
    raw_rows: dict[str, dict[str, float | None]],
    direction_overrides: dict[str, Direction] | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> IndicatorPanel:
    """Assemble the panel: adjust directions, then normalize each column."""
    overrides = direction_overrides or {}
    protocols = tuple(protocols)
    raw: dict[str, tuple[float | None, ...]] = {}
    adjusted: dict[str, tuple[float | None, ...]] = {}
    scores: dict[str, tuple[float | None, ...]] = {}
    all_missing = set()
    for spec in INDICATORS:
        raw_col = tuple(raw_rows.get(p, {}).get(spec.code) for p in protocols)
        adj_col = tuple(
            None
            if v is None
            else direction_adjust(v, spec, overrides.get(spec.code), epsilon)
            for v in raw_col
        )
        raw[spec.code] = raw_col
        adjusted[spec.code] = adj_col
        try:
            scores[spec.code] = tuple(normalize_panel(list(adj_col), epsilon))
        except AllMissing:
            all_missing.add(spec.code)
            scores[spec.code] = tuple(None for _ in protocols)
    return IndicatorPanel(
        as_of, protocols, raw, adjusted, scores, frozenset(all_missing)
    )
