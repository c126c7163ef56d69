"""Off-chain metric series: loading, alignment, and annualization.

Metrics CSV schema: ``date,protocol,metric,value`` with ISO dates, metric
one of {mcap, fdv, borrow, revenue, volume, tvl, price}, nonnegative
decimal values. Revenue is a per-day flow; the rest are point-in-time
stocks. Alignment is last-observation-carried-forward with a staleness cap.
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum
from math import fsum
from pathlib import Path

from defi_rank.errors import (
    DuplicateDate,
    NegativeValue,
    ParseError,
    SchemaError,
)
from defi_rank.ledger import RejectedRow

METRIC_COLUMNS = ["date", "protocol", "metric", "value"]
REGISTRY_COLUMNS = ["protocol", "token", "genesis_date"]

DEFAULT_STALENESS_DAYS = 7
ANNUALIZATION_WINDOW_DAYS = 365
DEFAULT_DECIMALS = 18


class MetricName(str, Enum):
    MCAP = "mcap"
    FDV = "fdv"
    BORROW = "borrow"
    REVENUE = "revenue"
    VOLUME = "volume"
    TVL = "tvl"
    PRICE = "price"


@dataclass(frozen=True)
class MetricSeries:
    """One (protocol, metric) series with strictly increasing dates."""

    protocol: str
    metric: MetricName
    points: tuple[tuple[date, float], ...]

    def dates(self) -> list[date]:
        return [d for d, _ in self.points]


@dataclass(frozen=True)
class ProtocolInfo:
    name: str
    token: str
    genesis: date
    decimals: int = DEFAULT_DECIMALS


def load_registry(path: str | Path) -> dict[str, ProtocolInfo]:
    """Read ``protocol,token,genesis_date[,decimals]`` rows."""
    path = Path(path)
    registry: dict[str, ProtocolInfo] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = list(reader.fieldnames or [])
        if names not in (REGISTRY_COLUMNS, REGISTRY_COLUMNS + ["decimals"]):
            raise SchemaError(
                f"{path}: expected header {','.join(REGISTRY_COLUMNS)!r}"
                f" (optional trailing decimals), got {reader.fieldnames!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                name = row["protocol"].strip()
                token = row["token"].strip()
                if not name or not token:
                    raise ValueError("empty protocol or token")
                if name in registry:
                    raise ValueError(f"duplicate protocol {name!r}")
                genesis = date.fromisoformat(row["genesis_date"].strip())
                decimals = int(row.get("decimals") or DEFAULT_DECIMALS)
                if not 0 <= decimals <= 36:
                    raise ValueError(f"decimals {decimals} out of range")
            except (ValueError, AttributeError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}", row=lineno) from None
            registry[name] = ProtocolInfo(name, token, genesis, decimals)
    return registry


def load_metrics(
    path: str | Path,
    registry: dict[str, ProtocolInfo] | None = None,
    strict: bool = False,
) -> tuple[dict[tuple[str, MetricName], MetricSeries], list[RejectedRow]]:
    """Read a metrics CSV into per-(protocol, metric) series.

    Duplicate dates, negative values, and malformed rows are rejected row
    by row (raised as typed errors under ``strict``). With a registry,
    unknown protocols and rows dated before a protocol's genesis are
    rejected too, so no pre-genesis value can ever be served.
    """
    path = Path(path)
    acc: dict[tuple[str, MetricName], list[tuple[date, float, int]]] = {}
    first_row: dict[tuple[str, MetricName, date], int] = {}
    rejects: list[RejectedRow] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != METRIC_COLUMNS:
            raise SchemaError(
                f"{path}: expected header {','.join(METRIC_COLUMNS)!r}, "
                f"got {reader.fieldnames!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                if None in row or any(v is None for v in row.values()):
                    raise ParseError("wrong number of fields", row=lineno)
                try:
                    day = date.fromisoformat(row["date"].strip())
                    protocol = row["protocol"].strip()
                    metric = MetricName(row["metric"].strip())
                    value = float(row["value"])
                except ValueError as exc:
                    raise ParseError(str(exc), row=lineno) from None
                if value < 0 or value != value:
                    raise NegativeValue(
                        f"{path}:{lineno}: negative or NaN value {row['value']!r}"
                    )
                if registry is not None:
                    info = registry.get(protocol)
                    if info is None:
                        raise ParseError(
                            f"unknown protocol {protocol!r}", row=lineno
                        )
                    if day < info.genesis:
                        raise ParseError(
                            f"{day} precedes {protocol} genesis {info.genesis}",
                            row=lineno,
                        )
                key = (protocol, metric, day)
                if key in first_row:
                    raise DuplicateDate(
                        f"{path}: duplicate date {day} for {protocol}/{metric.value}"
                        f" (rows {first_row[key]} and {lineno})"
                    )
            except (ParseError, NegativeValue, DuplicateDate) as exc:
                if strict:
                    raise
                rejects.append(RejectedRow(lineno, dict(row), str(exc)))
                continue
            first_row[key] = lineno
            acc.setdefault((protocol, metric), []).append((day, value, lineno))
    series: dict[tuple[str, MetricName], MetricSeries] = {}
    for key, rows in acc.items():
        rows.sort(key=lambda r: r[0])
        series[key] = MetricSeries(key[0], key[1], tuple((d, v) for d, v, _ in rows))
    return series, rejects


def value_at(
    series: MetricSeries | None,
    t: date,
    staleness_days: int = DEFAULT_STALENESS_DAYS,
    genesis: date | None = None,
) -> float | None:
    """Last observation at or before ``t`` if no older than the staleness cap.

    Returns None before ``genesis``, when the series is absent, or when the
    nearest observation is too stale.
    """
    if series is None or not series.points:
        return None
    if genesis is not None and t < genesis:
        return None
    idx = bisect_right(series.dates(), t) - 1
    if idx < 0:
        return None
    day, value = series.points[idx]
    if (t - day).days > staleness_days:
        return None
    return value


def annualized_revenue(
    series: MetricSeries | None,
    t: date,
    genesis: date | None = None,
    window_days: int = ANNUALIZATION_WINDOW_DAYS,
) -> tuple[float, bool] | None:
    """Trailing 365-day revenue sum ending at ``t``.

    With a shorter history the available trailing sum is scaled by
    365/days_observed and flagged extrapolated (second element True).
    """
    if series is None or not series.points:
        return None
    if genesis is not None and t < genesis:
        return None
    window_start = t - timedelta(days=window_days - 1)
    in_window = [v for d, v in series.points if window_start <= d <= t]
    if not in_window:
        return None
    total = fsum(in_window)
    first = series.points[0][0]
    if first > window_start:
        observed = (t - first).days + 1
        return total * (window_days / observed), True
    return total, False


def dump_metrics(
    path: str | Path, series: dict[tuple[str, MetricName], MetricSeries]
) -> None:
    """Canonical metrics CSV: sorted by (protocol, metric, date), shortest
    round-trip float formatting. Loading then dumping is byte-stable."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRIC_COLUMNS)
        for protocol, metric in sorted(
            series, key=lambda k: (k[0], k[1].value)
        ):
            for day, value in series[(protocol, metric)].points:
                writer.writerow([day.isoformat(), protocol, metric.value, repr(value)])


def write_registry(path: str | Path, registry: dict[str, ProtocolInfo]) -> None:
    """Canonical registry CSV: sorted by protocol name."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REGISTRY_COLUMNS + ["decimals"])
        for name in sorted(registry):
            info = registry[name]
            writer.writerow(
                [info.name, info.token, info.genesis.isoformat(), info.decimals]
            )
