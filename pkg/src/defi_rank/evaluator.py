"""Evaluation pipeline: configuration, date sampling, scoring, ranking.

A run takes a protocol registry, classified transfer logs, and metric
series, samples dates at a chosen granularity, and at each date builds the
full judgment pyramid: one criteria matrix, one indicator matrix per
criterion, and one scheme matrix per indicator with data. Scores compose
bottom-up from the principal eigenvectors of those matrices.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum
from math import fsum, isfinite
from pathlib import Path

import numpy as np

from defi_rank import ahp
from defi_rank.ahp import (
    ConsistencyReport,
    MatrixOrigin,
    PairwiseMatrix,
    matrix_from_scores,
    matrix_from_weights,
)
from defi_rank.errors import (
    ConfigError,
    EmptyRange,
    NonPositiveWeight,
    NoProtocolHasData,
    SchemaError,
)
from defi_rank.indicators import (
    BY_CODE,
    CRITERIA,
    CRITERION_CHILDREN,
    Direction,
    compute_panel,
    gini as snapshot_gini,
    nakamoto as snapshot_nakamoto,
    top10_share,
    valuation_raw,
)
from defi_rank.ledger import (
    DEFAULT_CHECKPOINT_INTERVAL,
    DEFAULT_DUST_THRESHOLD_USD,
    AddressClassification,
    RejectedRow,
    TransferLog,
    filter_holders,
    ingest_transfers,
    load_classifications,
)
from defi_rank.metrics import (
    DEFAULT_STALENESS_DAYS,
    MetricName,
    MetricSeries,
    ProtocolInfo,
    annualized_revenue,
    load_metrics,
    load_registry,
    value_at,
)

DEFAULT_EPSILON = 1e-9
MAX_PROTOCOLS = 10

FLAG_NOT_LAUNCHED = "not_yet_launched"
FLAG_DUST_SKIPPED = "dust_filter_skipped"
FLAG_REVENUE_EXTRAPOLATED = "revenue_extrapolated"


class Granularity(str, Enum):
    DAY = "day"
    WEEK = "week"
    HALF_MONTH = "half-month"
    MONTH = "month"


def sample_dates(start: date, end: date, granularity: Granularity) -> list[date]:
    """Anchor dates in [start, end]: every day, Mondays, the 1st and 15th,
    or the 1st of each month. Raises EmptyRange when start > end; a valid
    range with no anchors yields an empty list."""
    if start > end:
        raise EmptyRange(f"start {start} is after end {end}")
    out = []
    day = start
    while day <= end:
        if granularity is Granularity.DAY:
            out.append(day)
        elif granularity is Granularity.WEEK:
            if day.weekday() == 0:
                out.append(day)
        elif granularity is Granularity.HALF_MONTH:
            if day.day in (1, 15):
                out.append(day)
        else:
            if day.day == 1:
                out.append(day)
        day += timedelta(days=1)
    return out


_CONFIG_KEYS = {
    "protocols",
    "date_range",
    "granularity",
    "criterion_weights",
    "indicator_weights",
    "criteria_judgment",
    "indicator_judgments",
    "direction_overrides",
    "dust_threshold_usd",
    "staleness_days",
    "epsilon",
    "power_tol",
    "power_max_iter",
    "checkpoint_interval",
    "inputs",
}


def _parse_matrix(value: object, n: int, label: str) -> tuple[tuple[float, ...], ...]:
    """Accept an n x n nested list or a flat row-major list of n*n numbers."""
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{label}: expected a matrix, got {type(value).__name__}")
    if isinstance(value[0], list):
        rows = value
    else:
        if len(value) != n * n:
            raise ConfigError(f"{label}: expected {n * n} entries, got {len(value)}")
        rows = [value[i * n : (i + 1) * n] for i in range(n)]
    if len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise ConfigError(f"{label}: expected a {n}x{n} matrix")
    try:
        return tuple(tuple(float(v) for v in row) for row in rows)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: non-numeric entry ({exc})") from None


def _positive(value: object, label: str) -> float:
    try:
        out = float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise NonPositiveWeight(f"{label}: expected a number, got {value!r}") from None
    if not isfinite(out) or out <= 0:
        raise NonPositiveWeight(f"{label}: weight must be positive, got {out}")
    return out


@dataclass(frozen=True)
class EvaluationConfig:
    """Validated run parameters. All custom weights default to 1."""

    protocols: tuple[str, ...]
    start: date
    end: date
    granularity: Granularity = Granularity.WEEK
    criterion_weights: dict[str, float] = field(default_factory=dict)
    indicator_weights: dict[str, float] = field(default_factory=dict)
    criteria_judgment: tuple[tuple[float, ...], ...] | None = None
    indicator_judgments: dict[str, tuple[tuple[float, ...], ...]] = field(
        default_factory=dict
    )
    direction_overrides: dict[str, Direction] = field(default_factory=dict)
    dust_threshold_usd: float = DEFAULT_DUST_THRESHOLD_USD
    staleness_days: int = DEFAULT_STALENESS_DAYS
    epsilon: float = DEFAULT_EPSILON
    power_tol: float = ahp.DEFAULT_TOL
    power_max_iter: int = ahp.DEFAULT_MAX_ITER
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL
    inputs: dict[str, object] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "EvaluationConfig":
        if not isinstance(raw, dict):
            raise ConfigError(f"config must be an object, got {type(raw).__name__}")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

        protocols = raw.get("protocols")
        if (
            not isinstance(protocols, list)
            or not protocols
            or any(not isinstance(p, str) or not p for p in protocols)
        ):
            raise ConfigError("protocols: expected a non-empty list of names")
        if len(set(protocols)) != len(protocols):
            raise ConfigError("protocols: duplicate names")
        if len(protocols) > MAX_PROTOCOLS:
            raise ConfigError(
                f"protocols: at most {MAX_PROTOCOLS} supported, got {len(protocols)}"
            )

        rng = raw.get("date_range")
        if not isinstance(rng, dict) or set(rng) != {"start", "end"}:
            raise ConfigError('date_range: expected {"start": ..., "end": ...}')
        try:
            start = date.fromisoformat(str(rng["start"]))
            end = date.fromisoformat(str(rng["end"]))
        except ValueError as exc:
            raise ConfigError(f"date_range: {exc}") from None
        if start > end:
            raise EmptyRange(f"start {start} is after end {end}")

        try:
            granularity = Granularity(raw.get("granularity", "week"))
        except ValueError:
            raise ConfigError(
                f"granularity: expected one of "
                f"{[g.value for g in Granularity]}, got {raw['granularity']!r}"
            ) from None

        crit_w = {}
        for key, val in (raw.get("criterion_weights") or {}).items():
            if key not in CRITERIA:
                raise ConfigError(f"criterion_weights: unknown criterion {key!r}")
            crit_w[key] = _positive(val, f"criterion_weights[{key}]")
        ind_w = {}
        for key, val in (raw.get("indicator_weights") or {}).items():
            if key not in BY_CODE:
                raise ConfigError(f"indicator_weights: unknown indicator {key!r}")
            ind_w[key] = _positive(val, f"indicator_weights[{key}]")

        crit_j = raw.get("criteria_judgment")
        if crit_j is not None:
            crit_j = _parse_matrix(crit_j, len(CRITERIA), "criteria_judgment")
        ind_j = {}
        for key, val in (raw.get("indicator_judgments") or {}).items():
            if key not in CRITERIA:
                raise ConfigError(f"indicator_judgments: unknown criterion {key!r}")
            ind_j[key] = _parse_matrix(
                val, len(CRITERION_CHILDREN[key]), f"indicator_judgments[{key}]"
            )

        overrides = {}
        for key, val in (raw.get("direction_overrides") or {}).items():
            if key not in BY_CODE:
                raise ConfigError(f"direction_overrides: unknown indicator {key!r}")
            try:
                overrides[key] = Direction(val)
            except ValueError:
                raise ConfigError(
                    f"direction_overrides[{key}]: expected 'positive' or "
                    f"'negative', got {val!r}"
                ) from None

        def _number(key: str, default: float, minimum: float, exclusive: bool) -> float:
            val = raw.get(key, default)
            try:
                out = float(val)
            except (TypeError, ValueError):
                raise ConfigError(f"{key}: expected a number, got {val!r}") from None
            if not isfinite(out) or (out <= minimum if exclusive else out < minimum):
                raise ConfigError(f"{key}: out of range ({out})")
            return out

        def _integer(key: str, default: int, minimum: int) -> int:
            val = raw.get(key, default)
            if not isinstance(val, int) or isinstance(val, bool) or val < minimum:
                raise ConfigError(f"{key}: expected an integer >= {minimum}")
            return val

        inputs = raw.get("inputs") or {}
        if not isinstance(inputs, dict):
            raise ConfigError("inputs: expected an object")

        return cls(
            protocols=tuple(protocols),
            start=start,
            end=end,
            granularity=granularity,
            criterion_weights=crit_w,
            indicator_weights=ind_w,
            criteria_judgment=crit_j,
            indicator_judgments=ind_j,
            direction_overrides=overrides,
            dust_threshold_usd=_number(
                "dust_threshold_usd", DEFAULT_DUST_THRESHOLD_USD, 0.0, False
            ),
            staleness_days=_integer("staleness_days", DEFAULT_STALENESS_DAYS, 0),
            epsilon=_number("epsilon", DEFAULT_EPSILON, 0.0, True),
            power_tol=_number("power_tol", ahp.DEFAULT_TOL, 0.0, True),
            power_max_iter=_integer("power_max_iter", ahp.DEFAULT_MAX_ITER, 1),
            checkpoint_interval=_integer(
                "checkpoint_interval", DEFAULT_CHECKPOINT_INTERVAL, 1
            ),
            inputs=dict(inputs),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "EvaluationConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "protocols": list(self.protocols),
            "date_range": {
                "start": self.start.isoformat(),
                "end": self.end.isoformat(),
            },
            "granularity": self.granularity.value,
            "criterion_weights": dict(sorted(self.criterion_weights.items())),
            "indicator_weights": dict(sorted(self.indicator_weights.items())),
            "criteria_judgment": (
                [list(r) for r in self.criteria_judgment]
                if self.criteria_judgment
                else None
            ),
            "indicator_judgments": {
                k: [list(r) for r in v]
                for k, v in sorted(self.indicator_judgments.items())
            },
            "direction_overrides": {
                k: v.value for k, v in sorted(self.direction_overrides.items())
            },
            "dust_threshold_usd": self.dust_threshold_usd,
            "staleness_days": self.staleness_days,
            "epsilon": self.epsilon,
            "power_tol": self.power_tol,
            "power_max_iter": self.power_max_iter,
            "checkpoint_interval": self.checkpoint_interval,
            "inputs": self.inputs,
        }

    def hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class Dataset:
    """Canonical on-disk inputs loaded into memory."""

    registry: dict[str, ProtocolInfo]
    classes: dict[str, AddressClassification]
    metrics: dict[tuple[str, MetricName], MetricSeries]
    logs: dict[str, TransferLog]
    digests: dict[str, str] = field(default_factory=dict)
    rejects: dict[str, list[RejectedRow]] = field(default_factory=dict)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_dataset(
    data_dir: str | Path,
    config: EvaluationConfig,
    strict: bool = False,
) -> Dataset:
    """Load registry.csv, classifications.csv, metrics.csv, and
    transfers/<TOKEN>.csv from a canonical data directory."""
    root = Path(data_dir)
    registry_path = root / "registry.csv"
    if not registry_path.exists():
        raise SchemaError(f"missing {registry_path}")
    registry = load_registry(registry_path)
    missing = [p for p in config.protocols if p not in registry]
    if missing:
        raise ConfigError(f"protocols not in registry: {missing}")

    digests = {"registry.csv": _sha256(registry_path)}
    rejects: dict[str, list[RejectedRow]] = {}

    classes: dict[str, AddressClassification] = {}
    classes_path = root / "classifications.csv"
    if classes_path.exists():
        classes, crej = load_classifications(classes_path, strict=strict)
        digests["classifications.csv"] = _sha256(classes_path)
        if crej:
            rejects["classifications.csv"] = crej

    metrics_path = root / "metrics.csv"
    metrics: dict[tuple[str, MetricName], MetricSeries] = {}
    if metrics_path.exists():
        metrics, mrej = load_metrics(metrics_path, registry, strict=strict)
        digests["metrics.csv"] = _sha256(metrics_path)
        if mrej:
            rejects["metrics.csv"] = mrej

    decimals_by_token = {
        info.token: info.decimals for info in registry.values()
    }
    logs: dict[str, TransferLog] = {}
    transfers_dir = root / "transfers"
    if transfers_dir.is_dir():
        for path in sorted(transfers_dir.glob("*.csv")):
            token = path.stem
            result = ingest_transfers(
                path,
                token,
                decimals=decimals_by_token.get(token, 18),
                strict=strict,
                checkpoint_interval=config.checkpoint_interval,
            )
            logs[token] = result.log
            digests[f"transfers/{path.name}"] = _sha256(path)
            if result.rejects:
                rejects[f"transfers/{path.name}"] = result.rejects
    return Dataset(registry, classes, metrics, logs, digests, rejects)


@dataclass(frozen=True)
class DerivedWeights:
    """Eigenvector weights of the criteria and indicator matrices, with
    their consistency reports. Date-independent for a fixed config."""

    criterion: dict[str, float]
    indicator: dict[str, dict[str, float]]
    consistency: dict[str, ConsistencyReport]
    warnings: tuple[str, ...]


def derive_weights(
    config_like: "EvaluationConfig | WeightInputs",
) -> DerivedWeights:
    cfg = config_like
    warnings: list[str] = []
    reports: dict[str, ConsistencyReport] = {}

    if cfg.criteria_judgment is not None:
        crit_matrix = PairwiseMatrix(
            np.array(cfg.criteria_judgment, dtype=np.float64),
            origin=MatrixOrigin.USER_JUDGMENT,
        )
    else:
        crit_matrix = matrix_from_weights(
            [cfg.criterion_weights.get(c, 1.0) for c in CRITERIA]
        )
    eig = ahp.principal_eigen(crit_matrix, cfg.power_tol, cfg.power_max_iter)
    report = ahp.consistency(crit_matrix, eig)
    reports["criteria"] = report
    if not report.passed:
        warnings.append(
            f"criteria judgment failed the consistency check (CR={report.cr:.4f})"
        )
    criterion = {c: float(w) for c, w in zip(CRITERIA, eig.weights)}

    indicator: dict[str, dict[str, float]] = {}
    for crit in CRITERIA:
        children = CRITERION_CHILDREN[crit]
        judged = cfg.indicator_judgments.get(crit)
        if judged is not None:
            matrix = PairwiseMatrix(
                np.array(judged, dtype=np.float64),
                origin=MatrixOrigin.USER_JUDGMENT,
            )
        else:
            matrix = matrix_from_weights(
                [cfg.indicator_weights.get(code, 1.0) for code in children]
            )
        eig = ahp.principal_eigen(matrix, cfg.power_tol, cfg.power_max_iter)
        report = ahp.consistency(matrix, eig)
        reports[f"indicators:{crit}"] = report
        if not report.passed:
            warnings.append(
                f"indicator judgment for {crit} failed the consistency check "
                f"(CR={report.cr:.4f})"
            )
        indicator[crit] = {
            code: float(w) for code, w in zip(children, eig.weights)
        }
    return DerivedWeights(criterion, indicator, reports, tuple(warnings))


@dataclass(frozen=True)
class WeightInputs:
    """Minimal weight parameters, used for what-if recomputation."""

    criterion_weights: dict[str, float] = field(default_factory=dict)
    indicator_weights: dict[str, float] = field(default_factory=dict)
    criteria_judgment: tuple[tuple[float, ...], ...] | None = None
    indicator_judgments: dict[str, tuple[tuple[float, ...], ...]] = field(
        default_factory=dict
    )
    power_tol: float = ahp.DEFAULT_TOL
    power_max_iter: int = ahp.DEFAULT_MAX_ITER


def effective_indicator_weights(
    derived: DerivedWeights, all_missing: frozenset[str] | set[str]
) -> dict[str, dict[str, float]]:
    """Renormalize each criterion's indicator weights over the indicators
    that have any data at this date. A criterion whose indicators are all
    missing gets an empty map and contributes zero."""
    out: dict[str, dict[str, float]] = {}
    for crit in CRITERIA:
        present = [c for c in CRITERION_CHILDREN[crit] if c not in all_missing]
        if not present:
            out[crit] = {}
            continue
        total = fsum(derived.indicator[crit][c] for c in present)
        out[crit] = {c: derived.indicator[crit][c] / total for c in present}
    return out


def compose_protocol(
    x_row: dict[str, float | None],
    criterion_weights: dict[str, float],
    eff_indicator: dict[str, dict[str, float]],
) -> tuple[dict[str, float], float]:
    """Layer composition for one protocol: criterion values then the final
    score. A missing x contributes zero to its criterion."""
    c_values: dict[str, float] = {}
    for crit in CRITERIA:
        weights = eff_indicator[crit]
        if not weights:
            c_values[crit] = 0.0
            continue
        codes = [code for code in CRITERION_CHILDREN[crit] if code in weights]
        w = [weights[code] for code in codes]
        x = [x_row.get(code) if x_row.get(code) is not None else 0.0 for code in codes]
        c_values[crit] = ahp.compose_level(w, x)
    score = ahp.final_score(
        [criterion_weights[crit] for crit in CRITERIA],
        [c_values[crit] for crit in CRITERIA],
    )
    return c_values, score


def rank_protocols(scores: dict[str, float]) -> dict[str, int]:
    """Dense 1..k ranks, best score first, ties broken by name ascending."""
    ordered = sorted(scores, key=lambda p: (-scores[p], p))
    return {p: i + 1 for i, p in enumerate(ordered)}


@dataclass(frozen=True)
class ScoreReport:
    """Everything computed at one sample date."""

    as_of: date
    protocols: tuple[str, ...]
    x: dict[str, dict[str, float | None]]
    c: dict[str, dict[str, float]]
    scores: dict[str, float]
    ranks: dict[str, int]
    criterion_weights: dict[str, float]
    indicator_weights: dict[str, dict[str, float]]
    consistency: dict[str, ConsistencyReport]
    flags: dict[str, tuple[str, ...]]
    warnings: tuple[str, ...]
    all_missing: frozenset[str]


def _cutoff_seconds(as_of: date) -> int:
    # 23:59:59 UTC on the sample date
    from calendar import timegm

    return timegm((as_of + timedelta(days=1)).timetuple()) - 1


def _raw_rows(
    as_of: date,
    protos: list[str],
    config: EvaluationConfig,
    dataset: Dataset,
) -> tuple[dict[str, dict[str, float | None]], dict[str, list[str]]]:
    rows: dict[str, dict[str, float | None]] = {}
    flags: dict[str, list[str]] = {p: [] for p in protos}
    cutoff = _cutoff_seconds(as_of)
    for proto in protos:
        info = dataset.registry[proto]

        def metric(name: MetricName) -> float | None:
            return value_at(
                dataset.metrics.get((proto, name)),
                as_of,
                staleness_days=config.staleness_days,
                genesis=info.genesis,
            )

        mcap = metric(MetricName.MCAP)
        fdv = metric(MetricName.FDV)
        tvl = metric(MetricName.TVL)
        ann = annualized_revenue(
            dataset.metrics.get((proto, MetricName.REVENUE)), as_of, info.genesis
        )
        ann_value: float | None = None
        if ann is not None:
            ann_value, extrapolated = ann
            if extrapolated:
                flags[proto].append(FLAG_REVENUE_EXTRAPOLATED)
        ps_ratio, capital_eff, mcap_tvl = valuation_raw(mcap, fdv, tvl, ann_value)

        gini_v: float | None = None
        nakamoto_v: float | None = None
        top10_v: float | None = None
        log = dataset.logs.get(info.token)
        if log is not None and log.events:
            snap = log.balances_at(cutoff)
            if snap.balances:
                filtered = filter_holders(
                    snap,
                    dataset.classes,
                    price_usd=metric(MetricName.PRICE),
                    dust_threshold_usd=config.dust_threshold_usd,
                )
                if filtered.dust_filter_skipped:
                    flags[proto].append(FLAG_DUST_SKIPPED)
                held = filtered.as_snapshot()
                if held.balances:
                    gini_v = snapshot_gini(held)
                    nakamoto_v = float(snapshot_nakamoto(held))
                    top10_v = top10_share(held)

        rows[proto] = {
            "I11": mcap,
            "I12": metric(MetricName.BORROW),
            "I13": metric(MetricName.REVENUE),
            "I14": metric(MetricName.VOLUME),
            "I21": ps_ratio,
            "I22": capital_eff,
            "I23": mcap_tvl,
            "I31": gini_v,
            "I32": nakamoto_v,
            "I33": top10_v,
        }
    return rows, flags


def evaluate_at(
    as_of: date,
    config: EvaluationConfig,
    dataset: Dataset,
    derived: DerivedWeights | None = None,
) -> ScoreReport:
    """Score every launched protocol at one date.

    Raises NoProtocolHasData when nothing has launched by the date or no
    indicator has a single observation.
    """
    if derived is None:
        derived = derive_weights(config)
    protos = sorted(
        p for p in config.protocols if dataset.registry[p].genesis <= as_of
    )
    if not protos:
        raise NoProtocolHasData(f"no configured protocol launched by {as_of}")

    rows, flag_lists = _raw_rows(as_of, protos, config, dataset)
    panel = compute_panel(
        as_of,
        protos,
        rows,
        direction_overrides=config.direction_overrides,
        epsilon=config.epsilon,
    )
    if len(panel.all_missing) == len(BY_CODE):
        raise NoProtocolHasData(f"no indicator has data at {as_of}")

    warnings = list(derived.warnings)
    consistency = dict(derived.consistency)
    x: dict[str, dict[str, float | None]] = {p: {} for p in protos}
    for code in BY_CODE:
        if code in panel.all_missing:
            for p in protos:
                x[p][code] = None
            continue
        column = panel.adjusted[code]
        present = [i for i, v in enumerate(column) if v is not None]
        if len(present) == 1:
            weights = [1.0]
            consistency[f"scheme:{code}"] = ConsistencyReport(
                n=1, lambda_max=1.0, ci=0.0, ri=0.0, cr=0.0, passed=True
            )
        else:
            matrix = matrix_from_scores(
                [column[i] for i in present], epsilon=config.epsilon
            )
            eig = ahp.principal_eigen(matrix, config.power_tol, config.power_max_iter)
            report = ahp.consistency(matrix, eig)
            consistency[f"scheme:{code}"] = report
            if not report.passed:
                warnings.append(
                    f"scheme matrix for {code} failed the consistency check "
                    f"(CR={report.cr:.4f})"
                )
            weights = [float(w) for w in eig.weights]
        lookup = dict(zip(present, weights))
        for i, p in enumerate(protos):
            x[p][code] = lookup.get(i)

    eff_indicator = effective_indicator_weights(derived, panel.all_missing)
    for crit in CRITERIA:
        if not eff_indicator[crit]:
            warnings.append(f"criterion {crit} has no data at {as_of}")

    c_values: dict[str, dict[str, float]] = {}
    scores: dict[str, float] = {}
    for p in protos:
        c_values[p], scores[p] = compose_protocol(
            x[p], derived.criterion, eff_indicator
        )
        for crit in CRITERIA:
            present = eff_indicator[crit]
            if present and all(x[p][code] is None for code in present):
                flag_lists[p].append(f"{FLAG_NOT_LAUNCHED}:{crit}")

    return ScoreReport(
        as_of=as_of,
        protocols=tuple(protos),
        x=x,
        c=c_values,
        scores=scores,
        ranks=rank_protocols(scores),
        criterion_weights=dict(derived.criterion),
        indicator_weights=eff_indicator,
        consistency=consistency,
        flags={p: tuple(f) for p, f in flag_lists.items()},
        warnings=tuple(warnings),
        all_missing=panel.all_missing,
    )


@dataclass(frozen=True)
class SeriesResult:
    """One evaluation run over a sampled date range."""

    granularity: Granularity
    reports: tuple[ScoreReport, ...]
    skipped: tuple[tuple[date, str], ...]
    derived: DerivedWeights

    def rank_series(self) -> "RankSeries":
        return RankSeries.from_reports(self.reports)


@dataclass(frozen=True)
class RankSeries:
    """Ranks and scores pivoted to protocol rows over sample dates."""

    dates: tuple[date, ...]
    protocols: tuple[str, ...]
    ranks: dict[date, dict[str, int]]
    scores: dict[date, dict[str, float]]

    @classmethod
    def from_reports(cls, reports: tuple[ScoreReport, ...]) -> "RankSeries":
        names: set[str] = set()
        for report in reports:
            names.update(report.protocols)
        return cls(
            dates=tuple(r.as_of for r in reports),
            protocols=tuple(sorted(names)),
            ranks={r.as_of: dict(r.ranks) for r in reports},
            scores={r.as_of: dict(r.scores) for r in reports},
        )

    def table(self, ordinate: str = "rank") -> list[list[str]]:
        """Rows for tabular output; blank cells before a protocol launches."""
        if ordinate not in ("rank", "score"):
            raise ValueError(f"ordinate must be 'rank' or 'score', got {ordinate!r}")
        source = self.ranks if ordinate == "rank" else self.scores
        header = ["protocol"] + [d.isoformat() for d in self.dates]
        out = [header]
        for p in self.protocols:
            row = [p]
            for d in self.dates:
                value = source[d].get(p)
                if value is None:
                    row.append("")
                elif ordinate == "rank":
                    row.append(str(value))
                else:
                    row.append(repr(value))
            out.append(row)
        return out


def evaluate_series(config: EvaluationConfig, dataset: Dataset) -> SeriesResult:
    """Run the full pipeline over every sampled date. Dates where nothing
    has launched or nothing has data are skipped with a reason."""
    derived = derive_weights(config)
    dates = sample_dates(config.start, config.end, config.granularity)
    reports: list[ScoreReport] = []
    skipped: list[tuple[date, str]] = []
    for day in dates:
        try:
            reports.append(evaluate_at(day, config, dataset, derived))
        except NoProtocolHasData as exc:
            skipped.append((day, str(exc)))
    return SeriesResult(
        granularity=config.granularity,
        reports=tuple(reports),
        skipped=tuple(skipped),
        derived=derived,
    )
