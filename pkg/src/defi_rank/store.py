"""Run persistence: JSONL report stores plus a manifest per run.

Each run lives in ``runs/<run_id>/`` with one ``reports_<granularity>.jsonl``
per evaluated granularity. Report files are byte-deterministic for a fixed
config and dataset: sorted keys, compact separators, shortest round-trip
float formatting, no timestamps. Volatile fields (created_at) live only in
the manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path

from defi_rank.errors import SchemaError, UnknownRun
from defi_rank.evaluator import (
    DerivedWeights,
    EvaluationConfig,
    Granularity,
    ScoreReport,
    SeriesResult,
    compose_protocol,
    effective_indicator_weights,
    rank_protocols,
)

try:
    from importlib.metadata import version as _pkg_version

    _VERSION = _pkg_version("defi-rank")
except Exception:  # pragma: no cover - not installed
    _VERSION = "0.0.0"


def _dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def report_lines(run_id: str, granularity: Granularity, report: ScoreReport) -> list[dict]:
    """Serialize one date's report: a date record then one score record per
    protocol, in protocol order."""
    base = {
        "run_id": run_id,
        "granularity": granularity.value,
        "date": report.as_of.isoformat(),
    }
    date_line = dict(base)
    date_line.update(
        {
            "kind": "date",
            "protocols": list(report.protocols),
            "weights": {
                "criteria": report.criterion_weights,
                "indicators": report.indicator_weights,
            },
            "consistency": {
                key: rep.as_dict() for key, rep in sorted(report.consistency.items())
            },
            "all_missing": sorted(report.all_missing),
            "warnings": list(report.warnings),
        }
    )
    lines = [date_line]
    for proto in report.protocols:
        line = dict(base)
        line.update(
            {
                "kind": "score",
                "protocol": proto,
                "score": report.scores[proto],
                "rank": report.ranks[proto],
                "c": report.c[proto],
                "x": report.x[proto],
                "flags": list(report.flags[proto]),
            }
        )
        lines.append(line)
    return lines


@dataclass
class RunStore:
    """Reads and writes ``runs/<run_id>/`` under a data directory."""

    data_dir: Path

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)

    @property
    def runs_dir(self) -> Path:
        return self.data_dir / "runs"

    def run_dir(self, run_id: str) -> Path:
        if not run_id or "/" in run_id or run_id in (".", ".."):
            raise UnknownRun(f"invalid run id {run_id!r}")
        return self.runs_dir / run_id

    def write_run(
        self,
        run_id: str,
        config: EvaluationConfig,
        result: SeriesResult,
        digests: dict[str, str],
    ) -> Path:
        out = self.run_dir(run_id)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / f"reports_{result.granularity.value}.jsonl"
        with report_path.open("w", encoding="utf-8", newline="\n") as fh:
            for report in result.reports:
                for line in report_lines(run_id, result.granularity, report):
                    fh.write(_dumps(line))
                    fh.write("\n")

        manifest_path = out / "manifest.json"
        manifest = (
            json.loads(manifest_path.read_text(encoding="utf-8"))
            if manifest_path.exists()
            else {}
        )
        granularities = set(manifest.get("granularities", []))
        granularities.add(result.granularity.value)
        old_dates = manifest.get("dates", {})
        old_skipped = manifest.get("skipped", {})
        manifest.update(
            {
                "run_id": run_id,
                "created_at": datetime.now(timezone.utc).isoformat(),
                "version": _VERSION,
                "config": config.to_dict(),
                "config_hash": config.hash(),
                "inputs": dict(sorted(digests.items())),
                "granularities": sorted(granularities),
                "dates": {
                    **{k: v for k, v in old_dates.items() if k in granularities},
                    result.granularity.value: [
                        r.as_of.isoformat() for r in result.reports
                    ],
                },
                "skipped": {
                    **{k: v for k, v in old_skipped.items() if k in granularities},
                    result.granularity.value: [
                        [d.isoformat(), reason] for d, reason in result.skipped
                    ],
                },
            }
        )
        manifest_path.write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        return out

    def list_runs(self) -> list[dict]:
        if not self.runs_dir.is_dir():
            return []
        out = []
        for child in sorted(self.runs_dir.iterdir()):
            manifest = child / "manifest.json"
            if child.is_dir() and manifest.exists():
                out.append(json.loads(manifest.read_text(encoding="utf-8")))
        return out

    def read_manifest(self, run_id: str) -> dict:
        path = self.run_dir(run_id) / "manifest.json"
        if not path.exists():
            raise UnknownRun(f"no run named {run_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def report_path(self, run_id: str, granularity: Granularity) -> Path:
        return self.run_dir(run_id) / f"reports_{granularity.value}.jsonl"

    def read_lines(self, run_id: str, granularity: Granularity) -> list[dict]:
        path = self.report_path(run_id, granularity)
        if not path.exists():
            raise UnknownRun(
                f"run {run_id!r} has no {granularity.value} report"
            )
        lines = []
        with path.open(encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    lines.append(json.loads(raw))
                except json.JSONDecodeError as exc:
                    raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc})") from None
        return lines


def group_by_date(lines: list[dict]) -> list[tuple[date, dict, list[dict]]]:
    """Regroup raw JSONL records into (date, date-record, score-records)."""
    by_date: dict[str, tuple[dict | None, list[dict]]] = {}
    order: list[str] = []
    for line in lines:
        key = line.get("date")
        if not isinstance(key, str):
            raise SchemaError("report line missing date")
        if key not in by_date:
            by_date[key] = (None, [])
            order.append(key)
        head, scores = by_date[key]
        if line.get("kind") == "date":
            by_date[key] = (line, scores)
        elif line.get("kind") == "score":
            scores.append(line)
        else:
            raise SchemaError(f"unknown report line kind {line.get('kind')!r}")
    out = []
    for key in order:
        head, scores = by_date[key]
        if head is None:
            raise SchemaError(f"no date record for {key}")
        out.append((date.fromisoformat(key), head, scores))
    return out


@dataclass(frozen=True)
class WhatIfResult:
    dates: tuple[date, ...]
    protocols: tuple[str, ...]
    scores: dict[str, list[float | None]]
    ranks: dict[str, list[int | None]]
    derived: DerivedWeights


def recompute(lines: list[dict], derived: DerivedWeights) -> WhatIfResult:
    """Rescore a stored run from its persisted x values under different
    weights. With the run's own weights this reproduces the stored scores
    bit for bit, because it walks the same composition code path."""
    grouped = group_by_date(lines)
    names: set[str] = set()
    for _, _, score_lines in grouped:
        names.update(line["protocol"] for line in score_lines)
    protocols = tuple(sorted(names))
    scores: dict[str, list[float | None]] = {p: [None] * len(grouped) for p in protocols}
    ranks: dict[str, list[int | None]] = {p: [None] * len(grouped) for p in protocols}
    for i, (_, head, score_lines) in enumerate(grouped):
        all_missing = frozenset(head.get("all_missing", []))
        eff = effective_indicator_weights(derived, all_missing)
        day_scores: dict[str, float] = {}
        for line in score_lines:
            x_row = {
                code: (None if v is None else float(v))
                for code, v in line["x"].items()
            }
            _, day_scores[line["protocol"]] = compose_protocol(
                x_row, derived.criterion, eff
            )
        day_ranks = rank_protocols(day_scores)
        for p, s in day_scores.items():
            scores[p][i] = s
            ranks[p][i] = day_ranks[p]
    return WhatIfResult(
        dates=tuple(day for day, _, _ in grouped),
        protocols=protocols,
        scores=scores,
        ranks=ranks,
        derived=derived,
    )
