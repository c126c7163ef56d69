"""Command line interface.

Four subcommands: ingest raw CSVs into a canonical data directory,
evaluate a run and persist its reports, print a run as a rank or score
table, and serve the HTTP API. Failures print a machine-readable JSON
error to stderr; exit code 2 means invalid input, 3 means the run
produced no usable date.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import sys
from pathlib import Path

import click

from defi_rank.errors import DefiRankError, NoProtocolHasData, SchemaError
from defi_rank.evaluator import (
    EvaluationConfig,
    Granularity,
    evaluate_series,
    load_dataset,
)
from defi_rank.kernels import BACKEND
from defi_rank.ledger import (
    CLASSIFICATION_COLUMNS,
    TRANSFER_COLUMNS,
    ingest_transfers,
    load_classifications,
    write_classifications,
    write_rejects,
    write_transfers,
)
from defi_rank.metrics import (
    METRIC_COLUMNS,
    dump_metrics,
    load_metrics,
    load_registry,
    write_registry,
)
from defi_rank.store import RunStore, group_by_date

EXIT_INVALID = 2
EXIT_NO_DATA = 3

_GRANULARITY_CHOICE = click.Choice([g.value for g in Granularity])


def _fail(exc: DefiRankError, exit_code: int = EXIT_INVALID) -> None:
    payload = {"error": {"code": exc.code, "message": str(exc)}}
    click.echo(json.dumps(payload), err=True)
    sys.exit(exit_code)


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True, indent=2))


@click.group()
@click.version_option(package_name="defi-rank")
def main() -> None:
    """Rank DeFi lending protocols over time."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--data-dir", required=True, type=click.Path(path_type=Path))
@click.option("--strict", is_flag=True, help="Fail on the first malformed row.")
def ingest(config_path: Path, data_dir: Path, strict: bool) -> None:
    """Normalize the raw inputs named in the config into DATA_DIR."""
    try:
        config = EvaluationConfig.from_file(config_path)
        summary = _ingest(config, config_path.parent, data_dir, strict)
    except DefiRankError as exc:
        _fail(exc)
        return
    _echo_json(summary)


def _resolve(base: Path, value: object, label: str) -> Path:
    if not isinstance(value, str) or not value:
        raise SchemaError(f"inputs.{label}: expected a file path")
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise SchemaError(f"inputs.{label}: no such file {path}")
    return path


def _ingest(
    config: EvaluationConfig, base: Path, data_dir: Path, strict: bool
) -> dict:
    inputs = config.inputs
    if "registry" not in inputs:
        raise SchemaError("inputs.registry is required for ingest")
    data_dir.mkdir(parents=True, exist_ok=True)
    rejects_dir = data_dir / "rejects"
    counts: dict[str, int] = {}
    reject_counts: dict[str, int] = {}

    registry = load_registry(_resolve(base, inputs["registry"], "registry"))
    write_registry(data_dir / "registry.csv", registry)
    counts["registry"] = len(registry)

    if "classifications" in inputs:
        src = _resolve(base, inputs["classifications"], "classifications")
        classes, rejects = load_classifications(src, strict=strict)
        write_classifications(data_dir / "classifications.csv", classes)
        counts["classifications"] = len(classes)
        if rejects:
            rejects_dir.mkdir(exist_ok=True)
            write_rejects(
                rejects_dir / "classifications.csv", CLASSIFICATION_COLUMNS, rejects
            )
            reject_counts["classifications"] = len(rejects)

    if "metrics" in inputs:
        src = _resolve(base, inputs["metrics"], "metrics")
        series, rejects = load_metrics(src, registry, strict=strict)
        dump_metrics(data_dir / "metrics.csv", series)
        counts["metrics"] = sum(len(s.points) for s in series.values())
        if rejects:
            rejects_dir.mkdir(exist_ok=True)
            write_rejects(rejects_dir / "metrics.csv", METRIC_COLUMNS, rejects)
            reject_counts["metrics"] = len(rejects)

    transfers = inputs.get("transfers") or {}
    if transfers and not isinstance(transfers, dict):
        raise SchemaError("inputs.transfers: expected an object of token to path")
    decimals_by_token = {info.token: info.decimals for info in registry.values()}
    transfer_counts: dict[str, int] = {}
    for token in sorted(transfers):
        src = _resolve(base, transfers[token], f"transfers.{token}")
        result = ingest_transfers(
            src,
            token,
            decimals=decimals_by_token.get(token, 18),
            strict=strict,
            checkpoint_interval=config.checkpoint_interval,
        )
        (data_dir / "transfers").mkdir(exist_ok=True)
        write_transfers(data_dir / "transfers" / f"{token}.csv", result.log)
        transfer_counts[token] = len(result.log.events)
        if result.rejects:
            rejects_dir.mkdir(exist_ok=True)
            write_rejects(
                rejects_dir / f"transfers_{token}.csv",
                TRANSFER_COLUMNS,
                result.rejects,
            )
            reject_counts[f"transfers/{token}"] = len(result.rejects)

    return {
        "data_dir": str(data_dir),
        "counts": counts,
        "transfers": transfer_counts,
        "rejects": reject_counts,
    }


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--data-dir", required=True, type=click.Path(path_type=Path))
@click.option("--run-id", required=True)
@click.option("--granularity", type=_GRANULARITY_CHOICE, default=None)
@click.option("--strict", is_flag=True, help="Fail on the first malformed row.")
def evaluate(
    config_path: Path,
    data_dir: Path,
    run_id: str,
    granularity: str | None,
    strict: bool,
) -> None:
    """Evaluate every sampled date and persist the run under DATA_DIR."""
    try:
        config = EvaluationConfig.from_file(config_path)
        if granularity is not None:
            config = dataclasses.replace(config, granularity=Granularity(granularity))
        dataset = load_dataset(data_dir, config, strict=strict)
        result = evaluate_series(config, dataset)
        if not result.reports:
            raise NoProtocolHasData(
                "every sampled date failed: "
                + "; ".join(f"{d}: {reason}" for d, reason in result.skipped[:5])
            )
        store = RunStore(data_dir)
        out = store.write_run(run_id, config, result, dataset.digests)
    except NoProtocolHasData as exc:
        _fail(exc, EXIT_NO_DATA)
        return
    except DefiRankError as exc:
        _fail(exc)
        return
    _echo_json(
        {
            "run_id": run_id,
            "granularity": result.granularity.value,
            "backend": BACKEND,
            "dates_evaluated": len(result.reports),
            "dates_skipped": [[d.isoformat(), r] for d, r in result.skipped],
            "config_hash": config.hash(),
            "output": str(out),
            "rejected_rows": {k: len(v) for k, v in dataset.rejects.items()},
        }
    )


@main.command()
@click.option("--data-dir", required=True, type=click.Path(path_type=Path))
@click.option("--run-id", required=True)
@click.option("--granularity", type=_GRANULARITY_CHOICE, default=None)
@click.option(
    "--ordinate",
    type=click.Choice(["rank", "score"]),
    default="rank",
    show_default=True,
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table", "csv", "json"]),
    default="table",
    show_default=True,
)
def report(
    data_dir: Path, run_id: str, granularity: str | None, ordinate: str, fmt: str
) -> None:
    """Print a stored run as protocol rows over sample dates."""
    try:
        store = RunStore(data_dir)
        manifest = store.read_manifest(run_id)
        if granularity is None:
            stored = manifest.get("granularities", [])
            if len(stored) != 1:
                raise SchemaError(
                    f"run {run_id!r} has granularities {stored}; pass --granularity"
                )
            granularity = stored[0]
        lines = store.read_lines(run_id, Granularity(granularity))
        grouped = group_by_date(lines)
    except DefiRankError as exc:
        _fail(exc)
        return

    dates = [day for day, _, _ in grouped]
    protocols = sorted({s["protocol"] for _, _, scores in grouped for s in scores})
    cells: dict[str, list[str]] = {p: [] for p in protocols}
    for _, _, scores in grouped:
        present = {s["protocol"]: s for s in scores}
        for p in protocols:
            line = present.get(p)
            if line is None:
                cells[p].append("")
            elif ordinate == "rank":
                cells[p].append(str(line["rank"]))
            else:
                cells[p].append(repr(float(line["score"])))

    header = ["protocol"] + [d.isoformat() for d in dates]
    rows = [header] + [[p] + cells[p] for p in protocols]
    if fmt == "json":
        _echo_json(
            {
                "run_id": run_id,
                "granularity": granularity,
                "ordinate": ordinate,
                "dates": header[1:],
                "series": cells,
            }
        )
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(rows)
        click.echo(buf.getvalue(), nl=False)
    else:
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        for row in rows:
            click.echo("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())


@main.command()
@click.option("--data-dir", required=True, type=click.Path(path_type=Path))
@click.option("--listen", default="127.0.0.1:8000", show_default=True)
def serve(data_dir: Path, listen: str) -> None:
    """Serve the HTTP API (and the UI, when frontend/dist exists)."""
    import uvicorn

    from defi_rank.service import create_app

    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        _fail(SchemaError(f"--listen expects HOST:PORT, got {listen!r}"))
        return
    app = create_app(data_dir)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")


if __name__ == "__main__":
    main()
