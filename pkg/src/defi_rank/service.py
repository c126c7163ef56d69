"""HTTP API over stored runs.

Scores cross the wire as decimal strings produced by shortest round-trip
float formatting, so a client that echoes a string back compares equal
without ever parsing it. The what-if endpoint rescores a run from its
persisted normalized values under caller-supplied weights or judgment
matrices, walking the same composition code as the evaluator.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles

from defi_rank import ahp
from defi_rank.ahp import MatrixOrigin, PairwiseMatrix
from defi_rank.errors import DefiRankError, SchemaError, UnknownRun
from defi_rank.indicators import BY_CODE
from defi_rank.evaluator import (
    EvaluationConfig,
    Granularity,
    WeightInputs,
    derive_weights,
)
from defi_rank.kernels import BACKEND
from defi_rank.store import RunStore, group_by_date, recompute

_WHATIF_KEYS = {
    "granularity",
    "criterion_weights",
    "indicator_weights",
    "criteria_judgment",
    "indicator_judgments",
}


def _text(value: float) -> str:
    return repr(float(value))


def _granularity(value: str | None, manifest: dict) -> Granularity:
    stored = manifest.get("granularities", [])
    if value is None:
        if len(stored) != 1:
            raise SchemaError(
                f"run has granularities {stored}; pass ?granularity="
            )
        value = stored[0]
    try:
        return Granularity(value)
    except ValueError:
        raise SchemaError(
            f"granularity must be one of {[g.value for g in Granularity]}"
        ) from None


def _weight_inputs(manifest: dict, overrides: dict) -> WeightInputs:
    """Overlay what-if overrides onto the run's stored config, then revalidate
    the merged document through the normal config parser.

    Judgment matrices outrank plain weights during derivation, so an
    override of one mechanism also clears the other at the same level:
    sending criterion_weights drops a stored criteria_judgment, sending
    indicator_weights drops stored judgments for the affected criteria,
    and a judgment sent as null clears it without a replacement.
    """
    merged = dict(manifest["config"])
    if overrides.get("criterion_weights") is not None:
        merged["criterion_weights"] = overrides["criterion_weights"]
        merged.pop("criteria_judgment", None)
    if overrides.get("indicator_weights") is not None:
        merged["indicator_weights"] = overrides["indicator_weights"]
        judgments = dict(merged.get("indicator_judgments") or {})
        for code in overrides["indicator_weights"]:
            spec = BY_CODE.get(code)
            if spec is not None:
                judgments.pop(spec.criterion, None)
        merged["indicator_judgments"] = judgments
    if "criteria_judgment" in overrides:
        if overrides["criteria_judgment"] is None:
            merged.pop("criteria_judgment", None)
        else:
            merged["criteria_judgment"] = overrides["criteria_judgment"]
    if "indicator_judgments" in overrides:
        judgments = dict(merged.get("indicator_judgments") or {})
        for crit, matrix in (overrides["indicator_judgments"] or {}).items():
            if matrix is None:
                judgments.pop(crit, None)
            else:
                judgments[crit] = matrix
        merged["indicator_judgments"] = judgments
    config = EvaluationConfig.from_dict(merged)
    return WeightInputs(
        criterion_weights=config.criterion_weights,
        indicator_weights=config.indicator_weights,
        criteria_judgment=config.criteria_judgment,
        indicator_judgments=config.indicator_judgments,
        power_tol=config.power_tol,
        power_max_iter=config.power_max_iter,
    )


def create_app(data_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    store = RunStore(data_dir)
    app = FastAPI(title="defi-rank", docs_url=None, redoc_url=None)

    @app.exception_handler(DefiRankError)
    async def _domain_error(_request: Request, exc: DefiRankError) -> JSONResponse:
        status = 404 if isinstance(exc, UnknownRun) else 400
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    @app.get("/api/meta")
    def meta() -> dict:
        return {"service": "defi-rank", "backend": BACKEND}

    @app.get("/api/runs")
    def list_runs() -> list[dict]:
        out = []
        for manifest in store.list_runs():
            config = manifest.get("config", {})
            out.append(
                {
                    "run_id": manifest.get("run_id"),
                    "created_at": manifest.get("created_at"),
                    "config_hash": manifest.get("config_hash"),
                    "granularities": manifest.get("granularities", []),
                    "protocols": config.get("protocols", []),
                    "date_range": config.get("date_range"),
                }
            )
        return out

    @app.get("/api/runs/{run_id}")
    def run_detail(run_id: str) -> dict:
        return store.read_manifest(run_id)

    @app.get("/api/runs/{run_id}/scores")
    def run_scores(
        run_id: str,
        granularity: str | None = Query(default=None),
        ordinate: str | None = Query(default=None),
    ) -> dict:
        if ordinate not in (None, "rank", "score"):
            raise SchemaError("ordinate must be 'rank' or 'score'")
        manifest = store.read_manifest(run_id)
        gran = _granularity(granularity, manifest)
        grouped = group_by_date(store.read_lines(run_id, gran))
        names: set[str] = set()
        for _, _, score_lines in grouped:
            names.update(line["protocol"] for line in score_lines)
        protocols = sorted(names)
        scores = {p: [None] * len(grouped) for p in protocols}
        ranks = {p: [None] * len(grouped) for p in protocols}
        flags = {p: [[] for _ in grouped] for p in protocols}
        warnings: list[list[str]] = []
        consistency: list[dict] = []
        all_missing: list[list[str]] = []
        for i, (_, head, score_lines) in enumerate(grouped):
            warnings.append(list(head.get("warnings", [])))
            consistency.append(dict(head.get("consistency", {})))
            all_missing.append(list(head.get("all_missing", [])))
            for line in score_lines:
                p = line["protocol"]
                scores[p][i] = _text(line["score"])
                ranks[p][i] = line["rank"]
                flags[p][i] = list(line.get("flags", []))
        payload: dict = {
            "run_id": run_id,
            "granularity": gran.value,
            "dates": [day.isoformat() for day, _, _ in grouped],
            "protocols": protocols,
            "flags": flags,
            "warnings": warnings,
            "consistency": consistency,
            "all_missing": all_missing,
        }
        if ordinate in (None, "score"):
            payload["scores"] = scores
        if ordinate in (None, "rank"):
            payload["ranks"] = ranks
        return payload

    @app.post("/api/runs/{run_id}/whatif")
    def run_whatif(run_id: str, payload: dict = Body(...)) -> dict:
        unknown = set(payload) - _WHATIF_KEYS
        if unknown:
            raise SchemaError(f"unknown what-if keys: {sorted(unknown)}")
        manifest = store.read_manifest(run_id)
        gran = _granularity(payload.get("granularity"), manifest)
        inputs = _weight_inputs(manifest, payload)
        derived = derive_weights(inputs)
        result = recompute(store.read_lines(run_id, gran), derived)
        return {
            "run_id": run_id,
            "granularity": gran.value,
            "dates": [day.isoformat() for day in result.dates],
            "protocols": list(result.protocols),
            "scores": {
                p: [None if v is None else _text(v) for v in result.scores[p]]
                for p in result.protocols
            },
            "ranks": {p: result.ranks[p] for p in result.protocols},
            "weights": {
                "criteria": {k: _text(v) for k, v in derived.criterion.items()},
                "indicators": {
                    crit: {code: _text(w) for code, w in weights.items()}
                    for crit, weights in derived.indicator.items()
                },
            },
            "consistency": {
                key: rep.as_dict() for key, rep in sorted(derived.consistency.items())
            },
            "warnings": list(derived.warnings),
        }

    @app.post("/api/consistency")
    def check_consistency(payload: dict = Body(...)) -> dict:
        unknown = set(payload) - {"matrix"}
        if unknown:
            raise SchemaError(f"unknown keys: {sorted(unknown)}")
        raw = payload.get("matrix")
        if not isinstance(raw, list) or not raw:
            raise SchemaError("matrix: expected a non-empty array")
        if not isinstance(raw[0], list):
            side = round(len(raw) ** 0.5)
            if side * side != len(raw):
                raise SchemaError(
                    f"matrix: flat form must have a square count, got {len(raw)}"
                )
            raw = [raw[i * side : (i + 1) * side] for i in range(side)]
        try:
            entries = np.array(raw, dtype=np.float64)
        except ValueError as exc:
            raise SchemaError(f"matrix: {exc}") from None
        matrix = PairwiseMatrix(entries, origin=MatrixOrigin.USER_JUDGMENT)
        eig = ahp.principal_eigen(matrix)
        report = ahp.consistency(matrix, eig)
        residual = entries @ eig.weights - eig.lambda_max * eig.weights
        body = report.as_dict()
        body.update(
            {
                "weights": [_text(w) for w in eig.weights],
                "residuals": [_text(r) for r in residual],
                "converged": eig.converged,
            }
        )
        return body

    ui = Path(ui_dir) if ui_dir is not None else None
    if ui is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui = candidate if candidate.is_dir() else None
    if ui is not None and ui.is_dir():
        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

        @app.get("/")
        def index() -> RedirectResponse:
            return RedirectResponse(url="/ui/")

    return app
