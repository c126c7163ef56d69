"""Run persistence: canonical JSONL reports, manifests, and the what-if
recomputation path that rescores a stored run under new weights."""

import json
from datetime import date

import pytest

from defi_rank.errors import SchemaError, UnknownRun
from defi_rank.evaluator import (
    EvaluationConfig,
    Granularity,
    WeightInputs,
    derive_weights,
    evaluate_series,
    load_dataset,
)
from defi_rank.store import RunStore, group_by_date, recompute, report_lines

from conftest import FIXTURES

TINY = FIXTURES / "tiny"


@pytest.fixture(scope="module")
def tiny_run():
    config = EvaluationConfig.from_file(TINY / "config.json")
    dataset = load_dataset(TINY, config)
    result = evaluate_series(config, dataset)
    return config, dataset, result


class TestReportLines:
    def test_shape_and_order(self, tiny_run):
        config, _, result = tiny_run
        report = result.reports[0]
        lines = report_lines("r1", Granularity.WEEK, report)
        assert lines[0]["kind"] == "date"
        assert lines[0]["date"] == "2021-05-17"
        assert lines[0]["protocols"] == list(report.protocols)
        assert lines[0]["all_missing"] == ["I14"]
        assert [l["protocol"] for l in lines[1:]] == list(report.protocols)
        for line in lines[1:]:
            assert line["kind"] == "score"
            assert set(line) >= {"score", "rank", "c", "x", "flags"}

    def test_consistency_serialized_sorted(self, tiny_run):
        _, _, result = tiny_run
        lines = report_lines("r1", Granularity.WEEK, result.reports[0])
        keys = list(lines[0]["consistency"])
        assert keys == sorted(keys)
        record = lines[0]["consistency"]["criteria"]
        assert set(record) == {"n", "lambda_max", "ci", "ri", "cr", "pass"}


class TestRunStore:
    def test_write_and_read_back(self, tiny_run, tmp_path):
        config, dataset, result = tiny_run
        store = RunStore(tmp_path)
        out = store.write_run("alpha", config, result, dataset.digests)
        assert (out / "reports_week.jsonl").exists()
        manifest = store.read_manifest("alpha")
        assert manifest["run_id"] == "alpha"
        assert manifest["config_hash"] == config.hash()
        assert manifest["granularities"] == ["week"]
        assert manifest["dates"]["week"] == ["2021-05-17", "2021-05-24"]
        assert "registry.csv" in manifest["inputs"]
        lines = store.read_lines("alpha", Granularity.WEEK)
        # a date record plus score records: 1+2 on date one, 1+3 on date two
        assert len(lines) == 7

    def test_list_runs(self, tiny_run, tmp_path):
        config, dataset, result = tiny_run
        store = RunStore(tmp_path)
        assert store.list_runs() == []
        store.write_run("alpha", config, result, dataset.digests)
        store.write_run("beta", config, result, dataset.digests)
        assert [m["run_id"] for m in store.list_runs()] == ["alpha", "beta"]

    def test_unknown_run(self, tmp_path):
        store = RunStore(tmp_path)
        with pytest.raises(UnknownRun):
            store.read_manifest("ghost")
        with pytest.raises(UnknownRun):
            store.read_lines("ghost", Granularity.WEEK)

    @pytest.mark.parametrize("bad", ["", ".", "..", "a/b"])
    def test_bad_run_ids_rejected(self, tmp_path, bad):
        store = RunStore(tmp_path)
        with pytest.raises(UnknownRun):
            store.run_dir(bad)

    def test_reports_are_byte_deterministic(self, tiny_run, tmp_path):
        config, dataset, result = tiny_run
        store = RunStore(tmp_path)
        store.write_run("one", config, result, dataset.digests)
        store.write_run("two", config, result, dataset.digests)
        a = (store.run_dir("one") / "reports_week.jsonl").read_bytes()
        b = (store.run_dir("two") / "reports_week.jsonl").read_bytes()
        assert a.replace(b'"one"', b'"two"') == b

    def test_lines_are_canonical_json(self, tiny_run, tmp_path):
        config, dataset, result = tiny_run
        store = RunStore(tmp_path)
        store.write_run("alpha", config, result, dataset.digests)
        raw = (store.run_dir("alpha") / "reports_week.jsonl").read_text(
            encoding="utf-8"
        )
        for line in raw.splitlines():
            parsed = json.loads(line)
            assert line == json.dumps(
                parsed, sort_keys=True, separators=(",", ":"), allow_nan=False
            )

    def test_second_granularity_extends_manifest(self, tiny_run, tmp_path):
        import dataclasses

        config, dataset, result = tiny_run
        store = RunStore(tmp_path)
        store.write_run("alpha", config, result, dataset.digests)
        daily_cfg = dataclasses.replace(config, granularity=Granularity.DAY)
        daily = evaluate_series(daily_cfg, dataset)
        store.write_run("alpha", daily_cfg, daily, dataset.digests)
        manifest = store.read_manifest("alpha")
        assert manifest["granularities"] == ["day", "week"]
        assert manifest["dates"]["week"] == ["2021-05-17", "2021-05-24"]
        assert len(manifest["dates"]["day"]) == 14
        assert store.read_lines("alpha", Granularity.DAY)


class TestGroupByDate:
    def test_round_trip(self, tiny_run):
        _, _, result = tiny_run
        lines = []
        for report in result.reports:
            lines.extend(report_lines("r", Granularity.WEEK, report))
        grouped = group_by_date(lines)
        assert [d for d, _, _ in grouped] == [date(2021, 5, 17), date(2021, 5, 24)]
        assert [len(scores) for _, _, scores in grouped] == [2, 3]

    def test_missing_date_record(self):
        with pytest.raises(SchemaError, match="no date record"):
            group_by_date(
                [{"date": "2021-01-01", "kind": "score", "protocol": "A", "x": {}}]
            )

    def test_unknown_kind(self):
        with pytest.raises(SchemaError, match="kind"):
            group_by_date([{"date": "2021-01-01", "kind": "blob"}])

    def test_missing_date_field(self):
        with pytest.raises(SchemaError, match="date"):
            group_by_date([{"kind": "date"}])


class TestRecompute:
    def lines_for(self, result):
        lines = []
        for report in result.reports:
            lines.extend(report_lines("r", Granularity.WEEK, report))
        return lines

    def test_identity_with_own_weights(self, tiny_run):
        config, _, result = tiny_run
        outcome = recompute(self.lines_for(result), derive_weights(config))
        assert outcome.dates == tuple(r.as_of for r in result.reports)
        for report in result.reports:
            i = outcome.dates.index(report.as_of)
            for p in report.protocols:
                assert outcome.scores[p][i] == report.scores[p]  # bitwise
                assert outcome.ranks[p][i] == report.ranks[p]

    def test_absent_protocol_left_none(self, tiny_run):
        config, _, result = tiny_run
        outcome = recompute(self.lines_for(result), derive_weights(config))
        assert outcome.scores["Gammafi"][0] is None
        assert outcome.ranks["Gammafi"][0] is None
        assert outcome.scores["Gammafi"][1] is not None

    def test_new_weights_change_scores_not_totals(self, tiny_run):
        from math import fsum

        _, _, result = tiny_run
        lines = self.lines_for(result)
        tilted = derive_weights(
            WeightInputs(criterion_weights={"decentralization": 8.0})
        )
        outcome = recompute(lines, tilted)
        base = recompute(lines, derive_weights(WeightInputs()))
        assert outcome.scores != base.scores
        # every criterion has data on both dates, so scores stay a partition
        for i in range(len(outcome.dates)):
            total = fsum(
                outcome.scores[p][i]
                for p in outcome.protocols
                if outcome.scores[p][i] is not None
            )
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_tilting_decentralization_promotes_alphalend_gap(self, tiny_run):
        """Alphalend dominates decentralization on date two, so tilting all
        weight there widens its lead over Betapool."""
        config, _, result = tiny_run
        lines = self.lines_for(result)
        base = recompute(lines, derive_weights(config))
        tilted = recompute(
            lines,
            derive_weights(WeightInputs(criterion_weights={"decentralization": 100.0})),
        )
        i = 1  # 2021-05-24
        base_gap = base.scores["Alphalend"][i] - base.scores["Betapool"][i]
        tilted_gap = tilted.scores["Alphalend"][i] - tilted.scores["Betapool"][i]
        assert tilted.ranks["Alphalend"][i] == 1
        assert tilted_gap != base_gap
