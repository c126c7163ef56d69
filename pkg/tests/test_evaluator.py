"""Evaluator pipeline: date sampling, config validation, weight derivation,
and full scoring runs against the committed tiny fixture's oracle."""

import json
from datetime import date

import numpy as np
import pytest

from defi_rank.errors import (
    ConfigError,
    EmptyRange,
    NonPositiveWeight,
    NoProtocolHasData,
)
from defi_rank.evaluator import (
    Dataset,
    EvaluationConfig,
    Granularity,
    WeightInputs,
    compose_protocol,
    derive_weights,
    effective_indicator_weights,
    evaluate_at,
    evaluate_series,
    load_dataset,
    rank_protocols,
    sample_dates,
)
from defi_rank.ledger import TransferLog, TransferEvent
from defi_rank.metrics import MetricName, MetricSeries, ProtocolInfo

from conftest import FIXTURES

TINY = FIXTURES / "tiny"


class TestSampleDates:
    def test_week_picks_mondays(self):
        days = sample_dates(date(2021, 5, 17), date(2021, 5, 30), Granularity.WEEK)
        assert days == [date(2021, 5, 17), date(2021, 5, 24)]

    def test_day_picks_everything(self):
        days = sample_dates(date(2021, 5, 1), date(2021, 5, 4), Granularity.DAY)
        assert len(days) == 4

    def test_half_month_first_and_fifteenth(self):
        days = sample_dates(date(2021, 4, 20), date(2021, 6, 2), Granularity.HALF_MONTH)
        assert days == [date(2021, 5, 1), date(2021, 5, 15), date(2021, 6, 1)]

    def test_month_firsts(self):
        days = sample_dates(date(2021, 1, 2), date(2021, 3, 31), Granularity.MONTH)
        assert days == [date(2021, 2, 1), date(2021, 3, 1)]

    def test_start_after_end_raises(self):
        with pytest.raises(EmptyRange):
            sample_dates(date(2021, 5, 2), date(2021, 5, 1), Granularity.DAY)

    def test_range_without_anchor_is_empty(self):
        # Tuesday through Sunday contains no Monday
        days = sample_dates(date(2021, 5, 18), date(2021, 5, 23), Granularity.WEEK)
        assert days == []


def minimal_config(**overrides) -> dict:
    payload = {
        "protocols": ["A", "B"],
        "date_range": {"start": "2021-01-01", "end": "2021-01-31"},
        "granularity": "week",
    }
    payload.update(overrides)
    return payload


class TestEvaluationConfig:
    def test_defaults(self):
        config = EvaluationConfig.from_dict(minimal_config())
        assert config.granularity is Granularity.WEEK
        assert config.dust_threshold_usd == 10.0
        assert config.staleness_days == 7
        assert config.criterion_weights == {}

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            EvaluationConfig.from_dict(minimal_config(tilt="yes"))

    def test_too_many_protocols(self):
        names = [f"P{i}" for i in range(11)]
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(minimal_config(protocols=names))

    def test_duplicate_protocols(self):
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(minimal_config(protocols=["A", "A"]))

    def test_empty_protocols(self):
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(minimal_config(protocols=[]))

    def test_bad_granularity(self):
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(minimal_config(granularity="fortnight"))

    def test_start_after_end(self):
        bad = {"start": "2021-02-01", "end": "2021-01-01"}
        with pytest.raises(EmptyRange):
            EvaluationConfig.from_dict(minimal_config(date_range=bad))

    def test_nonpositive_weight(self):
        with pytest.raises(NonPositiveWeight):
            EvaluationConfig.from_dict(
                minimal_config(criterion_weights={"valuation": 0.0})
            )

    def test_unknown_weight_key(self):
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(
                minimal_config(criterion_weights={"flavor": 1.0})
            )

    def test_unknown_indicator_code(self):
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(minimal_config(indicator_weights={"I99": 1.0}))

    def test_judgment_wrong_shape(self):
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(
                minimal_config(criteria_judgment=[[1, 2], [0.5, 1]])
            )

    def test_indicator_judgment_wrong_size(self):
        # valuation has three children, so a 4x4 matrix cannot apply
        bad = [[1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 1]]
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(
                minimal_config(indicator_judgments={"valuation": bad})
            )

    def test_unknown_criterion_in_judgments(self):
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(
                minimal_config(indicator_judgments={"magic": [[1]]})
            )

    def test_direction_override_validated(self):
        config = EvaluationConfig.from_dict(
            minimal_config(direction_overrides={"I21": "negative"})
        )
        assert config.direction_overrides["I21"].value == "negative"
        with pytest.raises(ConfigError):
            EvaluationConfig.from_dict(
                minimal_config(direction_overrides={"I21": "sideways"})
            )

    def test_from_file_round_trip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(minimal_config()), encoding="utf-8")
        config = EvaluationConfig.from_file(path)
        again = EvaluationConfig.from_dict(config.to_dict())
        assert config == again

    def test_hash_is_stable_and_sensitive(self):
        a = EvaluationConfig.from_dict(minimal_config())
        b = EvaluationConfig.from_dict(minimal_config())
        c = EvaluationConfig.from_dict(minimal_config(staleness_days=9))
        assert a.hash() == b.hash()
        assert a.hash() != c.hash()


class TestDeriveWeights:
    def test_defaults_are_uniform(self):
        derived = derive_weights(WeightInputs())
        assert derived.criterion == pytest.approx(
            {"market_share": 1 / 3, "valuation": 1 / 3, "decentralization": 1 / 3}
        )
        assert derived.indicator["market_share"] == pytest.approx(
            {"I11": 0.25, "I12": 0.25, "I13": 0.25, "I14": 0.25}
        )
        for key, report in derived.consistency.items():
            assert report.passed, key
            assert report.cr <= 1e-9
        assert derived.warnings == ()

    def test_custom_weights_normalize(self):
        derived = derive_weights(WeightInputs(indicator_weights={"I31": 2.0}))
        assert derived.indicator["decentralization"] == pytest.approx(
            {"I31": 0.5, "I32": 0.25, "I33": 0.25}
        )

    def test_judgment_eigenvector(self):
        judgment = ((1.0, 2.0, 5.0), (0.5, 1.0, 2.0), (0.2, 0.5, 1.0))
        derived = derive_weights(WeightInputs(criteria_judgment=judgment))
        m = np.array(judgment)
        values, vectors = np.linalg.eig(m)
        k = int(np.argmax(values.real))
        expect = np.abs(vectors[:, k].real)
        expect /= expect.sum()
        got = [derived.criterion[c] for c in ("market_share", "valuation", "decentralization")]
        assert got == pytest.approx(list(expect), abs=1e-9)
        assert derived.consistency["criteria"].passed

    def test_inconsistent_judgment_warns(self):
        # a pairwise cycle: A > B > C > A
        judgment = ((1.0, 9.0, 1 / 9), (1 / 9, 1.0, 9.0), (9.0, 1 / 9, 1.0))
        derived = derive_weights(WeightInputs(criteria_judgment=judgment))
        assert not derived.consistency["criteria"].passed
        assert any("consistency" in w for w in derived.warnings)


class TestComposition:
    def test_effective_weights_redistribute(self):
        derived = derive_weights(WeightInputs())
        eff = effective_indicator_weights(derived, {"I14"})
        assert eff["market_share"] == pytest.approx(
            {"I11": 1 / 3, "I12": 1 / 3, "I13": 1 / 3}
        )
        assert eff["valuation"] == pytest.approx(
            {"I21": 1 / 3, "I22": 1 / 3, "I23": 1 / 3}
        )

    def test_dead_criterion_empty(self):
        derived = derive_weights(WeightInputs())
        eff = effective_indicator_weights(derived, {"I21", "I22", "I23"})
        assert eff["valuation"] == {}

    def test_missing_x_contributes_zero(self):
        derived = derive_weights(WeightInputs())
        eff = effective_indicator_weights(derived, set())
        x = {code: None for code in eff["market_share"]}
        x.update({code: 0.5 for code in eff["valuation"]})
        x.update({code: None for code in eff["decentralization"]})
        c, score = compose_protocol(x, derived.criterion, eff)
        assert c["market_share"] == 0.0
        assert c["valuation"] == pytest.approx(0.5)
        assert score == pytest.approx(0.5 / 3)

    def test_rank_ties_break_by_name(self):
        ranks = rank_protocols({"Zeta": 0.5, "Alpha": 0.5, "Mid": 0.7})
        assert ranks == {"Mid": 1, "Alpha": 2, "Zeta": 3}


def series(proto: str, metric: MetricName, points) -> MetricSeries:
    return MetricSeries(proto, metric, tuple((d, float(v)) for d, v in points))


def synth_dataset(registry, metrics, logs=None) -> Dataset:
    return Dataset(registry=registry, classes={}, metrics=metrics, logs=logs or {})


REG = {
    "Aleph": ProtocolInfo("Aleph", "ALE", date(2021, 1, 1)),
    "Beth": ProtocolInfo("Beth", "BET", date(2021, 1, 1)),
    "Gimel": ProtocolInfo("Gimel", "GIM", date(2021, 6, 1)),
}


def config_for(protocols, **overrides) -> EvaluationConfig:
    payload = {
        "protocols": protocols,
        "date_range": {"start": "2021-03-01", "end": "2021-03-01"},
        "granularity": "day",
    }
    payload.update(overrides)
    return EvaluationConfig.from_dict(payload)


class TestEvaluateAt:
    def test_unlaunched_protocol_excluded(self):
        cfg = config_for(["Aleph", "Gimel"])
        ds = synth_dataset(
            REG,
            {("Aleph", MetricName.MCAP): series("Aleph", MetricName.MCAP, [(date(2021, 3, 1), 5e8)])},
        )
        report = evaluate_at(date(2021, 3, 1), cfg, ds, derive_weights(cfg))
        assert report.protocols == ("Aleph",)

    def test_nothing_launched_raises(self):
        cfg = config_for(["Gimel"])
        ds = synth_dataset(REG, {})
        with pytest.raises(NoProtocolHasData):
            evaluate_at(date(2021, 3, 1), cfg, ds, derive_weights(cfg))

    def test_no_data_anywhere_raises(self):
        cfg = config_for(["Aleph", "Beth"])
        ds = synth_dataset(REG, {})
        with pytest.raises(NoProtocolHasData):
            evaluate_at(date(2021, 3, 1), cfg, ds, derive_weights(cfg))

    def test_single_protocol_single_metric(self):
        cfg = config_for(["Aleph"])
        ds = synth_dataset(
            REG,
            {("Aleph", MetricName.MCAP): series("Aleph", MetricName.MCAP, [(date(2021, 3, 1), 5e8)])},
        )
        report = evaluate_at(date(2021, 3, 1), cfg, ds, derive_weights(cfg))
        assert report.x["Aleph"]["I11"] == 1.0
        assert report.consistency["scheme:I11"].n == 1
        assert report.consistency["scheme:I11"].passed
        # only market_share has data; I11 carries its whole weight
        assert report.c["Aleph"]["market_share"] == pytest.approx(1.0)
        assert report.scores["Aleph"] == pytest.approx(1 / 3)
        assert "criterion valuation has no data" in " ".join(report.warnings)

    def test_identical_protocols_tie_alphabetically(self):
        cfg = config_for(["Beth", "Aleph"])
        points = [(date(2021, 3, 1), 5e8)]
        ds = synth_dataset(
            REG,
            {
                ("Aleph", MetricName.MCAP): series("Aleph", MetricName.MCAP, points),
                ("Beth", MetricName.MCAP): series("Beth", MetricName.MCAP, points),
            },
        )
        report = evaluate_at(date(2021, 3, 1), cfg, ds, derive_weights(cfg))
        assert report.scores["Aleph"] == report.scores["Beth"]
        assert report.ranks == {"Aleph": 1, "Beth": 2}

    def test_not_yet_launched_flag(self):
        cfg = config_for(["Aleph", "Beth"])
        ds = synth_dataset(
            REG,
            {
                ("Aleph", MetricName.MCAP): series("Aleph", MetricName.MCAP, [(date(2021, 3, 1), 5e8)]),
                ("Aleph", MetricName.TVL): series("Aleph", MetricName.TVL, [(date(2021, 3, 1), 1e9)]),
                ("Beth", MetricName.MCAP): series("Beth", MetricName.MCAP, [(date(2021, 3, 1), 3e8)]),
            },
        )
        report = evaluate_at(date(2021, 3, 1), cfg, ds, derive_weights(cfg))
        # valuation exists for Aleph only (I23 = mcap/tvl)
        assert "not_yet_launched:valuation" in report.flags["Beth"]
        assert report.flags["Aleph"] == ()

    def test_direction_override_flips_ratio(self):
        points_a = [(date(2021, 3, 1), 8e8)]
        points_b = [(date(2021, 3, 1), 2e8)]
        ds = synth_dataset(
            REG,
            {
                ("Aleph", MetricName.MCAP): series("Aleph", MetricName.MCAP, points_a),
                ("Beth", MetricName.MCAP): series("Beth", MetricName.MCAP, points_b),
            },
        )
        plain = evaluate_at(
            date(2021, 3, 1), config_for(["Aleph", "Beth"]), ds,
            derive_weights(config_for(["Aleph", "Beth"])),
        )
        flipped_cfg = config_for(
            ["Aleph", "Beth"], direction_overrides={"I11": "negative"}
        )
        flipped = evaluate_at(
            date(2021, 3, 1), flipped_cfg, ds, derive_weights(flipped_cfg)
        )
        assert plain.x["Aleph"]["I11"] == pytest.approx(0.8)
        assert flipped.x["Aleph"]["I11"] == pytest.approx(
            (1 / 8e8) / (1 / 8e8 + 1 / 2e8)
        )
        assert plain.ranks["Aleph"] == 1
        assert flipped.ranks["Beth"] == 1

    def test_decentralization_from_transfer_log(self):
        events = (
            TransferEvent("ALE", 1, 1000, "0" * 40, "a" * 40, 60 * 10**18, 0),
            TransferEvent("ALE", 1, 1000, "0" * 40, "b" * 40, 40 * 10**18, 1),
        )
        cfg = config_for(["Aleph"])
        ds = synth_dataset(
            {"Aleph": REG["Aleph"]},
            {("Aleph", MetricName.MCAP): series("Aleph", MetricName.MCAP, [(date(2021, 3, 1), 5e8)])},
            logs={"ALE": TransferLog("ALE", events)},
        )
        report = evaluate_at(date(2021, 3, 1), cfg, ds, derive_weights(cfg))
        # single protocol: every present column collapses to x = 1.0, so the
        # log's contribution shows as present decentralization data
        assert report.x["Aleph"]["I31"] == 1.0
        assert report.x["Aleph"]["I32"] == 1.0
        assert report.x["Aleph"]["I33"] == 1.0
        assert "dust_filter_skipped" in report.flags["Aleph"]
        assert report.c["Aleph"]["decentralization"] == pytest.approx(1.0)


class TestEvaluateSeries:
    def test_dates_before_launch_are_skipped(self):
        cfg = EvaluationConfig.from_dict(
            {
                "protocols": ["Gimel"],
                "date_range": {"start": "2021-05-31", "end": "2021-06-02"},
                "granularity": "day",
            }
        )
        ds = synth_dataset(
            REG,
            {("Gimel", MetricName.MCAP): series("Gimel", MetricName.MCAP, [(date(2021, 6, 1), 1e8)])},
        )
        result = evaluate_series(cfg, ds)
        assert [r.as_of for r in result.reports] == [date(2021, 6, 1), date(2021, 6, 2)]
        assert len(result.skipped) == 1
        assert result.skipped[0][0] == date(2021, 5, 31)


@pytest.fixture(scope="module")
def run():
    config = EvaluationConfig.from_file(TINY / "config.json")
    dataset = load_dataset(TINY, config)
    result = evaluate_series(config, dataset)
    expected = json.loads((TINY / "expected.json").read_text(encoding="utf-8"))
    return result, expected


class TestTinyFixture:
    """The committed fixture against its independently computed oracle."""

    def test_sample_dates_match(self, run):
        result, expected = run
        assert [r.as_of.isoformat() for r in result.reports] == expected["dates"]
        assert result.skipped == ()

    def test_values_match_oracle(self, run):
        result, expected = run
        for report in result.reports:
            blob = expected["per_date"][report.as_of.isoformat()]
            assert list(report.protocols) == blob["protocols"]
            assert sorted(report.all_missing) == blob["all_missing"]
            for p in report.protocols:
                assert report.scores[p] == pytest.approx(blob["scores"][p], abs=1e-9)
                for crit, value in report.c[p].items():
                    assert value == pytest.approx(blob["c"][p][crit], abs=1e-9)
                for code, value in report.x[p].items():
                    want = blob["x"][p][code]
                    if want is None:
                        assert value is None
                    else:
                        assert value == pytest.approx(want, abs=1e-9)

    def test_ranks_match_oracle_exactly(self, run):
        result, expected = run
        for report in result.reports:
            blob = expected["per_date"][report.as_of.isoformat()]
            assert report.ranks == blob["ranks"]

    def test_flags_match_oracle(self, run):
        result, expected = run
        for report in result.reports:
            blob = expected["per_date"][report.as_of.isoformat()]
            for p in report.protocols:
                assert sorted(report.flags[p]) == blob["flags"][p]

    def test_consistency_records_complete(self, run):
        result, expected = run
        last = result.reports[-1]
        ids = {"criteria"}
        ids.update(f"indicators:{c}" for c in ("market_share", "valuation", "decentralization"))
        ids.update(f"scheme:I{i}{j}" for i, j in
                   [(1, 1), (1, 2), (1, 3), (1, 4), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)])
        assert set(last.consistency) == ids
        for key, report in last.consistency.items():
            assert report.passed, key
        assert last.consistency["criteria"].cr == pytest.approx(
            expected["consistency"]["criteria"]["cr"], abs=1e-9
        )
        assert last.consistency["indicators:valuation"].lambda_max == pytest.approx(
            expected["consistency"]["indicators:valuation"]["lambda_max"], abs=1e-9
        )

    def test_effective_weights_match_oracle(self, run):
        result, expected = run
        for report in result.reports:
            blob = expected["per_date"][report.as_of.isoformat()]
            for crit, weights in report.indicator_weights.items():
                want = blob["effective_indicator_weights"][crit]
                assert set(weights) == set(want)
                for code, w in weights.items():
                    assert w == pytest.approx(want[code], abs=1e-9)
