"""Indicator table, distribution statistics, direction handling, panels."""

from __future__ import annotations

from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defi_rank.errors import AllMissing, EmptyDistribution
from defi_rank.indicators import (
    BY_CODE,
    CRITERIA,
    CRITERION_CHILDREN,
    INDICATORS,
    Direction,
    compute_panel,
    direction_adjust,
    gini,
    nakamoto,
    normalize_panel,
    top10_share,
    valuation_raw,
)
from defi_rank.ledger import BalanceSnapshot, filter_holders

from conftest import addr


def snap(balances: dict[str, int]) -> object:
    return filter_holders(BalanceSnapshot("TKN", 0, balances), {}, price_usd=None)


class TestIndicatorTable:
    def test_ten_indicators_three_criteria(self):
        assert len(INDICATORS) == 10
        assert CRITERIA == ("market_share", "valuation", "decentralization")
        assert CRITERION_CHILDREN["market_share"] == ("I11", "I12", "I13", "I14")
        assert CRITERION_CHILDREN["valuation"] == ("I21", "I22", "I23")
        assert CRITERION_CHILDREN["decentralization"] == ("I31", "I32", "I33")

    def test_directions(self):
        negatives = {c for c, s in BY_CODE.items() if s.direction is Direction.NEGATIVE}
        assert negatives == {"I22", "I31", "I33"}
        assert BY_CODE["I22"].bounded is False
        assert BY_CODE["I31"].bounded is True
        assert BY_CODE["I33"].bounded is True


class TestDistributionStats:
    def test_gini_extremes(self):
        equal = snap({addr(i): 100 for i in range(1, 5)})
        assert gini(equal) == 0.0
        single = snap({addr(1): 0, addr(2): 0, addr(3): 0, addr(4): 100})
        assert gini(single) == pytest.approx(0.75, abs=1e-15)

    def test_nakamoto_exact_boundary(self):
        # exactly 50% is not "more than 50%"
        assert nakamoto(snap({addr(1): 50, addr(2): 30, addr(3): 20})) == 2
        assert nakamoto(snap({addr(1): 60, addr(2): 30, addr(3): 10})) == 1
        assert nakamoto(snap({addr(i): 25 for i in range(1, 5)})) == 3

    def test_nakamoto_huge_balances_exact(self):
        # float64 would misjudge this boundary; integer math must not
        base = 2**130
        s = snap({addr(1): base, addr(2): base, addr(3): 2 * base + 1})
        assert nakamoto(s) == 1
        s2 = snap({addr(1): base, addr(2): base, addr(3): 2 * base - 1})
        assert nakamoto(s2) == 2

    def test_top10_fewer_than_ten(self):
        assert top10_share(snap({addr(i): 10 for i in range(1, 6)})) == 1.0

    def test_top10_twelve_equal(self):
        s = snap({addr(i): 7 for i in range(1, 13)})
        assert top10_share(s) == pytest.approx(10.0 / 12.0, abs=1e-15)

    def test_top10_whale(self):
        balances = {addr(1): 100}
        balances.update({addr(i): 1 for i in range(2, 13)})
        assert top10_share(snap(balances)) == pytest.approx(109.0 / 111.0, abs=1e-15)

    def test_empty_raises(self):
        with pytest.raises(EmptyDistribution):
            gini(snap({}))
        with pytest.raises(EmptyDistribution):
            nakamoto(snap({}))
        with pytest.raises(EmptyDistribution):
            top10_share(snap({}))


class TestValuationRaw:
    def test_ps_ratio(self):
        ps, eff, mc_tvl = valuation_raw(None, 100.0, None, 50.0)
        assert ps == pytest.approx(2.0)
        assert eff is None
        assert mc_tvl is None

    def test_zero_tvl_means_missing(self):
        _, _, mc_tvl = valuation_raw(80.0, None, 0.0, None)
        assert mc_tvl is None

    def test_undervalued_regime(self):
        _, _, mc_tvl = valuation_raw(80.0, None, 100.0, None)
        assert mc_tvl == pytest.approx(0.8)

    def test_capital_efficiency(self):
        _, eff, _ = valuation_raw(None, None, 1000.0, 50.0)
        assert eff == pytest.approx(20.0)

    def test_zero_revenue_means_missing(self):
        ps, eff, _ = valuation_raw(None, 100.0, 1000.0, 0.0)
        assert ps is None
        assert eff is None


class TestDirectionAdjust:
    def test_bounded_negative_complement(self):
        assert direction_adjust(0.9, BY_CODE["I31"]) == pytest.approx(0.1)
        assert direction_adjust(1.0, BY_CODE["I33"]) == pytest.approx(0.0)

    def test_unbounded_negative_reciprocal(self):
        assert direction_adjust(20.0, BY_CODE["I22"]) == pytest.approx(0.05)
        assert direction_adjust(0.0, BY_CODE["I22"], epsilon=1e-9) == pytest.approx(
            1e9
        )

    def test_positive_pass_through(self):
        assert direction_adjust(123.0, BY_CODE["I11"]) == 123.0

    def test_override_flips_direction(self):
        assert direction_adjust(4.0, BY_CODE["I21"]) == 4.0
        flipped = direction_adjust(4.0, BY_CODE["I21"], Direction.NEGATIVE)
        assert flipped == pytest.approx(0.25)


class TestNormalizePanel:
    def test_shares_sum_to_one(self):
        out = normalize_panel([2.0, 1.0, 1.0])
        assert out == pytest.approx([0.5, 0.25, 0.25])

    def test_missing_preserved(self):
        out = normalize_panel([3.0, None, 1.0])
        assert out[1] is None
        assert out[0] == pytest.approx(0.75)
        assert out[2] == pytest.approx(0.25)

    def test_all_missing_raises(self):
        with pytest.raises(AllMissing):
            normalize_panel([None, None])

    def test_zero_floored_at_epsilon(self):
        out = normalize_panel([1.0, 0.0], epsilon=1e-9)
        assert out[0] == pytest.approx(1.0, abs=1e-8)
        assert out[1] == pytest.approx(1e-9, rel=1e-6)

    @given(
        st.lists(
            st.one_of(
                st.none(),
                st.floats(min_value=0.0, max_value=1e9, allow_nan=False),
            ),
            min_size=1,
            max_size=10,
        ).filter(lambda xs: any(v is not None for v in xs))
    )
    @settings(max_examples=100, deadline=None)
    def test_share_properties(self, column):
        out = normalize_panel(column)
        present = [v for v in out if v is not None]
        assert sum(present) == pytest.approx(1.0, abs=1e-9)
        assert all(v > 0 for v in present)
        assert [v is None for v in out] == [v is None for v in column]


class TestComputePanel:
    def test_collects_all_missing_columns(self):
        rows = {
            "A": {"I11": 10.0, "I31": 0.2},
            "B": {"I11": 30.0, "I31": None},
        }
        panel = compute_panel(date(2021, 5, 17), ("A", "B"), rows)
        assert "I12" in panel.all_missing
        assert "I11" not in panel.all_missing
        assert panel.scores["I11"] == pytest.approx((0.25, 0.75))
        # I31 adjusted: 1 - 0.2 = 0.8 for A, missing for B
        assert panel.adjusted["I31"][0] == pytest.approx(0.8)
        assert panel.adjusted["I31"][1] is None
        assert panel.scores["I31"][0] == pytest.approx(1.0)

    def test_direction_override_applies(self):
        rows = {"A": {"I21": 2.0}, "B": {"I21": 8.0}}
        base = compute_panel(date(2021, 5, 17), ("A", "B"), rows)
        assert base.scores["I21"] == pytest.approx((0.2, 0.8))
        flipped = compute_panel(
            date(2021, 5, 17),
            ("A", "B"),
            rows,
            direction_overrides={"I21": Direction.NEGATIVE},
        )
        # reciprocals 0.5 and 0.125 normalize to 0.8 and 0.2
        assert flipped.scores["I21"] == pytest.approx((0.8, 0.2))
