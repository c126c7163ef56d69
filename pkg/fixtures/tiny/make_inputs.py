#!/usr/bin/env python3
"""Regenerate the tiny fixture's input CSVs and config.

Three invented protocols over two Monday sample dates (2021-05-17 and
2021-05-24). The data is small enough to audit by hand yet covers launch
mid-series, exchange/contract/dust filtering, a stale price (dust rule
skipped), a missing metric column, and revenue extrapolation.

Run from anywhere: writes into the directory containing this script.
"""

from __future__ import annotations

import csv
import json
from calendar import timegm
from datetime import date, timedelta
from pathlib import Path

HERE = Path(__file__).resolve().parent

ZERO = "0" * 40
TREASURY = "c" * 40  # classified contract
EXCHANGE = "e" * 40  # classified exchange
DUST1 = "d" * 40  # worth ~1 USD, always dust when priced


def addr(i: int) -> str:
    return f"{i:040x}"


def ts(day: str) -> int:
    y, m, d = map(int, day.split("-"))
    return timegm((y, m, d, 12, 0, 0, 0, 0, 0))


def e18(x: float) -> int:
    return int(round(x * 10**18))


def e6(x: float) -> int:
    return int(round(x * 10**6))


def write_rows(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def main() -> None:
    write_rows(
        HERE / "registry.csv",
        ["protocol", "token", "genesis_date", "decimals"],
        [
            ["Alphalend", "ALD", "2021-01-04", 18],
            ["Betapool", "BPL", "2021-02-01", 18],
            ["Gammafi", "GMF", "2021-05-20", 6],
        ],
    )

    write_rows(
        HERE / "classifications.csv",
        ["address", "kind", "label"],
        [
            [TREASURY, "contract", "Alphalend treasury"],
            [EXCHANGE, "exchange", "Big CEX"],
        ],
    )

    # Alphalend: 13 regular holders, an exchange stash, a contract treasury,
    # and a dust account; redistribution plus a burn between the two dates.
    ald_initial = [
        300_000, 250_000, 150_000, 100_000, 50_000, 20_000, 8_000,
        5_000, 4_000, 3_000, 2_000, 1_500, 1_000,
    ]
    rows = [[100, 0, ts("2021-01-04"), ZERO, TREASURY, e18(1_200_000)]]
    for i, amount in enumerate(ald_initial, start=1):
        rows.append([100 + i, 0, ts("2021-01-05"), TREASURY, addr(i), e18(amount)])
    rows += [
        [114, 0, ts("2021-01-05"), TREASURY, EXCHANGE, e18(120_000)],
        [115, 0, ts("2021-01-06"), TREASURY, DUST1, e18(0.5)],
        # between the sample dates
        [200, 0, ts("2021-05-21"), addr(1), addr(8), e18(50_000)],
        [200, 1, ts("2021-05-21"), addr(7), ZERO, e18(3_000)],
        [201, 0, ts("2021-05-21"), TREASURY, addr(2), e18(10_000)],
    ]
    write_rows(
        HERE / "transfers" / "ALD.csv",
        ["block", "log_index", "timestamp", "from", "to", "amount"],
        rows,
    )

    # Betapool: dominant unclassified deployer, one dust holder, no
    # transfers between the dates (its date-2 change comes from the stale
    # price alone).
    b = [addr(0xB00 + i) for i in range(5)]
    write_rows(
        HERE / "transfers" / "BPL.csv",
        ["block", "log_index", "timestamp", "from", "to", "amount"],
        [
            [300, 0, ts("2021-02-01"), ZERO, b[0], e18(500_001)],
            [301, 0, ts("2021-02-02"), b[0], b[1], e18(60_000)],
            [301, 1, ts("2021-02-02"), b[0], b[2], e18(30_000)],
            [302, 0, ts("2021-02-02"), b[0], b[3], e18(15_000)],
            [303, 0, ts("2021-02-03"), b[0], EXCHANGE, e18(20_000)],
            [304, 0, ts("2021-02-03"), b[0], b[4], e18(1)],
        ],
    )

    # Gammafi: 6-decimal token launching between the sample dates.
    g = [addr(0xAB00 + i) for i in range(5)]
    write_rows(
        HERE / "transfers" / "GMF.csv",
        ["block", "log_index", "timestamp", "from", "to", "amount"],
        [
            [400, 0, ts("2021-05-20"), ZERO, g[0], e6(10_000_000)],
            [401, 0, ts("2021-05-20"), g[0], g[1], e6(2_000_000)],
            [401, 1, ts("2021-05-20"), g[0], g[2], e6(1_000_000)],
            [402, 0, ts("2021-05-21"), g[0], g[3], e6(500_000)],
            [403, 0, ts("2021-05-21"), g[0], g[4], e6(100)],
        ],
    )

    metrics: list[list] = []

    def metric(day: str, protocol: str, name: str, value: float) -> None:
        metrics.append([day, protocol, name, repr(float(value))])

    for day, mcap, fdv, tvl, borrow in [
        ("2021-05-14", 500e6, 800e6, 2.0e9, 900e6),
        ("2021-05-21", 520e6, 830e6, 2.1e9, 950e6),
    ]:
        metric(day, "Alphalend", "mcap", mcap)
        metric(day, "Alphalend", "fdv", fdv)
        metric(day, "Alphalend", "tvl", tvl)
        metric(day, "Alphalend", "borrow", borrow)
    metric("2021-05-21", "Alphalend", "volume", 130e6)  # absent on date 1
    metric("2021-05-14", "Alphalend", "price", 2.0)
    metric("2021-05-21", "Alphalend", "price", 2.1)
    day = date(2021, 1, 4)
    while day <= date(2021, 5, 24):
        metric(
            day.isoformat(),
            "Alphalend",
            "revenue",
            100_000.0 if day <= date(2021, 3, 31) else 150_000.0,
        )
        day += timedelta(days=1)

    for day_s, mcap, fdv, tvl, borrow in [
        ("2021-05-14", 300e6, 450e6, 1.5e9, 700e6),
        ("2021-05-21", 310e6, 460e6, 1.4e9, 680e6),
    ]:
        metric(day_s, "Betapool", "mcap", mcap)
        metric(day_s, "Betapool", "fdv", fdv)
        metric(day_s, "Betapool", "tvl", tvl)
        metric(day_s, "Betapool", "borrow", borrow)
    metric("2021-05-10", "Betapool", "price", 5.0)  # stale by date 2
    day = date(2021, 2, 1)
    while day <= date(2021, 5, 24):
        metric(day.isoformat(), "Betapool", "revenue", 80_000.0)
        day += timedelta(days=1)

    metric("2021-05-20", "Gammafi", "mcap", 50e6)
    metric("2021-05-21", "Gammafi", "mcap", 52e6)
    metric("2021-05-20", "Gammafi", "fdv", 200e6)
    metric("2021-05-21", "Gammafi", "tvl", 400e6)
    metric("2021-05-21", "Gammafi", "volume", 30e6)
    metric("2021-05-20", "Gammafi", "price", 0.05)

    metrics.sort(key=lambda r: (r[1], r[2], r[0]))
    write_rows(HERE / "metrics.csv", ["date", "protocol", "metric", "value"], metrics)

    config = {
        "protocols": ["Alphalend", "Betapool", "Gammafi"],
        "date_range": {"start": "2021-05-17", "end": "2021-05-30"},
        "granularity": "week",
        "criteria_judgment": [[1, 2, 5], [1 / 2, 1, 2], [1 / 5, 1 / 2, 1]],
        "indicator_judgments": {
            "valuation": [[1, 3, 5], [1 / 3, 1, 3], [1 / 5, 1 / 3, 1]],
        },
        "indicator_weights": {"I31": 2, "I32": 1, "I33": 1},
        "dust_threshold_usd": 10.0,
        "staleness_days": 7,
        "epsilon": 1e-9,
        "power_tol": 1e-10,
        "power_max_iter": 10000,
        "inputs": {
            "registry": "registry.csv",
            "classifications": "classifications.csv",
            "metrics": "metrics.csv",
            "transfers": {
                "ALD": "transfers/ALD.csv",
                "BPL": "transfers/BPL.csv",
                "GMF": "transfers/GMF.csv",
            },
        },
    }
    (HERE / "config.json").write_text(
        json.dumps(config, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote fixture inputs under {HERE}")


if __name__ == "__main__":
    main()
