#!/usr/bin/env python3
"""Independent expected-value calculator for the tiny fixture.

Reads the same CSV/JSON inputs as the engine but shares no code with it:
balances come from a dict replay, statistics from brute-force formulas,
eigenvectors from numpy's dense eigendecomposition. Writes expected.json
next to this script.

Run after make_inputs.py: python3 fixtures/tiny/oracle.py
"""

from __future__ import annotations

import csv
import json
from calendar import timegm
from datetime import date, timedelta
from math import fsum
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent

CRITERIA = ["market_share", "valuation", "decentralization"]
CHILDREN = {
    "market_share": ["I11", "I12", "I13", "I14"],
    "valuation": ["I21", "I22", "I23"],
    "decentralization": ["I31", "I32", "I33"],
}
# direction: +1 higher is better, -1 lower is better; bounded negatives
# live in [0, 1] and flip as 1 - x, the unbounded one as 1/x.
DIRECTION = {
    "I11": 1, "I12": 1, "I13": 1, "I14": 1,
    "I21": 1, "I22": -1, "I23": 1,
    "I31": -1, "I32": 1, "I33": -1,
}
BOUNDED = {"I31", "I33"}
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90}


def parse_day(s: str) -> date:
    y, m, d = map(int, s.split("-"))
    return date(y, m, d)


def read_rows(name: str) -> list[dict[str, str]]:
    with (HERE / name).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def dominant_eigen(matrix: list[list[float]]) -> tuple[list[float], float]:
    m = np.array(matrix, dtype=np.float64)
    values, vectors = np.linalg.eig(m)
    k = int(np.argmax(values.real))
    lam = float(values[k].real)
    v = np.abs(vectors[:, k].real)
    v = v / v.sum()
    return [float(x) for x in v], lam


def consistency(matrix: list[list[float]]) -> dict:
    n = len(matrix)
    _, lam = dominant_eigen(matrix)
    if n <= 2:
        return {"n": n, "lambda_max": lam, "ci": 0.0, "ri": RANDOM_INDEX[n],
                "cr": 0.0, "pass": True}
    ci = (lam - n) / (n - 1)
    ri = RANDOM_INDEX[n]
    cr = ci / ri
    return {"n": n, "lambda_max": lam, "ci": ci, "ri": ri, "cr": cr,
            "pass": cr < 0.1}


def ratio_matrix(values: list[float], epsilon: float) -> list[list[float]]:
    f = [max(v, epsilon) for v in values]
    return [[a / b for b in f] for a in f]


def locf(points: list[tuple[date, float]], t: date, staleness: int) -> float | None:
    best = None
    for d, v in points:
        if d <= t:
            best = (d, v)
    if best is None or (t - best[0]).days > staleness:
        return None
    return best[1]


def annualized(points: list[tuple[date, float]], t: date) -> tuple[float, bool] | None:
    if not points:
        return None
    start = t - timedelta(days=364)
    window = [v for d, v in points if start <= d <= t]
    if not window:
        return None
    total = fsum(window)
    first = points[0][0]
    if first > start:
        days = (t - first).days + 1
        return total * (365 / days), True
    return total, False


def brute_gini(values: list[int]) -> float:
    xs = [float(v) for v in values]
    n = len(xs)
    total = fsum(xs)
    diff = fsum(abs(a - b) for a in xs for b in xs)
    return diff / (2 * n * total)


def brute_nakamoto(values: list[int]) -> int:
    total = sum(values)
    prefix = 0
    for k, v in enumerate(sorted(values, reverse=True), start=1):
        prefix += v
        if 2 * prefix > total:
            return k
    return len(values)


def brute_top10(values: list[int]) -> float:
    top = sum(sorted(values, reverse=True)[:10])
    return top / sum(values)


def main() -> None:
    config = json.loads((HERE / "config.json").read_text(encoding="utf-8"))
    epsilon = config["epsilon"]
    staleness = config["staleness_days"]
    dust_usd = config["dust_threshold_usd"]

    registry: dict[str, dict] = {}
    for row in read_rows("registry.csv"):
        registry[row["protocol"]] = {
            "token": row["token"],
            "genesis": parse_day(row["genesis_date"]),
            "decimals": int(row["decimals"]),
        }

    excluded_kinds = {}
    for row in read_rows("classifications.csv"):
        excluded_kinds[row["address"].lower()] = row["kind"]

    metrics: dict[tuple[str, str], list[tuple[date, float]]] = {}
    for row in read_rows("metrics.csv"):
        key = (row["protocol"], row["metric"])
        metrics.setdefault(key, []).append((parse_day(row["date"]), float(row["value"])))
    for points in metrics.values():
        points.sort()

    transfers: dict[str, list[tuple]] = {}
    for proto, info in registry.items():
        rows = read_rows(Path(config["inputs"]["transfers"][info["token"]]).as_posix())
        events = [
            (int(r["block"]), int(r["log_index"]), int(r["timestamp"]),
             r["from"].lower(), r["to"].lower(), int(r["amount"]))
            for r in rows
        ]
        events.sort(key=lambda e: (e[0], e[1]))
        transfers[info["token"]] = events

    zero = "0" * 40

    def balances_at(token: str, cutoff: int) -> dict[str, int]:
        bal: dict[str, int] = {}
        for _, _, ts, src, dst, amount in transfers[token]:
            if ts > cutoff:
                continue
            if src != zero:
                bal[src] = bal.get(src, 0) - amount
                if bal[src] == 0:
                    del bal[src]
            if dst != zero:
                bal[dst] = bal.get(dst, 0) + amount
                if dst in bal and bal[dst] == 0:
                    del bal[dst]
        return bal

    # sample dates: Mondays inside the configured range
    start = parse_day(config["date_range"]["start"])
    end = parse_day(config["date_range"]["end"])
    dates = []
    d = start
    while d <= end:
        if d.weekday() == 0:
            dates.append(d)
        d += timedelta(days=1)

    # layer weights
    crit_judgment = config["criteria_judgment"]
    crit_weights_list, _ = dominant_eigen(crit_judgment)
    crit_weights = dict(zip(CRITERIA, crit_weights_list))
    consistency_records = {"criteria": consistency(crit_judgment)}

    indicator_weights: dict[str, dict[str, float]] = {}
    for crit in CRITERIA:
        codes = CHILDREN[crit]
        if crit in config.get("indicator_judgments", {}):
            matrix = config["indicator_judgments"][crit]
        else:
            raw = [config.get("indicator_weights", {}).get(c, 1.0) for c in codes]
            matrix = ratio_matrix(raw, epsilon)
        w, _ = dominant_eigen(matrix)
        indicator_weights[crit] = dict(zip(codes, w))
        consistency_records[f"indicators:{crit}"] = consistency(matrix)

    per_date: dict[str, dict] = {}
    for as_of in dates:
        protos = sorted(
            p for p in config["protocols"] if registry[p]["genesis"] <= as_of
        )
        cutoff = timegm((as_of + timedelta(days=1)).timetuple()) - 1

        raw: dict[str, dict[str, float | None]] = {}
        flags: dict[str, list[str]] = {p: [] for p in protos}
        for p in protos:
            info = registry[p]
            genesis = info["genesis"]

            def metric(name: str) -> float | None:
                if as_of < genesis:
                    return None
                return locf(metrics.get((p, name), []), as_of, staleness)

            mcap = metric("mcap")
            fdv = metric("fdv")
            tvl = metric("tvl")
            ann = annualized(metrics.get((p, "revenue"), []), as_of)
            ann_value = None
            if ann is not None:
                ann_value, extrapolated = ann
                if extrapolated:
                    flags[p].append("revenue_extrapolated")

            def ratio(num, den):
                if num is None or den is None or den == 0.0:
                    return None
                return num / den

            balances = balances_at(info["token"], cutoff)
            price = metric("price")
            unit = 10 ** info["decimals"]
            held: list[int] = []
            for addr, bal in balances.items():
                kind = excluded_kinds.get(addr)
                if kind in ("exchange", "contract"):
                    continue
                if price is not None and (bal / unit) * price < dust_usd:
                    continue
                held.append(bal)
            if balances and price is None:
                flags[p].append("dust_filter_skipped")

            raw[p] = {
                "I11": mcap,
                "I12": metric("borrow"),
                "I13": metric("revenue"),
                "I14": metric("volume"),
                "I21": ratio(fdv, ann_value),
                "I22": ratio(tvl, ann_value),
                "I23": ratio(mcap, tvl),
                "I31": brute_gini(held) if held else None,
                "I32": float(brute_nakamoto(held)) if held else None,
                "I33": brute_top10(held) if held else None,
            }

        def adjust(code: str, v: float | None) -> float | None:
            if v is None:
                return None
            if DIRECTION[code] > 0:
                return v
            if code in BOUNDED:
                return 1.0 - v
            return 1.0 / max(v, epsilon)

        adjusted = {
            code: {p: adjust(code, raw[p][code]) for p in protos}
            for code in DIRECTION
        }
        all_missing = sorted(
            code for code, col in adjusted.items()
            if all(v is None for v in col.values())
        )

        x: dict[str, dict[str, float | None]] = {p: {} for p in protos}
        scheme_consistency = {}
        for code, col in adjusted.items():
            present = [p for p in protos if col[p] is not None]
            if not present:
                for p in protos:
                    x[p][code] = None
                continue
            if len(present) == 1:
                weights = [1.0]
                scheme_consistency[f"scheme:{code}"] = {
                    "n": 1, "lambda_max": 1.0, "ci": 0.0, "ri": 0.0,
                    "cr": 0.0, "pass": True,
                }
            else:
                matrix = ratio_matrix([col[p] for p in present], epsilon)
                weights, _ = dominant_eigen(matrix)
                scheme_consistency[f"scheme:{code}"] = consistency(matrix)
            lookup = dict(zip(present, weights))
            for p in protos:
                x[p][code] = lookup.get(p)

        effective: dict[str, dict[str, float]] = {}
        for crit in CRITERIA:
            present = [c for c in CHILDREN[crit] if c not in all_missing]
            if not present:
                effective[crit] = {}
                continue
            total = fsum(indicator_weights[crit][c] for c in present)
            effective[crit] = {
                c: indicator_weights[crit][c] / total for c in present
            }

        c_values: dict[str, dict[str, float]] = {}
        scores: dict[str, float] = {}
        for p in protos:
            c_values[p] = {}
            for crit in CRITERIA:
                c_values[p][crit] = fsum(
                    w * (x[p][code] if x[p][code] is not None else 0.0)
                    for code, w in effective[crit].items()
                )
                if effective[crit] and all(
                    x[p][code] is None for code in effective[crit]
                ):
                    flags[p].append(f"not_yet_launched:{crit}")
            scores[p] = fsum(
                crit_weights[crit] * c_values[p][crit] for crit in CRITERIA
            )

        ordered = sorted(protos, key=lambda p: (-scores[p], p))
        ranks = {p: i + 1 for i, p in enumerate(ordered)}

        per_date[as_of.isoformat()] = {
            "protocols": protos,
            "all_missing": all_missing,
            "raw": raw,
            "x": x,
            "c": c_values,
            "scores": scores,
            "ranks": ranks,
            "order": ordered,
            "flags": {p: sorted(flags[p]) for p in protos},
            "effective_indicator_weights": effective,
            "scheme_consistency": scheme_consistency,
        }

    expected = {
        "dates": [d.isoformat() for d in dates],
        "criterion_weights": crit_weights,
        "indicator_weights": indicator_weights,
        "consistency": consistency_records,
        "per_date": per_date,
    }
    out = HERE / "expected.json"
    out.write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
