"""Token transfer-log ingestion, balance reconstruction, and holder filtering.

Transfer CSVs (UTF-8, header required) carry
``block,log_index,timestamp,from,to,amount`` with amounts as base-10
integers in smallest token units. Replay is exact integer arithmetic; the
zero address mints and burns. Holder filtering removes exchange and
contract addresses and, when a token price is known, dust positions worth
less than the USD threshold.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from defi_rank import kernels
from defi_rank.errors import NegativeBalance, ParseError, SchemaError

ZERO_ADDRESS = "0" * 40

TRANSFER_COLUMNS = ["block", "log_index", "timestamp", "from", "to", "amount"]
CLASSIFICATION_COLUMNS = ["address", "kind", "label"]
REJECT_COLUMNS_SUFFIX = "reason"

DEFAULT_CHECKPOINT_INTERVAL = 100_000
DEFAULT_DUST_THRESHOLD_USD = 10.0

_HEX_DIGITS = set("0123456789abcdef")


def normalize_address(raw: str) -> str:
    """Lowercase 40-hex-char form, accepting an optional 0x prefix."""
    s = raw.strip().lower()
    if s.startswith("0x"):
        s = s[2:]
    if len(s) != 40 or not set(s) <= _HEX_DIGITS:
        raise ValueError(f"invalid address: {raw!r}")
    return s


class AddressKind(str, Enum):
    EXCHANGE = "exchange"
    CONTRACT = "contract"
    REGULAR = "regular"


@dataclass(frozen=True)
class AddressClassification:
    address: str
    kind: AddressKind
    label: str = ""


@dataclass(frozen=True)
class TransferEvent:
    token: str
    block: int
    timestamp: int
    from_addr: str
    to_addr: str
    amount: int
    log_index: int


@dataclass(frozen=True)
class BalanceSnapshot:
    """Holder -> balance map reconstructed at a point in time."""

    token: str
    as_of: int
    balances: dict[str, int]
    decimals: int = 18

    def total(self) -> int:
        return sum(self.balances.values())


@dataclass(frozen=True)
class FilteredSnapshot:
    """Snapshot after exchange/contract and dust filtering.

    ``dust_filter_skipped`` flags snapshots where no token price was
    available, so the USD dust rule could not be applied.
    """

    base: BalanceSnapshot
    balances: dict[str, int]
    excluded_exchange: int
    excluded_contract: int
    excluded_dust: int
    dust_threshold_usd: float = DEFAULT_DUST_THRESHOLD_USD
    price_used: float | None = None
    dust_filter_skipped: bool = False

    def as_snapshot(self) -> BalanceSnapshot:
        return BalanceSnapshot(
            self.base.token, self.base.as_of, dict(self.balances), self.base.decimals
        )


@dataclass(frozen=True)
class RejectedRow:
    row: int
    raw: dict[str, str]
    reason: str


@dataclass
class IngestResult:
    log: "TransferLog"
    rejects: list[RejectedRow] = field(default_factory=list)


class TransferLog:
    """Sorted transfer events for one token, with replay checkpoints.

    Checkpoints are an internal cache taken every ``checkpoint_interval``
    events; queries replay from the nearest usable checkpoint and are
    equivalent to a from-scratch replay.
    """

    def __init__(
        self,
        token: str,
        events: list[TransferEvent],
        decimals: int = 18,
        checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL,
    ):
        self.token = token
        self.decimals = decimals
        self.events = sorted(events, key=lambda e: (e.block, e.log_index))
        self.checkpoint_interval = max(int(checkpoint_interval), 1)
        self._froms = [e.from_addr for e in self.events]
        self._tos = [e.to_addr for e in self.events]
        self._amounts = [e.amount for e in self.events]
        self._timestamps = [e.timestamp for e in self.events]
        # (event_count, balances copy, max timestamp seen in the prefix)
        self._checkpoints: list[tuple[int, dict[str, int], int]] = []
        self._checkpoints_built = False

    def _build_checkpoints(self) -> None:
        self._checkpoints_built = True
        balances: dict[str, int] = {}
        interval = self.checkpoint_interval
        prefix_max_ts = -1
        n = len(self.events)
        pos = 0
        while pos < n:
            end = min(pos + interval, n)
            try:
                self._replay_range(balances, pos, end)
            except NegativeBalance:
                # Inconsistent tail: keep the checkpoints over the good
                # prefix; queries past the bad event will re-raise on replay.
                return
            if self._timestamps[pos:end]:
                prefix_max_ts = max(prefix_max_ts, max(self._timestamps[pos:end]))
            if end < n:
                self._checkpoints.append((end, dict(balances), prefix_max_ts))
            pos = end

    def _replay_range(self, balances: dict[str, int], start: int, end: int) -> None:
        try:
            kernels.replay(
                self._froms[start:end],
                self._tos[start:end],
                self._amounts[start:end],
                balances,
                ZERO_ADDRESS,
            )
        except NegativeBalance as exc:
            idx = start + exc.event_index
            raise NegativeBalance(exc.address, idx, self.events[idx]) from None

    def balances_at(self, t: int) -> BalanceSnapshot:
        """Replay all events with timestamp <= t, in (block, log_index) order."""
        if not self._checkpoints_built and len(self.events) > self.checkpoint_interval:
            self._build_checkpoints()
        start = 0
        balances: dict[str, int] = {}
        for count, snap, max_ts in self._checkpoints:
            if max_ts <= t:
                start, balances = count, dict(snap)
            else:
                break
        froms, tos, amounts = [], [], []
        indices = []
        for i in range(start, len(self.events)):
            if self._timestamps[i] <= t:
                froms.append(self._froms[i])
                tos.append(self._tos[i])
                amounts.append(self._amounts[i])
                indices.append(i)
        try:
            kernels.replay(froms, tos, amounts, balances, ZERO_ADDRESS)
        except NegativeBalance as exc:
            idx = indices[exc.event_index]
            raise NegativeBalance(exc.address, idx, self.events[idx]) from None
        return BalanceSnapshot(self.token, t, balances, self.decimals)


def _parse_transfer_row(token: str, row: dict[str, str]) -> TransferEvent:
    try:
        block = int(row["block"])
        log_index = int(row["log_index"])
        timestamp = int(row["timestamp"])
    except ValueError as exc:
        raise ValueError(f"bad integer field: {exc}") from None
    if block < 0 or log_index < 0 or timestamp < 0:
        raise ValueError("block, log_index and timestamp must be nonnegative")
    from_addr = normalize_address(row["from"])
    to_addr = normalize_address(row["to"])
    amount = int(row["amount"])
    if amount < 0:
        raise ValueError(f"negative amount {amount}")
    return TransferEvent(token, block, timestamp, from_addr, to_addr, amount, log_index)


def ingest_transfers(
    path: str | Path,
    token: str,
    decimals: int = 18,
    strict: bool = False,
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL,
) -> IngestResult:
    """Read a transfer CSV into a sorted TransferLog.

    Malformed rows land in the rejects report unless ``strict`` is set, in
    which case the first one raises :class:`ParseError`. A header mismatch
    always raises :class:`SchemaError`.
    """
    path = Path(path)
    events: list[TransferEvent] = []
    rejects: list[RejectedRow] = []
    seen: set[tuple[int, int]] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != TRANSFER_COLUMNS:
            raise SchemaError(
                f"{path}: expected header {','.join(TRANSFER_COLUMNS)!r}, "
                f"got {reader.fieldnames!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                if None in row or any(v is None for v in row.values()):
                    raise ValueError("wrong number of fields")
                event = _parse_transfer_row(token, row)
                key = (event.block, event.log_index)
                if key in seen:
                    raise ValueError(f"duplicate (block, log_index) {key}")
                seen.add(key)
            except ValueError as exc:
                if strict:
                    raise ParseError(f"{path}:{lineno}: {exc}", row=lineno) from None
                rejects.append(RejectedRow(lineno, dict(row), str(exc)))
                continue
            events.append(event)
    log = TransferLog(token, events, decimals, checkpoint_interval)
    return IngestResult(log, rejects)


def filter_holders(
    snap: BalanceSnapshot,
    classes: dict[str, AddressClassification],
    price_usd: float | None = None,
    dust_threshold_usd: float = DEFAULT_DUST_THRESHOLD_USD,
) -> FilteredSnapshot:
    """Drop exchange/contract holders, then dust positions under the USD
    threshold when a price is known. With no price the dust rule is skipped
    and the result flagged."""
    unit = 10 ** snap.decimals
    kept: dict[str, int] = {}
    n_exchange = n_contract = n_dust = 0
    for addr, bal in snap.balances.items():
        cls = classes.get(addr)
        if cls is not None and cls.kind is AddressKind.EXCHANGE:
            n_exchange += 1
            continue
        if cls is not None and cls.kind is AddressKind.CONTRACT:
            n_contract += 1
            continue
        if price_usd is not None and (bal / unit) * price_usd < dust_threshold_usd:
            n_dust += 1
            continue
        kept[addr] = bal
    return FilteredSnapshot(
        base=snap,
        balances=kept,
        excluded_exchange=n_exchange,
        excluded_contract=n_contract,
        excluded_dust=n_dust,
        dust_threshold_usd=dust_threshold_usd,
        price_used=price_usd,
        dust_filter_skipped=price_usd is None,
    )


def load_classifications(
    path: str | Path, strict: bool = False
) -> tuple[dict[str, AddressClassification], list[RejectedRow]]:
    """Read ``address,kind,label`` rows; one kind per address."""
    path = Path(path)
    classes: dict[str, AddressClassification] = {}
    rejects: list[RejectedRow] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != CLASSIFICATION_COLUMNS:
            raise SchemaError(
                f"{path}: expected header {','.join(CLASSIFICATION_COLUMNS)!r}, "
                f"got {reader.fieldnames!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                if None in row or any(v is None for v in row.values()):
                    raise ValueError("wrong number of fields")
                addr = normalize_address(row["address"])
                kind = AddressKind(row["kind"].strip().lower())
                if kind is AddressKind.REGULAR:
                    raise ValueError("only exchange/contract rows are listed")
                if addr in classes:
                    raise ValueError(f"address {addr} already classified")
            except ValueError as exc:
                if strict:
                    raise ParseError(f"{path}:{lineno}: {exc}", row=lineno) from None
                rejects.append(RejectedRow(lineno, dict(row), str(exc)))
                continue
            classes[addr] = AddressClassification(addr, kind, row["label"].strip())
    return classes, rejects


def write_transfers(path: str | Path, log: TransferLog) -> None:
    """Canonical transfer CSV: sorted by (block, log_index)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRANSFER_COLUMNS)
        for e in log.events:
            writer.writerow(
                [e.block, e.log_index, e.timestamp, e.from_addr, e.to_addr, e.amount]
            )


def write_classifications(
    path: str | Path, classes: dict[str, AddressClassification]
) -> None:
    """Canonical classification CSV: sorted by address."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CLASSIFICATION_COLUMNS)
        for addr in sorted(classes):
            cls = classes[addr]
            writer.writerow([addr, cls.kind.value, cls.label])


def write_rejects(path: str | Path, columns: list[str], rejects: list[RejectedRow]) -> None:
    """Rejects report: the original columns plus a reason column."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns + [REJECT_COLUMNS_SUFFIX])
        for rej in rejects:
            writer.writerow([rej.raw.get(c, "") for c in columns] + [rej.reason])
