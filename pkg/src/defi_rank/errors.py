"""Exception hierarchy shared across the package.

Every error carries a stable machine-readable ``code`` (used by the CLI and
the HTTP service) plus a human message.
"""

from __future__ import annotations


class DefiRankError(Exception):
    """Base class for all package errors."""

    code = "error"


class NonPositiveWeight(DefiRankError):
    code = "non_positive_weight"


class DimensionOutOfRange(DefiRankError):
    code = "dimension_out_of_range"


class ReciprocityViolation(DefiRankError):
    code = "reciprocity_violation"


class NonSaatyEntry(DefiRankError):
    code = "non_saaty_entry"


class LengthMismatch(DefiRankError):
    code = "length_mismatch"


class NotConverged(DefiRankError):
    """Power iteration hit the iteration cap; carries the best estimate."""

    code = "not_converged"

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class SchemaError(DefiRankError):
    code = "schema_error"


class ParseError(DefiRankError):
    code = "parse_error"

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class DuplicateDate(DefiRankError):
    code = "duplicate_date"


class NegativeValue(DefiRankError):
    code = "negative_value"


class NegativeBalance(DefiRankError):
    """Replay drove a balance below zero; the log is inconsistent."""

    code = "negative_balance"

    def __init__(self, address, event_index, event=None):
        super().__init__(
            f"balance of {address} would go negative at event #{event_index}"
        )
        self.address = address
        self.event_index = event_index
        self.event = event


class EmptyDistribution(DefiRankError):
    code = "empty_distribution"


class EmptyRange(DefiRankError):
    code = "empty_range"


class AllMissing(DefiRankError):
    code = "all_missing"


class NoProtocolHasData(DefiRankError):
    code = "no_protocol_has_data"


class UnknownRun(DefiRankError):
    code = "unknown_run"


class ConfigError(DefiRankError):
    code = "config_error"
