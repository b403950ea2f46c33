from .timing import (
    COMPRESSED,
    CSV_COLUMNS,
    CSV_HEADER,
    PLAIN,
    PROVIDER_COLUMNS,
    TimerStamp,
    TransactionTiming,
    elapsed_us,
    timer_stamp,
)

__all__ = [
    "COMPRESSED",
    "CSV_COLUMNS",
    "CSV_HEADER",
    "PLAIN",
    "PROVIDER_COLUMNS",
    "TimerStamp",
    "TransactionTiming",
    "elapsed_us",
    "timer_stamp",
]
