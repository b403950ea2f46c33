"""
Per-transaction timing records shared by provider, consumer and harness.
"""

import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Set

PLAIN = "plain"
COMPRESSED = "compressed"
MODES = (PLAIN, COMPRESSED)

STAGES = ("generate", "compress", "publish_send", "lookup", "invoke", "decompress", "consume")
PROVIDER_STAGES = ("generate", "compress", "publish_send")
CONSUMER_STAGES = ("lookup", "invoke", "decompress", "consume")
FAILURE_STAGES = ("lookup", "invoke", "parse", "decompress", "consume")

CSV_COLUMNS = (
    "transaction_id",
    "mode",
    "record_count",
    "t_generate_us",
    "t_compress_us",
    "t_publish_send_us",
    "t_lookup_us",
    "t_invoke_us",
    "t_decompress_us",
    "t_consume_us",
    "payload_bytes",
    "wire_bytes",
    "digest",
    "outcome",
)
CSV_HEADER = ",".join(CSV_COLUMNS)
PROVIDER_COLUMNS = ("transaction_id", "t_generate_us", "t_compress_us", "t_publish_send_us")


class TimerStamp(NamedTuple):
    stage: str
    at_ns: int


def timer_stamp(stage: str) -> TimerStamp:
    """Monotonic clock reading labelled with a stage name."""
    return TimerStamp(stage, time.perf_counter_ns())


def elapsed_us(before: TimerStamp, after: TimerStamp) -> int:
    return max(0, (after.at_ns - before.at_ns) // 1000)


@dataclass
class TransactionTiming:
    transaction_id: int
    mode: str = PLAIN
    record_count: int = 0
    t_generate: int = 0
    t_compress: int = 0
    t_publish_send: int = 0
    t_lookup: int = 0
    t_invoke: int = 0
    t_decompress: int = 0
    t_consume: int = 0
    payload_bytes: int = 0
    wire_bytes: int = 0
    digest: str = ""
    outcome: str = "ok"
    absent: Set[str] = field(default_factory=set)

    def set_stage(self, stage: str, micros: int) -> None:
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage}")
        setattr(self, f"t_{stage}", max(0, int(micros)))
        self.absent.discard(stage)

    def stage(self, stage: str) -> int:
        return getattr(self, f"t_{stage}")

    def mark_absent(self, *stages: str) -> None:
        for stage in stages:
            setattr(self, f"t_{stage}", 0)
            self.absent.add(stage)

    def fail(self, stage: str) -> None:
        if stage not in FAILURE_STAGES:
            raise ValueError(f"unknown failure stage {stage}")
        self.outcome = f"failed({stage})"

    @property
    def ok(self) -> bool:
        return self.outcome == "ok"

    @property
    def failed_stage(self) -> Optional[str]:
        if self.outcome.startswith("failed(") and self.outcome.endswith(")"):
            return self.outcome[len("failed("):-1]
        return None

    @property
    def end_to_end_us(self) -> int:
        return sum(self.stage(s) for s in CONSUMER_STAGES)

    def merge_provider(self, row: Dict[str, str]) -> None:
        """Fold a provider /metrics row into this record."""
        self.t_generate = int(row.get("t_generate_us", 0) or 0)
        self.t_publish_send = int(row.get("t_publish_send_us", 0) or 0)
        self.absent.discard("generate")
        self.absent.discard("publish_send")
        if self.mode == COMPRESSED:
            self.t_compress = int(row.get("t_compress_us", 0) or 0)
            self.absent.discard("compress")
        else:
            self.mark_absent("compress")

    def to_row(self) -> Dict[str, str]:
        return {
            "transaction_id": str(self.transaction_id),
            "mode": self.mode,
            "record_count": str(self.record_count),
            **{f"t_{s}_us": str(self.stage(s)) for s in STAGES},
            "payload_bytes": str(self.payload_bytes),
            "wire_bytes": str(self.wire_bytes),
            "digest": self.digest,
            "outcome": self.outcome,
        }

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "TransactionTiming":
        timing = cls(
            transaction_id=int(row["transaction_id"]),
            mode=row.get("mode", PLAIN),
            record_count=int(row.get("record_count", 0) or 0),
            payload_bytes=int(row.get("payload_bytes", 0) or 0),
            wire_bytes=int(row.get("wire_bytes", 0) or 0),
            digest=row.get("digest", ""),
            outcome=row.get("outcome", "ok"),
        )
        for s in STAGES:
            setattr(timing, f"t_{s}", int(row.get(f"t_{s}_us", 0) or 0))
        if timing.mode == PLAIN:
            timing.absent.update({"compress", "decompress"})
        return timing


def provider_rows(timings: Iterable[TransactionTiming]) -> List[Dict[str, str]]:
    rows = []
    for t in timings:
        full = t.to_row()
        rows.append({column: full[column] for column in PROVIDER_COLUMNS})
    return rows
