"""
Summaries of benchmark rows: a text table plus the per-transaction CSV.
"""

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from statistics import mean, median
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from bench.timing import COMPRESSED, CSV_COLUMNS, MODES, PLAIN, TransactionTiming
from errors import EmptyReportError

TABLE_COLUMNS = ("mode", "record_count", "count", "failed", "median_us", "p95_us", "mean_wire_bytes", "ratio")


def percentile(values: Sequence[float], p: float) -> float:
    """Linear-interpolated percentile, ``p`` in 0..100."""
    if not values:
        return 0.0
    ordered = sorted(values)
    k = (len(ordered) - 1) * (p / 100.0)
    f = int(k)
    c = min(f + 1, len(ordered) - 1)
    if f == c:
        return float(ordered[f])
    return ordered[f] * (c - k) + ordered[c] * (k - f)


@dataclass
class CellSummary:
    mode: str
    record_count: int
    count: int
    failed: int
    median_us: float
    p95_us: float
    mean_wire_bytes: float
    ratio: Optional[float] = None

    def cells(self) -> Tuple[str, ...]:
        return (
            self.mode,
            str(self.record_count),
            str(self.count),
            str(self.failed),
            f"{self.median_us:.1f}",
            f"{self.p95_us:.1f}",
            f"{self.mean_wire_bytes:.1f}",
            "n/a" if self.ratio is None else f"{self.ratio:.3f}",
        )


def summarize(rows: Iterable[TransactionTiming]) -> List[CellSummary]:
    """Group rows per (mode, record_count); latency and size come from ok rows only."""
    rows = list(rows)
    if not rows:
        raise EmptyReportError("cannot report on an empty set of rows")

    groups: Dict[Tuple[str, int], List[TransactionTiming]] = {}
    for row in rows:
        groups.setdefault((row.mode, row.record_count), []).append(row)

    summaries: Dict[Tuple[str, int], CellSummary] = {}
    for (mode, record_count), group in groups.items():
        ok = [r for r in group if r.ok]
        durations = [r.end_to_end_us for r in ok]
        summaries[(mode, record_count)] = CellSummary(
            mode=mode,
            record_count=record_count,
            count=len(ok),
            failed=len(group) - len(ok),
            median_us=float(median(durations)) if durations else 0.0,
            p95_us=percentile(durations, 95),
            mean_wire_bytes=float(mean(r.wire_bytes for r in ok)) if ok else 0.0,
        )

    for (mode, record_count), summary in summaries.items():
        plain = summaries.get((PLAIN, record_count))
        compressed = summaries.get((COMPRESSED, record_count))
        if plain and compressed and plain.count and compressed.count and compressed.mean_wire_bytes:
            summary.ratio = plain.mean_wire_bytes / compressed.mean_wire_bytes

    order = {m: i for i, m in enumerate(MODES)}
    return sorted(summaries.values(), key=lambda s: (s.record_count, order.get(s.mode, len(order)), s.mode))


def format_table(summaries: List[CellSummary]) -> str:
    lines = [TABLE_COLUMNS] + [s.cells() for s in summaries]
    widths = [max(len(line[i]) for line in lines) for i in range(len(TABLE_COLUMNS))]
    rendered = ["  ".join(cell.rjust(w) for cell, w in zip(line, widths)) for line in lines]
    rendered.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(rendered) + "\n"


def rows_to_csv(rows: Iterable[TransactionTiming]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(r.to_row() for r in rows)
    return out.getvalue()


def read_csv(path: Union[str, Path]) -> List[TransactionTiming]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [TransactionTiming.from_row(row) for row in csv.DictReader(fh)]


def report(rows: Iterable[TransactionTiming], output: Optional[Union[str, Path]] = None) -> str:
    """
    Build the summary table and, when ``output`` is given, write the CSV there.

    Raises:
        EmptyReportError: No rows to report on.
    """
    rows = list(rows)
    table = format_table(summarize(rows))
    if output:
        Path(output).write_text(rows_to_csv(rows), encoding="utf-8")
    return table
