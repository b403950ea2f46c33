"""
Growable byte buffer used by both sides of the codec.

The compressor accumulates consumed input in one of these and keeps its
look-ahead in another; the decompressor reconstructs output into one.
Capacity only ever doubles.
"""

from dataclasses import dataclass, field
from typing import BinaryIO, Optional

from codec.params import CodecParams
from config import get_logger
from errors import BufferContractError, CapacityOverflowError, CodecError

logger = get_logger(__name__)


@dataclass
class GrowableBuffer:
    capacity: int
    fill: int = 0
    max_capacity: Optional[int] = None
    data: bytearray = field(default=None, repr=False)

    def __post_init__(self):
        if self.capacity < 1:
            raise BufferContractError(f"capacity must be >= 1, got {self.capacity}")
        if self.data is None:
            self.data = bytearray(self.capacity)
        if len(self.data) != self.capacity or not 0 <= self.fill <= self.capacity:
            raise BufferContractError("buffer storage does not match capacity/fill")

    @classmethod
    def allocate(cls, capacity: int, max_capacity: Optional[int] = None) -> "GrowableBuffer":
        return cls(capacity=capacity, max_capacity=max_capacity)

    @property
    def free(self) -> int:
        return self.capacity - self.fill

    def getvalue(self) -> bytes:
        return bytes(self.data[:self.fill])

    def consume(self, count: int) -> None:
        """Drop ``count`` bytes from the front, keeping capacity."""
        if count > self.fill:
            raise BufferContractError(f"cannot consume {count} of {self.fill} bytes")
        remaining = self.fill - count
        self.data[:remaining] = self.data[count:self.fill]
        self.fill = remaining


def increase_buffer(buf: GrowableBuffer, needed: int) -> GrowableBuffer:
    """Double capacity until ``needed`` more bytes fit after ``fill``."""
    if needed <= buf.free:
        raise BufferContractError(
            f"increase_buffer needs needed > free space ({needed} <= {buf.free})"
        )

    target = buf.fill + needed
    capacity = buf.capacity
    while capacity < target:
        capacity *= 2

    if buf.max_capacity is not None and capacity > buf.max_capacity:
        raise CapacityOverflowError(
            f"buffer would grow to {capacity} bytes, maximum is {buf.max_capacity}"
        )

    buf.data.extend(bytes(capacity - buf.capacity))
    logger.debug(f"Buffer grown {buf.capacity} -> {capacity} bytes")
    buf.capacity = capacity
    return buf


def append_buffer(accumulator: GrowableBuffer, fragment: bytes) -> GrowableBuffer:
    """Append ``fragment`` after the held bytes, growing if necessary."""
    size = len(fragment)
    if size > accumulator.free:
        increase_buffer(accumulator, size)
    accumulator.data[accumulator.fill:accumulator.fill + size] = fragment
    accumulator.fill += size
    return accumulator


def read_buffer(source: BinaryIO, lookahead: GrowableBuffer, params: CodecParams) -> GrowableBuffer:
    """Refill ``lookahead`` from ``source`` up to ``params.lookahead_size`` bytes."""
    if lookahead.fill >= params.lookahead_size:
        raise BufferContractError("look-ahead buffer is already full")

    wanted = params.lookahead_size - lookahead.fill
    while wanted > 0:
        try:
            chunk = source.read(wanted)
        except OSError as e:
            raise CodecError(f"failed to read message source: {e}") from e
        if not chunk:
            break
        append_buffer(lookahead, chunk)
        wanted -= len(chunk)
    return lookahead
