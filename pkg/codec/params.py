from dataclasses import dataclass

from errors import ConfigError

DEFAULT_WINDOW_SIZE = 4096
DEFAULT_LOOKAHEAD_SIZE = 16
DEFAULT_MIN_MATCH_LEN = 3
DEFAULT_READ_CAPACITY = 8192


@dataclass(frozen=True)
class CodecParams:
    """Buffer dimensions shared by the compressor and the decompressor."""

    window_size: int = DEFAULT_WINDOW_SIZE
    lookahead_size: int = DEFAULT_LOOKAHEAD_SIZE
    min_match_len: int = DEFAULT_MIN_MATCH_LEN
    initial_read_capacity: int = DEFAULT_READ_CAPACITY

    def __post_init__(self):
        errors = []

        # offsets travel in a 16-bit wire field
        if not 1 <= self.window_size <= 65535:
            errors.append(f"window_size must be in 1..65535, got {self.window_size}")
        if not 1 <= self.lookahead_size <= 65535:
            errors.append(f"lookahead_size must be in 1..65535, got {self.lookahead_size}")
        if self.min_match_len < 2:
            errors.append(f"min_match_len must be >= 2, got {self.min_match_len}")
        if self.min_match_len > self.lookahead_size:
            errors.append("min_match_len must not exceed lookahead_size")
        if self.initial_read_capacity < 1:
            errors.append(f"initial_read_capacity must be >= 1, got {self.initial_read_capacity}")

        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def max_match_len(self) -> int:
        # one lookahead byte is always kept for the literal
        return self.lookahead_size - 1
