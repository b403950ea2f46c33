"""
Sliding-window dictionary codec.

Every token is an (offset, length, literal) triple: copy ``length`` bytes
starting ``offset`` bytes back, then emit ``literal``. ``offset == 0`` and
``length == 0`` always go together and mean "literal only". Matches may run
past the current position (offset < length) to encode runs.
"""

import io
from dataclasses import dataclass, field
from typing import BinaryIO, List, NamedTuple, Optional, Tuple, Union

from codec.buffer import GrowableBuffer, append_buffer, read_buffer
from codec.params import CodecParams
from config import get_logger
from errors import MalformedStreamError

logger = get_logger(__name__)

DEFAULT_PARAMS = CodecParams()


class Token(NamedTuple):
    offset: int
    length: int
    literal: int


@dataclass
class TokenStream:
    original_length: int
    tokens: List[Token] = field(default_factory=list)

    @property
    def encoded_length(self) -> int:
        return sum(t.length + 1 for t in self.tokens)


def _longest_match(buf: Union[bytes, bytearray], pos: int, max_len: int, params: CodecParams) -> Tuple[int, int]:
    # window is buf[:pos], look-ahead starts at pos; nothing is copied out of buf
    lowest = max(0, pos - params.window_size)
    best_start = -1
    best_len = params.min_match_len - 1
    while best_len < max_len:
        want = best_len + 1
        # largest start whose match covers at least `want` bytes
        start = buf.rfind(buf[pos:pos + want], lowest, pos - 1 + want)
        if start < 0:
            break
        length = want
        while length < max_len and buf[start + length] == buf[pos + length]:
            length += 1
        best_start, best_len = start, length

    if best_start < 0:
        return 0, 0
    return pos - best_start, best_len


def search_buffer(window: bytes, lookahead: bytes, params: CodecParams = DEFAULT_PARAMS) -> Tuple[int, int]:
    """
    Find the longest prefix of ``lookahead`` that starts inside ``window``.

    Args:
        window: Already-encoded bytes, most recent last.
        lookahead: Pending input, non-empty.
        params: Codec dimensions.

    Returns:
        (offset, length) of the best match, ties going to the smallest
        offset, or (0, 0) when nothing of at least ``min_match_len`` exists.
    """
    if not lookahead:
        raise ValueError("search_buffer needs a non-empty look-ahead")

    max_len = min(len(lookahead), params.lookahead_size) - 1
    if not window or max_len < params.min_match_len:
        return 0, 0

    window = bytes(window)[-params.window_size:]
    return _longest_match(window + bytes(lookahead[:max_len + 1]), len(window), max_len, params)


def compare_buffer(reconstructed_fill: int, token: Token, params: CodecParams = DEFAULT_PARAMS) -> bool:
    """Check that ``token`` can be decoded after ``reconstructed_fill`` bytes."""
    offset, length, literal = token
    if (offset == 0) != (length == 0):
        return False
    if offset < 0 or length < 0 or not 0 <= literal <= 0xFF:
        return False
    if offset > params.window_size or length > params.max_match_len:
        return False
    return offset <= reconstructed_fill


class Compressor:
    """
    Greedy left-to-right tokenizer over a readable byte source.

    Consumed input and the pending look-ahead share one history buffer so the
    match search runs over it in place. ``read_buffer`` stages fresh input.
    """

    def __init__(self, params: CodecParams = DEFAULT_PARAMS):
        self.params = params

    def compress_stream(self, source: BinaryIO) -> TokenStream:
        params = self.params
        history = GrowableBuffer.allocate(params.initial_read_capacity)
        staging = GrowableBuffer.allocate(params.lookahead_size)
        tokens: List[Token] = []
        pos = 0
        exhausted = False

        while True:
            while not exhausted and history.fill - pos < params.lookahead_size:
                read_buffer(source, staging, params)
                if not staging.fill:
                    exhausted = True
                    break
                append_buffer(history, staging.data[:staging.fill])
                staging.consume(staging.fill)

            pending = history.fill - pos
            if not pending:
                break

            max_len = min(pending, params.lookahead_size) - 1
            if pos and max_len >= params.min_match_len:
                offset, length = _longest_match(history.data, pos, max_len, params)
            else:
                offset, length = 0, 0
            tokens.append(Token(offset, length, history.data[pos + length]))
            pos += length + 1

        stream = TokenStream(original_length=history.fill, tokens=tokens)
        logger.debug(f"Compressed {stream.original_length} bytes into {len(tokens)} tokens")
        return stream


class Decompressor:
    """Replays a token stream into a growable output buffer."""

    def __init__(self, params: CodecParams = DEFAULT_PARAMS):
        self.params = params

    def decompress_stream(self, stream: TokenStream) -> bytes:
        params = self.params
        out = GrowableBuffer.allocate(params.initial_read_capacity)

        for index, token in enumerate(stream.tokens):
            if not compare_buffer(out.fill, token, params):
                raise MalformedStreamError(
                    f"token {index} {tuple(token)} is invalid after {out.fill} reconstructed bytes"
                )
            if out.fill + token.length + 1 > stream.original_length:
                raise MalformedStreamError(
                    f"token {index} overruns declared length {stream.original_length}"
                )

            offset, length, literal = token
            if length:
                start = out.fill - offset
                if offset >= length:
                    append_buffer(out, out.data[start:start + length])
                else:
                    # overlapping copy repeats the last `offset` bytes
                    period = out.data[start:out.fill]
                    append_buffer(out, (period * (length // offset + 1))[:length])
            append_buffer(out, bytes((literal,)))

        if out.fill != stream.original_length:
            raise MalformedStreamError(
                f"reconstructed {out.fill} bytes, stream declares {stream.original_length}"
            )
        return out.getvalue()


def compress(data: bytes, params: Optional[CodecParams] = None) -> TokenStream:
    return Compressor(params or DEFAULT_PARAMS).compress_stream(io.BytesIO(data))


def decompress(stream: TokenStream, params: Optional[CodecParams] = None) -> bytes:
    return Decompressor(params or DEFAULT_PARAMS).decompress_stream(stream)
