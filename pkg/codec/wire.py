"""
CMX1 binary token-stream format.

    magic           4 bytes   b"CMX1"
    original_length 8 bytes   big-endian unsigned
    tokens          5 bytes each: offset (2, BE), length (2, BE), literal (1)
"""

import struct

from codec.lz77 import Token, TokenStream
from errors import BadMagicError, TokenInvariantError, TruncatedStreamError

MAGIC = b"CMX1"
HEADER = struct.Struct(">4sQ")
TOKEN = struct.Struct(">HHB")


def serialize_tokens(stream: TokenStream) -> bytes:
    if stream.original_length < 0:
        raise TokenInvariantError("original_length must be non-negative")

    out = bytearray(HEADER.pack(MAGIC, stream.original_length))
    for token in stream.tokens:
        offset, length, literal = token
        if (offset == 0) != (length == 0):
            raise TokenInvariantError(f"offset/length must be zero together: {tuple(token)}")
        try:
            out += TOKEN.pack(offset, length, literal)
        except struct.error as e:
            raise TokenInvariantError(f"token {tuple(token)} does not fit the wire format: {e}") from e
    return bytes(out)


def deserialize_tokens(data: bytes) -> TokenStream:
    if len(data) < HEADER.size:
        raise TruncatedStreamError(f"stream is {len(data)} bytes, header needs {HEADER.size}")

    magic, original_length = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")

    body = len(data) - HEADER.size
    if body % TOKEN.size:
        raise TruncatedStreamError(f"{body % TOKEN.size} trailing bytes after the last whole token")

    tokens = []
    for offset, length, literal in TOKEN.iter_unpack(data[HEADER.size:]):
        if (offset == 0) != (length == 0):
            raise TokenInvariantError(f"offset/length must be zero together: {(offset, length, literal)}")
        tokens.append(Token(offset, length, literal))

    return TokenStream(original_length=original_length, tokens=tokens)
