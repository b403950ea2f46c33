from .params import CodecParams
from .buffer import GrowableBuffer, append_buffer, increase_buffer, read_buffer
from .lz77 import (
    Compressor,
    Decompressor,
    Token,
    TokenStream,
    compare_buffer,
    compress,
    decompress,
    search_buffer,
)
from .wire import MAGIC, deserialize_tokens, serialize_tokens

__all__ = [
    "CodecParams",
    "GrowableBuffer",
    "append_buffer",
    "increase_buffer",
    "read_buffer",
    "Compressor",
    "Decompressor",
    "Token",
    "TokenStream",
    "compare_buffer",
    "compress",
    "decompress",
    "search_buffer",
    "MAGIC",
    "serialize_tokens",
    "deserialize_tokens",
]
