import base64
import binascii
import re

from errors import BadBase64PaddingError, InvalidBase64CharacterError

FNV64_OFFSET_BASIS = 0xcbf29ce484222325
FNV64_PRIME = 0x100000001b3
_FNV64_MASK = 0xffffffffffffffff

_B64_ALPHABET = re.compile(r"[A-Za-z0-9+/=]*")
_B64_PADDING = re.compile(r"[A-Za-z0-9+/]*={0,2}")


def encode_base64(data: bytes) -> str:
    """Encode bytes to standard padded base64 text."""
    return base64.b64encode(data).decode("ascii")


def decode_base64(text: str) -> bytes:
    """Decode standard padded base64 text, rejecting anything else."""
    if not _B64_ALPHABET.fullmatch(text):
        raise InvalidBase64CharacterError("base64 text contains characters outside the alphabet")
    if len(text) % 4 or not _B64_PADDING.fullmatch(text):
        raise BadBase64PaddingError("base64 text is not correctly padded")
    try:
        return base64.b64decode(text, validate=True)
    except binascii.Error as e:
        raise BadBase64PaddingError(str(e)) from e


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a digest."""
    h = FNV64_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _FNV64_MASK
    return h


def format_digest(digest: int) -> str:
    return f"{digest:016x}"
