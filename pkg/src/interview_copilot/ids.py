"""Identifier generation: time-sortable ULIDs and content-derived ids."""

from __future__ import annotations

import hashlib
import os
import time

# Crockford base32, as used by ULID.
_ALPHABET = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


def _encode_base32(value: int, length: int) -> str:
    chars = []
    for _ in range(length):
        chars.append(_ALPHABET[value & 0x1F])
        value >>= 5
    return "".join(reversed(chars))


def new_ulid(now_ms: int | None = None) -> str:
    """Return a 26-char ULID: 48-bit ms timestamp + 80 bits of randomness.

    Lexicographic order follows creation time at ms granularity.
    """
    ts = int(time.time() * 1000) if now_ms is None else now_ms
    rand = int.from_bytes(os.urandom(10), "big")
    return _encode_base32(ts & ((1 << 48) - 1), 10) + _encode_base32(rand, 16)


def content_id(prefix: str, *parts: object) -> str:
    """Deterministic id derived from content parts.

    Used for entities whose identity is their content (segments, evidence,
    suggestions), so that re-running the same inputs reproduces the same ids.
    """
    digest = hashlib.sha1("\x1f".join(str(p) for p in parts).encode("utf-8"))
    return f"{prefix}-{digest.hexdigest()[:16]}"
