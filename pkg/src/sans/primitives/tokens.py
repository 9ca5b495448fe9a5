from __future__ import annotations

import secrets
from collections.abc import Callable

from ..errors import RngFailure

TOKEN_BYTES = 31

Rng = Callable[[int], bytes]


def random_bytes(rng: Rng | None, n: int) -> bytes:
    """Draw ``n`` bytes from ``rng`` (default: the OS CSPRNG), or raise RngFailure."""
    source = rng or secrets.token_bytes
    try:
        out = source(n)
    except Exception as exc:
        raise RngFailure(f"random source failed: {exc}") from exc
    if not isinstance(out, (bytes, bytearray)) or len(out) != n:
        raise RngFailure(f"random source returned {type(out).__name__} of wrong length")
    return bytes(out)


def sample_token(rng: Rng | None = None) -> int:
    """Uniform 31-byte token; always below 2^248 and hence below the field modulus."""
    return int.from_bytes(random_bytes(rng, TOKEN_BYTES), "little")
