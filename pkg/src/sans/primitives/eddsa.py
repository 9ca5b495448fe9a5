"""EdDSA over Baby Jubjub with a Poseidon challenge.

Signing key material is derived from a 32-byte seed with BLAKE2b-512: the low
half, reduced mod the subgroup order, is the secret scalar ``a``; the high half
is the nonce prefix.  For a message ``m`` (one field element):

    r = BLAKE2b-512(prefix || enc(m)) mod l
    R = r * B
    h = poseidon([poseidon([R.x, R.y, A.x, A.y]), m])
    s = r + h * a mod l

and ``(R, s)`` verifies iff ``s * B == R + h * A``.  The two-level challenge
keeps every Poseidon call within arity 4 so the same hash widths serve the
native code and the circuit.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field

from ..errors import EncodingError
from . import babyjubjub as bjj
from .field import FIELD_BYTES, R, decode, encode
from .poseidon import poseidon_hash

SEED_BYTES = 32
SIGNATURE_BYTES = 3 * FIELD_BYTES


@dataclass(frozen=True)
class SigningKeypair:
    seed: bytes = field(repr=False)
    scalar: int = field(repr=False)
    prefix: bytes = field(repr=False)
    pk: bjj.Point


@dataclass(frozen=True)
class Signature:
    R: bjj.Point
    s: int

    def encode(self) -> bytes:
        if not 0 <= self.s < bjj.ORDER:
            raise EncodingError("signature scalar out of range")
        return bjj.encode_point(self.R) + encode(self.s)

    @classmethod
    def decode(cls, data: bytes, *, check: bool = True) -> "Signature":
        if len(data) != SIGNATURE_BYTES:
            raise EncodingError(f"signature must be {SIGNATURE_BYTES} bytes, got {len(data)}")
        point = bjj.decode_point(data[: 2 * FIELD_BYTES], check=check)
        s = decode(data[2 * FIELD_BYTES :])
        if s >= bjj.ORDER:
            raise EncodingError("signature scalar is not reduced")
        return cls(point, s)


def keygen(seed: bytes) -> SigningKeypair:
    if len(seed) != SEED_BYTES:
        raise ValueError(f"seed must be {SEED_BYTES} bytes")
    digest = hashlib.blake2b(seed, digest_size=64).digest()
    scalar = int.from_bytes(digest[:32], "little") % bjj.ORDER
    while scalar == 0:  # probability ~2^-251
        digest = hashlib.blake2b(digest, digest_size=64).digest()
        scalar = int.from_bytes(digest[:32], "little") % bjj.ORDER
    return SigningKeypair(seed, scalar, digest[32:], bjj.mul(scalar, bjj.BASE8))


def challenge(R_point: bjj.Point, pk: bjj.Point, msg: int) -> int:
    return poseidon_hash([poseidon_hash([R_point[0], R_point[1], pk[0], pk[1]]), msg])


def sign(kp: SigningKeypair, msg: int) -> Signature:
    nonce = hashlib.blake2b(kp.prefix + encode(msg), digest_size=64).digest()
    r = int.from_bytes(nonce, "little") % bjj.ORDER
    R_point = bjj.mul(r, bjj.BASE8)
    h = challenge(R_point, kp.pk, msg)
    return Signature(R_point, (r + h * kp.scalar) % bjj.ORDER)


def verify(pk: bjj.Point, msg: int, sig: Signature) -> bool:
    """Check ``s * B == R + h * pk``.

    Raises :class:`~sans.errors.MalformedPoint` if ``pk`` or ``R`` is off the
    curve or outside the prime-order subgroup.
    """
    bjj.check_point(pk)
    bjj.check_point(sig.R)
    if not (0 <= msg < R) or not (0 <= sig.s < bjj.ORDER):
        return False
    h = challenge(sig.R, pk, msg)
    lhs = bjj.mul(sig.s, bjj.BASE8)
    rhs = bjj.add(sig.R, bjj.mul(h, pk))
    return hmac.compare_digest(bjj.encode_point(lhs), bjj.encode_point(rhs))
