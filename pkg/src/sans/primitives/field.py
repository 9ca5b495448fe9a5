"""Scalar field of the BN254 (BN128) pairing curve.

Field elements are plain Python ints in ``[0, R)``; this module only pins the
modulus and the canonical 32-byte little-endian encoding.
"""

from __future__ import annotations

from ..errors import EncodingError

#: Order of the BN254 G1/G2 groups; the circuit field.
R = 21888242871839275222246405745257275088548364400416034343698204186575808495617

FIELD_BYTES = 32

FieldElement = int


def is_canonical(x: int) -> bool:
    return isinstance(x, int) and 0 <= x < R


def encode(x: int) -> bytes:
    if not is_canonical(x):
        raise EncodingError(f"not a canonical field element: {x!r}")
    return x.to_bytes(FIELD_BYTES, "little")


def decode(data: bytes) -> int:
    if len(data) != FIELD_BYTES:
        raise EncodingError(f"field element must be {FIELD_BYTES} bytes, got {len(data)}")
    x = int.from_bytes(data, "little")
    if x >= R:
        raise EncodingError("field element encoding is not reduced")
    return x


def inv(x: int) -> int:
    if x % R == 0:
        raise ZeroDivisionError("inverse of zero")
    return pow(x, -1, R)
