"""Baby Jubjub: the twisted Edwards curve embedded in the BN254 scalar field.

``a*x^2 + y^2 = 1 + d*x^2*y^2`` with ``a = 168700`` and ``d = 168696``.
``d`` is a non-square and ``a`` a square, so the addition law below is
complete; the identity is ``(0, 1)``.  All points are affine ``(x, y)`` tuples.
"""

from __future__ import annotations

from ..errors import EncodingError, MalformedPoint
from .field import FIELD_BYTES, R, decode, encode

A = 168700
D = 168696

#: order of the prime subgroup generated by BASE8
ORDER = 2736030358979909402780800718157159386076813972158567259200215660948447373041
COFACTOR = 8

BASE8 = (
    5299619240641551281634865583518297030282874472190772894086521144482721001553,
    16950150798460657717958625567821834550301663161624707787222815936182638968203,
)
IDENTITY = (0, 1)

Point = tuple[int, int]
POINT_BYTES = 2 * FIELD_BYTES


def on_curve(p: Point) -> bool:
    x, y = p
    if not (0 <= x < R and 0 <= y < R):
        return False
    xx, yy = x * x % R, y * y % R
    return (A * xx + yy - 1 - D * xx * yy) % R == 0


def add(p: Point, q: Point) -> Point:
    x1, y1 = p
    x2, y2 = q
    k = D * x1 * x2 * y1 * y2 % R
    x3 = (x1 * y2 + y1 * x2) * pow(1 + k, -1, R) % R
    y3 = (y1 * y2 - A * x1 * x2) * pow(1 - k, -1, R) % R
    return x3, y3


def neg(p: Point) -> Point:
    return (-p[0]) % R, p[1]


def _ext_add(p: tuple, q: tuple) -> tuple:
    # extended twisted Edwards coordinates, unified add-2008-hwcd
    x1, y1, z1, t1 = p
    x2, y2, z2, t2 = q
    a = x1 * x2 % R
    b = y1 * y2 % R
    c = D * t1 * t2 % R
    d = z1 * z2 % R
    e = ((x1 + y1) * (x2 + y2) - a - b) % R
    f = (d - c) % R
    g = (d + c) % R
    h = (b - A * a) % R
    return e * f % R, g * h % R, f * g % R, e * h % R


def mul(k: int, p: Point) -> Point:
    """``k * p`` by a fixed-length Montgomery ladder (256 steps for any k < 2^256)."""
    if k < 0:
        return mul(-k, neg(p))
    r0 = (0, 1, 1, 0)
    r1 = (p[0], p[1], 1, p[0] * p[1] % R)
    for i in reversed(range(max(256, k.bit_length()))):
        if (k >> i) & 1:
            r0, r1 = _ext_add(r0, r1), _ext_add(r1, r1)
        else:
            r0, r1 = _ext_add(r0, r0), _ext_add(r0, r1)
    x, y, z, _ = r0
    zi = pow(z, -1, R)
    return x * zi % R, y * zi % R


def in_subgroup(p: Point) -> bool:
    return on_curve(p) and mul(ORDER, p) == IDENTITY


def check_point(p: Point) -> Point:
    if not on_curve(p):
        raise MalformedPoint("point is not on Baby Jubjub")
    if mul(ORDER, p) != IDENTITY:
        raise MalformedPoint("point is outside the prime-order subgroup")
    return p


def encode_point(p: Point) -> bytes:
    return encode(p[0]) + encode(p[1])


def decode_point(data: bytes, *, check: bool = True) -> Point:
    if len(data) != POINT_BYTES:
        raise EncodingError(f"point must be {POINT_BYTES} bytes, got {len(data)}")
    p = (decode(data[:FIELD_BYTES]), decode(data[FIELD_BYTES:]))
    return check_point(p) if check else p
