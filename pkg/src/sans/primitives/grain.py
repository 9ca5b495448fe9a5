"""Poseidon parameter derivation from the Grain LFSR in self-shrinking mode.

This reproduces the reference parameter script for prime fields with the
``x^5`` S-box (field flag 1, S-box flag 0), which is the parameter set used
by circomlib and most BN254 circuits.  Run ``scripts/gen_poseidon_constants.py``
to regenerate the vendored tables in :mod:`sans.primitives.poseidon_constants`.
"""

from __future__ import annotations

from collections.abc import Iterator

from .field import R

FULL_ROUNDS = 8
#: partial rounds for 128-bit security over BN254, indexed by state width
PARTIAL_ROUNDS = {2: 56, 3: 57, 4: 56, 5: 60}
FIELD_BITS = 254


def _bits(value: int, width: int) -> list[int]:
    return [int(b) for b in bin(value)[2:].zfill(width)]


def grain_bits(t: int, full_rounds: int, partial_rounds: int, n: int = FIELD_BITS) -> Iterator[int]:
    state = (
        _bits(1, 2)  # prime field
        + _bits(0, 4)  # x^alpha S-box
        + _bits(n, 12)
        + _bits(t, 12)
        + _bits(full_rounds, 10)
        + _bits(partial_rounds, 10)
        + [1] * 30
    )

    def step() -> int:
        bit = state[62] ^ state[51] ^ state[38] ^ state[23] ^ state[13] ^ state[0]
        state.pop(0)
        state.append(bit)
        return bit

    for _ in range(160):
        step()
    while True:
        first, second = step(), step()
        if first:
            yield second


def _take(gen: Iterator[int], n: int) -> int:
    value = 0
    for _ in range(n):
        value = (value << 1) | next(gen)
    return value


def generate(t: int) -> tuple[list[int], list[list[int]]]:
    """Return ``(round_constants, mds)`` for state width ``t``.

    Round constants are rejection-sampled below the modulus; the MDS matrix
    is the Cauchy matrix ``1 / (x_i + y_j)`` over the next ``2t`` draws.
    """
    rp = PARTIAL_ROUNDS[t]
    gen = grain_bits(t, FULL_ROUNDS, rp)
    constants: list[int] = []
    while len(constants) < t * (FULL_ROUNDS + rp):
        v = _take(gen, FIELD_BITS)
        if v < R:
            constants.append(v)

    while True:
        draws = [_take(gen, FIELD_BITS) % R for _ in range(2 * t)]
        while len(set(draws)) != len(draws):
            draws = [_take(gen, FIELD_BITS) % R for _ in range(2 * t)]
        xs, ys = draws[:t], draws[t:]
        if all((x + y) % R for x in xs for y in ys):
            break
    mds = [[pow(x + y, -1, R) for y in ys] for x in xs]
    return constants, mds
