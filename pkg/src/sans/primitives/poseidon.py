"""Poseidon hash over the BN254 scalar field (circomlib-compatible).

``poseidon_hash([x1, ..., xk])`` runs the width ``k + 1`` permutation on
``[0, x1, ..., xk]`` and returns the first state element.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

from ..errors import ArityTooLarge, EmptyInput, EncodingError
from . import poseidon_constants as _vendored
from .field import R

MAX_ARITY = 4


@dataclass(frozen=True)
class PoseidonParams:
    t: int
    full_rounds: int
    partial_rounds: int
    round_constants: tuple[int, ...]
    mds: tuple[tuple[int, ...], ...]

    @property
    def rounds(self) -> int:
        return self.full_rounds + self.partial_rounds

    def is_full_round(self, r: int) -> bool:
        half = self.full_rounds // 2
        return r < half or r >= half + self.partial_rounds


@lru_cache(maxsize=None)
def params_for(t: int) -> PoseidonParams:
    if t not in _vendored.ROUND_CONSTANTS:
        raise ArityTooLarge(f"no Poseidon parameters for width {t}")
    return PoseidonParams(
        t=t,
        full_rounds=_vendored.FULL_ROUNDS,
        partial_rounds=_vendored.PARTIAL_ROUNDS[t],
        round_constants=tuple(_vendored.ROUND_CONSTANTS[t]),
        mds=tuple(tuple(row) for row in _vendored.MDS[t]),
    )


def permute(state: Sequence[int]) -> list[int]:
    p = params_for(len(state))
    t = p.t
    s = list(state)
    k = 0
    for r in range(p.rounds):
        s = [(x + p.round_constants[k + i]) % R for i, x in enumerate(s)]
        k += t
        if p.is_full_round(r):
            s = [pow(x, 5, R) for x in s]
        else:
            s[0] = pow(s[0], 5, R)
        s = [sum(m * x for m, x in zip(row, s)) % R for row in p.mds]
    return s


def poseidon_hash(inputs: Sequence[int]) -> int:
    if len(inputs) == 0:
        raise EmptyInput("poseidon_hash needs at least one input")
    if len(inputs) > MAX_ARITY:
        raise ArityTooLarge(f"arity {len(inputs)} exceeds {MAX_ARITY}")
    for x in inputs:
        if not (isinstance(x, int) and 0 <= x < R):
            raise EncodingError(f"non-canonical hash input {x!r}")
    return permute([0, *inputs])[0]
