"""Native cryptography: BN254 scalar field, Poseidon, Baby Jubjub EdDSA, tokens."""

from . import babyjubjub
from .eddsa import Signature, SigningKeypair, keygen, sign, verify
from .field import FIELD_BYTES, R, decode, encode
from .poseidon import PoseidonParams, params_for, poseidon_hash
from .tokens import TOKEN_BYTES, sample_token

__all__ = [
    "FIELD_BYTES",
    "R",
    "TOKEN_BYTES",
    "PoseidonParams",
    "Signature",
    "SigningKeypair",
    "babyjubjub",
    "decode",
    "encode",
    "keygen",
    "params_for",
    "poseidon_hash",
    "sample_token",
    "sign",
    "verify",
]
