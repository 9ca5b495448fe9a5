"""Groth16 setup, proving and verification over a compiled circuit.

The pairing work runs in the bundled arkworks extension (``sans._groth16``,
BN254).  This module owns the contract around it: fingerprint binding between
circuit, keys and proofs, the versioned ``.pk`` / ``.vk`` / ``.proof``
containers, and the error taxonomy.

Container layout (all integers big-endian)::

    magic     4  b"SANS"
    version   2  FORMAT_VERSION
    kind      1  1 = proving key, 2 = verifying key, 3 = proof
    curve     1  1 = BN254
    fprint   32  SHA-256 circuit fingerprint
    length    4  payload length
    payload      compressed arkworks encoding
"""

from __future__ import annotations

import struct
import weakref
from collections.abc import Sequence
from dataclasses import dataclass, field

from . import _groth16
from .circuit.auth import WitnessAssignment, build_circuit
from .circuit.r1cs import Circuit
from .errors import (
    BadMagic,
    EncodingError,
    FingerprintMismatch,
    FormatError,
    MalformedProof,
    ProvingFailure,
    TruncatedData,
    UnsupportedVersion,
)
from .primitives.field import R, encode, is_canonical
from .primitives.tokens import Rng, random_bytes

MAGIC = b"SANS"
FORMAT_VERSION = 1
CURVE_BN254 = 1

KIND_PK, KIND_VK, KIND_PROOF = 1, 2, 3
_KIND_NAMES = {KIND_PK: "proving key", KIND_VK: "verifying key", KIND_PROOF: "proof"}

_HEADER = struct.Struct(">4sHBB32sI")
HEADER_BYTES = _HEADER.size

PROOF_BYTES = _groth16.proof_size()


def pack(kind: int, fingerprint: bytes, payload: bytes) -> bytes:
    return _HEADER.pack(MAGIC, FORMAT_VERSION, kind, CURVE_BN254, fingerprint, len(payload)) + payload


def unpack(data: bytes, kind: int, expected_fingerprint: bytes | None = None) -> tuple[bytes, bytes]:
    """Validate a container and return ``(fingerprint, payload)``."""
    if data[:4] != MAGIC[: len(data[:4])]:
        raise BadMagic("not a SANS container")
    if len(data) < HEADER_BYTES:
        raise TruncatedData("container shorter than its header")
    _, version, got_kind, curve, fingerprint, length = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"format version {version} (supported: {FORMAT_VERSION})")
    if curve != CURVE_BN254:
        raise UnsupportedVersion(f"curve id {curve} is not supported")
    if got_kind != kind:
        raise FormatError(
            f"expected a {_KIND_NAMES.get(kind)}, found a {_KIND_NAMES.get(got_kind, got_kind)}"
        )
    payload = data[HEADER_BYTES:]
    if len(payload) < length:
        raise TruncatedData(f"payload has {len(payload)} of {length} bytes")
    if len(payload) > length:
        raise FormatError("trailing bytes after payload")
    if expected_fingerprint is not None and fingerprint != expected_fingerprint:
        raise FingerprintMismatch("container was made for a different circuit")
    return fingerprint, payload


@dataclass(frozen=True)
class Proof:
    data: bytes
    fingerprint: bytes = field(default=b"", compare=False)

    def to_bytes(self) -> bytes:
        return pack(KIND_PROOF, self.fingerprint, self.data)

    @classmethod
    def from_bytes(cls, data: bytes, expected_fingerprint: bytes | None = None) -> "Proof":
        fp, payload = unpack(data, KIND_PROOF, expected_fingerprint)
        if len(payload) != PROOF_BYTES:
            raise MalformedProof(f"proof payload must be {PROOF_BYTES} bytes")
        return cls(payload, fp)


@dataclass(frozen=True, eq=False)
class VerifyingKey:
    fingerprint: bytes
    native: _groth16.VerifyingParams = field(repr=False)

    @property
    def payload(self) -> bytes:
        return self.native.to_bytes()

    def to_bytes(self) -> bytes:
        return pack(KIND_VK, self.fingerprint, self.payload)

    @classmethod
    def from_bytes(cls, data: bytes, expected_fingerprint: bytes | None = None) -> "VerifyingKey":
        fp, payload = unpack(data, KIND_VK, expected_fingerprint)
        try:
            native = _groth16.VerifyingParams.from_bytes(payload)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
        return cls(fp, native)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VerifyingKey) and self.to_bytes() == other.to_bytes()

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class ProvingKey:
    fingerprint: bytes
    native: _groth16.ProvingParams = field(repr=False)

    def to_bytes(self) -> bytes:
        return pack(KIND_PK, self.fingerprint, self.native.to_bytes())

    @classmethod
    def from_bytes(
        cls, data: bytes, expected_fingerprint: bytes | None = None, *, validate: bool = True
    ) -> "ProvingKey":
        fp, payload = unpack(data, KIND_PK, expected_fingerprint)
        try:
            native = _groth16.ProvingParams.from_bytes(payload, validate)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
        return cls(fp, native)

    def verifying_key(self) -> VerifyingKey:
        return VerifyingKey(self.fingerprint, self.native.verifying_params())


@dataclass(frozen=True, eq=False)
class ProvingArtifacts:
    """Both CRS halves from one setup run."""

    proving: ProvingKey
    verifying: VerifyingKey

    @property
    def fingerprint(self) -> bytes:
        return self.proving.fingerprint

    @classmethod
    def load(
        cls, pk_bytes: bytes, vk_bytes: bytes, expected_fingerprint: bytes | None = None
    ) -> "ProvingArtifacts":
        pk = ProvingKey.from_bytes(pk_bytes, expected_fingerprint)
        vk = VerifyingKey.from_bytes(vk_bytes, expected_fingerprint)
        if pk.fingerprint != vk.fingerprint:
            raise FingerprintMismatch("proving and verifying keys are for different circuits")
        if pk.verifying_key().payload != vk.payload:
            raise FingerprintMismatch("proving and verifying keys come from different setups")
        return cls(pk, vk)


_native_circuits: "weakref.WeakKeyDictionary[Circuit, _groth16.Circuit]" = weakref.WeakKeyDictionary()


def native_circuit(layout: Circuit) -> _groth16.Circuit:
    nc = _native_circuits.get(layout)
    if nc is None:
        a, b, c = layout.matrices()
        nc = _groth16.Circuit(layout.num_public, layout.num_wires, a, b, c)
        _native_circuits[layout] = nc
    return nc


def setup(layout: Circuit, rng: Rng | None = None) -> ProvingArtifacts:
    """Fresh single-party setup; trapdoor scalars never leave the extension."""
    seed = random_bytes(rng, 32)
    native = _groth16.setup(native_circuit(layout), seed)
    pk = ProvingKey(layout.fingerprint(), native)
    return ProvingArtifacts(pk, pk.verifying_key())


def prove(
    params: ProvingKey,
    w: WitnessAssignment | Sequence[int],
    rng: Rng | None = None,
    *,
    layout: Circuit | None = None,
    threads: int | None = None,
) -> Proof:
    layout = layout or build_circuit()
    if params.fingerprint != layout.fingerprint():
        raise FingerprintMismatch("proving key does not belong to this circuit")
    values = w.values if isinstance(w, WitnessAssignment) else w
    seed = random_bytes(rng, 32)
    try:
        data = _groth16.prove(
            native_circuit(layout), params.native, [encode(x % R) for x in values], seed, threads or 0
        )
    except (ValueError, RuntimeError) as exc:
        raise ProvingFailure(str(exc)) from exc
    return Proof(bytes(data), params.fingerprint)


def verify(params: VerifyingKey, public_inputs: Sequence[int], proof: Proof | bytes) -> bool:
    """Pairing check of ``proof`` against the ordered public inputs.

    Returns False for a well-formed proof that does not verify; raises
    MalformedProof when the proof bytes are not canonical group elements.
    """
    data = proof.data if isinstance(proof, Proof) else bytes(proof)
    if len(public_inputs) != params.native.num_public:
        raise ValueError(f"expected {params.native.num_public} public inputs, got {len(public_inputs)}")
    if not all(is_canonical(x) for x in public_inputs):
        raise EncodingError("public inputs must be canonical field elements")
    if len(data) != PROOF_BYTES:
        raise MalformedProof(f"proof must be {PROOF_BYTES} bytes, got {len(data)}")
    try:
        return _groth16.verify(params.native, [encode(x) for x in public_inputs], data)
    except ValueError as exc:
        raise MalformedProof(str(exc)) from exc

