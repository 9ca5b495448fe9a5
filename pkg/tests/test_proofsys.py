import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sans import _groth16, proofsys
from sans.circuit import assign_witness
from sans.errors import (
    BadMagic,
    EncodingError,
    FingerprintMismatch,
    FormatError,
    MalformedProof,
    SansError,
    TruncatedData,
    UnsupportedVersion,
)
from sans.primitives.field import R

@pytest.fixture(scope="module")
def proved(cred, artifacts, layout):
    w = assign_witness(cred, 1234, layout)
    return w, proofsys.prove(artifacts.proving, w)


def test_honest_proof_verifies(proved, artifacts):
    w, proof = proved
    assert len(proof.data) == proofsys.PROOF_BYTES == 128
    assert proofsys.verify(artifacts.verifying, w.public_inputs, proof)


@pytest.mark.parametrize("slot", range(5))
def test_perturbed_public_input_fails(proved, artifacts, slot):
    w, proof = proved
    pub = list(w.public_inputs)
    pub[slot] = (pub[slot] + 1) % R
    assert not proofsys.verify(artifacts.verifying, pub, proof)


def test_proof_from_another_setup_fails(proved, other_artifacts):
    w, proof = proved
    assert not proofsys.verify(other_artifacts.verifying, w.public_inputs, proof)


def test_proofs_are_rerandomized(proved, artifacts):
    w, proof = proved
    again = proofsys.prove(artifacts.proving, w)
    assert again.data != proof.data
    assert proofsys.verify(artifacts.verifying, w.public_inputs, again)


@pytest.mark.parametrize("threads", [1, 2])
def test_thread_budget_does_not_change_validity(proved, artifacts, threads):
    w, _ = proved
    proof = proofsys.prove(artifacts.proving, w, threads=threads)
    assert proofsys.verify(artifacts.verifying, w.public_inputs, proof)


def test_verify_input_validation(proved, artifacts):
    w, proof = proved
    with pytest.raises(ValueError):
        proofsys.verify(artifacts.verifying, w.public_inputs[:4], proof)
    with pytest.raises(EncodingError):
        proofsys.verify(artifacts.verifying, [R, *w.public_inputs[1:]], proof)
    with pytest.raises(MalformedProof):
        proofsys.verify(artifacts.verifying, w.public_inputs, proof.data[:-1])


def test_prove_rejects_foreign_key(proved, artifacts):
    w, _ = proved
    foreign = proofsys.ProvingKey(b"\x00" * 32, artifacts.proving.native)
    with pytest.raises(FingerprintMismatch):
        proofsys.prove(foreign, w)


def test_setup_exposes_no_trapdoor():
    names = {n.lower() for n in dir(_groth16) + dir(_groth16.ProvingParams) + dir(_groth16.VerifyingParams)}
    for secret in ("tau", "toxic", "trapdoor", "alpha", "beta", "gamma", "delta"):
        assert not any(secret in n for n in names)


# containers


def test_key_and_proof_roundtrip(proved, artifacts):
    _, proof = proved
    pk_bytes, vk_bytes = artifacts.proving.to_bytes(), artifacts.verifying.to_bytes()
    loaded = proofsys.ProvingArtifacts.load(pk_bytes, vk_bytes, artifacts.fingerprint)
    assert loaded.proving.to_bytes() == pk_bytes
    assert loaded.verifying == artifacts.verifying
    assert proofsys.Proof.from_bytes(proof.to_bytes(), artifacts.fingerprint) == proof


def test_header_layout(artifacts):
    data = artifacts.verifying.to_bytes()
    magic, version, kind, curve, fp, n = struct.unpack_from(">4sHBB32sI", data)
    assert (magic, version, kind, curve) == (b"SANS", 1, proofsys.KIND_VK, proofsys.CURVE_BN254)
    assert fp == artifacts.fingerprint
    assert n == len(data) - proofsys.HEADER_BYTES


def test_mixed_setups_rejected(artifacts, other_artifacts):
    with pytest.raises(FingerprintMismatch):
        proofsys.ProvingArtifacts.load(artifacts.proving.to_bytes(), other_artifacts.verifying.to_bytes())


def test_fingerprint_mismatch_on_load(artifacts):
    with pytest.raises(FingerprintMismatch):
        proofsys.VerifyingKey.from_bytes(artifacts.verifying.to_bytes(), b"\x01" * 32)


def _patch(data, offset, fmt, value):
    out = bytearray(data)
    struct.pack_into(fmt, out, offset, value)
    return bytes(out)


def test_container_errors(artifacts, proved):
    vk = artifacts.verifying.to_bytes()
    with pytest.raises(BadMagic):
        proofsys.VerifyingKey.from_bytes(b"XANS" + vk[4:])
    with pytest.raises(UnsupportedVersion):
        proofsys.VerifyingKey.from_bytes(_patch(vk, 4, ">H", 2))
    with pytest.raises(UnsupportedVersion):
        proofsys.VerifyingKey.from_bytes(_patch(vk, 7, ">B", 2))
    with pytest.raises(FormatError):
        proofsys.Proof.from_bytes(vk)  # a key is not a proof
    with pytest.raises(FormatError):
        proofsys.VerifyingKey.from_bytes(vk + b"\x00")
    with pytest.raises(MalformedProof):
        proofsys.Proof.from_bytes(proofsys.pack(proofsys.KIND_PROOF, artifacts.fingerprint, b"\x00" * 64))


def test_every_truncation_is_detected(artifacts, proved):
    _, proof = proved
    for blob, loader in ((artifacts.verifying.to_bytes(), proofsys.VerifyingKey), (proof.to_bytes(), proofsys.Proof)):
        for n in range(len(blob)):
            with pytest.raises((TruncatedData, BadMagic)):
                loader.from_bytes(blob[:n])


@given(st.binary(max_size=600))
@settings(max_examples=200)
def test_random_bytes_never_crash_the_decoders(data):
    for loader in (proofsys.Proof, proofsys.VerifyingKey):
        try:
            loader.from_bytes(data)
        except SansError:
            pass


@given(data=st.data())
@settings(max_examples=60, deadline=None)
def test_mutated_vk_payload_is_rejected_or_harmless(artifacts, proved, data):
    w, proof = proved
    vk = bytearray(artifacts.verifying.to_bytes())
    i = data.draw(st.integers(proofsys.HEADER_BYTES, len(vk) - 1))
    vk[i] ^= 1 << data.draw(st.integers(0, 7))
    try:
        key = proofsys.VerifyingKey.from_bytes(bytes(vk))
    except FormatError:
        return
    assert not proofsys.verify(key, w.public_inputs, proof)


@given(data=st.data())
@settings(max_examples=60, deadline=None)
def test_bit_flipped_proof_never_verifies(artifacts, proved, data):
    w, proof = proved
    raw = bytearray(proof.data)
    i = data.draw(st.integers(0, len(raw) - 1))
    raw[i] ^= 1 << data.draw(st.integers(0, 7))
    try:
        assert not proofsys.verify(artifacts.verifying, w.public_inputs, bytes(raw))
    except MalformedProof:
        pass
