import json
import os
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sans.errors import EncodingError, MalformedPoint
from sans.primitives import babyjubjub as bjj
from sans.primitives import eddsa
from sans.primitives.field import R

ORACLE = json.loads((Path(__file__).parent / "vectors" / "eddsa.json").read_text())
felts = st.integers(min_value=0, max_value=R - 1)
seeds = st.binary(min_size=32, max_size=32)


def _point(xy):
    return (int(xy[0]), int(xy[1]))


def test_oracle_curve_constants_agree():
    assert _point(ORACLE["base8"]) == bjj.BASE8
    assert int(ORACLE["sub_order"]) == bjj.ORDER


def test_oracle_has_at_least_a_hundred_messages():
    assert len(ORACLE["vectors"]) >= 100


@pytest.mark.parametrize("vec", ORACLE["vectors"], ids=lambda v: v["seed"][:8] + ":" + v["msg"][:6])
def test_signatures_match_reference_bit_for_bit(vec):
    kp = eddsa.keygen(bytes.fromhex(vec["seed"]))
    msg = int(vec["msg"])
    sig = eddsa.sign(kp, msg)
    assert kp.pk == _point(vec["pk"])
    assert sig.R == _point(vec["R"])
    assert sig.s == int(vec["s"])
    assert eddsa.verify(kp.pk, msg, eddsa.Signature(_point(vec["R"]), int(vec["s"])))


def test_keygen_is_deterministic():
    seed = os.urandom(32)
    a, b = eddsa.keygen(seed), eddsa.keygen(seed)
    assert a == b
    assert bjj.on_curve(a.pk) and bjj.in_subgroup(a.pk)
    assert a.pk == bjj.mul(a.scalar, bjj.BASE8)


def test_distinct_seeds_give_distinct_keys():
    pks = {eddsa.keygen(os.urandom(32)).pk for _ in range(1000)}
    assert len(pks) == 1000


def test_keygen_rejects_wrong_seed_length():
    with pytest.raises(ValueError):
        eddsa.keygen(bytes(31))


def test_secret_material_not_in_repr():
    kp = eddsa.keygen(bytes(32))
    text = repr(kp)
    assert kp.seed.hex() not in text and str(kp.scalar) not in text


@given(seeds, felts)
@settings(max_examples=20, deadline=None)
def test_sign_then_verify(seed, msg):
    kp = eddsa.keygen(seed)
    sig = eddsa.sign(kp, msg)
    assert eddsa.verify(kp.pk, msg, sig)
    assert eddsa.sign(kp, msg) == sig  # deterministic nonce
    assert eddsa.Signature.decode(sig.encode()) == sig


@given(seeds, felts, felts)
@settings(max_examples=10, deadline=None)
def test_wrong_message_fails(seed, m, m2):
    if m == m2:
        m2 = (m + 1) % R
    kp = eddsa.keygen(seed)
    assert not eddsa.verify(kp.pk, m2, eddsa.sign(kp, m))


def test_incremented_s_fails():
    kp = eddsa.keygen(bytes(range(32)))
    sig = eddsa.sign(kp, 42)
    assert not eddsa.verify(kp.pk, 42, eddsa.Signature(sig.R, (sig.s + 1) % bjj.ORDER))


def test_cross_key_matrix():
    kps = [eddsa.keygen(os.urandom(32)) for _ in range(5)]
    msg = random.randrange(R)
    sigs = [eddsa.sign(kp, msg) for kp in kps]
    for i, kp in enumerate(kps):
        for j, sig in enumerate(sigs):
            assert eddsa.verify(kp.pk, msg, sig) == (i == j)


def test_single_bit_flips_never_verify():
    rng = random.Random(7)
    for _ in range(100):
        kp = eddsa.keygen(rng.randbytes(32))
        msg = rng.randrange(R)
        sig = eddsa.sign(kp, msg)
        target = rng.choice(["Rx", "Ry", "s", "m", "pkx", "pky"])
        bit = 1 << rng.randrange(254 if target != "s" else 251)
        R_pt, s, m, pk = list(sig.R), sig.s, msg, list(kp.pk)
        if target == "Rx":
            R_pt[0] ^= bit
        elif target == "Ry":
            R_pt[1] ^= bit
        elif target == "s":
            s ^= bit
        elif target == "m":
            m ^= bit
        elif target == "pkx":
            pk[0] ^= bit
        else:
            pk[1] ^= bit
        try:
            assert not eddsa.verify(tuple(pk), m, eddsa.Signature(tuple(R_pt), s))
        except MalformedPoint:
            pass


def test_off_curve_public_key_raises():
    kp = eddsa.keygen(bytes(32))
    sig = eddsa.sign(kp, 1)
    with pytest.raises(MalformedPoint):
        eddsa.verify((kp.pk[0], kp.pk[1] + 1), 1, sig)


def test_low_order_nonce_point_raises():
    kp = eddsa.keygen(bytes(32))
    sig = eddsa.sign(kp, 1)
    with pytest.raises(MalformedPoint):
        eddsa.verify(kp.pk, 1, eddsa.Signature((0, R - 1), sig.s))


def test_signature_decode_rejects_unreduced_scalar():
    kp = eddsa.keygen(bytes(32))
    data = eddsa.sign(kp, 5).encode()
    with pytest.raises(EncodingError):
        eddsa.Signature.decode(data[:64] + bjj.ORDER.to_bytes(32, "little"))
    with pytest.raises(EncodingError):
        eddsa.Signature.decode(data[:95])
