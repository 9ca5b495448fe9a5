import pytest
from hypothesis import given
from hypothesis import strategies as st

from sans.errors import EncodingError
from sans.primitives.field import FIELD_BYTES, R, decode, encode, is_canonical

field_elements = st.integers(min_value=0, max_value=R - 1)


@given(field_elements)
def test_encode_decode_roundtrip(x):
    data = encode(x)
    assert len(data) == FIELD_BYTES
    assert decode(data) == x


def test_encoding_is_little_endian():
    assert encode(1) == b"\x01" + bytes(31)
    assert encode(R - 1)[-1] == (R - 1) >> 248


@pytest.mark.parametrize("k", range(33))
def test_decode_rejects_values_at_or_above_modulus(k):
    with pytest.raises(EncodingError):
        decode((R + k).to_bytes(32, "little"))


@pytest.mark.parametrize("n", [0, 31, 33])
def test_decode_rejects_wrong_length(n):
    with pytest.raises(EncodingError):
        decode(bytes(n))


@pytest.mark.parametrize("x", [-1, R, R + 5])
def test_encode_rejects_non_canonical(x):
    assert not is_canonical(x)
    with pytest.raises(EncodingError):
        encode(x)
