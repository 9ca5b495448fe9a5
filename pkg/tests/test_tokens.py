import pytest

from sans.errors import RngFailure
from sans.primitives.field import R, encode
from sans.primitives.tokens import TOKEN_BYTES, sample_token


def test_samples_are_distinct_and_below_2_248():
    tokens = [sample_token() for _ in range(10_000)]
    assert len(set(tokens)) == len(tokens)
    assert all(0 <= t < 1 << 248 < R for t in tokens)
    assert all(len(encode(t)) == 32 for t in tokens[:100])


def test_uses_exactly_31_bytes_of_the_rng():
    calls = []

    def rng(n):
        calls.append(n)
        return b"\xff" * n

    assert sample_token(rng) == (1 << 248) - 1
    assert calls == [TOKEN_BYTES]


@pytest.mark.parametrize(
    "rng",
    [
        lambda n: (_ for _ in ()).throw(OSError("entropy pool gone")),
        lambda n: b"\x00" * (n - 1),
        lambda n: None,
    ],
    ids=["raises", "short", "none"],
)
def test_rng_failures_surface_as_rng_failure(rng):
    with pytest.raises(RngFailure):
        sample_token(rng)
