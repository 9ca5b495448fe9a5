import json
from pathlib import Path

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sans.errors import ArityTooLarge, EmptyInput, EncodingError
from sans.primitives import grain
from sans.primitives import poseidon_constants as vendored
from sans.primitives.field import R
from sans.primitives.poseidon import params_for, permute, poseidon_hash

VECTORS = json.loads((Path(__file__).parent / "vectors" / "poseidon.json").read_text())["vectors"]
felts = st.integers(min_value=0, max_value=R - 1)


@pytest.mark.parametrize("arity", [1, 2, 3, 4])
def test_at_least_ten_reference_vectors_per_arity(arity):
    assert sum(len(v["inputs"]) == arity for v in VECTORS) >= 10


@pytest.mark.parametrize("vec", VECTORS, ids=lambda v: f"n{len(v['inputs'])}")
def test_matches_reference_vectors(vec):
    assert poseidon_hash([int(x) for x in vec["inputs"]]) == int(vec["output"])


def test_hash_of_zero_is_the_reference_digest():
    assert poseidon_hash([0]) == 19014214495641488759237505126948346942972912379615652741039992445865937985820


@given(st.lists(felts, min_size=1, max_size=4))
@settings(max_examples=30)
def test_deterministic(xs):
    assert poseidon_hash(xs) == poseidon_hash(list(xs))


@given(felts, felts)
@settings(max_examples=30)
def test_order_sensitive(a, b):
    assume(a != b)
    assert poseidon_hash([a, b]) != poseidon_hash([b, a])


@given(st.lists(felts, min_size=1, max_size=4))
@settings(max_examples=20)
def test_hash_is_first_lane_of_the_matching_width_permutation(xs):
    assert poseidon_hash(xs) == permute([0, *xs])[0]
    assert len(permute([0, *xs])) == len(xs) + 1


def test_empty_input_rejected():
    with pytest.raises(EmptyInput):
        poseidon_hash([])


def test_arity_above_four_rejected():
    with pytest.raises(ArityTooLarge):
        poseidon_hash([1, 2, 3, 4, 5])


@pytest.mark.parametrize("bad", [R, R + 1, -1])
def test_non_canonical_input_rejected(bad):
    with pytest.raises(EncodingError):
        poseidon_hash([1, bad])


@pytest.mark.parametrize("t", [2, 3, 4, 5])
def test_vendored_constants_regenerate_identically(t):
    rc, mds = grain.generate(t)
    assert rc == vendored.ROUND_CONSTANTS[t]
    assert mds == vendored.MDS[t]
    p = params_for(t)
    assert p.round_constants == tuple(rc)
    assert len(rc) == t * p.rounds


@pytest.mark.parametrize("t,partial", [(2, 56), (3, 57), (4, 56), (5, 60)])
def test_round_counts(t, partial):
    p = params_for(t)
    assert (p.full_rounds, p.partial_rounds) == (8, partial)


def test_width_three_constants_match_published_table():
    p = params_for(3)
    assert p.round_constants[0] == 0x0EE9A592BA9A9518D05986D656F40C2114C4993C11BB29938D21D47304CD8E6E
    assert p.mds[0][0] == 0x109B7F411BA0E4C9B2B70CAF5C36A7B194BE7C11AD24378BFEDB68592BA8118B
