import json
import threading
from dataclasses import fields, replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NOW, MockClock
from sans.errors import BadMagic, ClockError, MalformedCredential, RequirementsNotMet, UnsupportedVersion
from sans.primitives import eddsa
from sans.primitives.field import R
from sans.protocol import (
    CREDENTIAL_BYTES,
    Code,
    Credential,
    ReplayCache,
    SharedSecretPolicy,
    VerifierConfig,
    VerifierState,
    authenticate_prove,
    authenticate_verify,
    derive_challenge,
    quantize_expiry,
    register,
    sweep_cache,
)

DAY = 86_400


# challenge and expiry


@pytest.mark.parametrize("t,c", [(0, 0), (59, 0), (60, 1), (1592224496, 26537074)])
def test_derive_challenge(t, c):
    assert derive_challenge(t) == c


def test_challenge_is_small_for_any_realistic_date():
    year_3000 = 32_503_680_000
    assert derive_challenge(year_3000) < 1 << 40


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        derive_challenge(-1)


@given(st.integers(min_value=0, max_value=1 << 40))
def test_expiry_rounds_up_to_utc_midnight(t):
    q = quantize_expiry(t)
    assert q % DAY == 0
    assert t <= q < t + DAY


# registration


def test_register_issues_verifiable_future_credential(state):
    cred = register(state, b"anything", 3600)
    assert cred.verify_issuance()
    assert cred.t_exp > NOW
    assert cred.t_exp % DAY == 0
    assert cred.pk == state.pk
    assert cred.token < 1 << 248


def test_rejected_evidence_samples_no_token(artifacts, operator):
    calls = []

    def rng(n):
        calls.append(n)
        return bytes(n)

    st_ = VerifierState(artifacts.verifying, operator, policy=SharedSecretPolicy(b"s3cret"), rng=rng)
    with pytest.raises(RequirementsNotMet):
        register(st_, b"wrong", now=NOW)
    assert calls == []
    assert register(st_, b"s3cret", now=NOW).verify_issuance()
    assert calls == [31]


def test_oversized_evidence_rejected(state):
    with pytest.raises(RequirementsNotMet):
        register(state, b"x" * (64 * 1024 + 1))
    register(state, b"x" * (64 * 1024))


def test_thousand_registrations_have_distinct_tokens(state):
    tokens = {register(state, b"").token for _ in range(1000)}
    assert len(tokens) == 1000


@pytest.mark.parametrize("clock", [lambda: float("nan"), lambda: -5, lambda: 1 / 0], ids=["nan", "negative", "raises"])
def test_clock_failures(artifacts, operator, clock):
    st_ = VerifierState(artifacts.verifying, operator, clock=clock)
    with pytest.raises(ClockError):
        register(st_, b"")


def test_verifier_state_keeps_no_token_or_signature(state):
    names = {f.name for f in fields(VerifierState)}
    assert not names & {"token", "tokens", "signature", "signatures", "sig", "evidence", "credentials"}
    cred = register(state, b"evidence-bytes")
    blob = repr(vars(state)) + repr(vars(state.cache))
    for secret in (cred.token, cred.signature.s, cred.signature.R[0]):
        assert str(secret) not in blob
    assert "evidence-bytes" not in blob


# credential file


def test_credential_file_roundtrip(cred):
    data = cred.encode()
    assert len(data) == CREDENTIAL_BYTES
    assert data[:8] == b"SANSCRED"
    assert Credential.decode(data) == cred


def test_credential_file_errors(cred):
    data = cred.encode()
    with pytest.raises(BadMagic):
        Credential.decode(b"X" + data[1:])
    with pytest.raises(UnsupportedVersion):
        Credential.decode(data[:8] + b"\x00\x02" + data[10:])
    with pytest.raises(MalformedCredential):
        Credential.decode(data[:-1])
    wide = bytearray(data)
    wide[10 + 31] = 1  # token byte 31 set
    with pytest.raises(MalformedCredential):
        Credential.decode(bytes(wide))
    off_curve = bytearray(data)
    off_curve[-1] ^= 1
    with pytest.raises(MalformedCredential):
        Credential.decode(bytes(off_curve))


def test_credential_repr_hides_secrets(cred):
    assert str(cred.token) not in repr(cred)


# authentication decisions


def test_honest_request_granted_once(state, honest_request):
    d = authenticate_verify(state, honest_request)
    assert d.granted and len(d.session_id) == 16
    assert state.session_active(d.session_id)
    assert len(state.cache) == 1


def test_replay_rejects_and_terminates_first_session(state, honest_request):
    first = authenticate_verify(state, honest_request)
    second = authenticate_verify(state, honest_request)
    assert first.granted
    assert second.code is Code.REPLAY_DETECTED
    assert second.terminated_session == first.session_id
    assert not state.session_active(first.session_id)


def test_soft_replay_policy_keeps_first_session(artifacts, operator, honest_request):
    st_ = VerifierState(artifacts.verifying, operator, clock=MockClock(), reject_both_on_replay=False)
    first = authenticate_verify(st_, honest_request)
    second = authenticate_verify(st_, honest_request)
    assert second.code is Code.REPLAY_DETECTED and second.terminated_session is None
    assert st_.session_active(first.session_id)


def _rejected_before_pairing(state, req, code, now=None):
    d = authenticate_verify(state, req, now)
    assert d.code is code
    assert state.counters["proof_verifications"] == 0
    return d


def test_wrong_operator_key(artifacts, honest_request):
    other = VerifierState(artifacts.verifying, eddsa.keygen(b"\x09" * 32), clock=MockClock())
    _rejected_before_pairing(other, honest_request, Code.WRONG_OPERATOR_KEY)


def test_stale_challenge_costs_no_pairing(state, honest_request):
    _rejected_before_pairing(state, honest_request, Code.STALE_CHALLENGE, NOW + 10 * 60)
    _rejected_before_pairing(state, honest_request, Code.STALE_CHALLENGE, NOW - 10 * 60)


def test_expired_credential_proves_but_is_rejected(state, artifacts):
    old = register(state, b"", DAY, now=NOW - 3 * DAY)
    assert old.t_exp < NOW
    req = authenticate_prove(old, NOW, artifacts.proving)
    _rejected_before_pairing(state, req, Code.EXPIRED)


def test_expiry_boundary_is_exclusive(state, honest_request):
    t_exp = honest_request.t_exp
    req = replace(honest_request, c=derive_challenge(t_exp))
    _rejected_before_pairing(state, req, Code.EXPIRED, t_exp)


def test_forged_credential_gives_zero_output(state, cred, artifacts):
    forged = Credential(cred.token ^ 1, cred.t_exp, cred.signature, cred.pk)
    req = authenticate_prove(forged, NOW, artifacts.proving)
    assert req.out == 0
    _rejected_before_pairing(state, req, Code.ZERO_OUTPUT)


def test_invalid_proof_is_the_first_pairing_rejection(state, honest_request):
    req = replace(honest_request, out=(honest_request.out + 1) % R)
    d = authenticate_verify(state, req)
    assert d.code is Code.INVALID_PROOF
    assert state.counters["proof_verifications"] == 1
    assert len(state.cache) == 0


def test_garbage_proof_bytes_are_invalid_proof(state, honest_request):
    d = authenticate_verify(state, replace(honest_request, proof=b"\xff" * 128))
    assert d.code is Code.INVALID_PROOF


@pytest.mark.parametrize("offset", [-1, 0, 1])
def test_completeness_under_skew(artifacts, operator, honest_request, offset):
    st_ = VerifierState(artifacts.verifying, operator, clock=MockClock(NOW + 60 * offset))
    assert authenticate_verify(st_, honest_request).granted


@pytest.mark.parametrize("offset", [-2, 2])
def test_two_buckets_off_is_stale(state, honest_request, offset):
    assert authenticate_verify(state, honest_request, NOW + 60 * offset).code is Code.STALE_CHALLENGE


def test_same_credential_in_two_buckets(state, cred, artifacts):
    a = authenticate_prove(cred, NOW, artifacts.proving)
    b = authenticate_prove(cred, NOW + 60, artifacts.proving)
    assert a.out != b.out
    assert authenticate_verify(state, a, NOW + 60).granted
    assert authenticate_verify(state, b, NOW + 60).granted


def test_concurrent_presentations_grant_once(artifacts, operator, honest_request):
    st_ = VerifierState(artifacts.verifying, operator, clock=MockClock())
    barrier = threading.Barrier(8)
    results = []

    def go():
        barrier.wait()
        results.append(authenticate_verify(st_, honest_request))

    threads = [threading.Thread(target=go) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sum(d.granted for d in results) == 1
    assert all(d.code is Code.REPLAY_DETECTED for d in results if not d.granted)
    assert len(st_.cache) == 1


# replay cache


def test_sweep_empty_cache():
    assert ReplayCache(2).sweep(100) == 0


def test_sweep_boundary(state):
    horizon = state.skew_tolerance + 1
    state.cache.check_and_insert(1, 100, b"a" * 16, 100)
    state.cache.check_and_insert(2, 101, b"b" * 16, 101)
    # entry 1 is exactly `horizon` old, entry 2 is horizon - 1 old
    assert sweep_cache(state, (100 + horizon) * 60) == 1
    assert 1 not in state.cache and 2 in state.cache
    assert sweep_cache(state, (100 + horizon) * 60) == 0  # idempotent


def test_replay_after_sweep_is_still_rejected_as_stale(state, honest_request):
    assert authenticate_verify(state, honest_request).granted
    later = NOW + 5 * 60
    assert sweep_cache(state, later) == 1
    assert authenticate_verify(state, honest_request, later).code is Code.STALE_CHALLENGE


def test_check_and_insert_is_atomic():
    cache = ReplayCache(2)
    barrier = threading.Barrier(16)
    hits = []

    def go(i):
        barrier.wait()
        hits.append(cache.check_and_insert(42, 7, bytes([i]) * 16, 7))

    threads = [threading.Thread(target=go, args=(i,)) for i in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sum(h is None for h in hits) == 1
    assert len(cache) == 1


ops = st.lists(
    st.tuples(st.sampled_from(["insert", "sweep"]), st.integers(0, 5), st.integers(-3, 1), st.integers(0, 20)),
    max_size=60,
)


@given(ops, st.integers(1, 4))
@settings(max_examples=100)
def test_cache_never_holds_entries_past_the_horizon(seq, horizon):
    cache = ReplayCache(horizon)
    now = 1000
    for op, step, skew, out in seq:
        now += step
        if op == "insert":
            if -skew >= horizon:
                with pytest.raises(ValueError):
                    cache.check_and_insert(out, now + skew, b"s" * 16, now)
            else:
                cache.check_and_insert(out, now + skew, b"s" * 16, now)
        else:
            cache.sweep(now)
        assert all(now - b < horizon for b in cache.buckets())


# configuration


def test_config_from_file_and_env(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"skew_tolerance_buckets": 2, "registration_policy": "accept_all"}))
    cfg = VerifierConfig.load(path, env={"SANS_VALIDITY_SECONDS": "3600", "SANS_REJECT_BOTH_ON_REPLAY": "false"})
    assert cfg.skew_tolerance_buckets == 2
    assert cfg.validity_seconds == 3600
    assert cfg.reject_both_on_replay is False
    assert cfg.policy()(b"whatever")


def test_config_defaults():
    cfg = VerifierConfig.load(env={})
    assert cfg.skew_tolerance_buckets == 1
    assert cfg.reject_both_on_replay is True
    with pytest.raises(ValueError):
        cfg.policy()  # shared secret policy without a secret


@pytest.mark.parametrize(
    "data",
    [{"nonsense": 1}, {"skew_tolerance_buckets": -1}, {"registration_policy": "vibes"}, {"reject_both_on_replay": "maybe"}],
)
def test_bad_config_rejected(data):
    with pytest.raises(ValueError):
        VerifierConfig.from_mapping(data)


def test_state_from_config(artifacts, operator):
    cfg = VerifierConfig(skew_tolerance_buckets=3, registration_policy="shared_secret", registration_secret="pw")
    st_ = VerifierState.from_config(cfg, artifacts.verifying, operator)
    assert st_.cache.horizon == 4
    with pytest.raises(RequirementsNotMet):
        register(st_, b"nope")
    assert register(st_, b"pw").verify_issuance()
