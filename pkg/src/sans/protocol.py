"""Service registration and session authentication.

Registration: the operator checks the user's evidence with a policy hook,
samples a fresh token, fixes an expiry and signs ``poseidon([token, t_exp])``.
The credential goes back to the user and nothing about it is kept.

Authentication: the user proves knowledge of a signed token for the current
minute bucket ``c``; the only value the operator remembers is the public
``out = poseidon([c, token])``, held for a few buckets to reject replays.
"""

from __future__ import annotations

import enum
import hmac
import json
import math
import os
import struct
import threading
import time
from collections import Counter
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, fields

from . import proofsys
from .circuit.auth import assign_witness
from .errors import (
    BadMagic,
    ClockError,
    EncodingError,
    MalformedCredential,
    MalformedProof,
    RequirementsNotMet,
    UnsupportedVersion,
)
from .primitives import babyjubjub as bjj
from .primitives import eddsa
from .primitives.field import FIELD_BYTES, R, decode, encode
from .primitives.poseidon import poseidon_hash
from .primitives.tokens import TOKEN_BYTES, Rng, random_bytes, sample_token

BUCKET_SECONDS = 60
DAY_SECONDS = 86_400
DEFAULT_SKEW_BUCKETS = 1
DEFAULT_VALIDITY_SECONDS = 30 * DAY_SECONDS
MAX_EVIDENCE_BYTES = 64 * 1024
SESSION_ID_BYTES = 16

Clock = Callable[[], float]


def derive_challenge(unix_seconds: int) -> int:
    if unix_seconds < 0:
        raise ValueError("time before the epoch")
    return int(unix_seconds) // BUCKET_SECONDS


def quantize_expiry(unix_seconds: int) -> int:
    """Round up to the next 00:00:00 UTC boundary (unchanged if already on one)."""
    return -(-int(unix_seconds) // DAY_SECONDS) * DAY_SECONDS


# Credentials

CRED_MAGIC = b"SANSCRED"
CRED_VERSION = 1
_CRED_HEADER = struct.Struct(">8sH")
CREDENTIAL_BYTES = _CRED_HEADER.size + 2 * FIELD_BYTES + eddsa.SIGNATURE_BYTES + bjj.POINT_BYTES


@dataclass(frozen=True)
class Credential:
    token: int = field(repr=False)
    t_exp: int
    signature: eddsa.Signature = field(repr=False)
    pk: bjj.Point

    @property
    def message(self) -> int:
        return poseidon_hash([self.token, self.t_exp])

    def verify_issuance(self) -> bool:
        return eddsa.verify(self.pk, self.message, self.signature)

    def encode(self) -> bytes:
        return (
            _CRED_HEADER.pack(CRED_MAGIC, CRED_VERSION)
            + encode(self.token)
            + encode(self.t_exp)
            + self.signature.encode()
            + bjj.encode_point(self.pk)
        )

    @classmethod
    def decode(cls, data: bytes) -> "Credential":
        if data[:8] != CRED_MAGIC:
            raise BadMagic("not a credential file")
        if len(data) != CREDENTIAL_BYTES:
            raise MalformedCredential(f"credential must be {CREDENTIAL_BYTES} bytes, got {len(data)}")
        _, version = _CRED_HEADER.unpack_from(data)
        if version != CRED_VERSION:
            raise UnsupportedVersion(f"credential version {version}")
        off = _CRED_HEADER.size
        try:
            token = decode(data[off : off + 32])
            t_exp = decode(data[off + 32 : off + 64])
            sig = eddsa.Signature.decode(data[off + 64 : off + 160])
            pk = bjj.decode_point(data[off + 160 :])
        except EncodingError as exc:
            raise MalformedCredential(str(exc)) from exc
        if token >> (8 * TOKEN_BYTES):
            raise MalformedCredential("token wider than 31 bytes")
        return cls(token, t_exp, sig, pk)


# Authentication messages and decisions


@dataclass(frozen=True)
class AuthRequest:
    proof: bytes
    c: int
    t_exp: int
    pk: bjj.Point
    out: int

    @property
    def public_inputs(self) -> tuple[int, int, int, int, int]:
        return (self.c, self.pk[0], self.pk[1], self.t_exp, self.out)


class Code(str, enum.Enum):
    WRONG_OPERATOR_KEY = "wrong_operator_key"
    STALE_CHALLENGE = "stale_challenge"
    EXPIRED = "expired"
    ZERO_OUTPUT = "zero_output"
    INVALID_PROOF = "invalid_proof"
    REPLAY_DETECTED = "replay_detected"


@dataclass(frozen=True)
class Decision:
    granted: bool
    session_id: bytes | None = None
    code: Code | None = None
    terminated_session: bytes | None = None

    @classmethod
    def grant(cls, session_id: bytes) -> "Decision":
        return cls(True, session_id=session_id)

    @classmethod
    def reject(cls, code: Code, terminated: bytes | None = None) -> "Decision":
        return cls(False, code=code, terminated_session=terminated)


# Replay cache


@dataclass
class _Entry:
    bucket: int
    session_id: bytes


class ReplayCache:
    """``out -> (challenge bucket, session)`` for recently granted requests.

    Entries are keyed on the request's own bucket ``c``, so an entry is only
    dropped once any request carrying that ``out`` is already stale.
    """

    def __init__(self, horizon: int):
        if horizon < 1:
            raise ValueError("horizon must be at least one bucket")
        self.horizon = horizon
        self._entries: dict[int, _Entry] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, out: int) -> bool:
        return out in self._entries

    def _sweep(self, now_bucket: int) -> int:
        stale = [o for o, e in self._entries.items() if now_bucket - e.bucket >= self.horizon]
        for o in stale:
            del self._entries[o]
        return len(stale)

    def sweep(self, now_bucket: int) -> int:
        with self._lock:
            return self._sweep(now_bucket)

    def check_and_insert(self, out: int, bucket: int, session_id: bytes, now_bucket: int) -> _Entry | None:
        """Insert unless ``out`` is present; return the existing entry on a hit.

        ``bucket`` must still be inside the retention window at ``now_bucket``.
        """
        with self._lock:
            self._sweep(now_bucket)
            if now_bucket - bucket >= self.horizon:
                raise ValueError("bucket is already outside the retention window")
            hit = self._entries.get(out)
            if hit is None:
                self._entries[out] = _Entry(bucket, session_id)
            return hit

    def buckets(self) -> list[int]:
        with self._lock:
            return [e.bucket for e in self._entries.values()]


# Registration policies

Policy = Callable[[bytes], bool]


def accept_all(evidence: bytes) -> bool:
    return True


@dataclass(frozen=True)
class SharedSecretPolicy:
    """Accept evidence equal to a secret handed out of band."""

    secret: bytes = field(repr=False)

    def __call__(self, evidence: bytes) -> bool:
        return hmac.compare_digest(evidence, self.secret)


# Configuration


@dataclass(frozen=True)
class VerifierConfig:
    skew_tolerance_buckets: int = DEFAULT_SKEW_BUCKETS
    validity_seconds: int = DEFAULT_VALIDITY_SECONDS
    reject_both_on_replay: bool = True
    registration_policy: str = "shared_secret"
    registration_secret: str = field(default="", repr=False)

    def __post_init__(self):
        if self.skew_tolerance_buckets < 0:
            raise ValueError("skew_tolerance_buckets must be >= 0")
        if self.validity_seconds <= 0:
            raise ValueError("validity_seconds must be positive")
        if self.registration_policy not in ("shared_secret", "accept_all"):
            raise ValueError(f"unknown registration policy {self.registration_policy!r}")

    def policy(self) -> Policy:
        if self.registration_policy == "accept_all":
            return accept_all
        if not self.registration_secret:
            raise ValueError("shared_secret policy needs registration_secret")
        return SharedSecretPolicy(self.registration_secret.encode())

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "VerifierConfig":
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: _coerce(k, v, cls.__dataclass_fields__[k].default) for k, v in data.items()})

    @classmethod
    def load(cls, path: str | os.PathLike | None = None, env: Mapping[str, str] | None = None) -> "VerifierConfig":
        """JSON file first, then ``SANS_<KEY>`` environment overrides."""
        data: dict[str, object] = {}
        if path is not None:
            with open(path) as fh:
                data.update(json.load(fh))
        env = os.environ if env is None else env
        for name in cls.__dataclass_fields__:
            key = "SANS_" + name.upper()
            if key in env:
                data[name] = env[key]
        return cls.from_mapping(data)


def _coerce(name: str, value: object, default: object) -> object:
    if isinstance(default, bool):
        if isinstance(value, str):
            low = value.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(f"{name}: expected a boolean, got {value!r}")
            return low in ("1", "true", "yes")
        return bool(value)
    if isinstance(default, int):
        if isinstance(value, bool):
            raise ValueError(f"{name}: expected an integer")
        return int(value)  # type: ignore[arg-type]
    return str(value)


# Verifier state


@dataclass(eq=False)
class VerifierState:
    """Operator-side state.  Holds no token, signature or evidence."""

    verifying_key: proofsys.VerifyingKey | None
    operator: eddsa.SigningKeypair
    skew_tolerance: int = DEFAULT_SKEW_BUCKETS
    validity_seconds: int = DEFAULT_VALIDITY_SECONDS
    reject_both_on_replay: bool = True
    policy: Policy = accept_all
    clock: Clock = time.time
    rng: Rng | None = field(default=None, repr=False)
    cache: ReplayCache = field(init=False)
    sessions: dict[bytes, int] = field(init=False, default_factory=dict)
    counters: Counter = field(init=False, default_factory=Counter)

    def __post_init__(self):
        self.cache = ReplayCache(self.skew_tolerance + 1)
        self._sign_lock = threading.Lock()
        self._lock = threading.Lock()

    @classmethod
    def from_config(cls, config: VerifierConfig, verifying_key, operator, **kw) -> "VerifierState":
        return cls(
            verifying_key,
            operator,
            skew_tolerance=config.skew_tolerance_buckets,
            validity_seconds=config.validity_seconds,
            reject_both_on_replay=config.reject_both_on_replay,
            policy=config.policy(),
            **kw,
        )

    @property
    def pk(self) -> bjj.Point:
        return self.operator.pk

    def now(self, override: int | None = None) -> int:
        if override is not None:
            t = override
        else:
            try:
                t = self.clock()
            except Exception as exc:
                raise ClockError(f"clock failed: {exc}") from exc
        if not isinstance(t, (int, float)) or not math.isfinite(t) or t < 0:
            raise ClockError(f"clock returned {t!r}")
        return int(t)

    def bump(self, counter: str) -> None:
        with self._lock:
            self.counters[counter] += 1

    def session_active(self, session_id: bytes) -> bool:
        with self._lock:
            return session_id in self.sessions

    def end_session(self, session_id: bytes) -> bool:
        with self._lock:
            return self.sessions.pop(session_id, None) is not None


def register(
    state: VerifierState,
    evidence: bytes,
    validity_seconds: int | None = None,
    *,
    now: int | None = None,
) -> Credential:
    """Issue a credential if the evidence passes the policy hook."""
    if len(evidence) > MAX_EVIDENCE_BYTES:
        raise RequirementsNotMet(f"evidence exceeds {MAX_EVIDENCE_BYTES} bytes")
    if not state.policy(bytes(evidence)):
        raise RequirementsNotMet("evidence rejected by registration policy")
    validity = state.validity_seconds if validity_seconds is None else validity_seconds
    if validity <= 0:
        raise ValueError("validity_seconds must be positive")
    t_exp = quantize_expiry(state.now(now) + validity)
    token = sample_token(state.rng)
    with state._sign_lock:
        sig = eddsa.sign(state.operator, poseidon_hash([token, t_exp]))
    state.bump("registrations")
    return Credential(token, t_exp, sig, state.pk)


def authenticate_prove(
    cred: Credential,
    now: int,
    params: proofsys.ProvingKey,
    *,
    rng: Rng | None = None,
    threads: int | None = None,
) -> AuthRequest:
    """Build the proof for bucket ``derive_challenge(now)``.

    No expiry check here: an expired credential still yields a request, and
    the verifier turns it down.
    """
    c = derive_challenge(now)
    w = assign_witness(cred, c)
    proof = proofsys.prove(params, w, rng, threads=threads)
    return AuthRequest(proof.data, c, cred.t_exp, cred.pk, w.out)


def authenticate_verify(state: VerifierState, req: AuthRequest, now: int | None = None) -> Decision:
    """Run the checks in order and report the first failure.

    1. operator key  2. challenge freshness  3. expiry  4. out != 0
    5. proof  6. replay (atomic check-and-insert)
    """
    t = state.now(now)
    bucket = derive_challenge(t)
    state.bump("verify_requests")

    if req.pk != state.pk:
        return _reject(state, Code.WRONG_OPERATOR_KEY)
    if abs(req.c - bucket) > state.skew_tolerance:
        return _reject(state, Code.STALE_CHALLENGE)
    if not t < req.t_exp:
        return _reject(state, Code.EXPIRED)
    if req.out % R == 0:
        return _reject(state, Code.ZERO_OUTPUT)

    if state.verifying_key is None:
        raise RuntimeError("verifier has no verifying key loaded")
    state.bump("proof_verifications")
    try:
        ok = proofsys.verify(state.verifying_key, req.public_inputs, req.proof)
    except (MalformedProof, EncodingError, ValueError):
        ok = False
    if not ok:
        return _reject(state, Code.INVALID_PROOF)

    session_id = random_bytes(state.rng, SESSION_ID_BYTES)
    hit = state.cache.check_and_insert(req.out, req.c, session_id, bucket)
    if hit is not None:
        terminated = None
        if state.reject_both_on_replay and state.end_session(hit.session_id):
            terminated = hit.session_id
        return _reject(state, Code.REPLAY_DETECTED, terminated)
    with state._lock:
        state.sessions[session_id] = req.out
    state.bump("grants")
    return Decision.grant(session_id)


def _reject(state: VerifierState, code: Code, terminated: bytes | None = None) -> Decision:
    state.bump("reject:" + code.value)
    return Decision.reject(code, terminated)


def sweep_cache(state: VerifierState, now: int | None = None) -> int:
    return state.cache.sweep(derive_challenge(state.now(now)))
