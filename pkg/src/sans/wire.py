"""Framed message exchange between the operator daemon and users.

A frame is a 4-byte big-endian length followed by one JSON object, encoded
canonically: sorted keys, no whitespace, UTF-8, binary fields as lowercase
hex.  Decoding re-encodes and compares, so any frame that decodes is
byte-identical to what this module would have produced.

    REGISTER_REQ  {evidence}
    REGISTER_RESP {token, t_exp, sig, pk}
    AUTH_REQ      {proof, c, t_exp, pk, out}
    AUTH_RESP     {granted, session_id} | {granted, code}
    ERR           {code, detail}

Every message also carries ``type`` and ``v``.
"""

from __future__ import annotations

import json
import logging
import socket
import socketserver
import struct
import threading
import time
from collections.abc import Callable
from typing import Any, BinaryIO

from . import proofsys
from .errors import (
    BindFailure,
    ClockError,
    EncodingError,
    InvalidIssuedCredential,
    ProtocolViolation,
    Rejected,
    RequirementsNotMet,
    ServerRejected,
    TransportError,
)
from .primitives import babyjubjub as bjj
from .primitives import eddsa
from .primitives.field import FIELD_BYTES, decode, encode
from .protocol import (
    SESSION_ID_BYTES,
    AuthRequest,
    Credential,
    VerifierState,
    authenticate_prove,
    authenticate_verify,
    register,
)

log = logging.getLogger("sans.wire")

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 1 << 20
_LEN = struct.Struct(">I")
U64_MAX = (1 << 64) - 1

# field kinds: ("hex", n_bytes | None), "u64", "bool", "str"
SCHEMAS: dict[str, dict[str, Any]] = {
    "REGISTER_REQ": {"evidence": ("hex", None)},
    "REGISTER_RESP": {
        "token": ("hex", FIELD_BYTES),
        "t_exp": "u64",
        "sig": ("hex", eddsa.SIGNATURE_BYTES),
        "pk": ("hex", bjj.POINT_BYTES),
    },
    "AUTH_REQ": {
        "proof": ("hex", proofsys.PROOF_BYTES),
        "c": "u64",
        "t_exp": "u64",
        "pk": ("hex", bjj.POINT_BYTES),
        "out": ("hex", FIELD_BYTES),
    },
    "AUTH_RESP_GRANTED": {"granted": "bool", "session_id": ("hex", SESSION_ID_BYTES)},
    "AUTH_RESP_REJECTED": {"granted": "bool", "code": "str"},
    "ERR": {"code": "str", "detail": "str"},
}

_HEX = frozenset("0123456789abcdef")


# canonical notation


def canonical_dumps(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode()


def canonical_loads(data: bytes) -> Any:
    """Parse ``data``, rejecting anything that is not in canonical form."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise ProtocolViolation("malformed", "payload is not valid JSON") from exc
    if canonical_dumps(obj) != bytes(data):
        raise ProtocolViolation("non_canonical", "payload is not in canonical form")
    return obj


def _schema_for(msg: dict) -> dict[str, Any]:
    kind = msg.get("type")
    if not isinstance(kind, str):
        raise ProtocolViolation("malformed", "missing message type")
    if kind == "AUTH_RESP":
        kind += "_GRANTED" if msg.get("granted") is True else "_REJECTED"
    elif kind not in SCHEMAS or kind.startswith("AUTH_RESP"):
        raise ProtocolViolation("unknown_type", f"unknown message type {kind!r}")
    return SCHEMAS[kind]


def _check_field(name: str, kind: Any, value: Any) -> None:
    if kind == "u64":
        ok = type(value) is int and 0 <= value <= U64_MAX
    elif kind == "bool":
        ok = type(value) is bool
    elif kind == "str":
        ok = type(value) is str
    else:
        n = kind[1]
        ok = (
            type(value) is str
            and len(value) % 2 == 0
            and _HEX.issuperset(value)
            and (n is None or len(value) == 2 * n)
        )
    if not ok:
        raise ProtocolViolation("malformed", f"field {name!r} has the wrong type or length")


def validate(msg: Any) -> dict:
    if not isinstance(msg, dict):
        raise ProtocolViolation("malformed", "message must be an object")
    if type(msg.get("v")) is not int:
        raise ProtocolViolation("malformed", "missing protocol version")
    if msg["v"] != PROTOCOL_VERSION:
        raise ProtocolViolation("unsupported_version", f"protocol version {msg['v']}")
    schema = _schema_for(msg)
    keys = set(msg) - {"type", "v"}
    if keys != set(schema):
        raise ProtocolViolation("malformed", f"fields {sorted(keys)} do not match {msg['type']}")
    for name, kind in schema.items():
        _check_field(name, kind, msg[name])
    return msg


def encode_message(msg: dict) -> bytes:
    return canonical_dumps(validate(msg))


def decode_message(payload: bytes) -> dict:
    return validate(canonical_loads(payload))


def message(kind: str, **body: Any) -> dict:
    return {"type": kind, "v": PROTOCOL_VERSION, **body}


def error_message(code: str, detail: str = "") -> dict:
    return message("ERR", code=code, detail=detail)


# framing


def frame(payload: bytes) -> bytes:
    if len(payload) > MAX_FRAME_BYTES:
        raise ProtocolViolation("frame_too_large", f"{len(payload)} bytes")
    return _LEN.pack(len(payload)) + payload


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise EOFError
        buf += chunk
    return buf


def read_frame(stream: BinaryIO) -> bytes | None:
    """Next payload, or None on a clean EOF between frames.

    The length is checked before any of the body is read.
    """
    head = stream.read(_LEN.size)
    if not head:
        return None
    if len(head) < _LEN.size:
        head += _read_exact(stream, _LEN.size - len(head))
    (n,) = _LEN.unpack(head)
    if n > MAX_FRAME_BYTES:
        raise ProtocolViolation("frame_too_large", f"declared length {n} exceeds {MAX_FRAME_BYTES}")
    return _read_exact(stream, n)


# conversions between messages and protocol objects


def credential_to_message(cred: Credential) -> dict:
    return message(
        "REGISTER_RESP",
        token=encode(cred.token).hex(),
        t_exp=cred.t_exp,
        sig=cred.signature.encode().hex(),
        pk=bjj.encode_point(cred.pk).hex(),
    )


def message_to_credential(msg: dict) -> Credential:
    """Decode a REGISTER_RESP and check the operator's signature locally."""
    try:
        token = decode(bytes.fromhex(msg["token"]))
        sig = eddsa.Signature.decode(bytes.fromhex(msg["sig"]))
        pk = bjj.decode_point(bytes.fromhex(msg["pk"]))
        cred = Credential(token, msg["t_exp"], sig, pk)
        ok = cred.verify_issuance()
    except EncodingError as exc:
        raise InvalidIssuedCredential(f"issued credential does not decode: {exc}") from exc
    if not ok:
        raise InvalidIssuedCredential("operator signature on the issued credential does not verify")
    return cred


def auth_request_to_message(req: AuthRequest) -> dict:
    return message(
        "AUTH_REQ",
        proof=req.proof.hex(),
        c=req.c,
        t_exp=req.t_exp,
        pk=bjj.encode_point(req.pk).hex(),
        out=encode(req.out).hex(),
    )


def message_to_auth_request(msg: dict) -> AuthRequest:
    try:
        pk = bjj.decode_point(bytes.fromhex(msg["pk"]), check=False)
        out = decode(bytes.fromhex(msg["out"]))
    except EncodingError as exc:
        raise ProtocolViolation("malformed", str(exc)) from exc
    return AuthRequest(bytes.fromhex(msg["proof"]), msg["c"], msg["t_exp"], pk, out)


# daemon


class _Handler(socketserver.StreamRequestHandler):
    server: "Server"

    def handle(self) -> None:
        peer = "%s:%s" % self.client_address[:2]
        while True:
            try:
                payload = read_frame(self.rfile)
                if payload is None:
                    return
                msg = decode_message(payload)
            except ProtocolViolation as exc:
                log.info("closing connection peer=%s error=%s", peer, exc.code)
                self._send(error_message(exc.code, exc.detail))
                return
            except (EOFError, OSError):
                return
            try:
                reply = self.server.dispatch(msg, peer)
            except ProtocolViolation as exc:
                reply = error_message(exc.code, exc.detail)
            except Exception:  # never let one connection take the daemon down
                log.exception("internal error peer=%s type=%s", peer, msg["type"])
                reply = error_message("internal", "request could not be processed")
            if not self._send(reply) or reply["type"] == "ERR":
                return

    def _send(self, msg: dict) -> bool:
        try:
            self.wfile.write(frame(encode_message(msg)))
            self.wfile.flush()
            return True
        except OSError:
            return False


class Server(socketserver.ThreadingTCPServer):
    """Operator daemon.  Connections are handled on their own threads."""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, state: VerifierState, address: tuple[str, int]):
        self.state = state
        try:
            super().__init__(address, _Handler)
        except OSError as exc:
            raise BindFailure(f"cannot bind {address[0]}:{address[1]}: {exc}") from exc
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address[:2]

    def dispatch(self, msg: dict, peer: str = "-") -> dict:
        kind = msg["type"]
        if kind == "REGISTER_REQ":
            try:
                cred = register(self.state, bytes.fromhex(msg["evidence"]))
            except RequirementsNotMet as exc:
                log.info("registration refused peer=%s", peer)
                return error_message("requirements_not_met", str(exc))
            except ClockError:
                log.error("registration failed peer=%s: clock unavailable", peer)
                return error_message("internal", "clock unavailable")
            log.info("registration issued peer=%s t_exp=%d", peer, cred.t_exp)
            return credential_to_message(cred)
        if kind == "AUTH_REQ":
            decision = authenticate_verify(self.state, message_to_auth_request(msg))
            if decision.granted:
                log.info("auth granted peer=%s c=%d", peer, msg["c"])
                return message("AUTH_RESP", granted=True, session_id=decision.session_id.hex())
            log.info("auth rejected peer=%s c=%d code=%s", peer, msg["c"], decision.code.value)
            if decision.terminated_session is not None:
                log.info("session terminated after replay peer=%s", peer)
            return message("AUTH_RESP", granted=False, code=decision.code.value)
        return error_message("unexpected_type", f"{kind} is not a request")

    def start(self) -> "Server":
        """Serve on a background thread (tests, embedding)."""
        self._thread = threading.Thread(target=self.serve_forever, name="sans-serve", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join()


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host.strip("[]") or "127.0.0.1", int(port)


def serve(state: VerifierState, bind_address: tuple[str, int] | str) -> None:
    """Run the daemon until interrupted."""
    if isinstance(bind_address, str):
        bind_address = parse_address(bind_address)
    with Server(state, bind_address) as server:
        log.info("listening on %s:%d", *server.address)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        log.info("shutting down")


# client

Transcript = list[tuple[bytes, bytes]]


def exchange(
    address: tuple[str, int] | str,
    data: bytes,
    *,
    timeout: float = 30.0,
    transcript: Transcript | None = None,
) -> dict:
    """Send one already-framed request and return the decoded reply."""
    if isinstance(address, str):
        address = parse_address(address)
    try:
        with socket.create_connection(address, timeout=timeout) as sock:
            sock.sendall(data)
            with sock.makefile("rb") as rf:
                payload = read_frame(rf)
    except (OSError, EOFError) as exc:
        raise TransportError(f"exchange with {address[0]}:{address[1]} failed: {exc}") from exc
    if payload is None:
        raise TransportError("server closed the connection without replying")
    if transcript is not None:
        transcript.append((data, frame(payload)))
    msg = decode_message(payload)
    if msg["type"] == "ERR":
        raise ServerRejected(msg["code"], msg["detail"])
    return msg


def client_register(address, evidence: bytes, *, timeout: float = 30.0, transcript: Transcript | None = None) -> Credential:
    req = frame(encode_message(message("REGISTER_REQ", evidence=bytes(evidence).hex())))
    reply = exchange(address, req, timeout=timeout, transcript=transcript)
    if reply["type"] != "REGISTER_RESP":
        raise TransportError(f"unexpected reply {reply['type']}")
    return message_to_credential(reply)


def client_authenticate(
    address,
    cred: Credential,
    params: proofsys.ProvingKey,
    *,
    clock: Callable[[], float] = time.time,
    threads: int | None = None,
    timeout: float = 30.0,
    transcript: Transcript | None = None,
) -> str:
    """Prove for the current bucket and return the granted session id (hex)."""
    req = authenticate_prove(cred, int(clock()), params, threads=threads)
    data = frame(encode_message(auth_request_to_message(req)))
    reply = exchange(address, data, timeout=timeout, transcript=transcript)
    if reply["type"] != "AUTH_RESP":
        raise TransportError(f"unexpected reply {reply['type']}")
    if not reply["granted"]:
        raise Rejected(reply["code"])
    return reply["session_id"]
