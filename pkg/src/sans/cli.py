"""``sans`` command line: operator and user entry points plus the benchmark."""

from __future__ import annotations

import functools
import logging
import os
import signal
import sys
import threading
import time
from pathlib import Path

import click

from . import bench as benchmod
from . import proofsys, wire
from .circuit.auth import build_circuit
from .errors import (
    EncodingError,
    FingerprintMismatch,
    InvalidIssuedCredential,
    MalformedProof,
    ProtocolViolation,
    ProvingFailure,
    Rejected,
    RequirementsNotMet,
    RngFailure,
    SansError,
    ServerRejected,
    TransportError,
)
from .primitives import babyjubjub as bjj
from .primitives import eddsa
from .protocol import (
    AuthRequest,
    Credential,
    VerifierConfig,
    VerifierState,
    authenticate_prove,
    register,
)


class Exit:
    OK = 0
    ERROR = 1
    USAGE = 2  # click's own code for bad flags
    FORMAT = 3
    FINGERPRINT = 4
    INVALID_PROOF = 5
    REQUIREMENTS = 6
    TRANSPORT = 7
    INVALID_ISSUED = 8
    PROVING = 9
    SERVER_ERROR = 10
    RNG = 11
    # authentication rejections, one per decision code
    WRONG_OPERATOR_KEY = 20
    STALE_CHALLENGE = 21
    EXPIRED = 22
    ZERO_OUTPUT = 23
    REJECTED_PROOF = 24
    REPLAY = 25


REJECTION_EXIT = {
    "wrong_operator_key": Exit.WRONG_OPERATOR_KEY,
    "stale_challenge": Exit.STALE_CHALLENGE,
    "expired": Exit.EXPIRED,
    "zero_output": Exit.ZERO_OUTPUT,
    "invalid_proof": Exit.REJECTED_PROOF,
    "replay_detected": Exit.REPLAY,
}

# checked in order; subclasses before their bases
_ERROR_EXIT: list[tuple[type[BaseException], int]] = [
    (FingerprintMismatch, Exit.FINGERPRINT),
    (InvalidIssuedCredential, Exit.INVALID_ISSUED),
    (RequirementsNotMet, Exit.REQUIREMENTS),
    (ProvingFailure, Exit.PROVING),
    (RngFailure, Exit.RNG),
    (MalformedProof, Exit.FORMAT),
    (EncodingError, Exit.FORMAT),
    (ProtocolViolation, Exit.FORMAT),
    (TransportError, Exit.TRANSPORT),
]


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, Rejected):
        return REJECTION_EXIT.get(exc.code, Exit.SERVER_ERROR)
    if isinstance(exc, ServerRejected):
        return Exit.REQUIREMENTS if exc.code == "requirements_not_met" else Exit.SERVER_ERROR
    for cls, code in _ERROR_EXIT:
        if isinstance(exc, cls):
            return code
    return Exit.ERROR


def emit(ctx: click.Context, data: dict, text: str | None = None) -> None:
    if ctx.obj["json"]:
        click.echo(wire.canonical_dumps(data).decode())
    elif text is not None:
        click.echo(text)


def handled(fn):
    """Map package errors to exit codes and a one-line message."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return fn(*args, **kwargs)
        except (SansError, OSError) as exc:
            code = exit_code_for(exc)
            err = {"ok": False, "error": type(exc).__name__, "detail": str(exc), "exit_code": code}
            if isinstance(exc, ServerRejected):
                err["code"] = exc.code
            if ctx.obj["json"]:
                click.echo(wire.canonical_dumps(err).decode())
            else:
                click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(code)

    return wrapper


def _read(path: str | Path) -> bytes:
    return Path(path).read_bytes()


def _write(path: str | Path, data: bytes, mode: int | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    if mode is not None:
        os.chmod(path, mode)


def load_operator(path: str | Path) -> eddsa.SigningKeypair:
    seed = _read(path)
    if len(seed) != eddsa.SEED_BYTES:
        raise EncodingError(f"operator key file must hold a {eddsa.SEED_BYTES}-byte seed")
    return eddsa.keygen(seed)


def load_proving_key(path) -> proofsys.ProvingKey:
    return proofsys.ProvingKey.from_bytes(_read(path), build_circuit().fingerprint())


def load_verifying_key(path) -> proofsys.VerifyingKey:
    return proofsys.VerifyingKey.from_bytes(_read(path), build_circuit().fingerprint())


def load_config(path) -> VerifierConfig:
    try:
        return VerifierConfig.load(path)
    except (ValueError, TypeError) as exc:
        raise click.BadParameter(str(exc), param_hint="--config / SANS_* environment") from exc


def _pk_hex(pk) -> str:
    return bjj.encode_point(pk).hex()


threads_option = click.option(
    "--threads", type=click.IntRange(min=0), default=0, show_default=True,
    help="Prover thread budget (0 = one per CPU).",
)
now_option = click.option(
    "--now", type=click.IntRange(min=0), default=None, help="Unix time to use instead of the system clock."
)


@click.group()
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output (canonical JSON).")
@click.option("-v", "--verbose", count=True, help="Log to stderr (-v info, -vv debug).")
@click.version_option(package_name="artifact")
@click.pass_context
def main(ctx: click.Context, as_json: bool, verbose: int) -> None:
    """Zero-knowledge slice access: keys, credentials, proofs, daemon, benchmark."""
    ctx.ensure_object(dict)
    ctx.obj["json"] = as_json
    if verbose:
        logging.basicConfig(
            level=logging.DEBUG if verbose > 1 else logging.INFO,
            format="%(asctime)s %(levelname)s %(name)s %(message)s",
            stream=sys.stderr,
        )


@main.command()
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="Operator key file to create.")
@click.pass_context
@handled
def keygen(ctx, out):
    """Create an operator signing key (32-byte seed)."""
    kp = eddsa.keygen(os.urandom(eddsa.SEED_BYTES))
    _write(out, kp.seed, 0o600)
    emit(ctx, {"ok": True, "key": out, "pk": _pk_hex(kp.pk)}, f"wrote {out}\npk {_pk_hex(kp.pk)}")


@main.command()
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--name", default="sans", show_default=True, help="Basename for <name>.pk and <name>.vk.")
@click.pass_context
@handled
def setup(ctx, out_dir, name):
    """Run a fresh trusted setup and write proving/verifying keys."""
    art = proofsys.setup(build_circuit())
    pk_path = Path(out_dir) / f"{name}.pk"
    vk_path = Path(out_dir) / f"{name}.vk"
    _write(pk_path, art.proving.to_bytes())
    _write(vk_path, art.verifying.to_bytes())
    fp = art.fingerprint.hex()
    emit(
        ctx,
        {"ok": True, "pk": str(pk_path), "vk": str(vk_path), "fingerprint": fp},
        f"wrote {pk_path} and {vk_path}\nfingerprint {fp}",
    )


@main.command()
@click.option("--key", type=click.Path(exists=True, dir_okay=False), required=True, help="Operator key file.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Credential file to write.")
@click.option("--validity", type=click.IntRange(min=1), default=None, help="Validity in seconds.")
@click.option("--evidence", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@now_option
@click.pass_context
@handled
def issue(ctx, key, out, validity, evidence, config, now):
    """Issue a credential locally (registration without the daemon).

    With --config the configured registration policy applies to --evidence;
    without it, issuance is unconditional.
    """
    operator = load_operator(key)
    if config:
        cfg = load_config(config)
        try:
            state = VerifierState.from_config(cfg, None, operator)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--config") from exc
    else:
        state = VerifierState(None, operator)
    cred = register(state, _read(evidence) if evidence else b"", validity, now=now)
    _write(out, cred.encode(), 0o600)
    emit(ctx, {"ok": True, "credential": out, "t_exp": cred.t_exp}, f"wrote {out} (expires {cred.t_exp})")


@main.command()
@click.option("--credential", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--pk-params", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="AUTH_REQ payload to write.")
@click.option("--proof-out", type=click.Path(dir_okay=False), default=None, help="Also write a .proof container.")
@threads_option
@now_option
@click.pass_context
@handled
def prove(ctx, credential, pk_params, out, proof_out, threads, now):
    """Build an authentication request for the current minute bucket."""
    cred = Credential.decode(_read(credential))
    pk = load_proving_key(pk_params)
    t = int(time.time()) if now is None else now
    req = authenticate_prove(cred, t, pk, threads=threads)
    _write(out, wire.encode_message(wire.auth_request_to_message(req)))
    if proof_out:
        _write(proof_out, proofsys.Proof(req.proof, pk.fingerprint).to_bytes())
    emit(ctx, {"ok": True, "request": out, "c": req.c}, f"wrote {out} (bucket {req.c})")


@main.command()
@click.option("--vk", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--request", type=click.Path(exists=True, dir_okay=False), required=True, help="AUTH_REQ payload.")
@click.option("--proof", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Proof container to use instead of the proof inside the request.")
@click.pass_context
@handled
def verify(ctx, vk, request, proof):
    """Check a request's proof against its public inputs (pairing check only)."""
    key = load_verifying_key(vk)
    msg = wire.decode_message(_read(request))
    if msg["type"] != "AUTH_REQ":
        raise ProtocolViolation("unexpected_type", f"{msg['type']} is not an AUTH_REQ")
    req: AuthRequest = wire.message_to_auth_request(msg)
    data = proofsys.Proof.from_bytes(_read(proof), key.fingerprint).data if proof else req.proof
    ok = proofsys.verify(key, req.public_inputs, data)
    emit(ctx, {"ok": ok, "valid": ok}, "valid" if ok else "INVALID")
    ctx.exit(Exit.OK if ok else Exit.INVALID_PROOF)


@main.command()
@click.option("--bind", default="127.0.0.1:7400", show_default=True, help="host:port to listen on.")
@click.option("--vk", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--key", type=click.Path(exists=True, dir_okay=False), required=True, help="Operator key file.")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
@handled
def serve(ctx, bind, vk, key, config):
    """Run the operator daemon until SIGINT/SIGTERM."""
    cfg = load_config(config)
    verifying_key, operator = load_verifying_key(vk), load_operator(key)
    try:
        state = VerifierState.from_config(cfg, verifying_key, operator)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--config") from exc
    try:
        server = wire.Server(state, wire.parse_address(bind))
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--bind") from exc
    stop = threading.Event()

    def on_signal(signum, _frame):
        if not stop.is_set():
            stop.set()
            threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGTERM, on_signal)
    signal.signal(signal.SIGINT, on_signal)
    host, port = server.address
    emit(ctx, {"ok": True, "listening": f"{host}:{port}"}, f"listening on {host}:{port}")
    sys.stdout.flush()
    try:
        server.serve_forever()
    finally:
        server.server_close()


@main.command("register")
@click.option("--server", "address", required=True, help="host:port of the operator daemon.")
@click.option("--evidence", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Credential file to write.")
@click.pass_context
@handled
def register_cmd(ctx, address, evidence, out):
    """Obtain a credential from a running daemon."""
    cred = wire.client_register(address, _read(evidence) if evidence else b"")
    _write(out, cred.encode(), 0o600)
    emit(ctx, {"ok": True, "credential": out, "t_exp": cred.t_exp}, f"wrote {out} (expires {cred.t_exp})")


@main.command()
@click.option("--server", "address", required=True, help="host:port of the operator daemon.")
@click.option("--credential", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--pk-params", type=click.Path(exists=True, dir_okay=False), required=True)
@threads_option
@now_option
@click.pass_context
@handled
def authenticate(ctx, address, credential, pk_params, threads, now):
    """Prove possession of a credential to a running daemon."""
    cred = Credential.decode(_read(credential))
    pk = load_proving_key(pk_params)
    clock = time.time if now is None else (lambda: now)
    sid = wire.client_authenticate(address, cred, pk, clock=clock, threads=threads)
    emit(ctx, {"ok": True, "granted": True, "session_id": sid}, f"granted session {sid}")


@main.command()
@click.pass_context
@handled
def describe(ctx):
    """Print the circuit layout: counts, public input order, fingerprint."""
    layout = build_circuit()
    emit(
        ctx,
        {
            "constraints": layout.num_constraints,
            "wires": layout.num_wires,
            "public_inputs": list(layout.public_names),
            "fingerprint": layout.fingerprint().hex(),
        },
        layout.describe(),
    )


@main.command()
@click.option("--iterations", type=click.IntRange(min=benchmod.MIN_ITERATIONS), default=10, show_default=True)
@threads_option
@click.option("--out", type=click.Path(dir_okay=False), default="bench.csv", show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True, help="Render <out>.png next to the CSV.")
@click.option("--setup-iterations", type=click.IntRange(min=0), default=None,
              help="Setup runs to time (default min(iterations, 3)).")
@click.pass_context
@handled
def bench(ctx, iterations, threads, out, plot, setup_iterations):
    """Time setup/prove/verify and write a CSV plus a summary."""
    records = benchmod.run(iterations, threads, setup_iterations=setup_iterations)
    benchmod.write_csv(records, out)
    png = benchmod.plot(records, Path(out).with_suffix(".png")) if plot else None
    data = {
        "ok": True,
        "csv": out,
        "plot": str(png) if png else None,
        "records": [r.row() for r in records],
        "summary": benchmod.summary(records),
    }
    lines = benchmod.summary_lines(records) + [f"wrote {out}" + (f" and {png}" if png else "")]
    emit(ctx, data, "\n".join(lines))


if __name__ == "__main__":  # pragma: no cover
    main()
