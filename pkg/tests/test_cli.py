import json
import os
import re
import signal
import subprocess
import sys
import time
from pathlib import Path

import pytest
from click.testing import CliRunner

from sans import proofsys, wire
from sans.cli import Exit, main
from sans.circuit import build_circuit


def run(*args, input=None):
    return CliRunner().invoke(main, [str(a) for a in args], input=input, catch_exceptions=False)


def run_json(*args):
    res = run("--json", *args)
    return res, wire.canonical_loads(res.output.strip().encode())


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, artifacts):
    d = tmp_path_factory.mktemp("cli")
    (d / "sans.pk").write_bytes(artifacts.proving.to_bytes())
    (d / "sans.vk").write_bytes(artifacts.verifying.to_bytes())
    assert run("keygen", "--out", d / "op.key").exit_code == 0
    return d


def test_describe_matches_layout():
    res, data = run_json("describe")
    layout = build_circuit()
    assert res.exit_code == 0
    assert data["constraints"] == layout.num_constraints
    assert data["public_inputs"] == ["c", "pk_x", "pk_y", "t_exp", "out"]
    assert run("describe").output.strip() == layout.describe()


def test_keygen_writes_private_seed(tmp_path):
    res, data = run_json("keygen", "--out", tmp_path / "k")
    assert res.exit_code == 0
    assert len((tmp_path / "k").read_bytes()) == 32
    assert oct((tmp_path / "k").stat().st_mode & 0o777) == "0o600"
    assert len(bytes.fromhex(data["pk"])) == 64


def test_setup_prove_verify_chain(tmp_path):
    res, data = run_json("setup", "--out-dir", tmp_path)
    assert res.exit_code == 0
    assert data["fingerprint"] == build_circuit().fingerprint().hex()
    assert run("keygen", "--out", tmp_path / "op.key").exit_code == 0
    assert run("issue", "--key", tmp_path / "op.key", "--out", tmp_path / "cred.bin").exit_code == 0
    res = run(
        "prove", "--credential", tmp_path / "cred.bin", "--pk-params", tmp_path / "sans.pk",
        "--out", tmp_path / "req.json", "--proof-out", tmp_path / "req.proof", "--threads", 1,
    )
    assert res.exit_code == 0, res.output
    res, data = run_json("verify", "--vk", tmp_path / "sans.vk", "--request", tmp_path / "req.json")
    assert res.exit_code == Exit.OK and data["valid"] is True
    res = run("verify", "--vk", tmp_path / "sans.vk", "--request", tmp_path / "req.json", "--proof", tmp_path / "req.proof")
    assert res.exit_code == Exit.OK


@pytest.fixture(scope="module")
def request_file(workdir):
    assert run("issue", "--key", workdir / "op.key", "--out", workdir / "cred.bin").exit_code == 0
    res = run("prove", "--credential", workdir / "cred.bin", "--pk-params", workdir / "sans.pk", "--out", workdir / "req.json")
    assert res.exit_code == 0
    return workdir / "req.json"


def test_verify_with_foreign_fingerprint(workdir, request_file, tmp_path):
    vk = bytearray((workdir / "sans.vk").read_bytes())
    vk[8:40] = b"\x00" * 32
    (tmp_path / "x.vk").write_bytes(bytes(vk))
    res, data = run_json("verify", "--vk", tmp_path / "x.vk", "--request", request_file)
    assert res.exit_code == Exit.FINGERPRINT == 4
    assert data["error"] == "FingerprintMismatch"


def test_verify_with_another_setup(other_artifacts, request_file, tmp_path):
    (tmp_path / "o.vk").write_bytes(other_artifacts.verifying.to_bytes())
    assert run("verify", "--vk", tmp_path / "o.vk", "--request", request_file).exit_code == Exit.INVALID_PROOF


def test_malformed_inputs_exit_with_format_code(workdir, request_file, tmp_path):
    (tmp_path / "bad.bin").write_bytes(b"SANSCRED garbage")
    res = run("prove", "--credential", tmp_path / "bad.bin", "--pk-params", workdir / "sans.pk", "--out", tmp_path / "r")
    assert res.exit_code == Exit.FORMAT
    (tmp_path / "bad.vk").write_bytes(b"nope")
    assert run("verify", "--vk", tmp_path / "bad.vk", "--request", request_file).exit_code == Exit.FORMAT
    (tmp_path / "key").write_bytes(b"short")
    assert run("issue", "--key", tmp_path / "key", "--out", tmp_path / "c").exit_code == Exit.FORMAT


def test_issue_with_policy(workdir, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"registration_secret": "pw"}))
    (tmp_path / "ev").write_bytes(b"nope")
    args = ["issue", "--key", workdir / "op.key", "--out", tmp_path / "c", "--config", cfg, "--evidence", tmp_path / "ev"]
    assert run(*args).exit_code == Exit.REQUIREMENTS
    (tmp_path / "ev").write_bytes(b"pw")
    assert run(*args).exit_code == 0


def test_bad_flags_are_usage_errors(workdir):
    assert run("bench", "--iterations", 3).exit_code == Exit.USAGE
    assert run("prove").exit_code == Exit.USAGE
    assert run("nonsense").exit_code == Exit.USAGE


def test_register_without_daemon_is_transport_error(tmp_path):
    res = run("register", "--server", "127.0.0.1:1", "--out", tmp_path / "c")
    assert res.exit_code == Exit.TRANSPORT


def test_exit_codes_are_distinct():
    codes = [v for k, v in vars(Exit).items() if k.isupper()]
    assert len(codes) == len(set(codes))


# live daemon


@pytest.fixture
def daemon(workdir, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"registration_secret": "open-sesame"}))
    proc = subprocess.Popen(
        [sys.executable, "-m", "sans.cli", "-v", "serve", "--bind", "127.0.0.1:0",
         "--vk", str(workdir / "sans.vk"), "--key", str(workdir / "op.key"), "--config", str(cfg)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    line = proc.stdout.readline()
    m = re.search(r"listening on (\S+)", line)
    assert m, line + proc.stderr.read()
    yield m.group(1), proc
    if proc.poll() is None:
        proc.kill()
        proc.wait()


def test_authenticate_twice_against_live_daemon(daemon, workdir, tmp_path):
    address, proc = daemon
    (tmp_path / "ev").write_bytes(b"open-sesame")
    assert run("register", "--server", address, "--evidence", tmp_path / "ev", "--out", tmp_path / "c").exit_code == 0
    cred_hex = (tmp_path / "c").read_bytes().hex()
    now = int(time.time()) // 60 * 60 + 5
    auth = ["authenticate", "--server", address, "--credential", tmp_path / "c", "--pk-params", workdir / "sans.pk", "--now", now]
    res, data = run_json(*auth)
    assert res.exit_code == 0 and data["granted"] is True
    res, data = run_json(*auth)
    assert res.exit_code == Exit.REPLAY
    assert data["code"] == "replay_detected"

    proc.send_signal(signal.SIGTERM)
    assert proc.wait(timeout=20) == 0
    logs = proc.stderr.read()
    assert "auth granted" in logs and "replay_detected" in logs
    assert "open-sesame" not in logs
    assert cred_hex[20:84] not in logs  # token bytes


def test_serve_with_bad_config_is_usage_error(workdir, tmp_path):
    res = run("serve", "--vk", workdir / "sans.vk", "--key", workdir / "op.key")
    assert res.exit_code == Exit.USAGE
    assert "registration_secret" in res.output
