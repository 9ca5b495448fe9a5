from __future__ import annotations

from dataclasses import dataclass

import pytest

from sans import proofsys
from sans.circuit import build_circuit
from sans.primitives import eddsa
from sans.protocol import VerifierState, authenticate_prove, register

# 2023-11-14T22:13:20Z, mid-day so expiry quantization is visible
NOW = 1_700_000_000


@dataclass
class MockClock:
    t: float = NOW

    def __call__(self) -> float:
        return self.t

    def advance(self, seconds: float) -> None:
        self.t += seconds


@pytest.fixture(scope="session")
def layout():
    return build_circuit()


@pytest.fixture(scope="session")
def artifacts(layout):
    return proofsys.setup(layout)


@pytest.fixture(scope="session")
def other_artifacts(layout):
    """A second, independent setup for cross-setup checks."""
    return proofsys.setup(layout)


@pytest.fixture(scope="session")
def operator():
    return eddsa.keygen(bytes(range(32)))


@pytest.fixture
def clock():
    return MockClock()


@pytest.fixture
def state(artifacts, operator, clock):
    return VerifierState(artifacts.verifying, operator, clock=clock)


@pytest.fixture(scope="session")
def session_state(artifacts, operator):
    return VerifierState(artifacts.verifying, operator, clock=MockClock())


@pytest.fixture(scope="session")
def cred(session_state):
    return register(session_state, b"", now=NOW)


@pytest.fixture(scope="session")
def honest_request(cred, artifacts):
    return authenticate_prove(cred, NOW, artifacts.proving)


# acceptance reporting: one PASS/FAIL line per criterion at the end of the run

_ACCEPTANCE: dict[str, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    details = [str(v) for k, v in item.user_properties if k == "detail"]
    detail = details[-1] if details else ""
    label = mark.args[0]
    _ACCEPTANCE[label] = ["PASS" if rep.passed else "FAIL", detail]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, (verdict, detail) in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{verdict} {label}" + (f": {detail}" if detail else ""))
