"""Benchmark harness: constraint count, setup/prove/verify timings, peak RSS.

Timings are native (this process, arkworks backend).  Key generation and
credential issuance happen before the clock starts.
"""

from __future__ import annotations

import csv
import math
import os
import threading
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import psutil

from . import proofsys
from .circuit.auth import build_circuit
from .primitives import eddsa
from .protocol import VerifierState, authenticate_prove, register

COLUMNS = (
    "operation",
    "iterations",
    "mean_ms",
    "p95_ms",
    "peak_rss_mib",
    "constraint_count",
    "thread_count",
    "curve",
)
CURVE = "bn254"

# published reference points the summary compares against
REFERENCE_CONSTRAINTS = 7565
REFERENCE_PROVE_MS = 5000.0
MIN_ITERATIONS = 10


@dataclass(frozen=True)
class BenchRecord:
    operation: str
    iterations: int
    mean_ms: float
    p95_ms: float
    peak_rss_mib: float
    constraint_count: int
    thread_count: int
    curve: str = CURVE

    def row(self) -> dict:
        return asdict(self)


class RssSampler:
    """Peak resident set size of this process while the block runs."""

    def __init__(self, interval: float = 0.002):
        self.interval = interval
        self._proc = psutil.Process(os.getpid())
        self._stop = threading.Event()
        self.peak = 0

    def _sample(self) -> None:
        self.peak = max(self.peak, self._proc.memory_info().rss)

    def _run(self) -> None:
        while not self._stop.wait(self.interval):
            self._sample()

    def __enter__(self) -> "RssSampler":
        self._sample()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._stop.set()
        self._thread.join()
        self._sample()

    @property
    def peak_mib(self) -> float:
        return self.peak / (1 << 20)


def percentile(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile."""
    ordered = sorted(values)
    k = max(1, math.ceil(q / 100 * len(ordered)))
    return ordered[k - 1]


def _measure(op: str, n: int, fn: Callable[[int], object], constraints: int, threads: int) -> BenchRecord:
    times = []
    with RssSampler() as rss:
        for i in range(n):
            t0 = time.perf_counter()
            fn(i)
            times.append((time.perf_counter() - t0) * 1000)
    return BenchRecord(
        op,
        n,
        round(sum(times) / n, 3),
        round(percentile(times, 95), 3),
        round(rss.peak_mib, 3),
        constraints,
        threads,
    )


def run(
    iterations: int = 10,
    threads: int = 1,
    artifacts: proofsys.ProvingArtifacts | None = None,
    setup_iterations: int | None = None,
) -> list[BenchRecord]:
    if iterations < MIN_ITERATIONS:
        raise ValueError(f"prove/verify need at least {MIN_ITERATIONS} iterations")
    layout = build_circuit()
    n_constraints = layout.num_constraints
    records = []

    n_setup = setup_iterations if setup_iterations is not None else min(iterations, 3)
    if n_setup:
        made: list[proofsys.ProvingArtifacts] = []
        records.append(
            _measure("setup", n_setup, lambda _: made.append(proofsys.setup(layout)), n_constraints, threads)
        )
        artifacts = artifacts or made[0]
    elif artifacts is None:
        artifacts = proofsys.setup(layout)

    operator = eddsa.keygen(os.urandom(32))
    state = VerifierState(artifacts.verifying, operator)
    now = int(time.time())
    creds = [register(state, b"", now=now) for _ in range(iterations)]

    reqs = []
    records.append(
        _measure(
            "prove",
            iterations,
            lambda i: reqs.append(authenticate_prove(creds[i], now, artifacts.proving, threads=threads)),
            n_constraints,
            threads,
        )
    )

    def check(i: int) -> None:
        if not proofsys.verify(artifacts.verifying, reqs[i].public_inputs, reqs[i].proof):
            raise AssertionError("benchmark proof failed to verify")

    records.append(_measure("verify", iterations, check, n_constraints, threads))
    return records


def write_csv(records: Sequence[BenchRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        for r in records:
            w.writerow(r.row())


def read_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def summary(records: Sequence[BenchRecord]) -> dict:
    by_op = {r.operation: r for r in records}
    out: dict = {
        "constraint_count": records[0].constraint_count if records else 0,
        "reference_constraint_count": REFERENCE_CONSTRAINTS,
        "reference_prove_ms": REFERENCE_PROVE_MS,
        "timing_kind": "native",
    }
    if "prove" in by_op:
        out["prove_within_reference"] = by_op["prove"].mean_ms <= REFERENCE_PROVE_MS
    if "prove" in by_op and "verify" in by_op and by_op["verify"].mean_ms > 0:
        out["prove_verify_ratio"] = round(by_op["prove"].mean_ms / by_op["verify"].mean_ms, 1)
    return out


def summary_lines(records: Sequence[BenchRecord]) -> list[str]:
    s = summary(records)
    lines = [f"{'operation':<8} {'iters':>5} {'mean_ms':>10} {'p95_ms':>10} {'rss_mib':>8}"]
    for r in records:
        lines.append(
            f"{r.operation:<8} {r.iterations:>5} {r.mean_ms:>10.2f} {r.p95_ms:>10.2f} {r.peak_rss_mib:>8.1f}"
        )
    n = s["constraint_count"]
    lines.append(
        f"constraints: {n} vs reference {REFERENCE_CONSTRAINTS} ({n / REFERENCE_CONSTRAINTS:.2f}x)"
    )
    if "prove_within_reference" in s:
        verdict = "within" if s["prove_within_reference"] else "ABOVE"
        lines.append(f"prove mean {verdict} the {REFERENCE_PROVE_MS / 1000:.0f} s desktop reference")
    lines.append("timings are native CPU measurements; browser targets are not reproduced")
    return lines


def plot(records: Sequence[BenchRecord], path: str | os.PathLike) -> Path:
    """Timing bars (log scale) and the constraint count against the reference."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_t, ax_c) = plt.subplots(1, 2, figsize=(8, 3.2), gridspec_kw={"width_ratios": [3, 1.4]})
    ops = [r.operation for r in records]
    means = [r.mean_ms for r in records]
    p95 = [r.p95_ms for r in records]
    x = range(len(ops))
    ax_t.bar([i - 0.18 for i in x], means, width=0.36, label="mean", color="#4c72b0")
    ax_t.bar([i + 0.18 for i in x], p95, width=0.36, label="p95", color="#dd8452")
    ax_t.axhline(REFERENCE_PROVE_MS, ls="--", lw=0.8, color="grey")
    ax_t.text(len(ops) - 0.5, REFERENCE_PROVE_MS, "5 s", va="bottom", ha="right", fontsize=7, color="grey")
    ax_t.set_yscale("log")
    ax_t.set_xticks(list(x), ops)
    ax_t.set_ylabel("time [ms]")
    threads = records[0].thread_count if records else 0
    ax_t.set_title(f"native timings, {threads} thread(s)", fontsize=9)
    ax_t.legend(fontsize=7, frameon=False)

    n = records[0].constraint_count if records else 0
    ax_c.bar([0, 1], [n, REFERENCE_CONSTRAINTS], color=["#4c72b0", "#bbbbbb"])
    ax_c.set_xticks([0, 1], ["built", "reference"])
    ax_c.set_title("constraints", fontsize=9)
    for i, v in enumerate((n, REFERENCE_CONSTRAINTS)):
        ax_c.text(i, v, str(v), ha="center", va="bottom", fontsize=7)

    for ax in (ax_t, ax_c):
        ax.spines[["top", "right"]].set_visible(False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
