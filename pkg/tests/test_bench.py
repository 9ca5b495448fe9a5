import json
import os

import pytest
from click.testing import CliRunner

from sans import bench
from sans.cli import main
from test_circuit import EXPECTED_CONSTRAINTS


@pytest.fixture(scope="module")
def records(artifacts):
    return bench.run(10, threads=1, artifacts=artifacts, setup_iterations=0)


def test_records_cover_prove_and_verify(records):
    assert [r.operation for r in records] == ["prove", "verify"]
    assert all(r.iterations == 10 for r in records)
    assert {r.constraint_count for r in records} == {EXPECTED_CONSTRAINTS}
    assert all(r.curve == "bn254" and r.thread_count == 1 for r in records)
    assert all(0 < r.mean_ms <= r.p95_ms * 10 for r in records)


def test_verify_is_an_order_of_magnitude_cheaper(records):
    by = {r.operation: r for r in records}
    assert by["verify"].mean_ms * 10 <= by["prove"].mean_ms


def test_too_few_iterations_refused(artifacts):
    with pytest.raises(ValueError):
        bench.run(3, artifacts=artifacts)


def test_csv_schema_roundtrip(records, tmp_path):
    path = tmp_path / "b.csv"
    bench.write_csv(records, path)
    assert path.read_text().splitlines()[0] == ",".join(bench.COLUMNS)
    rows = bench.read_csv(path)
    assert [r["operation"] for r in rows] == ["prove", "verify"]
    assert float(rows[0]["mean_ms"]) == records[0].mean_ms


def test_plot_writes_png(records, tmp_path):
    path = bench.plot(records, tmp_path / "b.png")
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_percentile_nearest_rank():
    assert bench.percentile([5, 1, 3, 2, 4], 95) == 5
    assert bench.percentile([5, 1, 3, 2, 4], 40) == 2
    assert bench.percentile([7], 50) == 7


def test_summary_reports_reference_comparison(records):
    s = bench.summary(records)
    assert s["constraint_count"] == EXPECTED_CONSTRAINTS
    assert s["prove_within_reference"] is True
    assert s["prove_verify_ratio"] >= 10
    assert any("reference 7565" in line for line in bench.summary_lines(records))


@pytest.mark.skipif((os.cpu_count() or 1) < 2, reason="thread scaling needs at least two cores")
def test_more_threads_do_not_slow_proving(artifacts):
    one = {r.operation: r for r in bench.run(10, threads=1, artifacts=artifacts, setup_iterations=0)}
    two = {r.operation: r for r in bench.run(10, threads=2, artifacts=artifacts, setup_iterations=0)}
    assert two["prove"].mean_ms <= one["prove"].mean_ms


def test_bench_command_writes_csv_and_plot(tmp_path):
    out = tmp_path / "bench.csv"
    res = CliRunner().invoke(
        main, ["--json", "bench", "--iterations", "10", "--out", str(out), "--setup-iterations", "1"]
    )
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert data["summary"]["constraint_count"] == EXPECTED_CONSTRAINTS
    assert len(data["records"]) == 3
    rows = bench.read_csv(out)
    assert [r["operation"] for r in rows] == ["setup", "prove", "verify"]
    assert list(rows[0]) == list(bench.COLUMNS)
    assert out.with_suffix(".png").exists()
