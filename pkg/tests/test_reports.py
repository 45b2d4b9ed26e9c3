import csv
import io
import json

import pytest

from qdsbench.app.core.analysis import bound_report
from qdsbench.app.core.models import Protocol, Role, TrialStats
from qdsbench.app.core.params import AdversaryConfig, ProtocolParams, Scenario
from qdsbench.app.infra.reports import (
    BOUND_COLUMNS,
    SIMULATION_COLUMNS,
    ReportError,
    SimulationReport,
    emit_report,
    load_report,
    report_record,
)


def sample_report(seed=3):
    scenario = Scenario(
        protocol=Protocol.P2,
        params=ProtocolParams(length=100, s_v=0.1, r=0.1),
        adversary=AdversaryConfig(role=Role.REPUDIATE),
        trials=1000,
        master_seed=seed,
    )
    stats = TrialStats(
        trials=1000,
        successes=2,
        aborts=10,
        rate=2 / 990,
        ci_low=0.00012,
        ci_high=0.0094,
        bound=2**-10,
        mismatch_histogram={10: 0.5, 12: 0.25, 9: 0.25},
    )
    return SimulationReport(scenario, stats)


def test_json_report_fields(tmp_path):
    path = tmp_path / "out" / "report.json"
    emit_report(sample_report(), "json", path)
    data = load_report(path)
    assert list(data) == [
        "protocol", "adversary", "params", "trials", "seed", "aborts", "successes",
        "rate", "ci_low", "ci_high", "bound", "mismatch_histogram",
    ]
    assert data["protocol"] == "p2"
    assert data["adversary"] == "repudiate"
    assert data["params"] == {"length": 100, "sa": 0.0, "sv": 0.1, "r": 0.1}
    assert data["rate"] == 2 / 990
    assert data["mismatch_histogram"] == {"10": 0.5, "12": 0.25, "9": 0.25}


def test_json_is_byte_stable(tmp_path):
    first = emit_report(sample_report(), "json", tmp_path / "a.json")
    second = emit_report(sample_report(), "json", tmp_path / "b.json")
    assert first == second
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_csv_report(tmp_path):
    path = tmp_path / "runs.csv"
    emit_report([sample_report(1), sample_report(2)], "csv", path)
    rows = list(csv.reader(io.StringIO(path.read_text(encoding="utf-8"))))
    # one header row plus one row per scenario
    assert rows[0] == SIMULATION_COLUMNS
    assert len(rows) == 3
    row = dict(zip(rows[0], rows[1]))
    assert row["seed"] == "1"
    assert float(row["rate"]) == pytest.approx(2 / 990, rel=1e-8)
    assert row["rate"] == f"{2 / 990:.9e}"


def test_bound_report_csv_to_stdout(capsys):
    report = bound_report(Protocol.P1, ProtocolParams(length=512, s_v=0.03, r=0.05))
    emit_report(report, "csv")
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == BOUND_COLUMNS
    assert rows[1][0] == "p1"
    assert rows[1][BOUND_COLUMNS.index("K")] == "231"
    assert rows[1][BOUND_COLUMNS.index("vacuous")] == "false"


def test_bound_report_record():
    report = bound_report(Protocol.P2, ProtocolParams(length=133, s_v=0.1, r=0.01))
    record = report_record(report)
    assert record["params"] == {"length": 133, "sa": 0.0, "sv": 0.1, "r": 0.01}
    assert json.loads(json.dumps(record))["K"] == 66


def test_report_errors(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(ReportError) as e:
        emit_report(sample_report(), "json", blocker / "report.json")
    assert "report.json" in str(e.value)

    with pytest.raises(ValueError):
        emit_report(sample_report(), "xml", tmp_path / "r.xml")
    with pytest.raises(ValueError):
        emit_report([sample_report(), report_bound()], "csv", tmp_path / "mixed.csv")


def report_bound():
    return bound_report(Protocol.P2, ProtocolParams(length=100, s_v=0.1, r=0.1))


def test_load_report_errors(tmp_path):
    with pytest.raises(ReportError):
        load_report(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ReportError):
        load_report(broken)
