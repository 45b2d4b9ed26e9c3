import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Union

from qdsbench.app.core.models import BoundReport, TrialStats
from qdsbench.app.core.params import Scenario

logger = logging.getLogger(__name__)

SIMULATION_COLUMNS = [
    "protocol", "adversary", "length", "sa", "sv", "r", "trials", "seed",
    "aborts", "successes", "rate", "ci_low", "ci_high", "bound",
]
BOUND_COLUMNS = [
    "protocol", "length", "sa", "sv", "r",
    "repudiation_bound", "forging_bound", "abort_bound", "K", "vacuous",
]
_PROBABILITY_FIELDS = {
    "rate", "ci_low", "ci_high", "bound", "repudiation_bound", "forging_bound", "abort_bound",
}


class ReportError(OSError):
    """Report could not be written or read; the message names the path."""


class SimulationReport(NamedTuple):
    scenario: Scenario
    stats: TrialStats


Report = Union[SimulationReport, BoundReport]


def _params(length: int, s_a: float, s_v: float, r: float) -> Dict[str, Any]:
    return {"length": length, "sa": s_a, "sv": s_v, "r": r}


def report_record(report: Report) -> Dict[str, Any]:
    """Ordered dict matching the JSON report object."""
    if isinstance(report, SimulationReport):
        scenario, stats = report.scenario, report.stats
        params = scenario.params
        return {
            "protocol": scenario.protocol.value,
            "adversary": scenario.adversary.role.value,
            "params": _params(params.length, params.s_a, params.s_v, params.r),
            "trials": stats.trials,
            "seed": scenario.master_seed,
            "aborts": stats.aborts,
            "successes": stats.successes,
            "rate": stats.rate,
            "ci_low": stats.ci_low,
            "ci_high": stats.ci_high,
            "bound": stats.bound,
            "mismatch_histogram": {str(k): v for k, v in stats.mismatch_histogram.items()},
        }
    return {
        "protocol": report.protocol.value,
        "params": _params(report.length, report.s_a, report.s_v, report.r),
        "repudiation_bound": report.repudiation_bound,
        "forging_bound": report.forging_bound,
        "abort_bound": report.abort_bound,
        "K": report.K,
        "vacuous": report.vacuous,
    }


def _flatten(record: Dict[str, Any]) -> Dict[str, Any]:
    flat = {k: v for k, v in record.items() if k != "params"}
    flat.update(record["params"])
    return flat


def _cell(name: str, value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.9e}" if name in _PROBABILITY_FIELDS else f"{value:.10g}"
    return str(value)


def render_json(reports: Sequence[Report]) -> str:
    records = [report_record(r) for r in reports]
    payload: Any = records[0] if len(records) == 1 else records
    return json.dumps(payload, indent=2) + "\n"


def render_csv(reports: Sequence[Report]) -> str:
    kinds = {type(r) for r in reports}
    if len(kinds) != 1:
        raise ValueError("a CSV report holds one kind of report per file")
    columns = SIMULATION_COLUMNS if isinstance(reports[0], SimulationReport) else BOUND_COLUMNS
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for report in reports:
        flat = _flatten(report_record(report))
        writer.writerow([_cell(c, flat[c]) for c in columns])
    return buffer.getvalue()


def emit_report(
    reports: Union[Report, Sequence[Report]],
    fmt: str = "json",
    path: Optional[Union[str, Path]] = None,
) -> str:
    """Serialize one report or a list of them; write to ``path`` or stdout.

    Output is byte-stable for fixed inputs. Returns the rendered text.
    """
    if isinstance(reports, (SimulationReport, BoundReport)):
        reports = [reports]
    if not reports:
        raise ValueError("nothing to report")
    if fmt == "json":
        text = render_json(reports)
    elif fmt == "csv":
        text = render_csv(reports)
    else:
        raise ValueError(f"unknown report format {fmt!r}; use json or csv")

    if path is None:
        sys.stdout.write(text)
        return text
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportError(f"cannot write report to {target}: {e}") from e
    logger.info("wrote %s report to %s", fmt, target)
    return text


def load_report(path: Union[str, Path]) -> Union[Dict[str, Any], List[Dict[str, Any]]]:
    """Parse a JSON report written by ``emit_report``."""
    source = Path(path)
    try:
        with open(source, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ReportError(f"cannot read report {source}: {e}") from e
    except json.JSONDecodeError as e:
        raise ReportError(f"report {source} is not valid JSON: {e}") from e
