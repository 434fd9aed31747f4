"""End-to-end Monte-Carlo pipelines and the scenario runner."""

from pipelines.coincidence import (
    ClickRecord,
    CwResult,
    PulsedResult,
    simulate_clicks,
    cw_coincidence,
    pulsed_coincidence,
)
from pipelines.interference import (
    ScanPoint,
    FransonResult,
    TimebinResult,
    simulate_point,
    franson,
    timebin,
)
from pipelines.runner import QpmResult, qpm_design, write_qpm_design, run_scenario, analyze_file

__all__ = [
    "ClickRecord",
    "CwResult",
    "PulsedResult",
    "simulate_clicks",
    "cw_coincidence",
    "pulsed_coincidence",
    "ScanPoint",
    "FransonResult",
    "TimebinResult",
    "simulate_point",
    "franson",
    "timebin",
    "QpmResult",
    "qpm_design",
    "write_qpm_design",
    "run_scenario",
    "analyze_file",
]
