"""File formats for simulation and analysis output."""

from formatters.csv_io import (
    write_histogram,
    read_histogram,
    write_scan,
    read_scan,
    write_spectrum,
    write_events,
    sniff,
    meta_path,
)
from formatters.report import (
    render_report,
    write_report,
    read_report,
    visibility_fields,
    peak_fields,
    write_manifest,
)

__all__ = [
    "write_histogram",
    "read_histogram",
    "write_scan",
    "read_scan",
    "write_spectrum",
    "write_events",
    "sniff",
    "meta_path",
    "render_report",
    "write_report",
    "read_report",
    "visibility_fields",
    "peak_fields",
    "write_manifest",
]
