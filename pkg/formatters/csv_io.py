"""CSV files for histograms, phase scans, spectra and event streams.

Formats (header line first):

- histogram: ``bin_start_ns,counts`` plus a JSON sidecar ``<name>.meta.json``
- scan: ``phase_rad,counts``
- spectrum: ``wavelength_nm,intensity``
- events: ``time_ns,pulse_index,pair_id,arm``
"""

import csv
import json
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import numpy as np
import structlog

from config import get_config
from errors import CsvParseError, OutputError
from models.records import Histogram, PhotonStream, Spectrum

log = structlog.get_logger()

HISTOGRAM_HEADER = ["bin_start_ns", "counts"]
SCAN_HEADER = ["phase_rad", "counts"]
SPECTRUM_HEADER = ["wavelength_nm", "intensity"]
EVENTS_HEADER = ["time_ns", "pulse_index", "pair_id", "arm"]


def fmt(value: float, digits: Optional[int] = None) -> str:
    digits = digits or get_config().csv_float_digits
    text = f"{float(value):.{digits}g}"
    return "0" if text == "-0" else text


@contextmanager
def _writer(path: Path, header: list[str]):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            yield writer
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from None


def meta_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_histogram(hist: Histogram, path: Path, seed: Optional[int] = None, digest: str = "") -> Path:
    """Histogram CSV and its metadata sidecar."""
    with _writer(path, HISTOGRAM_HEADER) as writer:
        for start, count in zip(hist.bin_starts, hist.counts):
            writer.writerow([fmt(start * 1e9), int(count)])
    meta = {
        "origin_ns": float(hist.origin * 1e9),
        "bin_width_ns": float(hist.bin_width * 1e9),
        "n_bins": hist.n_bins,
        "duration_s": float(hist.duration),
        "starts": int(hist.starts),
        "seed": seed,
        "config_digest": digest,
    }
    try:
        meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write {meta_path(path)}: {e.strerror or e}") from None
    log.debug("Wrote histogram", path=str(path), bins=hist.n_bins, total=hist.total)
    return Path(path)


def write_scan(phases, counts, path: Path) -> Path:
    with _writer(path, SCAN_HEADER) as writer:
        for phase, count in zip(phases, counts):
            writer.writerow([fmt(phase), fmt(count)])
    return Path(path)


def write_spectrum(spectrum: Spectrum, path: Path) -> Path:
    with _writer(path, SPECTRUM_HEADER) as writer:
        for wavelength, intensity in zip(spectrum.wavelengths, spectrum.intensity):
            writer.writerow([fmt(wavelength * 1e9), fmt(intensity)])
    return Path(path)


def write_events(arm1: PhotonStream, arm2: PhotonStream, path: Path) -> Path:
    """Photons arriving at the two detectors, merged in time order; arm is 1 or 2."""
    time = np.concatenate([arm1.time, arm2.time])
    pulse = np.concatenate([arm1.pulse_index, arm2.pulse_index])
    pair = np.concatenate([arm1.pair_id, arm2.pair_id])
    arm = np.concatenate([np.ones(len(arm1), dtype=np.int64), np.full(len(arm2), 2, dtype=np.int64)])
    order = np.argsort(time, kind="stable")
    with _writer(path, EVENTS_HEADER) as writer:
        for i in order:
            writer.writerow([fmt(time[i] * 1e9, 15), int(pulse[i]), int(pair[i]), int(arm[i])])
    log.debug("Wrote events", path=str(path), photons=len(order))
    return Path(path)


def _read_rows(path: Path, header: list[str]) -> list[tuple[int, list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(enumerate(csv.reader(handle), start=1))
    except OSError as e:
        raise CsvParseError(f"cannot read {path}: {e.strerror or e}") from None
    if not rows:
        raise CsvParseError("file is empty", 1)
    first = [c.strip() for c in rows[0][1]]
    if first != header:
        raise CsvParseError(f"expected header '{','.join(header)}', got '{','.join(first)}'", 1)
    body = []
    for line, row in rows[1:]:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CsvParseError(f"expected {len(header)} columns, got {len(row)}", line)
        body.append((line, [c.strip() for c in row]))
    return body


def _number(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CsvParseError(f"{column}: '{text}' is not a number", line) from None
    if not np.isfinite(value):
        raise CsvParseError(f"{column}: '{text}' is not finite", line)
    return value


def sniff(path: Path) -> str:
    """'histogram' or 'scan' from the header line."""
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            header = next(csv.reader(handle), [])
    except OSError as e:
        raise CsvParseError(f"cannot read {path}: {e.strerror or e}") from None
    header = [c.strip() for c in header]
    if header == HISTOGRAM_HEADER:
        return "histogram"
    if header == SCAN_HEADER:
        return "scan"
    raise CsvParseError(f"unrecognized header '{','.join(header)}'", 1)


def read_histogram(path: Path) -> Histogram:
    """Histogram from CSV; binning, starts and duration come from the sidecar when present."""
    path = Path(path)
    rows = _read_rows(path, HISTOGRAM_HEADER)
    starts, counts = [], []
    for line, (start, count) in rows:
        starts.append(_number(start, line, "bin_start_ns"))
        value = _number(count, line, "counts")
        if value < 0 or not float(value).is_integer():
            raise CsvParseError(f"counts: '{count}' is not a nonnegative integer", line)
        counts.append(int(value))
    if not counts:
        raise CsvParseError("histogram has no bins", 2)

    meta = {}
    if meta_path(path).exists():
        try:
            meta = json.loads(meta_path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise CsvParseError(f"unreadable sidecar {meta_path(path)}: {e}") from None

    if "bin_width_ns" in meta:
        width = float(meta["bin_width_ns"]) * 1e-9
    elif len(starts) > 1:
        steps = np.diff(starts)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6):
            bad = int(np.argmax(np.abs(steps - steps[0]) > 1e-6 * abs(steps[0]))) + 3
            raise CsvParseError("bin starts are not uniformly spaced", bad)
        width = float(steps[0]) * 1e-9
    else:
        raise CsvParseError("single-bin histogram needs a sidecar with bin_width_ns", 2)

    return Histogram(
        origin=float(meta.get("origin_ns", starts[0])) * 1e-9,
        bin_width=width,
        counts=np.asarray(counts, dtype=np.int64),
        starts=int(meta.get("starts", 0)),
        duration=float(meta.get("duration_s", 0.0)),
    )


def read_scan(path: Path) -> np.ndarray:
    """Scan as an (n, 2) array of (phase, counts)."""
    rows = _read_rows(Path(path), SCAN_HEADER)
    data = []
    for line, (phase, count) in rows:
        value = _number(count, line, "counts")
        if value < 0:
            raise CsvParseError(f"counts: '{count}' is negative", line)
        data.append((_number(phase, line, "phase_rad"), value))
    return np.asarray(data, dtype=float).reshape(-1, 2)
