"""Report files (sorted ``key = value`` lines) and run manifests."""

import hashlib
import json
import platform
from pathlib import Path
from typing import Optional

import numpy as np
import scipy
import structlog

from config import __version__
from errors import OutputError
from models.records import BellReport, MuEstimate, PeakSet, VisibilityFit

log = structlog.get_logger()


def format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    if isinstance(value, (tuple, list)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def render_report(fields: dict) -> str:
    return "".join(f"{key} = {format_value(fields[key])}\n" for key in sorted(fields))


def write_report(fields: dict, path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_report(fields), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from None
    return path


def read_report(path: Path) -> dict[str, str]:
    fields = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if " = " in line:
            key, value = line.split(" = ", 1)
            fields[key] = value
    return fields


def visibility_fields(raw: Optional[VisibilityFit], net: Optional[VisibilityFit] = None,
                      bell: Optional[BellReport] = None) -> dict:
    fields = {}
    if raw is not None:
        fields.update(V_raw=raw.visibility, sigma_raw=raw.sigma, offset_raw=raw.offset,
                      baseline_raw=raw.baseline, chi2_red_raw=raw.chi2_red, raw_capped=raw.capped)
    if net is not None:
        fields.update(V_net=net.visibility, sigma_net=net.sigma, net_clamped=net.clamped,
                      net_capped=net.capped)
    if bell is not None:
        fields.update(bell_sigma=bell.sigma, S_chsh=bell.chsh, bell_violation=bell.violates,
                      bell_label=bell.label)
    return fields


def peak_fields(peaks: PeakSet, mu: Optional[MuEstimate] = None) -> dict:
    fields = {"peaks": len(peaks)}
    if not len(peaks):
        fields["no_peaks"] = True
    else:
        fields["peak_positions_ns"] = tuple(p * 1e9 for p in peaks.positions)
        fields["peak_areas"] = tuple(peaks.areas)
        if len(peaks) > 1:
            fields["peak_spacing_ns"] = float(np.mean(np.diff(peaks.positions))) * 1e9
    if mu is not None:
        fields.update(mu=mu.mu, sigma_mu=mu.sigma_mu, r=mu.r, splitter=mu.splitter)
    return fields


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path: Path, kind: str, seed: Optional[int], digest: str, files: list[Path]) -> Path:
    """Run manifest: config digest, seed, versions and output digests. No timestamps."""
    path = Path(path)
    manifest = {
        "kind": kind,
        "seed": seed,
        "config_digest": digest,
        "versions": {
            "pairlab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "outputs": {Path(f).name: file_digest(f) for f in sorted(files, key=lambda p: Path(p).name)},
    }
    try:
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from None
    log.debug("Wrote manifest", path=str(path), outputs=len(files))
    return path
