"""Fringe visibility fits, accidental subtraction and Bell significance."""

import math
from dataclasses import replace
from typing import Optional, Sequence, Union

import numpy as np
import structlog

from errors import FitError, UndefinedEstimateError
from models.records import BellReport, VisibilityFit

log = structlog.get_logger()

BELL_BOUND = 1 / math.sqrt(2)

Scan = Union[Sequence[tuple[float, float]], np.ndarray]


def _as_scan(scan: Scan) -> tuple[np.ndarray, np.ndarray]:
    data = np.asarray(scan, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise FitError("scan must be a sequence of (phase, counts) pairs")
    return data[:, 0], data[:, 1]


def _fringe(phi, a, b, c):
    # a (1 + V cos(phi + offset)) == a + b cos(phi) + c sin(phi)
    return a + b * np.cos(phi) + c * np.sin(phi)


def fit_visibility(scan: Scan, variances: Optional[Sequence[float]] = None) -> VisibilityFit:
    """Least-squares fit of R(phi) = R0 (1 + V cos(phi + phi0)).

    Weights are 1/max(counts, 1) unless explicit variances are given. The
    phases must span at least pi. Noisy scans can fit V above 1; the result
    is then capped at 1 and flagged.
    """
    phi, y = _as_scan(scan)
    if len(phi) < 4:
        raise FitError(f"need at least 4 scan points, got {len(phi)}")
    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    if np.linalg.matrix_rank(design) < 3:
        raise FitError("degenerate phase scan: phases do not resolve a sinusoid")
    if np.ptp(phi) < math.pi:
        raise FitError(f"phase scan spans {np.ptp(phi):.3g} rad, need at least pi")

    var = np.maximum(y if variances is None else np.asarray(variances, dtype=float), 1.0)
    sigma = np.sqrt(var)
    # linear in (a, b, c): weighted least squares, covariance from the normal matrix
    weighted = design / sigma[:, None]
    popt, *_ = np.linalg.lstsq(weighted, y / sigma, rcond=None)
    pcov = np.linalg.inv(weighted.T @ weighted)
    a, b, c = popt
    if a <= 0:
        raise FitError(f"fitted baseline {a:.4g} is not positive")

    amplitude = math.hypot(b, c)
    visibility = amplitude / a
    capped = visibility > 1.0
    if capped:
        log.warning("Fitted visibility above 1, capped", visibility=visibility, points=len(phi))
    if amplitude > 0:
        grad = np.array([-amplitude / a ** 2, b / (a * amplitude), c / (a * amplitude)])
        sigma_v = math.sqrt(max(float(grad @ pcov @ grad), 0.0))
    else:
        sigma_v = math.sqrt((pcov[1, 1] + pcov[2, 2]) / 2) / a

    residual = y - _fringe(phi, *popt)
    dof = len(phi) - 3
    chi2_red = float(np.sum(residual ** 2 / var) / dof) if dof > 0 else float("nan")
    return VisibilityFit(
        visibility=min(float(visibility), 1.0),
        sigma=float(sigma_v),
        offset=float(math.atan2(-c, b)),
        baseline=float(a),
        chi2_red=chi2_red,
        n_points=len(phi),
        capped=capped,
    )


def accidental_rate(s1: float, s2: float, window: float) -> float:
    """Uncorrelated-stream coincidence rate S1 S2 tau."""
    if min(s1, s2, window) < 0:
        raise UndefinedEstimateError("rates and window must be nonnegative")
    return s1 * s2 * window


def subtract_accidentals(
    raw: Union[VisibilityFit, Scan],
    s1: float,
    s2: float,
    window: float,
    duration: float,
) -> VisibilityFit:
    """Net visibility after removing S1 S2 tau * duration counts per scan point.

    A scan is refit with the raw-count weights; points driven negative are
    clamped to zero and the result is flagged. A fit is rescaled,
    V_net = V_raw * R0 / (R0 - accidentals).
    """
    accidentals = accidental_rate(s1, s2, window) * duration

    if isinstance(raw, VisibilityFit):
        net_baseline = raw.baseline - accidentals
        if net_baseline <= 0:
            raise FitError("accidental coincidences exceed the fitted baseline")
        scale = raw.baseline / net_baseline
        visibility = raw.visibility * scale
        return replace(raw, visibility=min(visibility, 1.0), sigma=raw.sigma * scale, baseline=net_baseline,
                       capped=raw.capped or visibility > 1.0)

    phi, y = _as_scan(raw)
    net = y - accidentals
    clamped = bool(np.any(net < 0))
    if clamped:
        log.warning("Accidental subtraction clamped negative points", points=int(np.sum(net < 0)),
                    accidentals=accidentals)
        net = np.maximum(net, 0.0)
    fit = fit_visibility(np.column_stack([phi, net]), variances=y)
    log.info("Subtracted accidentals", accidentals_per_point=accidentals, v_net=fit.visibility)
    return replace(fit, clamped=clamped)


def bell_significance(visibility: float, sigma: float) -> BellReport:
    """Standard deviations of V above 1/sqrt(2), with CHSH S = 2 sqrt(2) V."""
    if sigma <= 0:
        raise UndefinedEstimateError(f"visibility uncertainty must be positive, got {sigma}")
    significance = (visibility - BELL_BOUND) / sigma
    violates = significance > 0
    label = f">= {math.floor(significance)} sigma" if violates else "no violation"
    return BellReport(
        sigma=significance,
        chsh=2 * math.sqrt(2) * visibility,
        violates=violates,
        label=label,
    )
