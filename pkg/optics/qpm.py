"""Quasi-phase-matching: energy conservation, phase mismatch, poling period, spectra.

Collinear scalar wave vectors, first-order grating. Wavelengths in m,
wave vectors in rad/m, temperatures in degrees C.
"""

import math
from typing import Sequence

import numpy as np
import structlog

from errors import (
    EnergyConservationError,
    FwhmUndefinedError,
    NoFinitePeriodError,
    NoPositivePeriodError,
)
from models.records import Spectrum
from models.specs import PolingSpec
from optics.dispersion import DispersionModel

log = structlog.get_logger()

# carrier mismatch below this fraction of k_p counts as exactly phase matched
FINITE_PERIOD_RTOL = 1e-9


def conjugate_wavelength(pump: float, signal: float) -> float:
    """Idler wavelength from 1/lambda_i = 1/lambda_p - 1/lambda_s."""
    if not 0 < pump < signal:
        raise EnergyConservationError(
            f"signal wavelength {signal * 1e9:.3f} nm must exceed pump wavelength {pump * 1e9:.3f} nm"
        )
    return 1.0 / (1.0 / pump - 1.0 / signal)


def wavelength_pairs(pump: float, signals: Sequence[float]) -> np.ndarray:
    """(signal, idler) table, shape (n, 2)."""
    lam_s = np.asarray(signals, dtype=float)
    if np.any(lam_s <= pump) or pump <= 0:
        raise EnergyConservationError("every signal wavelength must exceed the pump wavelength")
    lam_i = 1.0 / (1.0 / pump - 1.0 / lam_s)
    return np.column_stack([lam_s, lam_i])


def _carrier_mismatch(model: DispersionModel, pump: float, signal, temperature: float):
    """2*pi*(n_p/lambda_p - n_s/lambda_s - n_i/lambda_i), signal scalar or array."""
    lam_s = np.asarray(signal, dtype=float)
    if pump <= 0 or np.any(lam_s <= pump):
        raise EnergyConservationError("signal wavelength must exceed the pump wavelength")
    # wavenumbers keep 1/lambda_i = 1/lambda_p - 1/lambda_s exact
    sigma_p = 1.0 / pump
    sigma_s = 1.0 / lam_s
    sigma_i = sigma_p - sigma_s
    n_p = model.n(pump, temperature)
    n_s = model.n(lam_s, temperature)
    n_i = model.n(1.0 / sigma_i, temperature)
    return 2 * math.pi * (n_p * sigma_p - (n_s * sigma_s + n_i * sigma_i))


def phase_mismatch(model: DispersionModel, spec: PolingSpec, pump: float, signal):
    """Delta k = k_p - k_s - k_i - 2*pi/period (rad/m)."""
    dk = _carrier_mismatch(model, pump, signal, spec.temperature) - spec.grating_k
    return float(dk) if np.ndim(dk) == 0 else dk


def solve_poling_period(model: DispersionModel, pump: float, signal: float, temperature: float) -> float:
    """First-order period that cancels the carrier mismatch."""
    carrier = float(_carrier_mismatch(model, pump, signal, temperature))
    k_pump = 2 * math.pi * model.n(pump, temperature) / pump
    if abs(carrier) <= FINITE_PERIOD_RTOL * k_pump:
        raise NoFinitePeriodError(
            f"{model.name}: carrier mismatch is zero at {signal * 1e9:.3f} nm; no finite period needed"
        )
    if carrier < 0:
        raise NoPositivePeriodError(
            f"{model.name}: carrier mismatch {carrier:.6g} rad/m is negative; no positive first-order period"
        )
    period = 2 * math.pi / carrier
    log.debug("Solved poling period", model=model.name, period_um=period * 1e6, temperature=temperature)
    return period


def temperature_tuning(
    model: DispersionModel, spec: PolingSpec, pump: float, signal: float, temperatures: Sequence[float]
) -> np.ndarray:
    """Phase mismatch at each temperature for a fixed grating."""
    return np.array([
        phase_mismatch(model, spec.model_copy(update={"temperature": float(t)}), pump, signal)
        for t in temperatures
    ])


def _half_max_crossing(x: np.ndarray, y: np.ndarray, peak: int, step: int) -> float:
    i = peak
    while 0 <= i + step < len(y):
        j = i + step
        if y[j] < 0.5:
            return float(np.interp(0.5, [y[j], y[i]], [x[j], x[i]]))
        i = j
    raise IndexError


def pdc_spectrum(model: DispersionModel, spec: PolingSpec, pump: float, grid: Sequence[float]) -> Spectrum:
    """sinc^2(Delta k L / 2) over a signal-wavelength grid, normalized to max 1, with FWHM."""
    lam = np.asarray(grid, dtype=float)
    if lam.ndim != 1 or len(lam) < 2:
        raise FwhmUndefinedError("spectrum grid needs at least two points")
    if np.any(np.diff(lam) <= 0):
        raise FwhmUndefinedError("spectrum grid must be strictly increasing")

    dk = phase_mismatch(model, spec, pump, lam)
    # np.sinc is sin(pi x)/(pi x)
    intensity = np.sinc(dk * spec.length / 2 / np.pi) ** 2
    peak = int(np.argmax(intensity))
    top = intensity[peak]
    if top <= 0:
        raise FwhmUndefinedError("spectrum is zero over the whole grid", Spectrum(lam, intensity))
    intensity = intensity / top

    try:
        left = _half_max_crossing(lam, intensity, peak, -1)
        right = _half_max_crossing(lam, intensity, peak, +1)
    except IndexError:
        raise FwhmUndefinedError(
            "grid does not bracket the half maximum on both sides",
            Spectrum(lam, intensity, None, float(lam[peak])),
        ) from None

    fwhm = right - left
    log.debug("Computed PDC spectrum", model=model.name, points=len(lam), fwhm_nm=fwhm * 1e9)
    return Spectrum(lam, intensity, fwhm, float(lam[peak]))
