"""Analytic optics: path amplitudes, dispersion models and quasi-phase-matching."""

from optics.pathcalc import (
    Observables,
    InterferenceSetup,
    OutcomeSample,
    propagate,
    pump_paths,
    cw_pump_paths,
    joint_outcomes,
    find_outcome,
    visibility_scan,
    fringe_visibility,
    sample_outcomes,
)
from optics.dispersion import DispersionModel, available_models, get_model
from optics.qpm import (
    conjugate_wavelength,
    wavelength_pairs,
    phase_mismatch,
    solve_poling_period,
    temperature_tuning,
    pdc_spectrum,
)

__all__ = [
    "Observables",
    "InterferenceSetup",
    "OutcomeSample",
    "propagate",
    "pump_paths",
    "cw_pump_paths",
    "joint_outcomes",
    "find_outcome",
    "visibility_scan",
    "fringe_visibility",
    "sample_outcomes",
    "DispersionModel",
    "available_models",
    "get_model",
    "conjugate_wavelength",
    "wavelength_pairs",
    "phase_mismatch",
    "solve_poling_period",
    "temperature_tuning",
    "pdc_spectrum",
]
