"""Recovery of physical quantities from histograms and phase scans."""

from analysis.peaks import coates_correct, find_peaks, central_index, infer_mu, fringe_ratio
from analysis.visibility import (
    BELL_BOUND,
    fit_visibility,
    accidental_rate,
    subtract_accidentals,
    bell_significance,
)

__all__ = [
    "coates_correct",
    "find_peaks",
    "central_index",
    "infer_mu",
    "fringe_ratio",
    "BELL_BOUND",
    "fit_visibility",
    "accidental_rate",
    "subtract_accidentals",
    "bell_significance",
]
