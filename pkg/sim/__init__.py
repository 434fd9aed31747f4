"""Monte-Carlo simulation: pair source and detection electronics."""

from sim.source import (
    ExpectedRates,
    make_rng,
    pump_photon_rate,
    photons_per_pulse,
    pair_rate,
    mean_pairs_per_pulse,
    estimate_efficiency,
    expected_rates,
    iter_emissions,
    generate_emissions,
    concat_batches,
    split_pairs,
    apply_transmission,
)
from sim.detect import (
    detect,
    apply_dead_time,
    tac,
    coincidence_pairs,
    pair_deltas,
    sca,
    three_fold_counts,
    merge_histograms,
)

__all__ = [
    "ExpectedRates",
    "make_rng",
    "pump_photon_rate",
    "photons_per_pulse",
    "pair_rate",
    "mean_pairs_per_pulse",
    "estimate_efficiency",
    "expected_rates",
    "iter_emissions",
    "generate_emissions",
    "concat_batches",
    "split_pairs",
    "apply_transmission",
    "detect",
    "apply_dead_time",
    "tac",
    "coincidence_pairs",
    "pair_deltas",
    "sca",
    "three_fold_counts",
    "merge_histograms",
]
