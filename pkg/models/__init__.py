"""Domain models for pairlab."""

from models.specs import (
    InterferometerSpec,
    SourceConfig,
    PumpMode,
    PairStatistics,
    Splitter,
    DetectorSpec,
    CoincidenceWindow,
    PolingSpec,
)
from models.records import (
    PairEvent,
    EmissionBatch,
    PhotonStream,
    DetectionEvent,
    DetectionStream,
    PhotonPath,
    CoherentGroup,
    JointOutcome,
    Histogram,
    Spectrum,
    PeakSet,
    MuEstimate,
    VisibilityFit,
    BellReport,
)
from models.scenario import (
    Scenario,
    ScenarioKind,
    TacSettings,
    ScanSettings,
    AnalysisSettings,
    QpmSettings,
    parse_scenario,
    load_scenario,
)

__all__ = [
    "Scenario",
    "ScenarioKind",
    "TacSettings",
    "ScanSettings",
    "AnalysisSettings",
    "QpmSettings",
    "parse_scenario",
    "load_scenario",
    "InterferometerSpec",
    "SourceConfig",
    "PumpMode",
    "PairStatistics",
    "Splitter",
    "DetectorSpec",
    "CoincidenceWindow",
    "PolingSpec",
    "PairEvent",
    "EmissionBatch",
    "PhotonStream",
    "DetectionEvent",
    "DetectionStream",
    "PhotonPath",
    "CoherentGroup",
    "JointOutcome",
    "Histogram",
    "Spectrum",
    "PeakSet",
    "MuEstimate",
    "VisibilityFit",
    "BellReport",
]
