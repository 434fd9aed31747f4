"""Validated configuration types for sources, analyzers, detectors and gratings.

All quantities are SI base units (s, W, m, Hz, rad). Unit conversion from the
scenario file happens in models.scenario.
"""

import enum
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class PumpMode(enum.Enum):
    CW = "cw"
    PULSED = "pulsed"


class PairStatistics(enum.Enum):
    POISSON = "poisson"
    THERMAL = "thermal"


class Splitter(enum.Enum):
    BEAMSPLITTER = "beamsplitter"
    DEMUX = "demux"


class _Spec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class InterferometerSpec(_Spec):
    """Unbalanced Mach-Zehnder analyzer (or pump interferometer).

    transmission_short/long are amplitude transmissions of the two arms;
    loss is a per-pass transmission probability applied to both arms.
    """

    imbalance: float = Field(gt=0, allow_inf_nan=False)
    phase: float = Field(default=0.0, allow_inf_nan=False)
    transmission_short: float = Field(default=1.0, ge=0, le=1)
    transmission_long: float = Field(default=1.0, ge=0, le=1)
    loss: float = Field(default=1.0, ge=0, le=1)

    def with_phase(self, phase: float) -> "InterferometerSpec":
        return self.model_copy(update={"phase": phase})


class SourceConfig(_Spec):
    """SPDC pair source driven by a CW or pulsed pump."""

    efficiency: float = Field(ge=0, lt=1)
    pump_power: float = Field(ge=0)
    pump_wavelength: float = Field(gt=0)
    mode: PumpMode = PumpMode.CW
    repetition_rate: Optional[float] = Field(default=None, gt=0)
    pulse_duration: Optional[float] = Field(default=None, ge=0)
    statistics: PairStatistics = PairStatistics.POISSON

    @model_validator(mode="after")
    def _check_pulsed(self):
        if self.mode is PumpMode.PULSED:
            if self.repetition_rate is None or self.pulse_duration is None:
                raise ValueError("pulsed mode needs repetition_rate and pulse_duration")
            if self.pulse_duration >= 1.0 / self.repetition_rate:
                raise ValueError("pulse_duration must be shorter than the pulse period")
        return self

    @property
    def pulse_period(self) -> float:
        if self.repetition_rate is None:
            raise ValueError("CW source has no pulse period")
        return 1.0 / self.repetition_rate


class DetectorSpec(_Spec):
    """Geiger-mode APD: thinning, dark counts, jitter, non-paralyzable dead time."""

    efficiency: float = Field(default=1.0, ge=0, le=1)
    dark_rate: float = Field(default=0.0, ge=0)
    dead_time: float = Field(default=0.0, ge=0)
    jitter: float = Field(default=0.0, ge=0)


class CoincidenceWindow(_Spec):
    """SCA window [center - width/2, center + width/2)."""

    center: float = Field(default=0.0, allow_inf_nan=False)
    width: float = Field(gt=0, allow_inf_nan=False)

    @property
    def bounds(self) -> tuple[float, float]:
        return self.center - self.width / 2, self.center + self.width / 2


class PolingSpec(_Spec):
    """First-order QPM grating. period may be math.inf to drop the grating term."""

    period: float = Field(gt=0)
    length: float = Field(gt=0, allow_inf_nan=False)
    temperature: float = Field(default=25.0, allow_inf_nan=False)

    @property
    def grating_k(self) -> float:
        if math.isinf(self.period):
            return 0.0
        return 2 * math.pi / self.period
