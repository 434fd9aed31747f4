"""Refractive-index models for quasi-phase-matching calculations.

Built-in models:

- ``lithium_niobate``: congruent LiNbO3, extraordinary index, temperature
  dependent Sellmeier (Jundt, Opt. Lett. 22, 1553 (1997)).
- ``mgo_lithium_niobate``: 5% MgO:LiNbO3, extraordinary index (Gayer et al.,
  Appl. Phys. B 91, 343 (2008)).
- ``constant``: n = 2.2, dispersionless.
- ``toy``: n = 2.2 + 0.5 / (lambda/um)^2.

The crystal models carry the uniform waveguide index offset (default 0.03);
the analytic models carry none. Coefficients are listed in docs/dispersion.md.
"""

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import structlog

from errors import ConfigError, DomainError

log = structlog.get_logger()

DOMAIN = (400e-9, 2000e-9)
WAVEGUIDE_INDEX_OFFSET = 0.03

# Sellmeier coefficients (a1..a6, b1..b4), wavelength in um
JUNDT_CLN = (
    (5.35583, 0.100473, 0.20692, 100.0, 11.34927, 1.5334e-2),
    (4.629e-7, 3.862e-8, -0.89e-8, 2.657e-5),
)
GAYER_MGO_CLN = (
    (5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2),
    (2.860e-6, 4.7e-8, 6.113e-8, 1.516e-4),
)


def _sellmeier(coefficients) -> Callable[[np.ndarray, float], np.ndarray]:
    a, b = coefficients

    def index(wavelength_um: np.ndarray, temperature: float) -> np.ndarray:
        f = (temperature - 24.5) * (temperature + 570.82)
        lam2 = wavelength_um ** 2
        n2 = (
            a[0] + b[0] * f
            + (a[1] + b[1] * f) / (lam2 - (a[2] + b[2] * f) ** 2)
            + (a[3] + b[3] * f) / (lam2 - a[4] ** 2)
            - a[5] * lam2
        )
        return np.sqrt(n2)

    return index


def _constant(wavelength_um: np.ndarray, temperature: float) -> np.ndarray:
    return np.full_like(wavelength_um, 2.2, dtype=float)


def _toy(wavelength_um: np.ndarray, temperature: float) -> np.ndarray:
    return 2.2 + 0.5 / wavelength_um ** 2


@dataclass(frozen=True)
class DispersionModel:
    """Named effective-index function n_eff(wavelength, temperature)."""

    name: str
    bulk_index: Callable[[np.ndarray, float], np.ndarray]
    index_offset: float = 0.0
    domain: tuple[float, float] = DOMAIN

    def n(self, wavelength, temperature: float = 25.0):
        """Effective index at wavelength (m, scalar or array)."""
        lam = np.asarray(wavelength, dtype=float)
        lo, hi = self.domain
        # relative slack so conjugates computed in floating point stay inside
        if np.any(lam < lo * (1 - 1e-12)) or np.any(lam > hi * (1 + 1e-12)):
            bad = lam[(lam < lo * (1 - 1e-12)) | (lam > hi * (1 + 1e-12))]
            raise DomainError(
                f"wavelength {float(np.ravel(bad)[0]) * 1e9:.3f} nm outside "
                f"{self.name} domain [{lo * 1e9:.0f}, {hi * 1e9:.0f}] nm"
            )
        value = self.bulk_index(lam * 1e6, temperature) + self.index_offset
        return float(value) if np.ndim(value) == 0 else value

    def with_offset(self, index_offset: float) -> "DispersionModel":
        return replace(self, index_offset=index_offset)


_MODELS = {
    "lithium_niobate": DispersionModel("lithium_niobate", _sellmeier(JUNDT_CLN), WAVEGUIDE_INDEX_OFFSET),
    "mgo_lithium_niobate": DispersionModel("mgo_lithium_niobate", _sellmeier(GAYER_MGO_CLN), WAVEGUIDE_INDEX_OFFSET),
    "constant": DispersionModel("constant", _constant),
    "toy": DispersionModel("toy", _toy),
}


def available_models() -> list[str]:
    return sorted(_MODELS)


def get_model(name: str, index_offset: Optional[float] = None) -> DispersionModel:
    """Look up a built-in model, optionally overriding its index offset."""
    try:
        model = _MODELS[name]
    except KeyError:
        raise ConfigError(
            f"unknown dispersion model '{name}' (choose from {', '.join(available_models())})"
        ) from None
    if index_offset is not None:
        model = model.with_offset(index_offset)
    log.debug("Loaded dispersion model", model=name, index_offset=model.index_offset)
    return model
