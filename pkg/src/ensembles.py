"""Seeded random bath configurations and Gaussian-law fits.

Each mode draws from its own PCG64 substream, obtained by spawning
``SeedSequence(seed)`` once per mode, in the fixed order
omega0, omega, big_omega, lambda radius, lambda angle, spin draws.
"""

from __future__ import annotations

import logging
import math

from typing import Annotated
from typing import Any
from typing import List
from typing import Literal
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np

from pydantic import BaseModel
from pydantic import BeforeValidator
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator

from src.closed_forms import thermal_spin_polarization
from src.config.constants import DEFAULT_BIG_OMEGA_RANGE
from src.config.constants import DEFAULT_LAMBDA_RADIUS
from src.config.constants import DEFAULT_OMEGA0_RANGE
from src.config.constants import DEFAULT_OMEGA_RANGE
from src.config.constants import DEFAULT_SEED
from src.config.constants import FIT_MAGNITUDE_FLOOR
from src.config.constants import FIT_MIN_POINTS
from src.exceptions import InsufficientDataError
from src.exceptions import SpecInvalidError
from src.models import BathConfig
from src.models import CentralAmplitudes
from src.models import DecoherenceSeries
from src.models import ModeParams
from src.models import PhononPrep


logger = logging.getLogger(__name__)

Range = Tuple[float, float]

_MAX_SEED = 2**64 - 1
_EQUATOR = CentralAmplitudes(c_up=1 / math.sqrt(2), c_down=1 / math.sqrt(2))


class UniformBloch(BaseModel):
    """Haar-uniform single-spin states."""

    kind: Literal["uniform_bloch"] = "uniform_bloch"


class Polarized(BaseModel):
    """Every bath spin up: alpha = 1."""

    kind: Literal["polarized"] = "polarized"


class GibbsThermal(BaseModel):
    """Gibbs populations for splittings drawn from ``epsilon_range``."""

    kind: Literal["gibbs_thermal"] = "gibbs_thermal"
    epsilon_range: Range
    temperature: float


def _expand_kind(value: Any) -> Any:
    if isinstance(value, str):
        return {"kind": value}
    return value


SpinInit = Annotated[
    Union[UniformBloch, Polarized, GibbsThermal],
    BeforeValidator(_expand_kind),
]


def _check_range(name: str, bounds: Range, positive: bool = False) -> None:
    lo, hi = bounds
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise SpecInvalidError(f"{name} must be finite", details={"field": name})
    if lo > hi:
        raise SpecInvalidError(
            f"{name} has lo > hi ({lo:g} > {hi:g})", details={"field": name}
        )
    if positive and lo <= 0:
        raise SpecInvalidError(
            f"{name} must be strictly positive, got lo = {lo:g}",
            details={"field": name},
        )


class EnsembleSpec(BaseModel):
    n_modes: int
    omega0_range: Range = DEFAULT_OMEGA0_RANGE
    omega_range: Range = DEFAULT_OMEGA_RANGE
    big_omega_range: Range = DEFAULT_BIG_OMEGA_RANGE
    lambda_radius: float = DEFAULT_LAMBDA_RADIUS
    spin_init: SpinInit = Field(default_factory=UniformBloch)
    seed: int = DEFAULT_SEED

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_spec(self) -> "EnsembleSpec":
        if self.n_modes < 1:
            raise SpecInvalidError(
                f"n_modes must be >= 1, got {self.n_modes}", details={"field": "n_modes"}
            )
        if not 0 <= self.seed <= _MAX_SEED:
            raise SpecInvalidError(
                "seed must be an unsigned 64-bit integer", details={"field": "seed"}
            )
        _check_range("omega0_range", self.omega0_range)
        _check_range("omega_range", self.omega_range)
        _check_range("big_omega_range", self.big_omega_range, positive=True)
        if not (math.isfinite(self.lambda_radius) and self.lambda_radius >= 0):
            raise SpecInvalidError(
                "lambda_radius must be >= 0", details={"field": "lambda_radius"}
            )
        if isinstance(self.spin_init, GibbsThermal):
            _check_range("spin_init.epsilon_range", self.spin_init.epsilon_range)
            if not self.spin_init.temperature > 0:
                raise SpecInvalidError(
                    "spin_init.temperature must be > 0",
                    details={"field": "spin_init.temperature"},
                )
        return self

    def with_seed(self, seed: int) -> "EnsembleSpec":
        return EnsembleSpec(**{**self.model_dump(), "seed": seed})

    def with_modes(self, n_modes: int) -> "EnsembleSpec":
        return EnsembleSpec(**{**self.model_dump(), "n_modes": n_modes})


def _spin_amplitudes(
    rng: np.random.Generator, spin_init: Union[UniformBloch, Polarized, GibbsThermal]
) -> Tuple[complex, complex]:
    if isinstance(spin_init, Polarized):
        return 1 + 0j, 0j
    if isinstance(spin_init, GibbsThermal):
        epsilon = rng.uniform(*spin_init.epsilon_range)
        p_up, p_down = thermal_spin_polarization(epsilon, spin_init.temperature)
        return complex(math.sqrt(p_up)), complex(math.sqrt(p_down))
    z = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    alpha = math.sqrt(0.5 * (1.0 + z))
    beta = math.sqrt(0.5 * (1.0 - z))
    return complex(alpha), complex(beta * math.cos(phi), beta * math.sin(phi))


def _sample_mode(spec: EnsembleSpec, seq: np.random.SeedSequence) -> ModeParams:
    rng = np.random.Generator(np.random.PCG64(seq))
    omega0 = rng.uniform(*spec.omega0_range)
    omega = rng.uniform(*spec.omega_range)
    big_omega = rng.uniform(*spec.big_omega_range)
    radius = spec.lambda_radius * math.sqrt(rng.uniform())
    angle = rng.uniform(0.0, 2.0 * math.pi)
    alpha, beta = _spin_amplitudes(rng, spec.spin_init)
    return ModeParams(
        omega0=float(omega0),
        omega=float(omega),
        big_omega=float(big_omega),
        lam=complex(radius * math.cos(angle), radius * math.sin(angle)),
        alpha=alpha,
        beta=beta,
    )


def sample_config(
    spec: EnsembleSpec,
    central: Optional[CentralAmplitudes] = None,
    phonons: Optional[PhononPrep] = None,
) -> BathConfig:
    """Deterministic bath drawn from ``spec``; identical spec gives identical bath."""
    streams = np.random.SeedSequence(spec.seed).spawn(spec.n_modes)
    modes: List[ModeParams] = [_sample_mode(spec, seq) for seq in streams]
    logger.debug(f"Amostrados {spec.n_modes} modos com semente {spec.seed}")
    return BathConfig(
        central=central or _EQUATOR,
        modes=modes,
        phonons=phonons or PhononPrep.coherent(),
        seed=spec.seed,
    )


def fit_gaussian_rate(series: DecoherenceSeries, t_cut: float) -> float:
    """Least-squares Gamma^2 in -ln|r(t)| = Gamma^2 t^2 over 0 < t <= t_cut."""
    times = series.times
    magnitudes = series.magnitudes()
    usable = (times > 0) & (times <= t_cut) & (magnitudes > FIT_MAGNITUDE_FLOOR)
    count = int(np.count_nonzero(usable))
    if count < FIT_MIN_POINTS:
        raise InsufficientDataError(
            f"Gaussian fit needs {FIT_MIN_POINTS} points with 0 < t <= {t_cut:g} "
            f"and |r| > {FIT_MAGNITUDE_FLOOR:g}, found {count}",
            details={"usable_points": count, "t_cut": t_cut},
        )
    x = times[usable] ** 2
    y = -np.log(magnitudes[usable])
    slope, *_ = np.linalg.lstsq(x[:, None], y, rcond=None)
    return float(slope[0])
