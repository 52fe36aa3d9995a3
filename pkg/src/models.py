from __future__ import annotations

import math

from enum import Enum
from enum import IntEnum
from typing import Annotated
from typing import Any
from typing import Dict
from typing import List
from typing import Optional

import numpy as np

from pydantic import BaseModel
from pydantic import BeforeValidator
from pydantic import ConfigDict
from pydantic import Field
from pydantic import PlainSerializer
from pydantic import field_validator
from pydantic import model_validator

from src.config.constants import ERROR_DEGENERATE_MODE
from src.config.constants import ERROR_NOT_NORMALIZED
from src.config.constants import MAGNITUDE_TOLERANCE
from src.config.constants import NORMALIZATION_TOLERANCE
from src.exceptions import ConfigInvalidError
from src.exceptions import DegenerateModeError


def _parse_complex(value: Any) -> complex:
    """Accepts a complex, a real number or an ``[re, im]`` pair."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a complex amplitude")
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex pair must have 2 entries, got {len(value)}")
        re, im = value
        if isinstance(re, bool) or isinstance(im, bool):
            raise ValueError("complex pair entries must be numbers")
        value = complex(float(re), float(im))
    elif isinstance(value, (int, float, complex, np.number)):
        value = complex(value)
    else:
        raise ValueError(f"expected [re, im] pair, got {type(value).__name__}")
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError("complex amplitude must be finite")
    return value


def _dump_complex(value: complex) -> List[float]:
    return [value.real, value.imag]


ComplexAmp = Annotated[
    complex,
    BeforeValidator(_parse_complex),
    PlainSerializer(_dump_complex, return_type=list),
]


def abs2(value: complex) -> float:
    """|z|^2 as x*x + y*y, the form every evaluator uses."""
    return value.real * value.real + value.imag * value.imag


def _check_normalized(a: complex, b: complex, field: str) -> None:
    norm = abs2(a) + abs2(b)
    if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
        raise ConfigInvalidError(
            ERROR_NOT_NORMALIZED.format(
                field=field, norm=norm, tol=NORMALIZATION_TOLERANCE
            ),
            details={"field": field, "norm": norm},
        )


class PhononKind(str, Enum):
    """Phonon preparations supported by the model."""

    COHERENT = "coherent"
    THERMAL = "thermal"


class ThermalVariant(str, Enum):
    """Argument of the hyperbolic cotangent in the thermal envelope."""

    PAPER_COTH = "paper"  # coth(Omega / T)
    HALF_COTH = "half"  # coth(Omega / 2T)


class EvaluationMethod(str, Enum):
    COHERENT_CLOSED = "CoherentClosed"
    THERMAL_CLOSED_PAPER_COTH = "ThermalClosedPaperCoth"
    THERMAL_CLOSED_HALF_COTH = "ThermalClosedHalfCoth"
    SHORT_TIME = "ShortTime"
    GAUSSIAN_ENVELOPE = "GaussianEnvelope"
    SPIN_ONLY = "SpinOnly"
    ORACLE_COHERENT = "OracleCoherent"
    ORACLE_THERMAL = "OracleThermal"
    PHONON_PART = "PhononPart"
    SPIN_PART = "SpinPart"


class BranchSign(IntEnum):
    """Product sigma = c * s of central and bath spin eigenvalues."""

    PLUS = 1
    MINUS = -1

    @property
    def sigma(self) -> int:
        return int(self)


class ModeParams(BaseModel):
    """Parameters of one bath spin and its phonon mode.

    ``lam`` is the coherent eigenvalue; it is read from / written to the
    ``lambda`` key of run configuration files.
    """

    omega0: float
    omega: float
    big_omega: float
    lam: ComplexAmp = Field(default=0j, alias="lambda")
    alpha: ComplexAmp
    beta: ComplexAmp

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @field_validator("omega0", "omega", "big_omega")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("frequency must be finite")
        return value

    @model_validator(mode="after")
    def _check_invariants(self) -> "ModeParams":
        _check_normalized(self.alpha, self.beta, "alpha/beta")
        if self.big_omega < 0:
            raise ConfigInvalidError(
                f"big_omega must be non-negative, got {self.big_omega:g}",
                details={"field": "big_omega"},
            )
        if self.big_omega == 0 and self.omega != 0:
            raise DegenerateModeError(
                ERROR_DEGENERATE_MODE.format(index="?", omega=self.omega),
                details={"field": "big_omega"},
            )
        return self

    @property
    def p_up(self) -> float:
        """Normalized spin-up population |alpha|^2 / (|alpha|^2 + |beta|^2)."""
        up = abs2(self.alpha)
        return up / (up + abs2(self.beta))

    @property
    def polarization(self) -> float:
        up = abs2(self.alpha)
        down = abs2(self.beta)
        return (up - down) / (up + down)

    @property
    def is_phonon_free(self) -> bool:
        return self.big_omega == 0 and self.omega == 0


class CentralAmplitudes(BaseModel):
    c_up: ComplexAmp
    c_down: ComplexAmp

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_normalization(self) -> "CentralAmplitudes":
        _check_normalized(self.c_up, self.c_down, "c_up/c_down")
        return self


class PhononPrep(BaseModel):
    kind: PhononKind = PhononKind.COHERENT
    temperature: Optional[float] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_temperature(self) -> "PhononPrep":
        if self.kind == PhononKind.THERMAL:
            if self.temperature is None:
                raise ConfigInvalidError(
                    "thermal preparation requires a temperature",
                    details={"field": "temperature"},
                )
            if not (math.isfinite(self.temperature) and self.temperature > 0):
                raise ConfigInvalidError(
                    f"temperature must be > 0, got {self.temperature:g}",
                    details={"field": "temperature"},
                )
        elif self.temperature is not None:
            raise ConfigInvalidError(
                "temperature is only meaningful for thermal preparations",
                details={"field": "temperature"},
            )
        return self

    @classmethod
    def coherent(cls) -> "PhononPrep":
        return cls(kind=PhononKind.COHERENT)

    @classmethod
    def thermal(cls, temperature: float) -> "PhononPrep":
        return cls(kind=PhononKind.THERMAL, temperature=temperature)


class BathConfig(BaseModel):
    """Full initial state: central spin, bath modes and phonon preparation.

    Thermal evaluators ignore every ``lam`` field.
    """

    central: CentralAmplitudes
    modes: List[ModeParams]
    phonons: PhononPrep = Field(default_factory=PhononPrep.coherent)
    # ensemble seed the modes were drawn with; not part of the serialized run
    seed: Optional[int] = Field(default=None, exclude=True)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_modes(self) -> "BathConfig":
        if not self.modes:
            raise ConfigInvalidError(
                "a bath needs at least one mode", details={"field": "modes"}
            )
        return self

    def with_modes(self, modes: List[ModeParams]) -> "BathConfig":
        return BathConfig(central=self.central, modes=modes, phonons=self.phonons)

    def with_phonons(self, phonons: PhononPrep) -> "BathConfig":
        return BathConfig(
            central=self.central, modes=self.modes, phonons=phonons, seed=self.seed
        )

    def provenance(self) -> Dict[str, Any]:
        """Series metadata describing where the modes came from."""
        meta: Dict[str, Any] = {"modes": len(self.modes)}
        if self.seed is not None:
            meta["seed"] = self.seed
        return meta


class TimeGrid(BaseModel):
    """Uniform, endpoint-inclusive grid of evaluation times."""

    t_start: float = 0.0
    t_end: float
    points: int = Field(..., ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_order(self) -> "TimeGrid":
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ValueError("grid bounds must be finite")
        if self.t_end < self.t_start:
            raise ValueError(
                f"t_end ({self.t_end:g}) must not precede t_start ({self.t_start:g})"
            )
        return self

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.t_start], dtype=float)
        return np.linspace(self.t_start, self.t_end, self.points)

    @classmethod
    def single(cls, t: float) -> "TimeGrid":
        return cls(t_start=t, t_end=t, points=1)


def _as_complex_array(value: Any) -> np.ndarray:
    if isinstance(value, np.ndarray):
        return value.astype(complex, copy=False)
    return np.asarray([_parse_complex(v) for v in value], dtype=complex)


class DecoherenceSeries(BaseModel):
    """Samples of r(t) on a grid, tagged with the method that produced them."""

    grid: TimeGrid
    values: Annotated[np.ndarray, BeforeValidator(_as_complex_array)]
    method: EvaluationMethod
    meta: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_values(self) -> "DecoherenceSeries":
        if self.values.shape != (self.grid.points,):
            raise ValueError(
                f"expected {self.grid.points} values, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("decoherence factor contains non-finite values")
        peak = float(np.max(np.abs(self.values)))
        if peak > 1.0 + MAGNITUDE_TOLERANCE:
            raise ValueError(f"|r| = {peak!r} exceeds 1")
        return self

    @property
    def times(self) -> np.ndarray:
        return self.grid.values()

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    def max_abs_difference(self, other: "DecoherenceSeries") -> float:
        if self.grid != other.grid:
            raise ValueError("series live on different grids")
        return float(np.max(np.abs(self.values - other.values)))
