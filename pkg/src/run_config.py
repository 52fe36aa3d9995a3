"""Run configuration files: JSON with complex numbers as ``[re, im]`` pairs."""

import json
import logging
import math

from pathlib import Path
from typing import Any
from typing import List
from typing import Optional

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import model_validator

from .config.constants import ERROR_DEGENERATE_MODE
from .ensembles import EnsembleSpec
from .ensembles import sample_config
from .exceptions import ConfigInvalidError
from .exceptions import DegenerateModeError
from .exceptions import SchemaError
from .fock_oracle import TruncationPolicy
from .models import BathConfig
from .models import CentralAmplitudes
from .models import ModeParams
from .models import PhononPrep
from .models import TimeGrid


logger = logging.getLogger(__name__)


class TimeSpec(BaseModel):
    start: float = 0.0
    end: float
    points: int = Field(..., ge=1)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_bounds(self) -> "TimeSpec":
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ValueError("time bounds must be finite")
        if self.end < self.start:
            raise ValueError(f"end ({self.end:g}) must not precede start ({self.start:g})")
        return self

    def grid(self) -> TimeGrid:
        return TimeGrid(t_start=self.start, t_end=self.end, points=self.points)


class RunConfigFile(BaseModel):
    """Top-level layout of a configuration file."""

    central: Optional[CentralAmplitudes] = None
    modes: Optional[List[ModeParams]] = None
    ensemble: Optional[EnsembleSpec] = None
    phonons: PhononPrep = Field(default_factory=PhononPrep.coherent)
    time: TimeSpec
    oracle: TruncationPolicy = Field(default_factory=TruncationPolicy)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_source(self) -> "RunConfigFile":
        if (self.modes is None) == (self.ensemble is None):
            raise ValueError("exactly one of 'modes' or 'ensemble' must be present")
        if self.modes is not None and self.central is None:
            raise ValueError("'central' is required when 'modes' are listed")
        return self

    def grid(self) -> TimeGrid:
        return self.time.grid()

    def bath(self, seed: Optional[int] = None) -> BathConfig:
        """Bath described by the file; ``seed`` overrides the ensemble seed."""
        if self.ensemble is not None:
            spec = self.ensemble if seed is None else self.ensemble.with_seed(seed)
            return sample_config(spec, self.central, self.phonons)
        return BathConfig(central=self.central, modes=self.modes, phonons=self.phonons)


def _field_path(loc: tuple) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def _check_modes(raw_modes: Any) -> None:
    """Validates listed modes one by one so errors carry the mode index."""
    if not isinstance(raw_modes, list):
        return
    for index, raw in enumerate(raw_modes):
        try:
            ModeParams.model_validate(raw)
        except DegenerateModeError as e:
            omega = raw.get("omega", float("nan")) if isinstance(raw, dict) else float("nan")
            raise DegenerateModeError(
                ERROR_DEGENERATE_MODE.format(index=index, omega=omega),
                details={"field": f"modes.{index}.big_omega", "mode_index": index},
            ) from e
        except ConfigInvalidError as e:
            field = e.details.get("field", "")
            raise ConfigInvalidError(
                f"modes.{index}: {e.message}",
                details={"field": f"modes.{index}.{field}", "mode_index": index},
            ) from e
        except ValidationError as e:
            first = e.errors()[0]
            path = _field_path(("modes", index) + tuple(first["loc"]))
            raise SchemaError(
                f"{path}: {first['msg']}", details={"field": path}
            ) from e


def parse_run_config(text: str, source: str = "<string>") -> RunConfigFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(
            f"{source}:{e.lineno}:{e.colno}: invalid JSON ({e.msg})",
            details={"line": e.lineno, "column": e.colno},
        ) from e
    if not isinstance(data, dict):
        raise SchemaError(f"{source}: top level must be an object", details={"line": 1})

    _check_modes(data.get("modes"))
    try:
        run_config = RunConfigFile.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        path = _field_path(tuple(first["loc"]))
        raise SchemaError(
            f"{source}: {path}: {first['msg']}", details={"field": path}
        ) from e
    logger.debug(f"Configuração {source} carregada")
    return run_config


def load_run_config(path: str) -> RunConfigFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e}", details={"field": "config"}) from e
    return parse_run_config(text, source=path)
