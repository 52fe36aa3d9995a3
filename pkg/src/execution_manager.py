"""Execution service behind the command line: eval, compare, limits and sweep."""

import logging
import math
import time

from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from pydantic import BaseModel
from pydantic import Field

from .base import DecoherenceEvaluator
from .closed_forms import coth
from .closed_forms import decoherence_coherent
from .closed_forms import decoherence_thermal
from .closed_forms import decoherence_time
from .closed_forms import gaussian_rate
from .closed_forms import phonon_spin_split
from .closed_forms import spin_only_factor
from .config.constants import EXIT_ADJUDICATION
from .config.constants import EXIT_LIMIT
from .config.constants import EXIT_OK
from .config.constants import FIT_GRID_POINTS
from .config.constants import LIMIT_SCALE_EXPONENTS
from .config.constants import LOW_TEMPERATURE_DIVISOR
from .config.constants import LOW_TEMPERATURE_TOLERANCE
from .config.constants import ORACLE_TOLERANCE
from .config.constants import SWEEP_REPLICAS
from .ensembles import fit_gaussian_rate
from .ensembles import sample_config
from .evaluators import OracleEvaluator
from .evaluators import create_evaluator
from .exceptions import SchemaError
from .fock_oracle import TruncationPolicy
from .models import BathConfig
from .models import DecoherenceSeries
from .models import PhononKind
from .models import PhononPrep
from .models import ThermalVariant
from .models import TimeGrid
from .monitoring.metrics import MetricsCollector
from .monitoring.metrics import metrics_collector
from .monitoring.metrics import track_execution_time
from .run_config import RunConfigFile
from .utils.csv_writer import render_csv
from .utils.csv_writer import series_csv
from .utils.csv_writer import split_csv
from .utils.parallel import ordered_map


logger = logging.getLogger(__name__)

SPLIT_METHODS: Dict[str, Optional[ThermalVariant]] = {
    "split": None,
    "split-paper": ThermalVariant.PAPER_COTH,
}

SWEEP_AXES = ("temperature", "n_modes")


class SweepRange(BaseModel):
    lo: float
    hi: float
    steps: int = Field(..., ge=1)

    @classmethod
    def parse(cls, text: str) -> "SweepRange":
        """Parses ``LO:HI:STEPS``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise SchemaError(
                f"range must be LO:HI:STEPS, got {text!r}", details={"field": "range"}
            )
        try:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as e:
            raise SchemaError(
                f"range must be LO:HI:STEPS, got {text!r}", details={"field": "range"}
            ) from e
        if steps < 1 or not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
            raise SchemaError(
                f"range needs finite LO <= HI and STEPS >= 1, got {text!r}",
                details={"field": "range"},
            )
        return cls(lo=lo, hi=hi, steps=steps)

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.steps)


class CompareReport(BaseModel):
    """Closed form against oracle on one grid."""

    kind: PhononKind
    times: List[float]
    errors: Dict[str, List[float]]
    max_errors: Dict[str, float]
    verdict: Optional[str] = None
    n_max: List[int] = Field(default_factory=list)
    truncation_bound_total: float = 0.0
    tolerance: float = ORACLE_TOLERANCE

    @property
    def best_error(self) -> float:
        return min(self.max_errors.values())

    @property
    def passed(self) -> bool:
        return self.best_error < self.tolerance

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_ADJUDICATION

    def render(self) -> str:
        lines = [
            f"phonons: {self.kind.value}",
            f"points: {len(self.times)}",
            f"oracle_n_max: {','.join(str(n) for n in self.n_max)}",
            f"truncation_bound_total: {self.truncation_bound_total:.3e}",
        ]
        for label, value in self.max_errors.items():
            lines.append(f"max_error_{label}: {value:.16e}")
        if self.verdict is not None:
            lines.append(f"coth_variant_matching_oracle: {self.verdict}")
        lines.append(f"tolerance: {self.tolerance:g}")
        lines.append(f"status: {'pass' if self.passed else 'fail'}")
        lines.append("")
        columns = {"t": self.times, **{f"error_{k}": v for k, v in self.errors.items()}}
        lines.append(render_csv(columns, list(columns)).rstrip("\n"))
        return "\n".join(lines) + "\n"


class LimitCheck(BaseModel):
    name: str
    passed: bool
    distances: List[float] = Field(default_factory=list)
    detail: str = ""


class LimitsReport(BaseModel):
    checks: List[LimitCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_LIMIT

    def render(self) -> str:
        lines = []
        for check in self.checks:
            distances = ",".join(f"{d:.6e}" for d in check.distances)
            lines.append(
                f"{check.name}: {'pass' if check.passed else 'fail'}"
                f" distances=[{distances}] {check.detail}".rstrip()
            )
        lines.append(f"status: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def _scaled_modes(
    config: BathConfig, field: str, factor: float
) -> BathConfig:
    modes = [
        mode.model_copy(update={field: getattr(mode, field) * factor})
        for mode in config.modes
    ]
    return config.with_modes(modes)


def _closed_form(config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
    if config.phonons.kind == PhononKind.THERMAL:
        return decoherence_thermal(config, grid)
    return decoherence_coherent(config, grid)


def _sup_distance(a: DecoherenceSeries, b: DecoherenceSeries) -> float:
    return a.max_abs_difference(b)


def _large_omega_bound(config: BathConfig) -> Tuple[float, float]:
    """(sum_k 8 mu_k (|lambda_k| + mu_k c_k), max_k mu_k) for the displacement limit."""
    thermal = config.phonons.kind == PhononKind.THERMAL
    total = 0.0
    largest = 0.0
    for mode in config.modes:
        if mode.big_omega == 0:
            continue
        mu = abs(mode.omega) / mode.big_omega
        largest = max(largest, mu)
        if thermal:
            c = float(coth(np.array([mode.big_omega / (2.0 * config.phonons.temperature)]))[0])
            total += 8.0 * mu * mu * c
        else:
            total += 8.0 * mu * (abs(mode.lam) + mu)
    return total, largest


class ExecutionManager:
    """Runs the four commands for one loaded configuration file."""

    def __init__(
        self,
        threads: int = 1,
        collector: Optional[MetricsCollector] = None,
    ) -> None:
        self.threads = threads
        self.collector = collector or metrics_collector

    def _evaluate(
        self, evaluator: DecoherenceEvaluator, config: BathConfig, grid: TimeGrid
    ) -> DecoherenceSeries:
        start = time.perf_counter()
        status = "error"
        try:
            series = evaluator.evaluate(config, grid)
            status = "success"
        finally:
            self.collector.record_evaluation(
                evaluator.name, status, time.perf_counter() - start
            )
        if isinstance(evaluator, OracleEvaluator):
            self.collector.record_oracle_truncation(
                series.meta.get("n_max", []), series.meta.get("doublings", 0)
            )
        logger.info(
            f"Avaliação {evaluator.describe()}: {len(config.modes)} modos, {grid.points} pontos"
        )
        return series

    def _oracle(self, policy: TruncationPolicy) -> OracleEvaluator:
        return OracleEvaluator(policy, self.threads)

    # -- eval ---------------------------------------------------------------

    @track_execution_time("eval")
    def run_eval(
        self, run_config: RunConfigFile, method: str, seed: Optional[int] = None
    ) -> str:
        """CSV text for one method on the file's grid."""
        config = run_config.bath(seed)
        grid = run_config.grid()
        if method in SPLIT_METHODS:
            phonon, spin = phonon_spin_split(config, grid, SPLIT_METHODS[method])
            return split_csv(phonon, spin)
        evaluator = create_evaluator(method, run_config.oracle, self.threads)
        return series_csv(self._evaluate(evaluator, config, grid))

    # -- compare ------------------------------------------------------------

    @track_execution_time("compare")
    def run_compare(
        self, run_config: RunConfigFile, seed: Optional[int] = None
    ) -> CompareReport:
        config = run_config.bath(seed)
        grid = run_config.grid()
        oracle = self._evaluate(self._oracle(run_config.oracle), config, grid)

        candidates: Dict[str, DecoherenceEvaluator] = (
            {
                "paper": create_evaluator("thermal-paper"),
                "half": create_evaluator("thermal-half"),
            }
            if config.phonons.kind == PhononKind.THERMAL
            else {"coherent": create_evaluator("coherent")}
        )
        errors: Dict[str, List[float]] = {}
        max_errors: Dict[str, float] = {}
        for label, evaluator in candidates.items():
            closed = self._evaluate(evaluator, config, grid)
            pointwise = np.abs(closed.values - oracle.values)
            errors[label] = pointwise.tolist()
            max_errors[label] = float(np.max(pointwise))
            self.collector.record_compare_error(evaluator.name, max_errors[label])

        verdict = None
        if config.phonons.kind == PhononKind.THERMAL:
            matching = [k for k, v in max_errors.items() if v < ORACLE_TOLERANCE]
            verdict = matching[0] if len(matching) == 1 else "inconclusive"
            if verdict == "inconclusive":
                logger.warning(
                    f"Veredito coth inconclusivo: paper={max_errors['paper']:.3e}, "
                    f"half={max_errors['half']:.3e}"
                )
            else:
                logger.info(f"Veredito coth: {verdict}")

        return CompareReport(
            kind=config.phonons.kind,
            times=oracle.times.tolist(),
            errors=errors,
            max_errors=max_errors,
            verdict=verdict,
            n_max=oracle.meta.get("n_max", []),
            truncation_bound_total=oracle.meta.get("truncation_bound_total", 0.0),
        )

    # -- limits -------------------------------------------------------------

    def _phonon_free_check(self, config: BathConfig, grid: TimeGrid) -> LimitCheck:
        reference = spin_only_factor(config, grid)
        distances = [
            _sup_distance(_closed_form(_scaled_modes(config, "omega", 10.0**-k), grid), reference)
            for k in LIMIT_SCALE_EXPONENTS
        ]
        monotone = all(b <= a for a, b in zip(distances, distances[1:]))
        return LimitCheck(
            name="phonon_free_limit",
            passed=monotone,
            distances=distances,
            detail="omega scaled by 10^-k",
        )

    def _large_omega_check(self, config: BathConfig, grid: TimeGrid) -> LimitCheck:
        reference = spin_only_factor(config, grid)
        distances = []
        ratios = []
        passed = True
        for k in LIMIT_SCALE_EXPONENTS:
            scaled = _scaled_modes(config, "big_omega", 10.0**k)
            distance = _sup_distance(_closed_form(scaled, grid), reference)
            bound, mu_max = _large_omega_bound(scaled)
            distances.append(distance)
            if mu_max > 0:
                ratios.append(distance / mu_max)
            passed = passed and distance <= bound + 1e-12
        constant = max(ratios) if ratios else 0.0
        return LimitCheck(
            name="large_omega_limit",
            passed=passed,
            distances=distances,
            detail=f"C={constant:.6e}",
        )

    def _low_temperature_check(self, config: BathConfig, grid: TimeGrid) -> LimitCheck:
        omegas = [mode.big_omega for mode in config.modes]
        if min(omegas) <= 0:
            return LimitCheck(
                name="low_temperature_limit",
                passed=True,
                detail="skipped: phonon-free modes present",
            )
        temperature = min(omegas) / LOW_TEMPERATURE_DIVISOR
        vacuum = BathConfig(
            central=config.central,
            modes=[m.model_copy(update={"lam": 0j}) for m in config.modes],
            phonons=PhononPrep.coherent(),
        )
        thermal = config.with_phonons(PhononPrep.thermal(temperature))
        reference = decoherence_coherent(vacuum, grid)
        distances = [
            _sup_distance(decoherence_thermal(thermal, grid, variant), reference)
            for variant in (ThermalVariant.PAPER_COTH, ThermalVariant.HALF_COTH)
        ]
        return LimitCheck(
            name="low_temperature_limit",
            passed=max(distances) < LOW_TEMPERATURE_TOLERANCE,
            distances=distances,
            detail=f"T={temperature:.6e}",
        )

    @track_execution_time("limits")
    def run_limits(
        self, run_config: RunConfigFile, seed: Optional[int] = None
    ) -> LimitsReport:
        config = run_config.bath(seed)
        grid = run_config.grid()
        checks = [
            self._phonon_free_check(config, grid),
            self._large_omega_check(config, grid),
            self._low_temperature_check(config, grid),
        ]
        for check in checks:
            logger.info(f"Verificação {check.name}: {'ok' if check.passed else 'falhou'}")
        return LimitsReport(checks=checks)

    # -- sweep --------------------------------------------------------------

    def _temperature_sweep(
        self,
        config: BathConfig,
        temperatures: np.ndarray,
        sample_time: Optional[float],
    ) -> str:
        if temperatures[0] <= 0:
            raise SchemaError(
                "temperature range must be strictly positive", details={"field": "range"}
            )
        t_star = sample_time if sample_time is not None else 1.0 / max(
            mode.big_omega for mode in config.modes
        )
        grid = TimeGrid.single(t_star)

        def at_temperature(temperature: float) -> Tuple[float, float]:
            thermal = config.with_phonons(PhononPrep.thermal(float(temperature)))
            paper = decoherence_thermal(thermal, grid, ThermalVariant.PAPER_COTH)
            half = decoherence_thermal(thermal, grid, ThermalVariant.HALF_COTH)
            return float(paper.magnitudes()[0]), float(half.magnitudes()[0])

        rows = ordered_map(at_temperature, temperatures.tolist(), self.threads)
        logger.info(f"Varredura de temperatura: {len(rows)} pontos em t*={t_star:g}")
        return render_csv(
            {
                "T": temperatures,
                "abs_r_at_t_star": [r[0] for r in rows],
                "abs_r_half_at_t_star": [r[1] for r in rows],
            },
            ("T", "abs_r_at_t_star", "abs_r_half_at_t_star"),
        )

    def _n_modes_sweep(
        self, run_config: RunConfigFile, counts: List[int], seed: Optional[int]
    ) -> str:
        if run_config.ensemble is None:
            raise SchemaError(
                "an n_modes sweep needs an 'ensemble' block", details={"field": "ensemble"}
            )
        spec = run_config.ensemble if seed is None else run_config.ensemble.with_seed(seed)
        replica_seeds = [
            int(s)
            for s in np.random.SeedSequence(spec.seed).generate_state(
                SWEEP_REPLICAS, dtype=np.uint64
            )
        ]

        def at_size(task: Tuple[int, int]) -> Tuple[float, float]:
            n_modes, replica_seed = task
            drawn = spec.with_seed(replica_seed).with_modes(n_modes)
            config = sample_config(drawn, run_config.central)
            predicted = gaussian_rate(config)
            if predicted == 0:
                return 0.0, 0.0
            t_cut = decoherence_time(config)
            series = decoherence_coherent(config, TimeGrid(t_end=t_cut, points=FIT_GRID_POINTS))
            return fit_gaussian_rate(series, t_cut), predicted

        tasks = [(n, s) for n in counts for s in replica_seeds]
        rows = np.asarray(ordered_map(at_size, tasks, self.threads), dtype=float)
        rows = rows.reshape(len(counts), SWEEP_REPLICAS, 2)
        fitted, predicted = rows[..., 0], rows[..., 1]
        gaps = np.divide(
            np.abs(fitted - predicted),
            predicted,
            out=np.zeros_like(predicted),
            where=predicted > 0,
        )
        logger.info(f"Varredura de modos: N={counts}, {SWEEP_REPLICAS} réplicas por N")
        return render_csv(
            {
                "N": counts,
                "fitted_gamma2": fitted.mean(axis=1),
                "predicted_gamma2": predicted.mean(axis=1),
                "rel_gap": gaps.mean(axis=1),
            },
            ("N", "fitted_gamma2", "predicted_gamma2", "rel_gap"),
        )

    @track_execution_time("sweep")
    def run_sweep(
        self,
        run_config: RunConfigFile,
        axis: str,
        sweep_range: SweepRange,
        seed: Optional[int] = None,
        sample_time: Optional[float] = None,
    ) -> str:
        values = sweep_range.values()
        if axis == "temperature":
            return self._temperature_sweep(run_config.bath(seed), values, sample_time)
        if axis == "n_modes":
            counts = sorted({int(round(v)) for v in values})
            if counts[0] < 1:
                raise SchemaError(
                    "n_modes range must start at 1 or more", details={"field": "range"}
                )
            return self._n_modes_sweep(run_config, counts, seed)
        raise SchemaError(
            f"unknown axis {axis!r}; expected one of {SWEEP_AXES}", details={"field": "axis"}
        )
