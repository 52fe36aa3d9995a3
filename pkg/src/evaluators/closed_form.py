from src.base import DecoherenceEvaluator
from src.closed_forms import decoherence_coherent
from src.closed_forms import decoherence_short_time
from src.closed_forms import decoherence_thermal
from src.closed_forms import gaussian_envelope_series
from src.closed_forms import spin_only_factor
from src.models import BathConfig
from src.models import DecoherenceSeries
from src.models import ThermalVariant
from src.models import TimeGrid


class CoherentEvaluator(DecoherenceEvaluator):
    name = "coherent"

    def evaluate(self, config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
        return decoherence_coherent(config, grid)


class ThermalEvaluator(DecoherenceEvaluator):
    def __init__(self, variant: ThermalVariant = ThermalVariant.HALF_COTH):
        self.variant = variant
        self.name = f"thermal-{variant.value}"

    def evaluate(self, config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
        return decoherence_thermal(config, grid, self.variant)

    def describe(self) -> str:
        return f"{self.name} (coherent displacements ignored)"


class ShortTimeEvaluator(DecoherenceEvaluator):
    name = "short-time"

    def evaluate(self, config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
        return decoherence_short_time(config, grid)


class GaussianEvaluator(DecoherenceEvaluator):
    """Large-N Gaussian law exp(-Gamma^2 t^2)."""

    name = "gaussian"

    def evaluate(self, config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
        return gaussian_envelope_series(config, grid)


class SpinOnlyEvaluator(DecoherenceEvaluator):
    name = "spin-only"

    def evaluate(self, config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
        return spin_only_factor(config, grid)
