from abc import ABC
from abc import abstractmethod

from .models import BathConfig
from .models import DecoherenceSeries
from .models import TimeGrid


class DecoherenceEvaluator(ABC):
    """One way of computing r(t) for a bath configuration."""

    name: str = "evaluator"

    @abstractmethod
    def evaluate(self, config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
        """Retorna r(t) em cada ponto da grade."""
        raise NotImplementedError

    def describe(self) -> str:
        return self.name
