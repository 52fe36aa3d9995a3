"""Estratégias de avaliação do fator de decoerência."""

from typing import Callable
from typing import Dict
from typing import Optional

from src.base import DecoherenceEvaluator
from src.evaluators.closed_form import CoherentEvaluator
from src.evaluators.closed_form import GaussianEvaluator
from src.evaluators.closed_form import ShortTimeEvaluator
from src.evaluators.closed_form import SpinOnlyEvaluator
from src.evaluators.closed_form import ThermalEvaluator
from src.evaluators.oracle import OracleEvaluator
from src.exceptions import SchemaError
from src.fock_oracle import TruncationPolicy
from src.models import ThermalVariant


EvaluatorFactory = Callable[[Optional[TruncationPolicy], int], DecoherenceEvaluator]

EVALUATOR_MAP: Dict[str, EvaluatorFactory] = {
    "coherent": lambda policy, threads: CoherentEvaluator(),
    "thermal-paper": lambda policy, threads: ThermalEvaluator(ThermalVariant.PAPER_COTH),
    "thermal-half": lambda policy, threads: ThermalEvaluator(ThermalVariant.HALF_COTH),
    "short-time": lambda policy, threads: ShortTimeEvaluator(),
    "gaussian": lambda policy, threads: GaussianEvaluator(),
    "spin-only": lambda policy, threads: SpinOnlyEvaluator(),
    "oracle": lambda policy, threads: OracleEvaluator(policy, threads),
}


def create_evaluator(
    method: str, policy: Optional[TruncationPolicy] = None, threads: int = 1
) -> DecoherenceEvaluator:
    """Builds the evaluator registered under ``method``."""
    factory = EVALUATOR_MAP.get(method)
    if factory is None:
        raise SchemaError(
            f"unknown method {method!r}; expected one of {sorted(EVALUATOR_MAP)}",
            details={"field": "method"},
        )
    return factory(policy, threads)


__all__ = [
    "EVALUATOR_MAP",
    "CoherentEvaluator",
    "GaussianEvaluator",
    "OracleEvaluator",
    "ShortTimeEvaluator",
    "SpinOnlyEvaluator",
    "ThermalEvaluator",
    "create_evaluator",
]
