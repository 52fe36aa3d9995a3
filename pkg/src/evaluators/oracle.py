from typing import Optional

from src.base import DecoherenceEvaluator
from src.fock_oracle import TruncationPolicy
from src.fock_oracle import oracle_decoherence
from src.models import BathConfig
from src.models import DecoherenceSeries
from src.models import TimeGrid


class OracleEvaluator(DecoherenceEvaluator):
    """Truncated Fock-space reference; handles both phonon preparations."""

    name = "oracle"

    def __init__(self, policy: Optional[TruncationPolicy] = None, threads: int = 1):
        self.policy = policy or TruncationPolicy()
        self.threads = threads

    def evaluate(self, config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
        return oracle_decoherence(config, grid, self.policy, self.threads)

    def describe(self) -> str:
        sizing = (
            f"n_max={self.policy.n_max}"
            if self.policy.n_max is not None
            else f"ceiling={self.policy.ceiling}, target={self.policy.target:g}"
        )
        return f"{self.name} ({sizing}, threads={self.threads})"
