"""
dephasim - Observability and Metrics Module

Prometheus metrics for evaluator runs, oracle truncation and resource use.
Metrics are side-channel only: nothing numerical ever reads them back.
"""

import logging
import time

from functools import wraps
from typing import Optional
from typing import Sequence

import psutil

from prometheus_client import REGISTRY
from prometheus_client import CollectorRegistry
from prometheus_client import Counter
from prometheus_client import Gauge
from prometheus_client import Histogram
from prometheus_client import Info
from prometheus_client import write_to_textfile


logger = logging.getLogger(__name__)


class MetricsCollector:
    """Centralized metrics collector for dephasim runs."""

    def __init__(self, registry: CollectorRegistry = REGISTRY):
        self.registry = registry
        self._initialize_metrics()

    def _initialize_metrics(self):
        """Initialize all Prometheus metrics."""

        # === Evaluations (Traffic, Errors & Latency) ===
        self.evaluations_total = Counter(
            'dephasim_evaluations_total',
            'Total number of decoherence evaluations',
            ['method', 'status'],
            registry=self.registry,
        )

        self.evaluation_duration_seconds = Histogram(
            'dephasim_evaluation_duration_seconds',
            'Decoherence evaluation duration in seconds',
            ['method'],
            buckets=(0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0),
            registry=self.registry,
        )

        self.function_duration_seconds = Histogram(
            'dephasim_function_duration_seconds',
            'Duration of tracked function calls',
            ['function', 'status'],
            registry=self.registry,
        )

        # === Oracle ===
        self.truncation_doublings_total = Counter(
            'dephasim_truncation_doublings_total',
            'Total number of Fock basis doublings performed by the oracle',
            registry=self.registry,
        )

        self.oracle_n_max = Gauge(
            'dephasim_oracle_n_max',
            'Largest Fock cutoff used by the last oracle run',
            registry=self.registry,
        )

        # === Compare ===
        self.compare_max_error = Gauge(
            'dephasim_compare_max_error',
            'Max absolute error of the last closed-form vs oracle comparison',
            ['method'],
            registry=self.registry,
        )

        # === Saturation ===
        self.process_memory_usage_bytes = Gauge(
            'dephasim_process_memory_usage_bytes',
            'Process resident memory in bytes',
            registry=self.registry,
        )

        self.app_info = Info(
            'dephasim_app_info', 'Application information', registry=self.registry
        )

    def record_evaluation(self, method: str, status: str, duration: float):
        """Record one evaluator call."""
        self.evaluations_total.labels(method=method, status=status).inc()
        self.evaluation_duration_seconds.labels(method=method).observe(duration)

    def record_oracle_truncation(self, n_max: Sequence[int], doublings: int):
        """Record the cutoffs chosen by an oracle run."""
        if n_max:
            self.oracle_n_max.set(max(n_max))
        if doublings:
            self.truncation_doublings_total.inc(doublings)

    def record_compare_error(self, method: str, max_error: float):
        self.compare_max_error.labels(method=method).set(max_error)

    def update_system_metrics(self):
        """Update process resource metrics."""
        try:
            process = psutil.Process()
            self.process_memory_usage_bytes.set(process.memory_info().rss)
        except Exception as e:
            logger.warning(f"Falha ao atualizar métricas do sistema: {e}")

    def set_app_info(self, version: str):
        self.app_info.info({'version': version})

    def write_to_file(self, path: str):
        """Write the text exposition of every metric to ``path``."""
        self.update_system_metrics()
        write_to_textfile(path, self.registry)
        logger.info(f"Métricas gravadas em {path}")


# Global metrics collector instance
metrics_collector = MetricsCollector()


def track_execution_time(metric_name: Optional[str] = None, collector=None):
    """
    Decorator to track execution time of functions.

    Args:
        metric_name: Optional label for the function (defaults to module.name)
        collector: MetricsCollector to record into (defaults to the global one)
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            status = "error"
            try:
                result = func(*args, **kwargs)
                status = "success"
                return result
            finally:
                duration = time.perf_counter() - start_time
                func_name = metric_name or f"{func.__module__}.{func.__name__}"
                target = collector or metrics_collector
                target.function_duration_seconds.labels(
                    function=func_name, status=status
                ).observe(duration)

        return wrapper

    return decorator
