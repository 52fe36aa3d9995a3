"""Fixtures compartilhadas pelos testes do dephasim."""

import json

import pytest

from prometheus_client import CollectorRegistry

from src.models import CentralAmplitudes
from src.models import TimeGrid
from src.monitoring.metrics import MetricsCollector
from src.tests.factories import SQRT_HALF
from src.tests.factories import make_config
from src.tests.factories import make_mode


@pytest.fixture
def equator():
    return CentralAmplitudes(c_up=SQRT_HALF, c_down=SQRT_HALF)


@pytest.fixture
def adjudication_mode():
    """Omega=1, omega=0.2, omega0=0.3, |alpha|^2=0.7."""
    return make_mode(omega0=0.3, omega=0.2, big_omega=1.0, p_up=0.7)


@pytest.fixture
def two_mode_config():
    return make_config(
        [
            make_mode(omega0=0.4, omega=0.15, big_omega=0.9, lam=0.5 - 0.3j, p_up=0.6),
            make_mode(omega0=1.1, omega=0.25, big_omega=1.2, lam=-0.2 + 0.7j, p_up=0.25),
        ]
    )


@pytest.fixture
def grid():
    return TimeGrid(t_start=0.0, t_end=5.0, points=50)


@pytest.fixture
def collector():
    """Coletor de métricas com registro isolado."""
    return MetricsCollector(CollectorRegistry())


@pytest.fixture
def write_config(tmp_path):
    """Grava um dict como arquivo JSON de configuração e retorna o caminho."""

    def _write(data, name: str = "run.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return str(path)

    return _write
