"""Testes do carregamento de arquivos de configuração."""

import json

from pathlib import Path

import pytest

from src.exceptions import ConfigInvalidError
from src.exceptions import DegenerateModeError
from src.exceptions import SchemaError
from src.exceptions import SpecInvalidError
from src.models import PhononKind
from src.run_config import load_run_config
from src.run_config import parse_run_config


CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


BASE = {
    "central": {"c_up": [0.6, 0.0], "c_down": [0.0, 0.8]},
    "modes": [
        {
            "omega0": 0.3,
            "omega": 0.2,
            "big_omega": 1.0,
            "alpha": [1.0, 0.0],
            "beta": [0.0, 0.0],
            "lambda": [0.5, 0.1],
        }
    ],
    "phonons": {"kind": "coherent"},
    "time": {"start": 0.0, "end": 2.0, "points": 5},
}


def _with(**changes):
    data = json.loads(json.dumps(BASE))
    for key, value in changes.items():
        if value is None:
            data.pop(key, None)
        else:
            data[key] = value
    return json.dumps(data)


class TestParse:
    def test_explicit_modes(self):
        run = parse_run_config(_with())
        bath = run.bath()
        assert bath.modes[0].lam == 0.5 + 0.1j
        assert bath.central.c_down == 0.8j
        assert run.grid().points == 5
        assert run.ensemble is None

    def test_thermal_phonons(self):
        run = parse_run_config(_with(phonons={"kind": "thermal", "temperature": 0.5}))
        assert run.bath().phonons.kind == PhononKind.THERMAL

    def test_ensemble_block_and_seed_override(self):
        text = _with(modes=None, ensemble={"n_modes": 4, "seed": 1, "spin_init": "polarized"})
        run = parse_run_config(text)
        assert run.ensemble is not None
        assert len(run.bath().modes) == 4
        assert run.bath() == run.bath(seed=1)
        assert run.bath() != run.bath(seed=2)
        assert run.bath(seed=2).seed == 2

    def test_oracle_policy_block(self):
        run = parse_run_config(_with(oracle={"ceiling": 64}))
        assert run.oracle.ceiling == 64


class TestDiagnostics:
    def test_json_error_reports_line(self):
        with pytest.raises(SchemaError) as info:
            parse_run_config('{\n  "central": {,\n}', source="bad.json")
        assert info.value.details["line"] == 2
        assert "bad.json:2" in info.value.message

    def test_both_sources_rejected(self):
        with pytest.raises(SchemaError):
            parse_run_config(_with(ensemble={"n_modes": 2}))

    def test_neither_source_rejected(self):
        with pytest.raises(SchemaError):
            parse_run_config(_with(modes=None))

    def test_missing_field_path(self):
        data = json.loads(_with())
        del data["modes"][0]["omega"]
        with pytest.raises(SchemaError) as info:
            parse_run_config(json.dumps(data))
        assert info.value.details["field"] == "modes.0.omega"

    def test_malformed_complex_path(self):
        data = json.loads(_with())
        data["modes"][0]["lambda"] = [1.0]
        with pytest.raises(SchemaError) as info:
            parse_run_config(json.dumps(data))
        assert info.value.details["field"] == "modes.0.lambda"

    def test_unknown_key(self):
        with pytest.raises(SchemaError) as info:
            parse_run_config(_with(extra_key=1))
        assert info.value.details["field"] == "extra_key"

    def test_time_bounds(self):
        with pytest.raises(SchemaError) as info:
            parse_run_config(_with(time={"start": 1.0, "end": 0.0, "points": 3}))
        assert info.value.details["field"] == "time"

    def test_degenerate_mode_names_index(self):
        data = json.loads(_with())
        second = dict(data["modes"][0], big_omega=0.0)
        data["modes"].append(second)
        with pytest.raises(DegenerateModeError) as info:
            parse_run_config(json.dumps(data))
        assert info.value.details["mode_index"] == 1
        assert "Mode 1" in info.value.message

    def test_unnormalized_mode_names_index(self):
        data = json.loads(_with())
        data["modes"][0]["beta"] = [0.5, 0.0]
        with pytest.raises(ConfigInvalidError) as info:
            parse_run_config(json.dumps(data))
        assert info.value.details["mode_index"] == 0

    def test_invalid_ensemble(self):
        with pytest.raises(SpecInvalidError):
            parse_run_config(_with(modes=None, ensemble={"n_modes": 0}))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_run_config(str(tmp_path / "absent.json"))


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.name)
def test_shipped_configs_load(path):
    run = load_run_config(str(path))
    assert run.bath().modes
