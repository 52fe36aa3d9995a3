"""Testes de ensembles semeados e do ajuste gaussiano."""

import math

import numpy as np
import pytest

from src.closed_forms import decoherence_coherent
from src.closed_forms import gaussian_rate
from src.ensembles import EnsembleSpec
from src.ensembles import GibbsThermal
from src.ensembles import Polarized
from src.ensembles import UniformBloch
from src.ensembles import fit_gaussian_rate
from src.ensembles import sample_config
from src.exceptions import InsufficientDataError
from src.exceptions import SpecInvalidError
from src.models import DecoherenceSeries
from src.models import EvaluationMethod
from src.models import PhononKind
from src.models import PhononPrep
from src.models import TimeGrid
from src.models import abs2


def _series(values, grid):
    return DecoherenceSeries(
        grid=grid, values=np.asarray(values, dtype=complex), method=EvaluationMethod.GAUSSIAN_ENVELOPE
    )


class TestEnsembleSpec:
    def test_defaults(self):
        spec = EnsembleSpec(n_modes=4)
        assert spec.omega0_range == (0.5, 1.5)
        assert spec.omega_range == (0.05, 0.3)
        assert spec.big_omega_range == (0.8, 1.2)
        assert spec.lambda_radius == 1.0
        assert isinstance(spec.spin_init, UniformBloch)

    def test_spin_init_accepts_plain_kind(self):
        spec = EnsembleSpec.model_validate({"n_modes": 2, "spin_init": "polarized"})
        assert isinstance(spec.spin_init, Polarized)
        gibbs = EnsembleSpec.model_validate(
            {
                "n_modes": 2,
                "spin_init": {"kind": "gibbs_thermal", "epsilon_range": [0.1, 0.5], "temperature": 2.0},
            }
        )
        assert isinstance(gibbs.spin_init, GibbsThermal)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"n_modes": 0},
            {"omega_range": (0.3, 0.1)},
            {"big_omega_range": (0.0, 1.0)},
            {"lambda_radius": -1.0},
            {"seed": -1},
            {"seed": 2**64},
        ],
    )
    def test_invalid_specs(self, overrides):
        with pytest.raises(SpecInvalidError):
            EnsembleSpec(**{"n_modes": 3, **overrides})

    def test_invalid_gibbs_temperature(self):
        with pytest.raises(SpecInvalidError):
            EnsembleSpec(
                n_modes=1, spin_init=GibbsThermal(epsilon_range=(0.1, 0.2), temperature=0.0)
            )

    def test_single_point_ranges_are_allowed(self):
        spec = EnsembleSpec(n_modes=3, omega_range=(0.2, 0.2), big_omega_range=(1.0, 1.0))
        config = sample_config(spec)
        assert all(m.omega == 0.2 and m.big_omega == 1.0 for m in config.modes)


class TestSampling:
    def test_same_spec_gives_identical_bath(self):
        spec = EnsembleSpec(n_modes=25, seed=123456789)
        assert sample_config(spec) == sample_config(spec)

    def test_different_seeds_differ(self):
        spec = EnsembleSpec(n_modes=5, seed=1)
        assert sample_config(spec) != sample_config(spec.with_seed(2))

    def test_prefix_stability_across_mode_counts(self):
        small = sample_config(EnsembleSpec(n_modes=3, seed=9))
        large = sample_config(EnsembleSpec(n_modes=8, seed=9))
        assert large.modes[:3] == small.modes

    def test_draws_respect_ranges(self):
        spec = EnsembleSpec(n_modes=200, seed=4, lambda_radius=0.5)
        for mode in sample_config(spec).modes:
            assert 0.5 <= mode.omega0 <= 1.5
            assert 0.05 <= mode.omega <= 0.3
            assert 0.8 <= mode.big_omega <= 1.2
            assert abs(mode.lam) <= 0.5
            assert abs2(mode.alpha) + abs2(mode.beta) == pytest.approx(1.0, abs=1e-12)

    def test_polarized_spins(self):
        config = sample_config(EnsembleSpec(n_modes=10, spin_init="polarized"))
        assert all(abs2(m.alpha) == 1.0 for m in config.modes)

    def test_uniform_bloch_covers_sphere(self):
        config = sample_config(EnsembleSpec(n_modes=2000, seed=7))
        z = np.array([abs2(m.alpha) - abs2(m.beta) for m in config.modes])
        assert abs(z.mean()) < 0.06
        assert z.min() < -0.9 and z.max() > 0.9

    def test_gibbs_thermal_hot_limit_is_unpolarized(self):
        spec = EnsembleSpec(
            n_modes=20,
            spin_init=GibbsThermal(epsilon_range=(0.1, 1.0), temperature=1e9),
        )
        for mode in sample_config(spec).modes:
            assert abs2(mode.alpha) == pytest.approx(0.5, abs=1e-8)
            assert mode.alpha.imag == 0 and mode.beta.imag == 0

    def test_optional_phonon_preparation(self):
        config = sample_config(EnsembleSpec(n_modes=2), phonons=PhononPrep.thermal(0.5))
        assert config.phonons.kind == PhononKind.THERMAL
        assert sample_config(EnsembleSpec(n_modes=2)).phonons.kind == PhononKind.COHERENT

    def test_sampled_bath_remembers_its_seed(self):
        config = sample_config(EnsembleSpec(n_modes=3, seed=41))
        assert config.seed == 41
        assert config.provenance() == {"modes": 3, "seed": 41}
        assert config.with_phonons(PhononPrep.thermal(1.0)).seed == 41
        assert config.with_modes(config.modes[:2]).provenance() == {"modes": 2}
        assert "seed" not in config.model_dump()


class TestGaussianFit:
    def test_exact_gaussian_is_recovered(self):
        grid = TimeGrid(t_end=1.0, points=40)
        series = _series(np.exp(-2.0 * grid.values() ** 2), grid)
        assert fit_gaussian_rate(series, 1.0) == pytest.approx(2.0, abs=1e-10)

    def test_fit_ignores_global_phase(self):
        grid = TimeGrid(t_end=1.0, points=40)
        magnitude = np.exp(-0.7 * grid.values() ** 2)
        plain = fit_gaussian_rate(_series(magnitude, grid), 1.0)
        rotated = fit_gaussian_rate(_series(magnitude * np.exp(1j * 2.1), grid), 1.0)
        assert rotated == pytest.approx(plain, abs=1e-12)

    def test_flat_series_fits_zero(self):
        grid = TimeGrid(t_end=2.0, points=20)
        assert fit_gaussian_rate(_series(np.ones(20), grid), 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_too_few_points(self):
        grid = TimeGrid(t_end=1.0, points=10)
        series = _series(np.exp(-grid.values() ** 2), grid)
        with pytest.raises(InsufficientDataError):
            fit_gaussian_rate(series, 0.3)

    def test_underflowed_points_are_excluded(self):
        grid = TimeGrid(t_end=10.0, points=6)
        values = np.exp(-grid.values() ** 2)
        with pytest.raises(InsufficientDataError) as info:
            fit_gaussian_rate(_series(values, grid), 10.0)
        assert info.value.details["usable_points"] < 5

    def test_large_uniform_ensemble_matches_predicted_rate(self):
        config = sample_config(EnsembleSpec(n_modes=200, seed=2024))
        t_cut = 0.05 / max(m.big_omega for m in config.modes)
        grid = TimeGrid(t_end=t_cut, points=40)
        fitted = fit_gaussian_rate(decoherence_coherent(config, grid), t_cut)
        predicted = gaussian_rate(config)
        assert abs(fitted - predicted) / predicted < 0.05

    def test_polarized_fit_is_lambda_invariant(self):
        spec = EnsembleSpec(n_modes=30, spin_init="polarized", seed=5)
        base = sample_config(spec)
        other = sample_config(spec.with_seed(6))
        # keep frequencies, take only the new lambdas
        moved = base.with_modes(
            [a.model_copy(update={"lam": b.lam}) for a, b in zip(base.modes, other.modes)]
        )
        grid = TimeGrid(t_end=1.0, points=40)
        first = fit_gaussian_rate(decoherence_coherent(base, grid), 1.0)
        second = fit_gaussian_rate(decoherence_coherent(moved, grid), 1.0)
        assert second == pytest.approx(first, rel=1e-3)
        assert math.isfinite(first) and first > 0
