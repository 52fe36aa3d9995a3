"""Closed-form decoherence factors of the phonon-mediated central spin model.

Every evaluator is a pure function of its inputs and runs in time linear in
``modes x grid.points``. Units: hbar = k_B = 1.

Per mode the spin factor ``|a|^2 e^{-i theta} + |b|^2 e^{+i theta}`` is
evaluated as ``cos(theta) - i P sin(theta)`` with the normalized polarization
``P = (|a|^2 - |b|^2) / (|a|^2 + |b|^2)``, and ``1 - cos(x)`` as
``2 sin^2(x / 2)``. Both keep r(0) = 1 exact and |r| <= 1 up to rounding.

Grids are uniform, so ``e^{i big_omega t / 2}`` is advanced column by column
with one complex multiplication; the only per-sample trigonometry left is
``cos(theta)`` and ``sin(theta)``.
"""

from __future__ import annotations

import logging
import math

from dataclasses import dataclass
from typing import Callable
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from scipy.special import expit

from src.config.constants import ERROR_WRONG_PREPARATION
from src.config.constants import LARGE_N_THRESHOLD
from src.config.constants import MODE_CHUNK_SIZE
from src.config.constants import REDUCED_DENSITY_TOLERANCE
from src.exceptions import ConfigInvalidError
from src.exceptions import DegenerateModeError
from src.models import BathConfig
from src.models import BranchSign
from src.models import CentralAmplitudes
from src.models import DecoherenceSeries
from src.models import EvaluationMethod
from src.models import ModeParams
from src.models import PhononKind
from src.models import ThermalVariant
from src.models import TimeGrid
from src.models import abs2


logger = logging.getLogger(__name__)

# (real envelope exponent, complex spin factor) per (mode, time); either may be None
ChunkFactors = Tuple[Optional[np.ndarray], Optional[np.ndarray]]
FactorFn = Callable[[slice, np.ndarray], ChunkFactors]

# rows multiplied together before a rescale; |cos(theta) - i P sin(theta)|
# stays above 1e-30 for any double theta, so eight factors cannot underflow
_PRODUCT_BLOCK = 8
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ModeArrays:
    """Column view of a mode list, one numpy array per parameter."""

    omega0: np.ndarray
    omega: np.ndarray
    big_omega: np.ndarray
    lam_re: np.ndarray
    lam_im: np.ndarray
    polarization: np.ndarray
    p_up: np.ndarray

    @classmethod
    def from_modes(cls, modes: Sequence[ModeParams]) -> "ModeArrays":
        table = np.array(
            [
                (m.omega0, m.omega, m.big_omega, m.lam.real, m.lam.imag, abs2(m.alpha), abs2(m.beta))
                for m in modes
            ],
            dtype=float,
        ).reshape(-1, 7)
        omega0, omega, big_omega, lam_re, lam_im, up, down = (
            np.ascontiguousarray(column) for column in table.T
        )
        total = up + down
        return cls(
            omega0=omega0,
            omega=omega,
            big_omega=big_omega,
            lam_re=lam_re,
            lam_im=lam_im,
            polarization=(up - down) / total,
            p_up=up / total,
        )

    def __len__(self) -> int:
        return int(self.omega0.shape[0])

    @property
    def ratio(self) -> np.ndarray:
        """omega / big_omega, zero for phonon-free modes."""
        return np.divide(
            self.omega,
            self.big_omega,
            out=np.zeros_like(self.omega),
            where=self.big_omega > 0,
        )


# ---------------------------------------------------------------------------
# Scalar building blocks
# ---------------------------------------------------------------------------


def _unit(phase: float) -> complex:
    return complex(math.cos(phase), math.sin(phase))


def _one_minus_cos(x: float) -> float:
    s = math.sin(0.5 * x)
    return 2.0 * s * s


def _require_oscillator(mode: ModeParams) -> None:
    if mode.big_omega <= 0:
        raise DegenerateModeError(
            "branch trajectories need big_omega > 0",
            details={"field": "big_omega", "big_omega": mode.big_omega},
        )


def coherent_overlap(u: complex, v: complex) -> complex:
    """<u|v> = exp(-|u|^2/2 - |v|^2/2 + u* v) for coherent states."""
    log_mag = -0.5 * abs2(v - u)
    phase = u.real * v.imag - u.imag * v.real
    return math.exp(log_mag) * _unit(phase)


def branch_eigenvalue(mode: ModeParams, sign: BranchSign, t: float) -> complex:
    """Coherent eigenvalue u^sigma(t) reached from lambda under h^sigma."""
    _require_oscillator(mode)
    mu = sign.sigma * mode.omega / mode.big_omega
    return (mode.lam + mu) * _unit(-mode.big_omega * t) - mu


def branch_phase(mode: ModeParams, sign: BranchSign, t: float) -> complex:
    """Pure phase A^sigma(t) accompanying u^sigma(t)."""
    _require_oscillator(mode)
    sigma = sign.sigma
    ratio = mode.omega / mode.big_omega
    wt = mode.big_omega * t
    drift = mode.lam.real * math.sin(wt) + mode.lam.imag * _one_minus_cos(wt)
    phase = (
        mode.omega * mode.omega / mode.big_omega * (t - math.sin(wt) / mode.big_omega)
        - sigma * mode.omega0 * t
        - sigma * ratio * drift
    )
    return _unit(phase)


def _spin_factor(polarization: float, theta: float) -> complex:
    return complex(math.cos(theta), -polarization * math.sin(theta))


def mode_factor_coherent(mode: ModeParams, t: float) -> complex:
    """Per-mode factor assembled from branch phases and coherent overlaps."""
    if mode.is_phonon_free:
        return _spin_factor(mode.polarization, 2.0 * mode.omega0 * t)
    u_plus = branch_eigenvalue(mode, BranchSign.PLUS, t)
    u_minus = branch_eigenvalue(mode, BranchSign.MINUS, t)
    a_plus = branch_phase(mode, BranchSign.PLUS, t)
    a_minus = branch_phase(mode, BranchSign.MINUS, t)
    w_up = mode.p_up
    up_term = a_minus.conjugate() * a_plus * coherent_overlap(u_minus, u_plus)
    down_term = a_plus.conjugate() * a_minus * coherent_overlap(u_plus, u_minus)
    return w_up * up_term + (1.0 - w_up) * down_term


def mode_factor_explicit(mode: ModeParams, t: float) -> complex:
    """Per-mode factor in the explicit envelope-times-phase form."""
    if mode.is_phonon_free:
        return _spin_factor(mode.polarization, 2.0 * mode.omega0 * t)
    _require_oscillator(mode)
    ratio = mode.omega / mode.big_omega
    wt = mode.big_omega * t
    bump = _one_minus_cos(wt)
    envelope = math.exp(-4.0 * ratio * ratio * bump)
    theta = 2.0 * mode.omega0 * t + 4.0 * ratio * (
        mode.lam.real * math.sin(wt) + mode.lam.imag * bump
    )
    return envelope * _spin_factor(mode.polarization, theta)


def coth(x: np.ndarray) -> np.ndarray:
    """coth(x) = 1 + 2 / (e^{2x} - 1) for x > 0, overflow-safe."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return 1.0 + 2.0 / np.expm1(2.0 * x)


# ---------------------------------------------------------------------------
# Product over modes
# ---------------------------------------------------------------------------


def _half_turn(big_omega: np.ndarray, times: np.ndarray) -> np.ndarray:
    """e^{i big_omega t / 2} per (mode, time) on a uniform grid.

    The first column is exact; later columns follow by repeated rotation,
    with an error growing like ``column * eps``.
    """
    turn = np.empty((big_omega.shape[0], times.shape[0]), dtype=complex)
    turn[:, 0] = np.exp(0.5j * big_omega * times[0])
    if times.shape[0] > 1:
        step = (times[-1] - times[0]) / (times.shape[0] - 1)
        turn[:, 1:] = np.exp(0.5j * big_omega * step)[:, None]
        np.cumprod(turn, axis=1, out=turn)
    return turn


def _spin_factors(polarization: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """cos(theta) - i P sin(theta), elementwise."""
    factors = np.empty(theta.shape, dtype=complex)
    np.cos(theta, out=factors.real)
    np.sin(theta, out=factors.imag)
    factors.imag *= -polarization[:, None]
    return factors


def _rescale(
    values: np.ndarray, exponents: Optional[np.ndarray]
) -> Tuple[np.ndarray, np.ndarray]:
    """Splits off a power of two so the larger component lies in [0.5, 1)."""
    scale = np.maximum(np.abs(values.real), np.abs(values.imag))
    _, shift = np.frexp(scale)
    mantissa = np.empty_like(values)
    mantissa.real = np.ldexp(values.real, -shift)
    mantissa.imag = np.ldexp(values.imag, -shift)
    shift = shift.astype(np.int64)
    return mantissa, shift if exponents is None else exponents + shift


def _scaled_product(factors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Product over axis 0 as ``(mantissa, exponent)``, value ``mantissa * 2**exponent``."""
    values = factors
    exponents: Optional[np.ndarray] = None
    while True:
        rows, points = values.shape
        if rows > 1:
            padded = -(-rows // _PRODUCT_BLOCK) * _PRODUCT_BLOCK
            if padded != rows:
                values = np.concatenate(
                    [values, np.ones((padded - rows, points), dtype=complex)]
                )
                if exponents is not None:
                    exponents = np.concatenate(
                        [exponents, np.zeros((padded - rows, points), dtype=np.int64)]
                    )
            values = np.prod(values.reshape(-1, _PRODUCT_BLOCK, points), axis=1)
            if exponents is not None:
                exponents = exponents.reshape(-1, _PRODUCT_BLOCK, points).sum(axis=1)
        values, exponents = _rescale(values, exponents)
        if values.shape[0] == 1:
            return values[0], exponents[0]


def _product_over_modes(
    factor_fn: FactorFn, n_modes: int, times: np.ndarray
) -> Tuple[np.ndarray, str]:
    """Multiplies per-mode factors in fixed mode order.

    Below ``LARGE_N_THRESHOLD`` modes the complex factors are multiplied
    directly. Above it the envelope exponents are summed and the spin
    factors are multiplied as mantissa and binary exponent, so the product
    cannot underflow before the end.
    """
    log_form = n_modes > LARGE_N_THRESHOLD
    exponent_sum = np.zeros_like(times)
    mantissa = np.ones(times.shape, dtype=complex)
    binary_exponent = np.zeros(times.shape, dtype=np.int64)
    product = np.ones(times.shape, dtype=complex)

    for start in range(0, n_modes, MODE_CHUNK_SIZE):
        chunk = slice(start, min(start + MODE_CHUNK_SIZE, n_modes))
        exponent, spin = factor_fn(chunk, times)
        if log_form:
            if exponent is not None:
                exponent_sum += exponent.sum(axis=0)
            if spin is not None:
                part, shift = _scaled_product(spin)
                mantissa, binary_exponent = _rescale(mantissa * part, binary_exponent + shift)
        else:
            if exponent is None:
                factors = spin
            else:
                factors = np.exp(exponent) if spin is None else np.exp(exponent) * spin
            for row in factors:  # type: ignore[union-attr]
                product = product * row

    if log_form:
        product = mantissa * np.exp(exponent_sum + binary_exponent * _LN2)
    return product, "log" if log_form else "direct"


def _series(
    values: np.ndarray,
    grid: TimeGrid,
    method: EvaluationMethod,
    config: BathConfig,
    reduction: str,
    **meta,
) -> DecoherenceSeries:
    return DecoherenceSeries(
        grid=grid,
        values=values,
        method=method,
        meta={**config.provenance(), "reduction": reduction, **meta},
    )


def _require_preparation(config: BathConfig, kind: PhononKind, method: str) -> None:
    if config.phonons.kind != kind:
        raise ConfigInvalidError(
            ERROR_WRONG_PREPARATION.format(
                method=method, expected=kind.value, received=config.phonons.kind.value
            ),
            details={"field": "phonons"},
        )


class _ModeTerms:
    """Per-mode coefficients shared by the chunk kernels of one evaluation."""

    def __init__(self, arr: ModeArrays, weight: Optional[np.ndarray] = None) -> None:
        ratio = arr.ratio
        drive = 8.0 * ratio
        self.arr = arr
        # exponent = envelope * sin^2(big_omega t / 2)
        self.envelope = -8.0 * ratio * ratio * (1.0 if weight is None else weight)
        self.drive_re = drive * arr.lam_re
        self.drive_im = drive * arr.lam_im
        self.linear = 2.0 * arr.omega0

    def linear_theta(self, chunk: slice, times: np.ndarray) -> np.ndarray:
        return np.multiply.outer(self.linear[chunk], times)

    def phonon_exponent(self, chunk: slice, times: np.ndarray) -> np.ndarray:
        sin_half = _half_turn(self.arr.big_omega[chunk], times).imag
        return self.envelope[chunk][:, None] * (sin_half * sin_half)

    def coherent(self, chunk: slice, times: np.ndarray) -> ChunkFactors:
        """Envelope exponent and lambda-shifted spin factor."""
        turn = _half_turn(self.arr.big_omega[chunk], times)
        squared = turn.imag * turn.imag
        theta = self.linear_theta(chunk, times)
        theta += self.drive_re[chunk][:, None] * (turn.imag * turn.real)
        theta += self.drive_im[chunk][:, None] * squared
        exponent = self.envelope[chunk][:, None] * squared
        return exponent, _spin_factors(self.arr.polarization[chunk], theta)

    def coherent_spin(self, chunk: slice, times: np.ndarray) -> ChunkFactors:
        return None, self.coherent(chunk, times)[1]

    def spin_only(self, chunk: slice, times: np.ndarray) -> ChunkFactors:
        return None, _spin_factors(
            self.arr.polarization[chunk], self.linear_theta(chunk, times)
        )

    def thermal(self, chunk: slice, times: np.ndarray) -> ChunkFactors:
        _, spin = self.spin_only(chunk, times)
        return self.phonon_exponent(chunk, times), spin


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------


def decoherence_coherent(config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
    """r(t) for coherent phonons: envelope times lambda-shifted spin phase."""
    _require_preparation(config, PhononKind.COHERENT, "coherent")
    terms = _ModeTerms(ModeArrays.from_modes(config.modes))
    values, reduction = _product_over_modes(terms.coherent, len(terms.arr), grid.values())
    return _series(values, grid, EvaluationMethod.COHERENT_CLOSED, config, reduction)


def _thermal_argument(
    arr: ModeArrays, temperature: float, variant: ThermalVariant
) -> np.ndarray:
    if variant == ThermalVariant.HALF_COTH:
        return arr.big_omega / (2.0 * temperature)
    return arr.big_omega / temperature


def _require_thermal_modes(config: BathConfig, arr: ModeArrays) -> float:
    _require_preparation(config, PhononKind.THERMAL, "thermal")
    bad = np.flatnonzero(arr.big_omega <= 0)
    if bad.size:
        raise ConfigInvalidError(
            f"thermal evaluation needs big_omega > 0; mode {int(bad[0])} has "
            f"{arr.big_omega[bad[0]]:g}",
            details={"field": "big_omega", "mode_index": int(bad[0])},
        )
    return float(config.phonons.temperature)  # type: ignore[arg-type]


def decoherence_thermal(
    config: BathConfig,
    grid: TimeGrid,
    variant: ThermalVariant = ThermalVariant.HALF_COTH,
) -> DecoherenceSeries:
    """r(t) for thermal phonons; independent of every lambda."""
    arr = ModeArrays.from_modes(config.modes)
    temperature = _require_thermal_modes(config, arr)
    terms = _ModeTerms(arr, coth(_thermal_argument(arr, temperature, variant)))

    method = (
        EvaluationMethod.THERMAL_CLOSED_HALF_COTH
        if variant == ThermalVariant.HALF_COTH
        else EvaluationMethod.THERMAL_CLOSED_PAPER_COTH
    )
    values, reduction = _product_over_modes(terms.thermal, len(arr), grid.values())
    return _series(values, grid, method, config, reduction, temperature=temperature)


def decoherence_short_time(config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
    """Leading-order expansion in big_omega * t of the coherent result."""
    _require_preparation(config, PhononKind.COHERENT, "short-time")
    arr = ModeArrays.from_modes(config.modes)
    rate = 4.0 * arr.omega * arr.lam_re + 2.0 * arr.omega0
    curvature = -2.0 * arr.omega * arr.omega

    def factor(chunk: slice, times: np.ndarray) -> ChunkFactors:
        exponent = np.multiply.outer(curvature[chunk], times * times)
        theta = np.multiply.outer(rate[chunk], times)
        return exponent, _spin_factors(arr.polarization[chunk], theta)

    values, reduction = _product_over_modes(factor, len(arr), grid.values())
    return _series(values, grid, EvaluationMethod.SHORT_TIME, config, reduction)


def gaussian_rate(config: BathConfig) -> float:
    """Gamma^2 = sum_k 8|a_k|^2|b_k|^2 (2 w_k Re l_k + w0_k)^2 + 2 w_k^2."""
    _require_preparation(config, PhononKind.COHERENT, "gaussian")
    arr = ModeArrays.from_modes(config.modes)
    mixing = arr.p_up * (1.0 - arr.p_up)
    shift = 2.0 * arr.omega * arr.lam_re + arr.omega0
    return float(np.sum(8.0 * mixing * shift * shift + 2.0 * arr.omega * arr.omega))


def gaussian_envelope(config: BathConfig, t: float) -> float:
    return math.exp(-t * t * gaussian_rate(config))


def gaussian_envelope_series(config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
    rate = gaussian_rate(config)
    times = grid.values()
    values = np.exp(-times * times * rate).astype(complex)
    return _series(
        values,
        grid,
        EvaluationMethod.GAUSSIAN_ENVELOPE,
        config,
        "closed",
        gamma2=rate,
    )


def decoherence_time(config: BathConfig) -> float:
    """1 / Gamma from the Gaussian law; infinite when nothing decoheres."""
    rate = gaussian_rate(config)
    return math.inf if rate == 0 else 1.0 / math.sqrt(rate)


def spin_only_factor(config: BathConfig, grid: TimeGrid) -> DecoherenceSeries:
    """Phonon-free factor; ignores omega, big_omega and lambda."""
    terms = _ModeTerms(ModeArrays.from_modes(config.modes))
    values, reduction = _product_over_modes(terms.spin_only, len(terms.arr), grid.values())
    return _series(values, grid, EvaluationMethod.SPIN_ONLY, config, reduction)


def phonon_spin_split(
    config: BathConfig,
    grid: TimeGrid,
    variant: Optional[ThermalVariant] = None,
) -> Tuple[DecoherenceSeries, DecoherenceSeries]:
    """Splits r(t) into its real phonon envelope and its complex spin part."""
    arr = ModeArrays.from_modes(config.modes)
    if config.phonons.kind == PhononKind.THERMAL:
        temperature = _require_thermal_modes(config, arr)
        weight = coth(_thermal_argument(arr, temperature, variant or ThermalVariant.HALF_COTH))
        terms = _ModeTerms(arr, weight)
        spin_fn: FactorFn = terms.spin_only
    else:
        terms = _ModeTerms(arr)
        spin_fn = terms.coherent_spin

    def phonon_fn(chunk: slice, times: np.ndarray) -> ChunkFactors:
        return terms.phonon_exponent(chunk, times), None

    times = grid.values()
    phonon_values, reduction = _product_over_modes(phonon_fn, len(arr), times)
    spin_values, _ = _product_over_modes(spin_fn, len(arr), times)
    return (
        _series(phonon_values, grid, EvaluationMethod.PHONON_PART, config, reduction),
        _series(spin_values, grid, EvaluationMethod.SPIN_PART, config, reduction),
    )


# ---------------------------------------------------------------------------
# Central spin
# ---------------------------------------------------------------------------


def reduced_density(central: CentralAmplitudes, r: complex) -> np.ndarray:
    """2x2 reduced density matrix of the central spin in the c_z basis."""
    if abs(r) > 1.0 + REDUCED_DENSITY_TOLERANCE:
        raise ConfigInvalidError(
            f"|r| = {abs(r)!r} exceeds 1", details={"field": "r"}
        )
    coherence = central.c_up * central.c_down.conjugate() * r
    return np.array(
        [
            [abs2(central.c_up), coherence],
            [coherence.conjugate(), abs2(central.c_down)],
        ],
        dtype=complex,
    )


def reduced_density_series(
    central: CentralAmplitudes, series: DecoherenceSeries
) -> np.ndarray:
    """Stack of reduced density matrices, shape (points, 2, 2)."""
    return np.stack([reduced_density(central, complex(r)) for r in series.values])


def purity(central: CentralAmplitudes, r: complex) -> float:
    up = abs2(central.c_up)
    down = abs2(central.c_down)
    return up * up + down * down + 2.0 * up * down * abs2(r)


def thermal_spin_polarization(epsilon: float, temperature: float) -> Tuple[float, float]:
    """Gibbs populations (p_up, p_down) of a bath spin with splitting epsilon."""
    if not (math.isfinite(temperature) and temperature > 0):
        raise ConfigInvalidError(
            f"temperature must be > 0, got {temperature:g}",
            details={"field": "temperature"},
        )
    x = 2.0 * epsilon / temperature
    return float(expit(x)), float(expit(-x))
