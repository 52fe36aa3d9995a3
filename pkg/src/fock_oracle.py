"""Brute-force decoherence factor in a truncated number-state basis.

Nothing here uses the closed-form trajectories or phases. Each mode is
propagated separately under its two branch Hamiltonians

    h^sigma = sigma * omega0 + sigma * omega * (p^dag + p) + big_omega * p^dag p

which is exact because the full Hamiltonian commutes with every s_kz and c_z.
Propagation diagonalizes the real symmetric tridiagonal matrix once per
(mode, sigma) and reuses the factorization for every time.
"""

from __future__ import annotations

import logging
import math

from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator
from scipy.linalg import LinAlgError
from scipy.linalg import eigh_tridiagonal

from src.config.constants import COHERENT_TAIL_BUDGET
from src.config.constants import DEFAULT_N_MAX_CEILING
from src.config.constants import DEFAULT_ORACLE_MODE_BOUND
from src.config.constants import ERROR_TRUNCATION_CEILING
from src.config.constants import GIBBS_TAIL_THRESHOLD
from src.config.constants import TAIL_WINDOW
from src.config.constants import TRUNCATION_TARGET
from src.config.constants import UNITARITY_TOLERANCE
from src.exceptions import ConfigInvalidError
from src.exceptions import EigenFailureError
from src.exceptions import TruncationTooSmallError
from src.models import BathConfig
from src.models import BranchSign
from src.models import DecoherenceSeries
from src.models import EvaluationMethod
from src.models import ModeParams
from src.models import PhononKind
from src.models import PhononPrep
from src.models import TimeGrid
from src.utils.parallel import ordered_map


logger = logging.getLogger(__name__)


class FockVector(BaseModel):
    """Complex amplitudes over the number states |0>..|n_max>."""

    amps: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_shape(self) -> "FockVector":
        if self.amps.ndim != 1 or self.amps.shape[0] < 2:
            raise ValueError("a Fock vector needs at least two levels")
        self.amps = self.amps.astype(complex, copy=False)
        return self

    @property
    def n_max(self) -> int:
        return int(self.amps.shape[0]) - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tail_weight(self, window: int = TAIL_WINDOW) -> float:
        """Weight in the top ``window`` levels plus what the cut discarded."""
        start = max(self.n_max - window + 1, 1)
        kept = float(np.vdot(self.amps, self.amps).real)
        top = float(np.vdot(self.amps[start:], self.amps[start:]).real)
        return top + max(0.0, 1.0 - kept)

    def overlap(self, other: "FockVector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amps, other.amps))


class TridiagonalHamiltonian(BaseModel):
    """Real symmetric tridiagonal branch Hamiltonian of a single mode."""

    diag: np.ndarray
    offdiag: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_dims(self) -> "TridiagonalHamiltonian":
        if self.offdiag.shape[0] != self.diag.shape[0] - 1:
            raise ValueError("offdiag must be one shorter than diag")
        return self

    @property
    def n_max(self) -> int:
        return int(self.diag.shape[0]) - 1


class BranchPropagator:
    """Eigendecomposition of one branch Hamiltonian, reused for all times.

    Read-only after construction, so one instance may serve several threads.
    """

    def __init__(self, hamiltonian: TridiagonalHamiltonian) -> None:
        try:
            self.energies, self.vectors = eigh_tridiagonal(
                hamiltonian.diag, hamiltonian.offdiag
            )
        except (LinAlgError, ValueError) as e:
            raise EigenFailureError(
                f"tridiagonal eigensolver failed: {e}",
                details={"n_max": hamiltonian.n_max},
            ) from e
        self.n_max = hamiltonian.n_max

    def _phases(self, times: np.ndarray) -> np.ndarray:
        wt = np.outer(times, self.energies)
        return np.cos(wt) - 1j * np.sin(wt)

    def evolve(self, times: np.ndarray, psi0: np.ndarray) -> np.ndarray:
        """e^{-i h t} psi0 for each t; shape (len(times), n_max + 1)."""
        coefficients = self.vectors.T @ psi0
        evolved = (self._phases(times) * coefficients[None, :]) @ self.vectors.T
        drift = np.abs(np.linalg.norm(evolved, axis=1) - np.linalg.norm(psi0))
        if drift.size and float(drift.max()) > UNITARITY_TOLERANCE:
            raise EigenFailureError(
                f"propagation changed the state norm by {float(drift.max()):.3e}",
                details={"n_max": self.n_max, "norm_drift": float(drift.max())},
            )
        return evolved

    def columns(self, t: float, count: int) -> np.ndarray:
        """First ``count`` columns of e^{-i h t}, i.e. the evolved |0>..|count-1>."""
        phases = self._phases(np.array([t]))[0]
        return (self.vectors * phases[None, :]) @ self.vectors[:count, :].T


def coherent_vector(lam: complex, n_max: int, strict: bool = True) -> FockVector:
    """Number-state amplitudes e^{-|l|^2/2} l^n / sqrt(n!) by recurrence."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    amps = np.empty(n_max + 1, dtype=complex)
    amps[0] = math.exp(-0.5 * (lam.real * lam.real + lam.imag * lam.imag))
    for n in range(1, n_max + 1):
        amps[n] = amps[n - 1] * lam / math.sqrt(n)
    vector = FockVector(amps=amps)
    if strict:
        tail = vector.tail_weight()
        if tail > COHERENT_TAIL_BUDGET:
            raise TruncationTooSmallError(
                f"coherent state |{lam}> needs more than {n_max} levels "
                f"(tail weight {tail:.3e})",
                details={"n_max": n_max, "tail_weight": tail},
            )
    return vector


def build_mode_hamiltonian(
    mode: ModeParams, sign: BranchSign, n_max: int
) -> TridiagonalHamiltonian:
    sigma = sign.sigma
    levels = np.arange(n_max + 1, dtype=float)
    return TridiagonalHamiltonian(
        diag=sigma * mode.omega0 + mode.big_omega * levels,
        offdiag=sigma * mode.omega * np.sqrt(levels[1:]),
    )


def propagate_fock(
    h: TridiagonalHamiltonian, t: float, psi0: FockVector
) -> FockVector:
    if psi0.n_max != h.n_max:
        raise ValueError(
            f"dimension mismatch: state has {psi0.n_max + 1} levels, "
            f"Hamiltonian {h.n_max + 1}"
        )
    evolved = BranchPropagator(h).evolve(np.array([t], dtype=float), psi0.amps)
    return FockVector(amps=evolved[0])


def _branch_pair(mode: ModeParams, n_max: int) -> Tuple[BranchPropagator, BranchPropagator]:
    return (
        BranchPropagator(build_mode_hamiltonian(mode, BranchSign.PLUS, n_max)),
        BranchPropagator(build_mode_hamiltonian(mode, BranchSign.MINUS, n_max)),
    )


def _coherent_factors(
    mode: ModeParams, times: np.ndarray, n_max: int, strict: bool = True
) -> np.ndarray:
    psi0 = coherent_vector(mode.lam, n_max, strict=strict).amps
    plus, minus = _branch_pair(mode, n_max)
    psi_plus = plus.evolve(times, psi0)
    psi_minus = minus.evolve(times, psi0)
    echo = np.sum(np.conj(psi_minus) * psi_plus, axis=1)
    w_up = mode.p_up
    return w_up * echo + (1.0 - w_up) * np.conj(echo)


def oracle_mode_factor_coherent(mode: ModeParams, t: float, n_max: int) -> complex:
    """|a|^2 <psi^-|psi^+> + |b|^2 <psi^+|psi^-> from propagated coherent states."""
    return complex(_coherent_factors(mode, np.array([t], dtype=float), n_max)[0])


def gibbs_cutoff(big_omega: float, temperature: float) -> int:
    """Smallest n with discarded Gibbs weight e^{-Omega (n+1) / T} below the tail threshold."""
    if big_omega <= 0:
        raise ConfigInvalidError(
            "thermal phonons need big_omega > 0", details={"field": "big_omega"}
        )
    levels = temperature * math.log(1.0 / GIBBS_TAIL_THRESHOLD) / big_omega
    return max(0, math.ceil(levels) - 1)


def gibbs_weights(big_omega: float, temperature: float, cutoff: int) -> np.ndarray:
    x = big_omega / temperature
    levels = np.arange(cutoff + 1, dtype=float)
    return -math.expm1(-x) * np.exp(-x * levels)


def _thermal_factors(
    mode: ModeParams,
    temperature: float,
    times: np.ndarray,
    n_max: int,
    strict: bool = True,
) -> np.ndarray:
    cutoff = gibbs_cutoff(mode.big_omega, temperature)
    if cutoff > n_max:
        if strict:
            raise TruncationTooSmallError(
                f"Gibbs cutoff {cutoff} exceeds n_max {n_max}",
                details={"n_max": n_max, "gibbs_cutoff": cutoff},
            )
        cutoff = n_max
    weights = gibbs_weights(mode.big_omega, temperature, cutoff)
    plus, minus = _branch_pair(mode, n_max)
    w_up = mode.p_up
    out = np.empty(times.shape[0], dtype=complex)
    for i, t in enumerate(times):
        cols_plus = plus.columns(float(t), cutoff + 1)
        cols_minus = minus.columns(float(t), cutoff + 1)
        # <n| e^{i h^- t} e^{-i h^+ t} |n>; the reversed echo is its conjugate
        echo = np.sum(np.conj(cols_minus) * cols_plus, axis=0)
        out[i] = np.sum(weights * (w_up * echo + (1.0 - w_up) * np.conj(echo)))
    return out


def oracle_mode_factor_thermal(
    mode: ModeParams, temperature: float, t: float, n_max: int
) -> complex:
    """Gibbs-weighted echo amplitudes of the number states."""
    if not temperature > 0:
        raise ConfigInvalidError(
            f"temperature must be > 0, got {temperature:g}",
            details={"field": "temperature"},
        )
    return complex(
        _thermal_factors(mode, temperature, np.array([t], dtype=float), n_max)[0]
    )


class TruncationPolicy(BaseModel):
    """How the oracle sizes each mode's Fock basis."""

    n_max: Optional[int] = Field(default=None, ge=1)
    ceiling: int = Field(default=DEFAULT_N_MAX_CEILING, ge=2)
    target: float = Field(default=TRUNCATION_TARGET, gt=0)
    max_modes: int = Field(default=DEFAULT_ORACLE_MODE_BOUND, ge=1)


def default_n_max(mode: ModeParams, prep: PhononPrep) -> int:
    shift = 2.0 * abs(mode.omega) / mode.big_omega if mode.big_omega > 0 else 0.0
    if prep.kind == PhononKind.THERMAL:
        reach = shift
        base = gibbs_cutoff(mode.big_omega, float(prep.temperature))  # type: ignore[arg-type]
    else:
        reach = abs(mode.lam) + shift
        base = 0
    return base + math.ceil(reach * reach + 10.0 * reach + 20.0)


def _check_times(mode: ModeParams, t_max: float) -> np.ndarray:
    checked = [t_max]
    if mode.big_omega > 0:
        widest = math.pi / mode.big_omega
        if widest < abs(t_max):
            checked.append(math.copysign(widest, t_max))
    return np.array(checked, dtype=float)


def _factors(
    mode: ModeParams, prep: PhononPrep, times: np.ndarray, n_max: int, strict: bool = True
) -> np.ndarray:
    if prep.kind == PhononKind.THERMAL:
        return _thermal_factors(mode, float(prep.temperature), times, n_max, strict)  # type: ignore[arg-type]
    return _coherent_factors(mode, times, n_max, strict)


def truncation_error_estimate(
    mode: ModeParams, prep: PhononPrep, t_max: float, n_max: int
) -> float:
    """|factor(n_max) - factor(2 n_max)| at t_max and at the widest excursion."""
    times = _check_times(mode, t_max)
    coarse = _factors(mode, prep, times, n_max, strict=False)
    fine = _factors(mode, prep, times, 2 * n_max, strict=False)
    return float(np.max(np.abs(coarse - fine)))


def resolve_n_max(
    mode: ModeParams,
    prep: PhononPrep,
    t_max: float,
    policy: TruncationPolicy,
    index: int = 0,
) -> Tuple[int, float, int]:
    """Doubles n_max until the estimate meets the target.

    Returns ``(n_max, estimate, doublings)``.
    """
    n_max = policy.n_max or default_n_max(mode, prep)
    doublings = 0
    while True:
        if 2 * n_max > policy.ceiling:
            raise TruncationTooSmallError(
                ERROR_TRUNCATION_CEILING.format(
                    index=index, n_max=2 * n_max, ceiling=policy.ceiling
                ),
                details={"mode_index": index, "n_max": n_max, "ceiling": policy.ceiling},
            )
        estimate = truncation_error_estimate(mode, prep, t_max, n_max)
        if estimate < policy.target:
            logger.debug(
                f"Modo {index}: n_max={n_max} (estimativa {estimate:.2e}, "
                f"{doublings} duplicações)"
            )
            return n_max, estimate, doublings
        n_max *= 2
        doublings += 1


def _mode_task(
    config: BathConfig, times: np.ndarray, t_max: float, policy: TruncationPolicy
):
    def run(item: Tuple[int, ModeParams]) -> Dict[str, Any]:
        index, mode = item
        n_max, estimate, doublings = resolve_n_max(
            mode, config.phonons, t_max, policy, index
        )
        try:
            factors = _factors(mode, config.phonons, times, n_max)
        except TruncationTooSmallError as e:
            e.details.setdefault("mode_index", index)
            raise
        return {
            "factors": factors,
            "n_max": n_max,
            "bound": estimate,
            "doublings": doublings,
        }

    return run


def oracle_decoherence(
    config: BathConfig,
    grid: TimeGrid,
    policy: Optional[TruncationPolicy] = None,
    threads: int = 1,
) -> DecoherenceSeries:
    """Product over modes of the per-mode oracle factors."""
    policy = policy or TruncationPolicy()
    if len(config.modes) > policy.max_modes:
        raise ConfigInvalidError(
            f"oracle is limited to {policy.max_modes} modes, config has "
            f"{len(config.modes)}",
            details={"field": "modes", "max_modes": policy.max_modes},
        )
    if config.phonons.kind == PhononKind.THERMAL:
        for index, mode in enumerate(config.modes):
            if mode.big_omega <= 0:
                raise ConfigInvalidError(
                    f"thermal oracle needs big_omega > 0; mode {index} has {mode.big_omega:g}",
                    details={"field": "big_omega", "mode_index": index},
                )

    times = grid.values()
    t_max = float(times[np.argmax(np.abs(times))])
    results: List[Dict[str, Any]] = ordered_map(
        _mode_task(config, times, t_max, policy), enumerate(config.modes), threads
    )

    values = np.ones(times.shape, dtype=complex)
    for result in results:
        values = values * result["factors"]

    method = (
        EvaluationMethod.ORACLE_THERMAL
        if config.phonons.kind == PhononKind.THERMAL
        else EvaluationMethod.ORACLE_COHERENT
    )
    bounds = [r["bound"] for r in results]
    return DecoherenceSeries(
        grid=grid,
        values=values,
        method=method,
        meta={
            **config.provenance(),
            "n_max": [r["n_max"] for r in results],
            "truncation_bounds": bounds,
            "truncation_bound_total": float(sum(bounds)),
            "doublings": int(sum(r["doublings"] for r in results)),
        },
    )

