"""The five-step refinement pipeline around a conventional linear detector.

Step 1 detects with MF or LMMSE weights, step 2 slices, step 3 subtracts
the re-encoded slice from the observation (the sparse transform), step 4
runs multipath matching pursuit on the residual system, and step 5
cancels the recovered error vector and slices again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linear_detectors, slicer, sparse_recovery
from .errors import ConfigurationError, DimensionError, SingularMatrixError
from .model import Constellation
from .slicer import SlicedVector
from .sparse_recovery import RecoveryResult, SupportSet

DEFAULT_SPARSITY_FRACTION = 0.15


@dataclass(frozen=True)
class PsedConfig:
    """Knobs for the refinement pipeline.

    ``sparsity`` of None selects floor(0.15 n_t) when the config is bound
    to a system; ``tol`` of None selects the relative noiseless stopping
    rule 1e-9 ||y'||, while Monte Carlo sweeps pass 0.0 to force exactly
    K recovery iterations. ``error_var`` (only used by the LMMSE
    estimator) defaults to the squared minimum constellation distance.
    """

    base_detector: str = linear_detectors.LMMSE
    slicer_mode: str = slicer.HARD
    sparsity: int | None = None
    branch: int = 2
    estimator: str = sparse_recovery.LS
    tol: float | None = None
    max_paths: int = sparse_recovery.DEFAULT_MAX_PATHS
    error_var: float | None = None

    def __post_init__(self):
        if self.base_detector not in (linear_detectors.MF, linear_detectors.LMMSE):
            raise ConfigurationError(
                f"base detector must be MF or LMMSE, got {self.base_detector!r}"
            )
        if self.slicer_mode not in (slicer.HARD, slicer.SOFT):
            raise ConfigurationError(f"slicer mode must be HARD or SOFT, got {self.slicer_mode!r}")
        if self.sparsity is not None and self.sparsity < 1:
            raise ConfigurationError(f"sparsity must be >= 1, got {self.sparsity}")
        if self.branch < 1:
            raise ConfigurationError(f"branch count must be >= 1, got {self.branch}")
        if self.estimator not in (sparse_recovery.LS, sparse_recovery.LMMSE):
            raise ConfigurationError(f"estimator must be LS or LMMSE, got {self.estimator!r}")

    def bound_sparsity(self, n_t: int) -> int:
        """Sparsity budget for a system with n_t streams."""
        k = self.sparsity if self.sparsity is not None else max(1, math.floor(DEFAULT_SPARSITY_FRACTION * n_t))
        if k > n_t:
            raise ConfigurationError(f"sparsity {k} exceeds the number of streams {n_t}")
        return k


@dataclass(frozen=True)
class DetectorOutput:
    """All intermediates of one pipeline run.

    ``recovery_failed`` marks trials where the sparse recovery hit a
    singular subproblem and the output fell back to the sliced step-2
    estimate.
    """

    s_tilde: np.ndarray = field(repr=False)
    s_hat: SlicedVector = field(repr=False)
    y_prime: np.ndarray = field(repr=False)
    recovery: RecoveryResult = field(repr=False)
    s_doublehat: np.ndarray = field(repr=False)
    s_final: SlicedVector = field(repr=False)
    recovery_failed: bool = False


def sparse_transform(y: np.ndarray, H: np.ndarray, s_hat: np.ndarray, power: float) -> np.ndarray:
    """Subtract the re-encoded sliced estimate: y' = y - sqrt(P) H s_hat.

    If s_hat misses the true symbols in a few entries, y' equals
    sqrt(P) H e + v with e the sparse slicing-error vector.
    """
    y = np.asarray(y)
    H = np.asarray(H)
    s_hat = np.asarray(s_hat)
    if H.shape != (y.shape[0], s_hat.shape[0]):
        raise DimensionError(
            f"shapes do not conform: y {y.shape}, H {H.shape}, s_hat {s_hat.shape}"
        )
    return y - np.sqrt(power) * (H @ s_hat)


def _slice_step(
    s_tilde: np.ndarray,
    H: np.ndarray,
    weights: linear_detectors.WeightMatrix,
    power: float,
    noise_var: float,
    constellation: Constellation,
    mode: str,
) -> SlicedVector:
    if mode == slicer.HARD:
        return slicer.hard_slice(s_tilde, constellation)
    # Posterior-mean slicing with uniform priors, per-stream gain and variance.
    n_t = H.shape[1]
    priors = np.full(len(constellation), 1.0 / len(constellation))
    values = np.empty(n_t, dtype=np.complex128)
    for i in range(n_t):
        gain = np.sqrt(power) * complex(weights.W[:, i].conj() @ H[:, i])
        var_i = max(linear_detectors.residual_stream_variance(H, weights, power, noise_var, i), 1e-30)
        values[i] = slicer.soft_slice(complex(s_tilde[i]), constellation, priors, gain, var_i)
    return SlicedVector(values=values, mode=slicer.SOFT)


def psed_detect(
    y: np.ndarray,
    H: np.ndarray,
    power: float,
    noise_var: float,
    constellation: Constellation,
    config: PsedConfig,
) -> DetectorOutput:
    """Run the full detect / slice / transform / recover / correct pipeline.

    A singular recovery subproblem is not fatal: the output falls back to
    the sliced step-2 estimate and the trial is flagged.
    """
    H = np.asarray(H, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    k = config.bound_sparsity(H.shape[1])

    weights = linear_detectors.weight_matrix(H, config.base_detector, power, noise_var)
    s_tilde = linear_detectors.detect(weights, y)
    s_hat = _slice_step(s_tilde, H, weights, power, noise_var, constellation, config.slicer_mode)
    y_prime = sparse_transform(y, H, s_hat.values, power)

    recovery_failed = False
    try:
        recovery = sparse_recovery.mmp(
            H,
            y_prime,
            power,
            K=k,
            L=config.branch,
            tol=config.tol,
            max_paths=config.max_paths,
            estimator=config.estimator,
            error_var=(
                config.error_var
                if config.error_var is not None
                else constellation.min_distance**2
            ),
            noise_var=noise_var,
        )
    except SingularMatrixError:
        recovery_failed = True
        recovery = RecoveryResult(
            support=SupportSet(),
            e_hat=np.zeros(H.shape[1], dtype=np.complex128),
            residual_norm=float(np.linalg.norm(y_prime)),
            paths_explored=0,
            iterations=0,
        )

    s_doublehat = s_hat.values + recovery.e_hat
    s_final = slicer.hard_slice(s_doublehat, constellation)
    return DetectorOutput(
        s_tilde=s_tilde,
        s_hat=s_hat,
        y_prime=y_prime,
        recovery=recovery,
        s_doublehat=s_doublehat,
        s_final=s_final,
        recovery_failed=recovery_failed,
    )
