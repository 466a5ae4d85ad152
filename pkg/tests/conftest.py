"""Shared fixtures and oracle helpers for the test suite."""

import numpy as np
import pytest

from psed import generate_channel, ls_on_support, make_constellation, rng_stream


@pytest.fixture
def bpsk():
    return make_constellation("BPSK")


@pytest.fixture
def qpsk():
    return make_constellation("QPSK")


def seeded_channel(n_r: int, n_t: int, seed: int) -> np.ndarray:
    return generate_channel(n_r, n_t, rng_stream(seed, "channel"))


def complex_noise(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    rng = rng_stream(seed, "noise")
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_sparse(n_t: int, k: int, seed: int) -> np.ndarray:
    """A k-sparse complex vector with O(1) nonzero magnitudes."""
    rng = rng_stream(seed, "symbols")
    support = rng.choice(n_t, size=k, replace=False)
    e = np.zeros(n_t, dtype=np.complex128)
    e[support] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return e


def orthonormal_columns(n_r: int, n_t: int, seed: int) -> np.ndarray:
    """A matrix with exactly orthonormal columns (needs n_r >= n_t)."""
    assert n_r >= n_t
    rng = rng_stream(seed, "channel")
    G = rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t))
    Q, _ = np.linalg.qr(G)
    return Q[:, :n_t]


def check_recovery_result(result, H, y_prime, power, k_max) -> None:
    """Assert the self-consistency contract of a RecoveryResult."""
    idx = list(result.support.indices)
    assert len(result.support) <= k_max
    off = np.ones(H.shape[1], dtype=bool)
    off[idx] = False
    assert np.all(result.e_hat[off] == 0)
    ls = ls_on_support(H, y_prime, power, result.support)
    assert np.abs(result.e_hat - ls).max() < 1e-10
    residual = y_prime - np.sqrt(power) * (H @ result.e_hat)
    assert abs(result.residual_norm - np.linalg.norm(residual)) < 1e-10
