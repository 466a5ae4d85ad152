"""Tests for the conventional linear detector weights and detection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psed import (
    SingularMatrixError,
    WeightMatrix,
    detect,
    draw_symbols,
    generate_channel,
    residual_stream_variance,
    rng_stream,
    transmit,
    weight_matrix,
)
from tests.conftest import orthonormal_columns, seeded_channel


class TestWeightMatrix:
    def test_orthonormal_columns_zf_equals_mf(self):
        H = orthonormal_columns(12, 8, seed=1)
        zf = weight_matrix(H, "ZF", 1.0, 0.1)
        mf = weight_matrix(H, "MF", 1.0, 0.1)
        np.testing.assert_allclose(zf.W, mf.W, atol=1e-10)

    def test_lmmse_converges_to_zf(self):
        H = seeded_channel(8, 8, seed=2)
        zf = weight_matrix(H, "ZF", 1.0, 0.0)
        lmmse = weight_matrix(H, "LMMSE", 1.0, 1e-12)
        assert np.abs(lmmse.W - zf.W).max() < 1e-6

    def test_scalar_lmmse(self):
        w = weight_matrix(np.array([[1.0 + 0j]]), "LMMSE", 1.0, 1.0)
        assert abs(w.W[0, 0] - 0.5) < 1e-12

    def test_zf_inverts_scaled_channel(self):
        H = seeded_channel(16, 8, seed=3)
        power = 2.0
        zf = weight_matrix(H, "ZF", power, 0.1)
        np.testing.assert_allclose(zf.W.conj().T @ (np.sqrt(power) * H), np.eye(8), atol=1e-8)

    def test_zf_singular_names_detector(self):
        H = seeded_channel(8, 4, seed=4)
        H[:, 3] = H[:, 2]
        with pytest.raises(SingularMatrixError, match="ZF"):
            weight_matrix(H, "ZF", 1.0, 0.1)

    def test_unknown_kind_rejected(self):
        from psed import ConfigurationError

        with pytest.raises(ConfigurationError):
            weight_matrix(np.eye(4), "MRC", 1.0, 0.1)


class TestDetect:
    def test_identity_weights(self):
        y = np.arange(6) + 1j * np.arange(6)
        out = detect(WeightMatrix("MF", np.eye(6, dtype=np.complex128)), y)
        np.testing.assert_array_equal(out, y)

    def test_noiseless_zf_recovers_symbols(self, qpsk):
        H = seeded_channel(12, 8, seed=5)
        s = draw_symbols(qpsk, 8, rng_stream(5, "symbols"))
        inst = transmit(H, s, 1.5, 0.0, rng_stream(5, "noise"))
        zf = weight_matrix(H, "ZF", 1.5, 0.0)
        np.testing.assert_allclose(detect(zf, inst.y), s, atol=1e-8)

    def test_lmmse_matches_normal_equations(self, qpsk):
        # independent oracle: explicit inverse of the regularized Gram
        H = seeded_channel(32, 32, seed=6)
        s = draw_symbols(qpsk, 32, rng_stream(6, "symbols"))
        inst = transmit(H, s, 1.0, 0.05, rng_stream(6, "noise"))
        got = detect(weight_matrix(H, "LMMSE", 1.0, 0.05), inst.y)
        gram = H.conj().T @ H + 0.05 * np.eye(32)
        expected = np.linalg.inv(gram) @ (H.conj().T @ inst.y)
        np.testing.assert_allclose(got, expected, atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), a_re=st.floats(-3, 3), a_im=st.floats(-3, 3))
    def test_linearity(self, seed, a_re, a_im):
        rng = np.random.default_rng(seed)
        W = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
        y1 = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        y2 = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        a = a_re + 1j * a_im
        lhs = detect(W, a * y1 + y2)
        rhs = a * detect(W, y1) + detect(W, y2)
        assert np.abs(lhs - rhs).max() < 1e-12


class TestResidualStreamVariance:
    def test_scalar_case(self):
        H = np.array([[1.0 + 0j]])
        w = weight_matrix(H, "LMMSE", 1.0, 1.0)
        assert abs(residual_stream_variance(H, w, 1.0, 1.0, 0) - 0.25) < 1e-12

    def test_noiseless_zf_leaves_nothing(self):
        H = seeded_channel(8, 8, seed=7)
        zf = weight_matrix(H, "ZF", 1.0, 0.0)
        for i in range(8):
            assert abs(residual_stream_variance(H, zf, 1.0, 0.0, i)) < 1e-10

    def test_monte_carlo_oracle(self, qpsk):
        # empirical variance of the interference-plus-noise term over 1e5 draws
        n, power, noise_var, i = 16, 1.0, 0.2, 5
        H = seeded_channel(n, n, seed=8)
        w = weight_matrix(H, "LMMSE", power, noise_var)
        predicted = residual_stream_variance(H, w, power, noise_var, i)

        rng = rng_stream(8, "mc")
        draws = 100_000
        sym_idx = rng.integers(0, len(qpsk.points), size=(n, draws))
        S = qpsk.points[sym_idx]
        V = np.sqrt(noise_var / 2) * (rng.standard_normal((n, draws)) + 1j * rng.standard_normal((n, draws)))
        s_tilde_i = w.W[:, i].conj() @ (np.sqrt(power) * (H @ S) + V)
        residual = s_tilde_i - np.sqrt(power) * (w.W[:, i].conj() @ H[:, i]) * S[i]
        empirical = np.mean(np.abs(residual) ** 2)
        assert abs(empirical - predicted) < 0.03 * predicted


class TestSinrConcentration:
    def test_stream_sinr_std_shrinks_with_dimension(self):
        stds = []
        for n in (16, 32, 64, 128):
            H = generate_channel(n, n, rng_stream(42, "channel", n))
            w = weight_matrix(H, "LMMSE", 1.0, 0.1)
            sinr = []
            for i in range(n):
                gain = np.abs(np.vdot(w.W[:, i], H[:, i])) ** 2
                sinr.append(gain / residual_stream_variance(H, w, 1.0, 0.1, i))
            stds.append(np.std(sinr))
        assert all(a > b for a, b in zip(stds, stds[1:])), stds
