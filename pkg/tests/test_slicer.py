"""Tests for hard and posterior-mean slicing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psed import ConfigurationError, hard_slice, make_constellation, soft_slice
from psed.slicer import SoftSliceUnderflowWarning

TANH_1P2 = 0.8336546070121552  # two-term posterior mean at s=0.3, var=0.5, unit gain

finite_complex = st.builds(
    complex,
    st.floats(-5, 5, allow_nan=False),
    st.floats(-5, 5, allow_nan=False),
)


class TestHardSlice:
    def test_qpsk_nearest_point(self, qpsk):
        out = hard_slice(np.array([0.9 + 0.8j]), qpsk)
        assert out.values[0] == qpsk.points[0]
        assert out.mode == "HARD"

    def test_constellation_points_are_fixed(self, qpsk):
        out = hard_slice(qpsk.points, qpsk)
        np.testing.assert_array_equal(out.values, qpsk.points)

    def test_bpsk_boundary_tie_goes_to_lowest_index(self, bpsk):
        assert hard_slice(np.array([0.0 + 0.0j]), bpsk).values[0] == 1.0 + 0.0j

    @settings(max_examples=60, deadline=None)
    @given(z=finite_complex)
    def test_idempotent(self, z):
        qpsk = make_constellation("QPSK")
        once = hard_slice(np.array([z]), qpsk).values
        twice = hard_slice(once, qpsk).values
        np.testing.assert_array_equal(once, twice)

    def test_output_on_grid(self, qpsk):
        rng = np.random.default_rng(0)
        z = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        out = hard_slice(z, qpsk)
        assert np.all(np.isin(out.values, qpsk.points))


class TestSoftSlice:
    def test_symmetric_input_cancels(self, bpsk):
        uniform = np.array([0.5, 0.5])
        out = soft_slice(0.0 + 0.0j, bpsk, uniform, gain=1.0, noise_var=0.5)
        assert abs(out) < 1e-15

    def test_point_mass_prior_wins(self, qpsk):
        prior = np.array([0.0, 0.0, 1.0, 0.0])
        out = soft_slice(5.0 - 5.0j, qpsk, prior, gain=1.0, noise_var=0.3)
        assert abs(out - qpsk.points[2]) < 1e-12

    def test_two_term_posterior_mean(self, bpsk):
        # explicit two-term evaluation as the oracle
        value, var = 0.3 + 0.0j, 0.5
        w_plus = np.exp(-abs(value - 1.0) ** 2 / var)
        w_minus = np.exp(-abs(value + 1.0) ** 2 / var)
        oracle = (w_plus - w_minus) / (w_plus + w_minus)
        got = soft_slice(value, bpsk, np.array([0.5, 0.5]), gain=1.0, noise_var=var)
        assert abs(got - oracle) < 1e-12
        assert abs(got - TANH_1P2) < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(
        z=finite_complex,
        noise_var=st.floats(1e-3, 10.0),
        raw=st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
    )
    def test_output_in_convex_hull(self, z, noise_var, raw):
        qpsk = make_constellation("QPSK")
        priors = np.array(raw) / np.sum(raw)
        out = soft_slice(z, qpsk, priors, gain=1.0, noise_var=noise_var)
        assert abs(out) <= np.abs(qpsk.points).max() + 1e-12

    def test_converges_to_hard_slice_for_small_variance(self, qpsk):
        gain = 0.8 + 0.1j
        uniform = np.full(4, 0.25)
        for z in (0.6 + 0.5j, -0.2 - 0.9j, 1.4 + 0.2j):
            soft = soft_slice(z, qpsk, uniform, gain=gain, noise_var=1e-8)
            hard = hard_slice(np.array([z / gain]), qpsk).values[0]
            assert abs(soft - hard) < 1e-6

    def test_underflow_falls_back_to_hard_slice(self, bpsk):
        with pytest.warns(SoftSliceUnderflowWarning):
            out = soft_slice(1e200 + 0j, bpsk, np.array([0.5, 0.5]), gain=1.0, noise_var=0.1)
        assert out == 1.0 + 0.0j

    def test_bad_priors_rejected(self, bpsk):
        with pytest.raises(ConfigurationError):
            soft_slice(0.1, bpsk, np.array([0.7, 0.7]), gain=1.0, noise_var=0.5)
        with pytest.raises(ConfigurationError):
            soft_slice(0.1, bpsk, np.array([0.5, 0.5, 0.0]), gain=1.0, noise_var=0.5)

    def test_nonpositive_variance_rejected(self, bpsk):
        with pytest.raises(ConfigurationError):
            soft_slice(0.1, bpsk, np.array([0.5, 0.5]), gain=1.0, noise_var=0.0)
