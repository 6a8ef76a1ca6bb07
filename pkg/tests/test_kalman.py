"""Tests for the scalar forward/backward Kalman CSI enhancement."""

import numpy as np
import pytest

from jcas_sim.array_geometry import AnglePair, ArrayConfig
from jcas_sim.estimation import AoaEstimate, TransferFactors, transfer_factors
from jcas_sim.kalman import (
    csi_matrix_view,
    filter_matrices,
    filter_matrix,
    kf_filter_sequence,
    kf_forward,
    kf_initial_variance,
    sakf_estimate,
    sakf_estimate_grid,
)


def textbook_scalar_kf(obs, a, noise_var, p0):
    """Independent reference: scalar KF with state transition a, identity
    observation, zero process noise, measurement variance noise_var."""
    obs = np.asarray(obs, dtype=complex)
    x = obs[0]
    p = p0
    out = [x]
    gains = []
    for z in obs[1:]:
        x_pred = a * x
        p_pred = (a * p * np.conj(a)).real
        denom = p_pred + noise_var
        k = p_pred / denom if denom > 0 else 1.0
        x = x_pred + k * (z - x_pred)
        p = (1.0 - k) * p_pred
        out.append(x)
        gains.append(k)
    return np.array(out), np.array(gains)


def random_factor(rng):
    return np.exp(1j * rng.uniform(0, 2 * np.pi))


class TestInitialVariance:
    def test_exact_model_sequence_gives_zero(self):
        a = np.exp(1j * 0.7)
        seq = 2.3 * a ** np.arange(8)
        assert kf_initial_variance(seq, a) == pytest.approx(0.0, abs=1e-25)

    def test_single_element_is_zero(self):
        assert kf_initial_variance(np.array([3.0 + 1j]), 1.0) == 0.0

    def test_hand_computed_two_element(self):
        # [1, -1] with A = 1: (|1-1|^2 + |-1-1|^2) / 2 = 2
        assert kf_initial_variance(np.array([1.0, -1.0]), 1.0) == pytest.approx(2.0)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(0)
        a = random_factor(rng)
        batch = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        vec = kf_initial_variance(batch, a)
        for k in range(5):
            assert vec[k] == pytest.approx(kf_initial_variance(batch[:, k], a), rel=1e-12)

    def test_rejects_non_unit_factor(self):
        with pytest.raises(ValueError):
            kf_initial_variance(np.ones(4), 1.5)


class TestForwardPass:
    def test_matches_textbook_oracle_on_random_sequences(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(2, 12))
            seq = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            a = random_factor(rng)
            noise_var = float(rng.uniform(0.01, 2.0))
            filt, gains, _ = kf_forward(seq, a, noise_var)
            p0 = kf_initial_variance(seq, a)
            ref, ref_gains = textbook_scalar_kf(seq, a, noise_var, p0)
            np.testing.assert_allclose(filt, ref, atol=1e-10)
            np.testing.assert_allclose(gains, ref_gains, atol=1e-12)

    def test_unit_variance_gain_sequence(self):
        # p_w0 = noise_var = 1 gives K_p = 1/(p+1) exactly
        seq = np.array([1.0, 0.0 + 0j])  # p_w0 = (0 + 1)/2 ... constructed below
        # build a sequence whose initial variance is exactly 1: [0, sqrt(2)]
        seq = np.array([0.0 + 0j, np.sqrt(2.0)])
        assert kf_initial_variance(seq, 1.0) == pytest.approx(1.0, rel=1e-14)
        # longer sequence: overwrite p_w0 via direct recursion check instead
        rng = np.random.default_rng(2)
        obs = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        ref, gains_ref = textbook_scalar_kf(obs, 1.0, 1.0, 1.0)
        expected = 1.0 / (np.arange(1, 9) + 1.0)
        np.testing.assert_allclose(gains_ref, expected, atol=1e-12)

    def test_gain_bounds_and_variance_monotonicity(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            seq = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            a = random_factor(rng)
            nv = float(rng.uniform(0.0, 3.0))
            _, gains, post_vars = kf_forward(seq, a, nv)
            assert np.all(gains >= 0.0) and np.all(gains <= 1.0)
            # posterior never exceeds prior; prior here equals the previous
            # posterior because |A| = 1
            assert np.all(post_vars[1:] <= post_vars[:-1] + 1e-15)

    def test_negative_noise_rejected(self):
        with pytest.raises(ValueError):
            kf_forward(np.ones(4, dtype=complex), 1.0, -0.1)


class TestFilterSequence:
    def test_zero_noise_is_identity(self):
        rng = np.random.default_rng(4)
        seq = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        a = random_factor(rng)
        np.testing.assert_allclose(kf_filter_sequence(seq, a, 0.0), seq, atol=1e-12)

    def test_model_fixpoint_any_noise(self):
        rng = np.random.default_rng(5)
        a = random_factor(rng)
        c = 0.8 - 0.3j
        seq = c * a ** np.arange(10)
        for nv in (0.0, 0.1, 5.0):
            np.testing.assert_allclose(kf_filter_sequence(seq, a, nv), seq, atol=1e-10)

    def test_single_element_sequence(self):
        seq = np.array([1.7 - 0.2j])
        np.testing.assert_array_equal(kf_filter_sequence(seq, 1.0, 1.0), seq)

    def test_backward_pass_follows_algorithm_listing(self):
        # independent transliteration of the two sweeps, scalar by scalar
        rng = np.random.default_rng(6)
        seq = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        a = random_factor(rng)
        nv = 0.7

        filt = seq.copy()
        pw = kf_initial_variance(seq, a)
        # forward
        for p in range(1, 6):
            prior = a * filt[p - 1]
            p_pred = (a * pw * np.conj(a)).real
            k = p_pred / (p_pred + nv)
            filt[p] = prior + k * (seq[p] - prior)
            pw = (1 - k) * p_pred
        # backward with inverse factor, innovations against raw samples
        inv = 1.0 / a
        for p in range(5, 0, -1):
            prior = inv * filt[p]
            p_pred = (inv * pw * np.conj(inv)).real
            k = p_pred / (p_pred + nv)
            filt[p - 1] = prior + k * (seq[p - 1] - prior)
            pw = (1 - k) * p_pred

        np.testing.assert_allclose(kf_filter_sequence(seq, a, nv), filt, atol=1e-10)

    def test_noise_suppression_on_noisy_model_data(self):
        rng = np.random.default_rng(7)
        a = np.exp(1j * 1.1)
        truth = 1.5 * a ** np.arange(16)
        wins = 0
        for _ in range(200):
            noise = np.sqrt(0.5 / 2) * (rng.standard_normal(16) + 1j * rng.standard_normal(16))
            filt = kf_filter_sequence(truth + noise, a, 0.5)
            if np.sum(np.abs(filt - truth) ** 2) < np.sum(np.abs(noise) ** 2):
                wins += 1
        assert wins >= 190


class TestFilterMatrix:
    def factors(self, rng):
        return TransferFactors(random_factor(rng), random_factor(rng))

    def test_zero_noise_identity(self):
        rng = np.random.default_rng(8)
        mat = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        out = filter_matrix(mat, self.factors(rng), 0.0)
        np.testing.assert_allclose(out, mat, atol=1e-12)

    def test_single_path_matrix_fixpoint(self):
        rng = np.random.default_rng(9)
        f = self.factors(rng)
        mat = 0.7 * np.outer(f.a_p ** np.arange(8), f.a_q ** np.arange(8))
        for nv in (0.0, 0.3, 2.0):
            np.testing.assert_allclose(filter_matrix(mat, f, nv), mat, atol=1e-10)

    def test_one_by_one_matrix_identity(self):
        mat = np.array([[2.0 - 1j]])
        out = filter_matrix(mat, TransferFactors(1.0, 1.0), 1.0)
        np.testing.assert_array_equal(out, mat)

    def test_column_stage_precedes_row_stage(self):
        # manual composition: columns with a_p, then rows with a_q
        rng = np.random.default_rng(10)
        f = self.factors(rng)
        mat = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
        nv = 0.4
        stage1 = np.column_stack([kf_filter_sequence(mat[:, q], f.a_p, nv) for q in range(5)])
        stage2 = np.vstack([kf_filter_sequence(stage1[p, :], f.a_q, nv) for p in range(4)])
        np.testing.assert_allclose(filter_matrix(mat, f, nv), stage2, atol=1e-12)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(11)
        f = self.factors(rng)
        mats = rng.standard_normal((6, 4, 3)) + 1j * rng.standard_normal((6, 4, 3))
        batch = filter_matrices(mats, f, 0.9)
        for b in range(6):
            np.testing.assert_allclose(batch[b], filter_matrix(mats[b], f, 0.9), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            filter_matrix(np.zeros((2, 2, 2)), TransferFactors(1.0, 1.0), 0.1)


class TestSakfEstimate:
    def array(self):
        return ArrayConfig.half_wavelength(4, 4, 28e9)

    def test_single_path_zero_noise_is_vec_identity(self):
        rng = np.random.default_rng(12)
        array = self.array()
        mat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        aoa = AoaEstimate([AnglePair(0.3, 1.0)], 1, 0.0)
        out = sakf_estimate(mat, aoa, array)
        np.testing.assert_allclose(out, mat.reshape(-1), atol=1e-12)

    def test_vectorization_order_matches_stacking(self):
        # refined vector at (p*Q + q) equals the filtered matrix at (p, q)
        rng = np.random.default_rng(13)
        array = self.array()
        mat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        angles = AnglePair(0.2, 0.9)
        aoa = AoaEstimate([angles], 1, 0.15)
        direct = filter_matrix(mat, transfer_factors(angles, array), 0.15)
        out = sakf_estimate(mat, aoa, array)
        np.testing.assert_allclose(csi_matrix_view(out, array), direct, atol=1e-12)

    def test_zf_detection_consistency_on_noiseless_data(self):
        # indexing round trip: steering-built channel, detect the symbol
        from jcas_sim.array_geometry import steering_vector
        from jcas_sim.modem import zf_detect

        array = self.array()
        angles = AnglePair(-0.4, 0.8)
        h = 0.9 * steering_vector(array, angles)
        s = 0.6 + 0.8j
        aoa = AoaEstimate([angles], 1, 0.0)
        refined = sakf_estimate(csi_matrix_view(h, array), aoa, array)
        assert zf_detect(h * s, refined) == pytest.approx(s, abs=1e-10)

    def test_multi_path_sum_of_filtered_copies(self):
        rng = np.random.default_rng(14)
        array = self.array()
        mat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        a0, a1 = AnglePair(0.1, 0.6), AnglePair(-0.7, 1.2)
        aoa = AoaEstimate([a0, a1], 2, 0.2)
        expected = (
            filter_matrix(mat, transfer_factors(a0, array), 0.2)
            + filter_matrix(mat, transfer_factors(a1, array), 0.2)
        ).reshape(-1)
        np.testing.assert_allclose(sakf_estimate(mat, aoa, array), expected, atol=1e-12)

    def test_empty_angle_list_rejected(self):
        with pytest.raises(ValueError):
            sakf_estimate(np.zeros((4, 4), dtype=complex), AoaEstimate([], 0, 0.1), self.array())

    def test_mse_improvement_single_path_moderate_noise(self):
        # exact direction knowledge at 5 dB element SNR: the refined
        # estimate beats LS in at least 95% of 1000 trials
        rng = np.random.default_rng(15)
        array = ArrayConfig.half_wavelength(8, 8, 28e9)
        from jcas_sim.array_geometry import steering_vector

        angles = AnglePair(0.35, 1.05)
        h = steering_vector(array, angles)  # unit element power
        noise_var = 10 ** (-5 / 10)
        aoa = AoaEstimate([angles], 1, noise_var)
        wins = 0
        for _ in range(1000):
            noise = np.sqrt(noise_var / 2) * (rng.standard_normal(64) + 1j * rng.standard_normal(64))
            h_ls = h + noise
            refined = sakf_estimate(csi_matrix_view(h_ls, array), aoa, array)
            if np.sum(np.abs(refined - h) ** 2) < np.sum(np.abs(h_ls - h) ** 2):
                wins += 1
        assert wins >= 950

    def test_grid_version_matches_per_cell(self):
        rng = np.random.default_rng(16)
        array = self.array()
        grid = rng.standard_normal((3, 2, 16)) + 1j * rng.standard_normal((3, 2, 16))
        aoa = AoaEstimate([AnglePair(0.2, 0.9), AnglePair(-0.5, 1.1)], 2, 0.3)
        out = sakf_estimate_grid(grid, aoa, array)
        for n in range(3):
            for m in range(2):
                np.testing.assert_allclose(
                    out[n, m], sakf_estimate(csi_matrix_view(grid[n, m], array), aoa, array), atol=1e-12
                )


class TestDtypeHandling:
    def test_complex64_pipeline_close_to_complex128(self):
        rng = np.random.default_rng(17)
        mat = (rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
        f = TransferFactors(np.exp(1j * 0.4), np.exp(-1j * 0.9))
        out64 = filter_matrix(mat.astype(np.complex64), f, 0.5)
        out128 = filter_matrix(mat, f, 0.5)
        assert out64.dtype == np.complex64
        np.testing.assert_allclose(out64, out128, atol=1e-5)
