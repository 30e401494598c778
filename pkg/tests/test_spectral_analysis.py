"""Tests for decay curves, the Monte Carlo gap oracle, and leakage analysis."""

import math

import numpy as np
import pytest

from ropespectrum import (
    CurveSeries,
    build_freq_table,
    clip_window,
    decay_curve,
    envelope_decay_exponent,
    flat_spectrum_signal,
    leakage_error,
    semantic_gap_analytic,
    semantic_gap_montecarlo,
    sinc_kernel,
    soft_complement_kernel,
)


def llama3_table():
    return build_freq_table(128, 500000.0)


def all_pass(table):
    return clip_window(table, "none", table.n_chunks)


class TestDecayCurve:
    def test_value_at_zero_is_total_weight(self):
        table = llama3_table()
        series = decay_curve(table, all_pass(table), [0.0, 1.0])
        assert series.values[0] == 64.0
        soft = clip_window(table, "soft", 44)
        series = decay_curve(table, soft, [0.0, 1.0])
        assert series.values[0] == pytest.approx(float(soft.weights.sum()), rel=1e-15)

    def test_decays_from_zero_distance(self):
        table = llama3_table()
        series = decay_curve(table, all_pass(table), [0.0, 8192.0])
        assert series.values[1] < series.values[0]

    def test_bounded_by_total_weight(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        taus = np.arange(0.0, 20000.0, 7.0)
        series = decay_curve(table, window, taus)
        assert np.all(np.abs(series.values) <= float(window.weights.sum()) + 1e-12)

    def test_matches_direct_summation(self):
        table = llama3_table()
        series = decay_curve(table, all_pass(table), [8192.0])
        assert series.values[0] == pytest.approx(float(np.cos(8192.0 * table.thetas).sum()), rel=1e-12)

    def test_rejects_negative_taus(self):
        table = llama3_table()
        with pytest.raises(ValueError, match="nonnegative"):
            decay_curve(table, all_pass(table), [-1.0, 0.0])


class TestSemanticGapAnalytic:
    def test_zero_sigma(self):
        table = llama3_table()
        assert semantic_gap_analytic(0.0, table, all_pass(table), 100.0) == 0.0

    def test_zero_distance_all_pass(self):
        table = llama3_table()
        assert semantic_gap_analytic(1.0, table, all_pass(table), 0.0) == pytest.approx(128.0)
        assert semantic_gap_analytic(0.5, table, all_pass(table), 0.0) == pytest.approx(32.0)

    def test_consistent_with_decay_curve(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        tau = 4096.0
        expected = 2.0 * 1.5**2 * decay_curve(table, window, [tau]).values[0]
        assert semantic_gap_analytic(1.5, table, window, tau) == pytest.approx(expected, rel=1e-12)


class TestSemanticGapMonteCarlo:
    def test_zero_distance_matches_sigma_squared_d(self):
        table = build_freq_table(8, 10000.0)
        est = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, all_pass(table), 0, 100000, seed=101)
        assert est.analytic == pytest.approx(8.0)
        assert abs(est.mean - 8.0) <= 3 * est.std_error

    def test_invariant_to_mean_shift(self):
        table = build_freq_table(8, 10000.0)
        window = all_pass(table)
        base = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, window, 17, 100000, seed=103)
        shifted = semantic_gap_montecarlo(1.0, 5.0, 1.0, table, window, 17, 100000, seed=104)
        assert abs(base.mean - base.analytic) <= 3 * base.std_error
        assert abs(shifted.mean - shifted.analytic) <= 3 * shifted.std_error
        assert shifted.analytic == base.analytic

    def test_invariant_to_perturbation_scale(self):
        table = build_freq_table(8, 10000.0)
        window = clip_window(table, "soft", 3)
        for seed, sigma_eps in ((105, 0.1), (106, 10.0)):
            est = semantic_gap_montecarlo(1.0, 0.0, sigma_eps, table, window, 17, 100000, seed=seed)
            assert abs(est.mean - est.analytic) <= 3 * est.std_error

    def test_std_error_shrinks_like_root_n(self):
        table = build_freq_table(8, 10000.0)
        window = all_pass(table)
        small = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, window, 17, 25000, seed=107)
        large = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, window, 17, 100000, seed=107)
        ratio = small.std_error / large.std_error
        assert 1.8 <= ratio <= 2.2

    def test_three_sigma_coverage(self):
        # the analytic value should land inside 3 standard errors nearly always
        table = build_freq_table(8, 10000.0)
        window = clip_window(table, "soft", 2)
        hits = 0
        runs = 300
        for seed in range(runs):
            est = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, window, 1024, 2000, seed=seed)
            hits += abs(est.mean - est.analytic) <= 3 * est.std_error
        assert hits >= math.ceil(0.99 * runs)

    def test_reproducible_for_fixed_seed_and_shards(self):
        table = build_freq_table(16, 10000.0)
        window = all_pass(table)
        a = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, window, 100, 5001, seed=42, n_shards=4)
        b = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, window, 100, 5001, seed=42, n_shards=4)
        assert a.mean == b.mean
        assert a.std_error == b.std_error

    def test_sharded_estimate_stays_calibrated(self):
        table = build_freq_table(16, 10000.0)
        window = all_pass(table)
        est = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, window, 100, 80000, seed=43, n_shards=7)
        assert est.n_samples == 80000
        assert abs(est.mean - est.analytic) <= 3 * est.std_error

    def test_metadata_records_distribution(self):
        table = build_freq_table(8, 10000.0)
        est = semantic_gap_montecarlo(1.0, 0.0, 1.0, table, all_pass(table), 0, 100, seed=1)
        assert est.distribution == "gaussian"

    def test_rejects_tiny_sample_count(self):
        table = build_freq_table(8, 10000.0)
        with pytest.raises(ValueError, match="n_samples"):
            semantic_gap_montecarlo(1.0, 0.0, 1.0, table, all_pass(table), 0, 1, seed=1)

    def test_rejects_nonpositive_sigma(self):
        table = build_freq_table(8, 10000.0)
        with pytest.raises(ValueError, match="sigma"):
            semantic_gap_montecarlo(0.0, 0.0, 1.0, table, all_pass(table), 0, 100, seed=1)


class TestSincKernel:
    def test_peak_value(self):
        k = sinc_kernel(0.25, np.array([-1.0, 0.0, 1.0]))
        assert k.values[1] == pytest.approx(0.25 / math.pi, rel=1e-15)

    def test_zeros_at_multiples_of_pi_over_cutoff(self):
        theta_c = 0.2
        zeros = np.array([kk * math.pi / theta_c for kk in range(1, 8)])
        k = sinc_kernel(theta_c, zeros)
        assert np.all(np.abs(k.values) < 1e-12 * (theta_c / math.pi))

    def test_integrates_to_one(self):
        theta_c = 0.05
        lobe = math.pi / theta_c
        half_width = 200.5 * lobe
        step = lobe / 64
        taus = np.arange(-half_width, half_width + step / 2, step)
        k = sinc_kernel(theta_c, taus)
        integral = np.trapezoid(k.values, k.taus)
        assert abs(integral - 1.0) <= 1e-3

    def test_rejects_nonpositive_cutoff(self):
        with pytest.raises(ValueError):
            sinc_kernel(0.0, np.array([0.0]))


class TestSoftComplementKernel:
    def test_peak_matches_complement_mass(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        kernel = soft_complement_kernel(window, np.array([0.0]))
        thetas = np.linspace(0.0, window.theta_start, 40001)
        from ropespectrum import soft_weight

        mass = np.trapezoid(1.0 - soft_weight(thetas, window.theta_start, window.theta_min), thetas)
        assert kernel.values[0] == pytest.approx(mass / math.pi, rel=1e-9)

    def test_requires_soft_window(self):
        table = llama3_table()
        with pytest.raises(ValueError, match="soft"):
            soft_complement_kernel(all_pass(table), np.array([0.0]))

    def test_requires_enough_panels(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        with pytest.raises(ValueError, match="panels"):
            soft_complement_kernel(window, np.array([0.0]), panels=512)
        with pytest.raises(ValueError, match="panels"):
            soft_complement_kernel(window, np.array([0.0]), panels=1025)


class TestFlatSpectrumSignal:
    def test_value_at_zero_is_bandwidth(self):
        sig = flat_spectrum_signal(0.4, np.array([0.0, 1.0]))
        assert sig.values[0] == 0.4

    def test_matches_closed_form(self):
        taus = np.array([0.5, 2.0, 10.0])
        sig = flat_spectrum_signal(0.4, taus)
        assert np.allclose(sig.values, np.sin(0.4 * taus) / taus, rtol=1e-15)


def _band_signal(lo, hi, taus):
    values = np.empty_like(taus)
    nz = taus != 0
    values[nz] = (np.sin(hi * taus[nz]) - np.sin(lo * taus[nz])) / taus[nz]
    values[~nz] = hi - lo
    return CurveSeries(taus, values)


class TestLeakageError:
    def test_cutoff_below_band_leaves_signal_untouched(self):
        # all-pass complement of measure zero: nothing to remove
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        step = math.pi / (8 * 0.8)
        taus = np.arange(400000) * step
        signal = _band_signal(0.3, 0.8, taus)
        profile = leakage_error(signal, 0.05, "hard", table, window)
        assert np.max(np.abs(profile.error)) < 1e-6 * np.max(np.abs(signal.values))

    def test_linear_in_base_signal(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        step = math.pi / (8 * 0.8)
        taus = np.arange(40000) * step
        signal = _band_signal(0.1, 0.8, taus)
        scaled = CurveSeries(taus, 3.5 * signal.values)
        e1 = leakage_error(signal, 0.3, "hard", table, window).error
        e2 = leakage_error(scaled, 0.3, "hard", table, window).error
        assert np.max(np.abs(e2 - 3.5 * e1)) <= 1e-9 * np.max(np.abs(e1))

    def test_hard_mode_reproduces_continuum_low_pass(self):
        # flat spectrum on [0, B]: the removed part is sin(theta_c tau)/tau
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        theta_c = float(table.thetas[44])
        band = 64 * theta_c
        step = math.pi / (8 * band)
        n = 1 << 15
        taus = np.arange(n) * step
        signal = flat_spectrum_signal(band, taus)
        profile = leakage_error(signal, theta_c, "hard", table, window)
        expected = np.empty(n)
        expected[0] = -theta_c
        expected[1:] = -np.sin(theta_c * taus[1:]) / taus[1:]
        mid = slice(n // 8, 7 * n // 8)
        assert np.max(np.abs(profile.error[mid] - expected[mid])) < 1e-8

    def test_soft_theta_c_must_match_window_onset(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        step = 30.0
        taus = np.arange(20000) * step
        signal = flat_spectrum_signal(0.008, taus)
        with pytest.raises(ValueError, match="onset"):
            leakage_error(signal, 2.0 * window.theta_start, "soft", table, window)

    def test_rejects_non_uniform_grid(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        taus = np.array([0.0, 1.0, 2.0, 4.0] + list(np.arange(5.0, 200.0)))
        with pytest.raises(ValueError, match="uniform"):
            leakage_error(CurveSeries(taus, np.ones_like(taus)), 0.5, "hard", table, window)

    def test_rejects_grid_not_starting_at_zero(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        taus = 1.0 + np.arange(200.0)
        with pytest.raises(ValueError, match="start at tau = 0"):
            leakage_error(CurveSeries(taus, np.ones_like(taus)), 0.5, "hard", table, window)

    def test_rejects_too_coarse_grid(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        taus = np.arange(0.0, 10000.0, 10.0)
        with pytest.raises(ValueError, match="coarse"):
            leakage_error(CurveSeries(taus, np.ones_like(taus)), 0.5, "hard", table, window)

    def test_rejects_grid_shorter_than_kernel_support(self):
        table = llama3_table()
        window = clip_window(table, "soft", 44)
        taus = np.arange(0.0, 20.0, 0.25)  # under two cutoff periods at theta_c = 0.5
        with pytest.raises(ValueError, match="too short"):
            leakage_error(CurveSeries(taus, np.ones_like(taus)), 0.5, "hard", table, window)


class TestEnvelopeDecayExponent:
    @staticmethod
    def _oscillation(power):
        taus = np.arange(1.0, 1200.0, 0.02)
        values = np.cos(taus) / taus**power
        return CurveSeries(taus, values)

    def test_first_power_envelope(self):
        series = self._oscillation(1.0)
        assert envelope_decay_exponent(series, 10.0) == pytest.approx(1.0, abs=0.05)

    def test_third_power_envelope(self):
        series = self._oscillation(3.0)
        assert envelope_decay_exponent(series, 10.0) == pytest.approx(3.0, abs=0.1)

    def test_sinc_kernel_decays_like_first_power(self):
        theta_c = 0.1
        lobe_period = 2 * math.pi / theta_c
        taus = np.arange(0.0, 40 * lobe_period, lobe_period / 256)
        kernel = sinc_kernel(theta_c, taus)
        exponent = envelope_decay_exponent(kernel, 3 * lobe_period)
        assert exponent == pytest.approx(1.0, abs=0.15)

    def test_too_few_peaks_reports_count(self):
        taus = np.arange(1.0, 20.0, 0.1)
        series = CurveSeries(taus, np.cos(taus))
        with pytest.raises(ValueError, match=r"found \d"):
            envelope_decay_exponent(series, 6.0)
