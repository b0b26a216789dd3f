"""Error-analysis pipeline: binomial errors, bootstrap, distances, drift, calibration."""

import math

import numpy as np
import pytest

from qfdr.analytics import SweepPoint, quantum_correction, spam_correction
from qfdr.protocol import ProtocolSpec, SpamModel, sample_work
from qfdr.qubit import ThermalSpec
from qfdr.stats import (
    beta_error,
    binomial_error,
    bootstrap_q,
    calibrate_rotation_time,
    drift_scan,
    estimate_from_samples,
    sigma_distance,
)

EXPERIMENT = ThermalSpec.from_beta(3.413)


class TestBinomialError:
    def test_degenerate_frequency(self):
        assert binomial_error(0.0, 100) == 0.0
        assert binomial_error(1.0, 100) == 0.0

    def test_peak_variance(self):
        assert binomial_error(0.5, 100) == 0.05

    def test_experiment_scale(self):
        np.testing.assert_allclose(binomial_error(0.032, 40000), 8.80e-4, rtol=1e-3)

    def test_domain(self):
        with pytest.raises(ValueError):
            binomial_error(1.2, 10)
        with pytest.raises(ValueError):
            binomial_error(0.3, 0)


class TestBetaError:
    def test_experiment_scale(self):
        sigma = beta_error(0.032, 40000)
        np.testing.assert_allclose(sigma, binomial_error(0.032, 40000) / (0.032 * 0.968), rtol=1e-14)
        np.testing.assert_allclose(sigma, 0.0284, atol=1e-4)
        # same order as the measured +-0.025
        assert 0.01 < sigma < 0.1

    def test_quadruple_trials_halves_error(self):
        np.testing.assert_allclose(
            beta_error(0.1, 4 * 5000), beta_error(0.1, 5000) / 2.0, rtol=1e-14
        )

    def test_quarter_population_value(self):
        np.testing.assert_allclose(
            beta_error(0.25, 10**6), math.sqrt(0.1875 / 10**6) / 0.1875, rtol=1e-14
        )
        np.testing.assert_allclose(beta_error(0.25, 10**6), 2.31e-3, atol=1e-5)

    def test_boundaries_rejected(self):
        for p in (0.0, 0.5, 0.9):
            with pytest.raises(ValueError):
                beta_error(p, 100)


class TestBootstrapQ:
    def test_determinism(self):
        a = bootstrap_q(EXPERIMENT, 2, 2000, resamples=50, seed=11)
        b = bootstrap_q(EXPERIMENT, 2, 2000, resamples=50, seed=11)
        np.testing.assert_array_equal(a.q_values, b.q_values)
        assert a.sigma_q == b.sigma_q and a.sigma_beta == b.sigma_beta

    def test_experiment_scale_sigma(self):
        """Regenerated datasets at the measured operating point spread the
        rescaled correction by about the published 0.021."""
        report = bootstrap_q(EXPERIMENT, 2, 8000, resamples=200, seed=5)
        assert report.q_values.shape == (200,)
        assert 0.021 / 1.5 <= report.sigma_rescaled <= 0.021 * 1.5

    def test_no_flips_pins_work_to_zero(self):
        report = bootstrap_q(EXPERIMENT, 2, 3000, resamples=50, seed=2,
                             flip_probability_override=0.0)
        assert np.all(report.q_values == 0.0)
        assert report.sigma_q == 0.0
        assert report.sigma_beta > 0.0

    def test_mean_is_unbiased(self):
        report = bootstrap_q(EXPERIMENT, 2, 8000, resamples=200, seed=17)
        analytic = quantum_correction(ProtocolSpec.coherent(2, EXPERIMENT)).q_value
        tolerance = 3.0 * report.sigma_q / math.sqrt(report.resamples)
        assert abs(report.q_values.mean() - analytic) < tolerance

    def test_sigma_shrinks_as_inverse_sqrt_runs(self):
        small = bootstrap_q(EXPERIMENT, 2, 1_000, resamples=200, seed=29)
        large = bootstrap_q(EXPERIMENT, 2, 100_000, resamples=200, seed=29)
        ratio = small.sigma_q / large.sigma_q
        assert abs(ratio - 10.0) / 10.0 < 0.2

    def test_validation(self):
        with pytest.raises(ValueError):
            bootstrap_q(EXPERIMENT, 2, 100, resamples=1, seed=0)
        with pytest.raises(ValueError):
            bootstrap_q(EXPERIMENT, 2, 100, resamples=10, seed=0,
                        flip_probability_override=1.5)


class TestEstimateFromSamples:
    def test_coherent_estimate_matches_analytic(self):
        spec = ProtocolSpec.coherent(2, EXPERIMENT)
        samples = sample_work(spec, None, runs=100_000, seed=303)
        estimate = estimate_from_samples(samples)
        report = bootstrap_q(EXPERIMENT, 2, 100_000, resamples=100, seed=303)
        analytic = quantum_correction(spec)
        assert estimate.source == "monte_carlo"
        assert abs(estimate.q_value - analytic.q_value) < 5 * report.sigma_q

    def test_random_points_agree_with_analytic(self):
        """Monte Carlo and closed form agree within bootstrap error bars."""
        rng = np.random.default_rng(888)
        for _ in range(10):
            n = int(rng.integers(2, 12))
            beta = float(rng.uniform(0.5, 5.0))
            thermal = ThermalSpec.from_beta(beta)
            spec = ProtocolSpec.coherent(n, thermal)
            seed = int(rng.integers(0, 2**32))
            samples = sample_work(spec, None, runs=100_000, seed=seed)
            estimate = estimate_from_samples(samples)
            report = bootstrap_q(thermal, n, 100_000, resamples=60, seed=seed)
            analytic = quantum_correction(spec)
            assert abs(estimate.q_value - analytic.q_value) < 5 * report.sigma_q

    def test_incoherent_estimate(self):
        from qfdr.analytics import incoherent_correction

        spec = ProtocolSpec.incoherent(5, EXPERIMENT, 1.0, 2.0)
        samples = sample_work(spec, None, runs=200_000, seed=71)
        estimate = estimate_from_samples(samples)
        analytic = incoherent_correction(spec)
        assert estimate.delta_f == analytic.delta_f
        assert abs(estimate.mean_work - analytic.mean_work) < 5e-3
        assert abs(estimate.q_value - analytic.q_value) < 5e-3


class TestSigmaDistance:
    def test_eleven_sigma_reference(self):
        point = SweepPoint(inverse_speed=2.828, rescaled_q=0.438, provenance="experiment")
        result = sigma_distance(point, 0.021, reference_value=0.438 - 11 * 0.021)
        np.testing.assert_allclose(result.distance_sigma, 11.0, rtol=1e-12)
        assert result.passed  # default 10 sigma threshold

    def test_point_on_reference(self):
        point = SweepPoint(inverse_speed=4.0, rescaled_q=0.3, provenance="experiment")
        result = sigma_distance(point, 0.05, reference_value=0.3)
        assert result.distance_sigma == 0.0
        assert not result.passed

    def test_last_point_against_readout_error_bound(self):
        """With its own error bar the last measured point sits ~10 sigma above
        the worst-case readout boundary, within 25 percent of the originally
        reported 12.1 (which was expressed in the third point's sigma)."""
        reference = spam_correction(EXPERIMENT, SpamModel(0.004, 0.004), 7).rescaled
        point = SweepPoint(inverse_speed=9.899, rescaled_q=0.581, provenance="experiment")
        result = sigma_distance(point, 0.036, reference_value=reference,
                                reference="spam_boundary", threshold=10.0)
        np.testing.assert_allclose(result.distance_sigma, 10.254076921663811, rtol=1e-9)
        assert abs(result.distance_sigma - 12.1) / 12.1 < 0.25
        assert result.passed

    def test_sigma_must_be_positive(self):
        point = SweepPoint(inverse_speed=1.0, rescaled_q=0.1, provenance="experiment")
        with pytest.raises(ValueError):
            sigma_distance(point, 0.0, 0.05)


class TestDriftScan:
    def test_iid_data_not_flagged(self):
        rng = np.random.default_rng(1000)
        outcomes = rng.random(40000) < 0.1
        report = drift_scan(outcomes, bin_size=1000)
        assert report.bins == 40
        assert report.excess_spread < 0.01
        assert not report.flagged

    def test_constant_sequence_has_zero_spread(self):
        report = drift_scan(np.zeros(5000, dtype=bool), bin_size=500)
        assert report.observed_spread == 0.0
        assert report.expected_spread == 0.0
        assert not report.flagged

    def test_injected_drift_is_flagged(self):
        rng = np.random.default_rng(2000)
        drifting_p = np.linspace(0.05, 0.15, 40000)
        outcomes = rng.random(40000) < drifting_p
        report = drift_scan(outcomes, bin_size=1000)
        assert report.excess_spread >= 0.01
        assert report.flagged

    def test_too_short_sequence(self):
        with pytest.raises(ValueError):
            drift_scan(np.zeros(1500, dtype=bool), bin_size=1000)

    def test_false_positive_rate_below_five_percent(self):
        """Null calibration at the experiment's (runs x steps, bin) scale."""
        rng = np.random.default_rng(3000)
        sequences = rng.random((1000, 40000)) < 0.1
        flags = 0
        for row in sequences:
            flags += drift_scan(row, bin_size=1000).flagged
        assert flags / 1000 < 0.05


class TestCalibrateRotationTime:
    @staticmethod
    def noiseless_samples(center, width=0.08, count=5):
        times = np.linspace(center - width, center + width, count)
        return [(float(t), math.sin(t / 2.0) ** 2) for t in times]

    def test_self_consistent_at_quarter_turn(self):
        samples = self.noiseless_samples(math.pi / 2.0)
        fitted = calibrate_rotation_time(samples, math.pi / 2.0)
        assert abs(fitted - math.pi / 2.0) < 1e-3

    def test_zero_angle_target(self):
        times = np.linspace(0.0, 0.02, 5)
        samples = [(float(t), math.sin(t / 2.0) ** 2) for t in times]
        fitted = calibrate_rotation_time(samples, 0.0)
        assert abs(fitted) < 0.01

    def test_exact_on_linear_data(self):
        samples = [(0.9, 0.45), (1.1, 0.55)]
        fitted = calibrate_rotation_time(samples, math.pi / 2.0)
        np.testing.assert_allclose(fitted, 1.0, rtol=1e-12)

    def test_singular_design_rejected(self):
        with pytest.raises(ValueError):
            calibrate_rotation_time([(1.0, 0.4), (1.0, 0.6)], 1.0)
        with pytest.raises(ValueError):
            calibrate_rotation_time([(1.0, 0.4)], 1.0)

    def test_recovery_under_binomial_noise(self):
        """100 noisy calibrations at 5000 shots: nearly all within 3 propagated
        standard errors of the true duration."""
        rng = np.random.default_rng(4000)
        shots = 5000
        target = math.pi / 2.0
        times = np.linspace(target - 0.08, target + 0.08, 5)
        design = np.vstack([times, np.ones_like(times)]).T
        covariance_scale = np.linalg.inv(design.T @ design)
        hits = 0
        for _ in range(100):
            samples = []
            sigma2 = 0.0
            for t in times:
                p = math.sin(t / 2.0) ** 2
                observed = rng.binomial(shots, p) / shots
                samples.append((float(t), float(observed)))
                sigma2 += p * (1.0 - p) / shots
            sigma2 /= len(times)
            fitted = calibrate_rotation_time(samples, target)
            slope = 0.5 * math.sin(target)
            # propagated error of the crossing point of the fitted line
            se = math.sqrt(sigma2 * (covariance_scale[0, 0] * target**2
                                     + 2 * covariance_scale[0, 1] * target
                                     + covariance_scale[1, 1])) / slope
            hits += abs(fitted - target) <= 3 * se
        assert hits >= 97
