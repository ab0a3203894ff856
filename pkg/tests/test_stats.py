import math

import numpy as np
import pytest
from scipy.stats import kstest

from weaksep.stats import (
    PRNG_ALGORITHM,
    binomial_stderr,
    derive_generator,
    empirical_cdf,
    fit_lognormal,
    gaussian,
    gaussian_array,
    make_stream,
    quadratic_scaling_fit,
)


class TestGaussian:
    def test_zero_sd_returns_mean_exactly(self):
        rng = derive_generator(1)
        assert gaussian(rng, mean=3.25, sd=0.0) == 3.25

    def test_negative_sd_rejected(self):
        with pytest.raises(ValueError):
            gaussian(derive_generator(1), sd=-1.0)

    def test_deterministic_given_seed(self):
        a = [gaussian(derive_generator(42, i)) for i in range(5)]
        b = [gaussian(derive_generator(42, i)) for i in range(5)]
        assert a == b

    def test_scalar_matches_array_stream(self):
        rng1 = derive_generator(7)
        rng2 = derive_generator(7)
        singles = [gaussian(rng1, 1.0, 2.0) for _ in range(10)]
        batch = gaussian_array(rng2, 10, 1.0, 2.0)
        assert singles == pytest.approx(list(batch), abs=0.0)

    def test_sample_mean_near_mean(self):
        draws = gaussian_array(derive_generator(3), 10**6, mean=0.5, sd=2.0)
        assert abs(draws.mean() - 0.5) < 3 * 2.0 / 10**3

    def test_sample_sd_near_sd(self):
        draws = gaussian_array(derive_generator(4), 10**5, sd=1.5)
        assert draws.std() == pytest.approx(1.5, rel=0.02)


class TestStreams:
    def test_identified_algorithm(self):
        stream = make_stream(5, 2)
        assert stream.algorithm == PRNG_ALGORITHM
        assert (stream.master_seed, stream.stream_index) == (5, 2)

    def test_same_origin_same_sequence(self):
        a = make_stream(11, 4).generator.random(100)
        b = make_stream(11, 4).generator.random(100)
        assert np.array_equal(a, b)

    def test_distinct_streams_uncorrelated(self):
        n = 10**5
        a = gaussian_array(derive_generator(9, 0), n)
        b = gaussian_array(derive_generator(9, 1), n)
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) < 0.01


class TestFitLognormal:
    def test_recovers_synthetic_parameters(self):
        rng = derive_generator(21)
        samples = np.exp(2.8 + 0.71 * gaussian_array(rng, 10**5))
        fit = fit_lognormal(samples)
        assert fit.mu_tilde == pytest.approx(2.8, abs=0.02)
        assert fit.sigma_tilde == pytest.approx(0.71, abs=0.02)
        assert fit.median == pytest.approx(math.exp(fit.mu_tilde), rel=1e-12)
        assert fit.r_squared_log_bins > 0.99
        assert not fit.degenerate

    def test_scale_equivariance(self):
        rng = derive_generator(22)
        samples = np.exp(1.0 + 0.4 * gaussian_array(rng, 5000))
        base = fit_lognormal(samples)
        scaled = fit_lognormal(7.0 * samples)
        assert scaled.mu_tilde - base.mu_tilde == pytest.approx(math.log(7.0), abs=1e-12)
        assert scaled.sigma_tilde == pytest.approx(base.sigma_tilde, abs=1e-12)

    def test_constant_samples_flagged_degenerate(self):
        fit = fit_lognormal(np.full(100, 4.0))
        assert fit.degenerate
        assert fit.sigma_tilde == pytest.approx(0.0, abs=1e-15)
        assert math.isnan(fit.r_squared)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            fit_lognormal([1.0, 2.0, 0.0] * 20)
        with pytest.raises(ValueError):
            fit_lognormal([1.0] * 10)


class TestQuadraticScalingFit:
    def test_exact_quadratic_data(self):
        sigmas = [5.0, 10.0, 15.0, 20.0, 25.0]
        medians = [1.3 * s * s for s in sigmas]
        c, r2 = quadratic_scaling_fit(sigmas, medians)
        assert c == pytest.approx(1.3, rel=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_coefficient_matches_lstsq(self):
        sigmas = np.array([5.0, 10.0, 15.0, 20.0, 25.0])
        medians = np.array([31.0, 140.0, 310.0, 530.0, 845.0])
        c, _ = quadratic_scaling_fit(sigmas, medians)
        expected, *_ = np.linalg.lstsq(sigmas[:, None] ** 2, medians, rcond=None)
        assert c == pytest.approx(float(expected[0]), rel=1e-12)

    def test_linear_data_is_a_poor_quadratic(self):
        sigmas = [5.0, 10.0, 15.0, 20.0, 25.0]
        _, r2_linear = quadratic_scaling_fit(sigmas, sigmas)
        _, r2_quadratic = quadratic_scaling_fit(sigmas, [s * s for s in sigmas])
        assert r2_linear < 0.8
        assert r2_quadratic > 0.999

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ValueError):
            quadratic_scaling_fit([1.0, 2.0, 3.0], [1.0, 4.0, 9.0])
        with pytest.raises(ValueError):
            quadratic_scaling_fit([1.0, 1.0, 2.0, 3.0], [1.0, 1.0, 4.0, 9.0])
        with pytest.raises(ValueError):
            quadratic_scaling_fit([1.0, 2.0, 3.0, 4.0], [1.0, 4.0, float("nan"), 16.0])


class TestEmpiricalCdf:
    def test_small_sample_median(self):
        cdf = empirical_cdf([3.0, 1.0, 2.0])
        assert cdf.median == 2.0
        assert list(cdf.values) == [1.0, 2.0, 3.0]
        assert list(cdf.levels) == pytest.approx([1 / 3, 2 / 3, 1.0])

    def test_single_sample(self):
        cdf = empirical_cdf([5.0])
        assert cdf.median == 5.0
        assert list(cdf.levels) == [1.0]

    def test_monotone_zero_to_one(self):
        cdf = empirical_cdf(gaussian_array(derive_generator(30), 1000))
        assert np.all(np.diff(cdf.levels) >= 0)
        assert cdf.levels[-1] == 1.0

    def test_normal_sample_passes_ks(self):
        draws = gaussian_array(derive_generator(31), 10**5)
        result = kstest(draws, "norm")
        assert result.pvalue > 0.01

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_cdf([])


class TestBinomialStderr:
    def test_edge_cases(self):
        assert binomial_stderr(0, 50) == 0.0
        assert binomial_stderr(50, 50) == 0.0
        assert binomial_stderr(50, 100) == pytest.approx(0.05, abs=1e-15)

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            binomial_stderr(5, 0)
        with pytest.raises(ValueError):
            binomial_stderr(6, 5)
