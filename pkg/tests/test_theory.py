import math
import sys

import numpy as np
import pytest
from scipy.integrate import quad

from topnsigma import (
    DomainError,
    GaussianParams,
    UniformParams,
    gaussian_logits,
    gaussian_threshold,
    integral_I,
    minp_logit_threshold,
    nucleus_mass_empirical,
    topnsigma_mass_gaussian,
    topnsigma_mass_uniform,
    topnsigma_mass_uniform_bound,
    uniform_logits,
    uniform_threshold,
)
from topnsigma.samplers import N_SIGMA_MAX


def quad_integral_oracle(mu, sigma, t):
    """Adaptive-quadrature oracle for the exp-weighted Gaussian integral."""
    def integrand(x):
        return math.exp(x) * math.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    hi = mu + sigma * sigma + 40 * sigma
    lo = t if math.isfinite(t) else mu + sigma * sigma - 40 * sigma
    value, _ = quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)
    return value


class TestGaussianThreshold:
    def test_median_case(self):
        for mu, sigma in ((0.0, 1.0), (2.0, 0.5), (-3.0, 2.0)):
            t = gaussian_threshold(GaussianParams(mu, sigma), 0.5)
            assert t == pytest.approx(mu + sigma * sigma, abs=1e-12)

    def test_p09_monte_carlo(self):
        params = GaussianParams(0.0, 1.0)
        t = gaussian_threshold(params, 0.9)
        # closed form: 1 + sqrt(2) erfinv(-0.8)
        l = gaussian_logits(params, 200_000, seed=100)
        mass = nucleus_mass_empirical(l, t).mass
        assert 0.89 <= mass <= 0.91

    def test_roundtrip_v2e5(self):
        params = GaussianParams(0.0, 1.0)
        l = gaussian_logits(params, 200_000, seed=11)
        for p in (0.1, 0.25, 0.5, 0.9):
            mass = nucleus_mass_empirical(l, gaussian_threshold(params, p)).mass
            assert abs(mass - p) <= 0.01

    def test_p25_mc_band(self):
        params = GaussianParams(0.0, 1.0)
        l = gaussian_logits(params, 200_000, seed=12)
        mass = nucleus_mass_empirical(l, gaussian_threshold(params, 0.25)).mass
        assert 0.24 <= mass <= 0.26

    def test_strictly_decreasing_in_p(self):
        params = GaussianParams(0.5, 1.7)
        ts = [gaussian_threshold(params, p) for p in np.linspace(0.02, 0.98, 33)]
        assert all(b < a for a, b in zip(ts, ts[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            gaussian_threshold(GaussianParams(0.0, 1.0), 0.0)
        with pytest.raises(DomainError):
            gaussian_threshold(GaussianParams(0.0, 1.0), 1.0)
        with pytest.raises(DomainError):
            GaussianParams(0.0, 0.0)


class TestUniformThreshold:
    def test_direct_substitution(self):
        t = uniform_threshold(UniformParams(0.0, math.log(2)), 0.5)
        assert t == pytest.approx(math.log(0.75), abs=1e-14)

    def test_roundtrip_v2e5(self):
        params = UniformParams(0.0, 4.0)
        l = uniform_logits(params, 200_000, seed=21)
        for p in (0.1, 0.25, 0.5, 0.9):
            mass = nucleus_mass_empirical(l, uniform_threshold(params, p)).mass
            assert abs(mass - p) <= 0.01

    def test_p06_mc_band(self):
        params = UniformParams(0.0, 4.0)
        l = uniform_logits(params, 200_000, seed=22)
        mass = nucleus_mass_empirical(l, uniform_threshold(params, 0.6)).mass
        assert 0.59 <= mass <= 0.61

    def test_large_width_limit_is_minp(self):
        # a -> inf: top-(1-p') threshold -> M + ln p'
        for p_prime in (0.05, 0.1, 0.3):
            t = uniform_threshold(UniformParams(3.0, 50.0), 1.0 - p_prime)
            assert t == pytest.approx(minp_logit_threshold(3.0, p_prime), abs=1e-15)

    def test_strictly_decreasing_in_p(self):
        params = UniformParams(0.0, 6.0)
        ts = [uniform_threshold(params, p) for p in np.linspace(0.02, 0.98, 33)]
        assert all(b < a for a, b in zip(ts, ts[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            uniform_threshold(UniformParams(0.0, 1.0), 0.0)
        with pytest.raises(DomainError):
            UniformParams(0.0, -1.0)


class TestNucleusMassEmpirical:
    def test_full_vocabulary(self):
        report = nucleus_mass_empirical([1.0, 2.0, 3.0], -math.inf)
        assert report.mass == pytest.approx(1.0, abs=1e-12)
        assert report.nucleus_size == 3

    def test_empty_nucleus(self):
        report = nucleus_mass_empirical([1.0, 2.0, 3.0], 4.0)
        assert report.mass == 0.0 and report.nucleus_size == 0

    def test_hand_softmax(self):
        report = nucleus_mass_empirical([math.log(3), math.log(1)], math.log(2))
        assert report.mass == pytest.approx(0.75, abs=1e-12)
        assert report.nucleus_size == 1


class TestIntegralI:
    def test_full_integral_is_lognormal_mean(self):
        for mu, sigma in ((0.0, 1.0), (1.5, 0.7)):
            assert integral_I(GaussianParams(mu, sigma), -math.inf) == \
                pytest.approx(math.exp(mu + sigma * sigma / 2.0), rel=1e-14)

    def test_against_quadrature_oracle(self):
        for mu, sigma in ((0.0, 1.0), (1.5, 0.7), (-2.0, 2.0)):
            for t in (-math.inf, mu - 2 * sigma, mu, mu + sigma, mu + 3 * sigma):
                closed = integral_I(GaussianParams(mu, sigma), t)
                oracle = quad_integral_oracle(mu, sigma, t)
                assert abs(closed - oracle) / oracle <= 1e-8

    def test_standard_case_phi_form(self):
        # mu=0, sigma=1, t=0: I = sqrt(e) * Phi(1)
        from topnsigma import norm_cdf
        assert integral_I(GaussianParams(0.0, 1.0), 0.0) == \
            pytest.approx(math.exp(0.5) * float(norm_cdf(1.0)), rel=1e-14)

    def test_sum_to_integral_million(self):
        params = GaussianParams(0.0, 1.0)
        l = gaussian_logits(params, 1_000_000, seed=33)
        for t in (-1.0, 0.0, 1.0):
            empirical = float(np.exp(l[l > t]).sum()) / l.size
            assert abs(empirical - integral_I(params, t)) / integral_I(params, t) <= 0.01


class TestTopNSigmaMassGaussian:
    def test_cutoff_at_mean_case(self):
        # sigma_distance == n leaves only the sigma^2 offset inside erf
        from topnsigma import erf
        for sigma in (0.3, 1.0, 2.2):
            got = topnsigma_mass_gaussian(sigma, 1.7, 1.7)
            expect = 0.5 * (1.0 - erf(-sigma / math.sqrt(2.0)))
            assert got == pytest.approx(expect, rel=1e-13)
            assert got > 0.5

    def test_small_sigma_fixed_gap_vanishes(self):
        # fixed absolute gap M - mu = 0.1 while sigma -> 0
        got = topnsigma_mass_gaussian(0.01, 10.0, 1.0)
        assert got < 1e-18
        tinier = topnsigma_mass_gaussian(0.001, 100.0, 1.0)
        assert tinier < 1e-300 or tinier == 0.0

    def test_d3_n1_value_and_monte_carlo(self):
        got = topnsigma_mass_gaussian(1.0, 3.0, 1.0)
        # oracle check 1: direct erf evaluation of the mass formula
        from topnsigma import erf
        assert got == pytest.approx(0.5 * (1.0 - float(erf(1.0 / math.sqrt(2.0)))), rel=1e-12)
        assert got == pytest.approx(0.15865525393145707, abs=1e-12)
        # oracle check 2: Monte Carlo nucleus mass on 1e6 Gaussian logits at
        # the threshold mu + (d - n) sigma
        l = gaussian_logits(GaussianParams(0.0, 1.0), 1_000_000, seed=44)
        mass = nucleus_mass_empirical(l, 2.0).mass
        assert abs(mass - got) <= 0.01

    def test_strictly_increasing_in_n(self):
        ns = np.linspace(0.05, N_SIGMA_MAX - 0.05, 50)
        ms = [topnsigma_mass_gaussian(1.2, 4.0, n) for n in ns]
        assert all(b > a for a, b in zip(ms, ms[1:]))


class TestTopNSigmaMassUniform:
    def test_paper_headline_bound(self):
        assert topnsigma_mass_uniform_bound(1.9, 1.0) == pytest.approx(0.85, abs=0.005)

    def test_bound_saturates_at_upper_n(self):
        for sigma in (0.5, 1.0, 3.0):
            assert topnsigma_mass_uniform_bound(sigma, N_SIGMA_MAX) == 1.0

    def test_exact_mass_monte_carlo(self):
        sigma, n = 1.9, 1.0
        width = N_SIGMA_MAX * sigma
        exact = topnsigma_mass_uniform(sigma, n, width)
        l = uniform_logits(UniformParams(0.0, width), 1_000_000, seed=50)
        mass = nucleus_mass_empirical(l, -n * sigma).mass
        assert abs(mass - exact) <= 0.005

    def test_exact_vs_bound(self):
        rng = np.random.default_rng(51)
        for _ in range(200):
            sigma = float(rng.uniform(0.4, 3.0))
            n = float(rng.uniform(0.1, N_SIGMA_MAX))
            width = float(rng.uniform(min(n * sigma, N_SIGMA_MAX * sigma), N_SIGMA_MAX * sigma))
            assert topnsigma_mass_uniform(sigma, n, width) >= \
                topnsigma_mass_uniform_bound(sigma, n) - 1e-12

    def test_cutoff_below_support_clamps(self):
        assert topnsigma_mass_uniform(1.0, 2.0, 1.0) == 1.0

    def test_strictly_increasing_in_n(self):
        ns = np.linspace(0.05, N_SIGMA_MAX, 50)
        ms = [topnsigma_mass_uniform_bound(0.9, n) for n in ns]
        assert all(b > a for a, b in zip(ms, ms[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            topnsigma_mass_uniform_bound(1.0, 0.0)
        with pytest.raises(DomainError):
            topnsigma_mass_uniform_bound(1.0, N_SIGMA_MAX + 0.01)
        with pytest.raises(DomainError):
            topnsigma_mass_uniform(1.0, 1.0, N_SIGMA_MAX + 0.1)


class TestMinPLogitThreshold:
    def test_p_one(self):
        assert minp_logit_threshold(2.5, 1.0) == 2.5

    def test_direct_value(self):
        assert minp_logit_threshold(0.0, 0.1) == pytest.approx(math.log(0.1), abs=1e-15)

    def test_equivalence_sweep_large_width(self):
        for p in (0.05, 0.1, 0.3):
            t_top = uniform_threshold(UniformParams(0.0, 50.0), 1.0 - p)
            assert abs(t_top - minp_logit_threshold(0.0, p)) <= 1e-15

    def test_convergence_envelope(self):
        # the analytic envelope exp(-a)/p falls below double resolution at
        # a = 50, so allow the representation floor of ln p on top of it
        for a in (10.0, 20.0, 50.0):
            for p in (0.05, 0.1, 0.3):
                gap = abs(uniform_threshold(UniformParams(0.0, a), 1.0 - p)
                          - minp_logit_threshold(0.0, p))
                floor = 4.0 * sys.float_info.epsilon * max(1.0, abs(math.log(p)))
                assert gap <= math.exp(-a) / p + floor

    def test_domain(self):
        with pytest.raises(DomainError):
            minp_logit_threshold(0.0, 0.0)
