"""Numerical verification suite behind the ``verify-theory`` command.

Each check measures a margin against its tolerance and everything is
driven by one seed, so a fixed seed yields a byte-identical report.  Monte
Carlo tolerances default to values sized from pilot-run variance; they can
be tightened to demonstrate the stochastic nature of the checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .rng import derive_seed
from .samplers import N_SIGMA_MAX, mask_min_p, mask_top_k, mask_top_nsigma, mask_top_p
from .core import temperature_scale
from .synth import MixtureSpec, gaussian_logits, generate, uniform_logits
from .theory import (
    GaussianParams,
    UniformParams,
    gaussian_threshold,
    integral_I,
    minp_logit_threshold,
    nucleus_mass_empirical,
    topnsigma_mass_gaussian,
    topnsigma_mass_uniform_bound,
    uniform_threshold,
)
from .special import erf, erf_inv

TEMPERATURE_GRID = (0.01, 0.5, 1.0, 1.5, 2.0, 3.0, 10.0)


@dataclass(frozen=True)
class Tolerances:
    mc_mass: float = 0.01        # absolute, nucleus-mass round trips
    mc_relative: float = 0.01    # relative, sum-to-integral convergence
    closed_form: float = 1e-8    # relative, closed form vs quadrature
    roundtrip: float = 1e-12     # |erf(erf_inv(y)) - y|
    exact: float = 0.0           # bit-identical mask checks


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def _random_mixture_vectors(seed: int, count: int, vocab: int = 600) -> list[np.ndarray]:
    """Assorted two-region vectors spanning tight to loose confidence."""
    vectors = []
    rng = np.random.default_rng(seed)
    for i in range(count):
        d = float(rng.uniform(3.0, 18.0))
        n_info = int(rng.integers(1, 9))
        offsets = (0.0, *np.sort(rng.uniform(0.0, 2.5, n_info - 1)).tolist()) if n_info > 1 else (0.0,)
        mu = float(rng.uniform(-2, 2))
        sigma = float(rng.uniform(0.5, 2.5))
        spec = MixtureSpec(
            vocab_size=vocab,
            noise=GaussianParams(mu=mu, sigma=sigma),
            informative_offsets=offsets,
            target_max=mu + d * sigma,
            seed=derive_seed(seed, i),
        )
        vectors.append(generate(spec))
    return vectors


def check_thm3_topnsigma_invariance(seed: int, tol: Tolerances) -> CheckResult:
    vectors = _random_mixture_vectors(derive_seed(seed, 1), 1000)
    mismatches = 0
    for l in vectors:
        ref = mask_top_nsigma(l, 1.0, 1.0)
        for t in TEMPERATURE_GRID:
            if mask_top_nsigma(l, t, 1.0) != ref:
                mismatches += 1
    return CheckResult(
        name="thm3_topnsigma_mask_invariance", passed=mismatches <= tol.exact,
        value=float(mismatches), tolerance=tol.exact,
        detail=f"{len(vectors)} vectors x {len(TEMPERATURE_GRID)} temperatures, bit-identical masks")


def check_thm3_topk_invariance(seed: int, tol: Tolerances) -> CheckResult:
    vectors = _random_mixture_vectors(derive_seed(seed, 2), 1000)
    mismatches = 0
    for l in vectors:
        ref = mask_top_k(l, 20)
        for t in TEMPERATURE_GRID:
            if mask_top_k(temperature_scale(l, t), 20) != ref:
                mismatches += 1
    return CheckResult(
        name="thm3_topk_mask_invariance", passed=mismatches <= tol.exact,
        value=float(mismatches), tolerance=tol.exact,
        detail="top-k nuclei unchanged under any positive temperature scaling")


def _noninvariance_witness(mask_fn, seed: int) -> int:
    """Brute-force search for a vector whose nucleus differs between T=1
    and T=3; returns the number of specs tried before success (0 = none
    found)."""
    for attempt in range(1, 2001):
        spec = MixtureSpec(
            vocab_size=400,
            noise=GaussianParams(mu=0.0, sigma=1.0),
            informative_offsets=(0.0, 0.3, 0.8),
            target_max=3.0 + (attempt % 17) * 0.25,
            seed=derive_seed(seed, attempt),
        )
        l = generate(spec)
        if mask_fn(l, 1.0) != mask_fn(l, 3.0):
            return attempt
    return 0


def check_topp_noninvariance(seed: int, tol: Tolerances) -> CheckResult:
    found = _noninvariance_witness(lambda l, t: mask_top_p(l, t, 0.9), derive_seed(seed, 3))
    return CheckResult(
        name="topp_noninvariance_witness", passed=found > 0, value=float(found), tolerance=1.0,
        detail="constructed vector whose top-p (p=0.9) nucleus changes between T=1 and T=3")


def check_minp_noninvariance(seed: int, tol: Tolerances) -> CheckResult:
    found = _noninvariance_witness(lambda l, t: mask_min_p(l, t, 0.1), derive_seed(seed, 4))
    return CheckResult(
        name="minp_noninvariance_witness", passed=found > 0, value=float(found), tolerance=1.0,
        detail="constructed vector whose min-p (p=0.1) nucleus changes between T=1 and T=3")


def check_gaussian_roundtrip(seed: int, tol: Tolerances) -> CheckResult:
    params = GaussianParams(mu=0.0, sigma=1.0)
    l = gaussian_logits(params, 200_000, derive_seed(seed, 5))
    worst = 0.0
    for p in (0.1, 0.25, 0.5, 0.9):
        report = nucleus_mass_empirical(l, gaussian_threshold(params, p))
        worst = max(worst, abs(report.mass - p))
    return CheckResult(
        name="eq4_gaussian_threshold_roundtrip", passed=worst <= tol.mc_mass,
        value=worst, tolerance=tol.mc_mass,
        detail="empirical nucleus mass at the closed-form threshold, V=2e5, p in {.1,.25,.5,.9}")


def check_uniform_roundtrip(seed: int, tol: Tolerances) -> CheckResult:
    params = UniformParams(upper=0.0, width=4.0)
    l = uniform_logits(params, 200_000, derive_seed(seed, 6))
    worst = 0.0
    for p in (0.1, 0.25, 0.5, 0.9):
        report = nucleus_mass_empirical(l, uniform_threshold(params, p))
        worst = max(worst, abs(report.mass - p))
    return CheckResult(
        name="eq5_uniform_threshold_roundtrip", passed=worst <= tol.mc_mass,
        value=worst, tolerance=tol.mc_mass,
        detail="empirical nucleus mass at the closed-form threshold, V=2e5, p in {.1,.25,.5,.9}")


def check_sum_to_integral(seed: int, tol: Tolerances) -> CheckResult:
    params = GaussianParams(mu=0.0, sigma=1.0)
    worst = 0.0
    for s in range(3):
        l = gaussian_logits(params, 1_000_000, derive_seed(seed, 7, s))
        for t in (params.mu - params.sigma, params.mu, params.mu + params.sigma):
            empirical = float(np.exp(l[l > t]).sum()) / l.size
            exact = integral_I(params, t)
            worst = max(worst, abs(empirical - exact) / exact)
    return CheckResult(
        name="thm1_sum_to_integral", passed=worst <= tol.mc_relative,
        value=worst, tolerance=tol.mc_relative,
        detail="(1/V) sum of exp(logit) above t vs the closed-form integral, V=1e6")


def check_lemma1_mass(seed: int, tol: Tolerances) -> CheckResult:
    params = GaussianParams(mu=0.0, sigma=1.0)
    l = gaussian_logits(params, 1_000_000, derive_seed(seed, 8))
    worst = 0.0
    for t in (params.mu - params.sigma, params.mu, params.mu + params.sigma):
        predicted = integral_I(params, t) / integral_I(params, -math.inf)
        empirical = nucleus_mass_empirical(l, t).mass
        worst = max(worst, abs(empirical - predicted) / predicted)
    return CheckResult(
        name="lemma1_nucleus_mass_ratio", passed=worst <= tol.mc_relative,
        value=worst, tolerance=tol.mc_relative,
        detail="I(t)/I(-inf) vs softmax nucleus mass on one Gaussian vector, V=1e6")


def check_integral_vs_quadrature(seed: int, tol: Tolerances) -> CheckResult:
    worst = 0.0
    for mu, sigma in ((0.0, 1.0), (1.5, 0.7), (-2.0, 2.0)):
        params = GaussianParams(mu=mu, sigma=sigma)
        for t in (mu - 2 * sigma, mu, mu + sigma, mu + 3 * sigma):
            def integrand(x):
                return math.exp(x) * math.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
            numeric, _ = quad(integrand, t, t + 40 * sigma, epsabs=0.0, epsrel=1e-12, limit=200)
            closed = integral_I(params, t)
            worst = max(worst, abs(numeric - closed) / closed)
    return CheckResult(
        name="integral_I_vs_quadrature", passed=worst <= tol.closed_form,
        value=worst, tolerance=tol.closed_form,
        detail="closed-form integral vs adaptive quadrature over a (mu, sigma, t) grid")


def check_eq8_gaussian_mass(seed: int, tol: Tolerances) -> CheckResult:
    params = GaussianParams(mu=0.0, sigma=1.0)
    l = gaussian_logits(params, 1_000_000, derive_seed(seed, 9))
    worst = 0.0
    for sigma_distance, n in ((3.0, 1.0), (3.0, 2.0), (2.5, 1.5)):
        predicted = topnsigma_mass_gaussian(params.sigma, sigma_distance, n)
        threshold = params.mu + (sigma_distance - n) * params.sigma
        empirical = nucleus_mass_empirical(l, threshold).mass
        worst = max(worst, abs(empirical - predicted))
    return CheckResult(
        name="eq8_topnsigma_gaussian_mass", passed=worst <= tol.mc_mass,
        value=worst, tolerance=tol.mc_mass,
        detail="predicted vs Monte Carlo nucleus mass at the n-sigma cutoff, Gaussian logits")


def check_eq11_uniform_bound(seed: int, tol: Tolerances) -> CheckResult:
    headline = topnsigma_mass_uniform_bound(1.9, 1.0)
    if abs(headline - 0.85) > 0.005:
        return CheckResult(
            name="eq11_uniform_lower_bound", passed=False, value=headline, tolerance=0.005,
            detail="closed-form bound at sigma=1.9, n=1 must sit at 0.85 within 0.005")
    rng = np.random.default_rng(derive_seed(seed, 10))
    violations = 0
    worst_slack = math.inf
    for i in range(20):
        sigma = float(rng.uniform(0.5, 3.0))
        n = float(rng.uniform(0.2, N_SIGMA_MAX - 0.05))
        width = float(rng.uniform(n * sigma, N_SIGMA_MAX * sigma))
        l = uniform_logits(UniformParams(upper=0.0, width=width), 1_000_000,
                           derive_seed(seed, 10, i))
        mc = nucleus_mass_empirical(l, -n * sigma).mass
        bound = topnsigma_mass_uniform_bound(sigma, n)
        worst_slack = min(worst_slack, mc - bound)
        if mc < bound - 0.005:
            violations += 1
    return CheckResult(
        name="eq11_uniform_lower_bound", passed=violations == 0, value=float(violations),
        tolerance=0.0,
        detail=f"bound(1.9, 1) = {headline:.4f}; MC mass >= bound on 20 random (sigma, n, a); "
               f"worst slack {worst_slack:.5f}")


def check_thm2_limit(seed: int, tol: Tolerances) -> CheckResult:
    worst = 0.0
    eps = np.finfo(np.float64).eps
    for a in (10.0, 20.0, 50.0):
        for p in (0.05, 0.1, 0.3):
            t_uniform = uniform_threshold(UniformParams(upper=0.0, width=a), 1.0 - p)
            gap = abs(t_uniform - minp_logit_threshold(0.0, p))
            # the analytic envelope underruns double resolution at a = 50;
            # allow the representation floor of ln p on top of it
            envelope = math.exp(-a) / p + 4.0 * eps * max(1.0, abs(math.log(p)))
            worst = max(worst, gap - envelope)
    return CheckResult(
        name="thm2_minp_equals_top_1_minus_p", passed=worst <= 0.0,
        value=worst, tolerance=0.0,
        detail="|uniform top-(1-p) threshold - (M + ln p)| <= exp(-a)/p at a in {10, 20, 50}")


def check_thm2_mask_equality(seed: int, tol: Tolerances) -> CheckResult:
    vectors = _random_mixture_vectors(derive_seed(seed, 11), 1000, vocab=400)
    mismatches = 0
    for l in vectors:
        for p in (0.05, 0.1, 0.3):
            by_prob = mask_min_p(l, 1.0, p)
            by_logit = l >= minp_logit_threshold(float(np.max(l)), p)
            if not np.array_equal(by_prob.included, by_logit):
                mismatches += 1
    return CheckResult(
        name="thm2_minp_logit_mask_equality", passed=mismatches <= tol.exact,
        value=float(mismatches), tolerance=tol.exact,
        detail="min-p nucleus == {l_i >= M + ln p} on 1000 random vectors, p in {.05,.1,.3}")


def check_erf_roundtrip(seed: int, tol: Tolerances) -> CheckResult:
    ys = np.linspace(-0.999999, 0.999999, 20001)
    worst = float(np.max(np.abs(erf(erf_inv(ys)) - ys)))
    return CheckResult(
        name="erf_inverse_roundtrip", passed=worst <= tol.roundtrip,
        value=worst, tolerance=tol.roundtrip,
        detail="|erf(erf_inv(y)) - y| over a 20001-point grid of (-1, 1)")


def check_monotonicity(seed: int, tol: Tolerances) -> CheckResult:
    ps = np.linspace(0.02, 0.98, 49)
    g = [gaussian_threshold(GaussianParams(0.0, 1.3), p) for p in ps]
    u = [uniform_threshold(UniformParams(0.0, 5.0), p) for p in ps]
    ns = np.linspace(0.05, N_SIGMA_MAX - 0.05, 60)
    mg = [topnsigma_mass_gaussian(1.1, 4.0, n) for n in ns]
    mb = [topnsigma_mass_uniform_bound(1.1, n) for n in ns]
    ok = (all(b < a for a, b in zip(g, g[1:]))
          and all(b < a for a, b in zip(u, u[1:]))
          and all(b > a for a, b in zip(mg, mg[1:]))
          and all(b > a for a, b in zip(mb, mb[1:])))
    return CheckResult(
        name="threshold_and_mass_monotonicity", passed=ok, value=0.0 if ok else 1.0,
        tolerance=0.0,
        detail="thresholds strictly decreasing in p; masses strictly increasing in n")


ALL_CHECKS = (
    check_erf_roundtrip,
    check_integral_vs_quadrature,
    check_gaussian_roundtrip,
    check_uniform_roundtrip,
    check_sum_to_integral,
    check_lemma1_mass,
    check_eq8_gaussian_mass,
    check_eq11_uniform_bound,
    check_thm2_limit,
    check_thm2_mask_equality,
    check_thm3_topnsigma_invariance,
    check_thm3_topk_invariance,
    check_topp_noninvariance,
    check_minp_noninvariance,
    check_monotonicity,
)


def verify_theory(seed: int = 0, tolerances: Tolerances | None = None) -> dict:
    """Run every check; returns a JSON-serializable report."""
    tol = tolerances or Tolerances()
    results = [check(seed, tol) for check in ALL_CHECKS]
    return {
        "seed": int(seed),
        "tolerances": {
            "mc_mass": tol.mc_mass,
            "mc_relative": tol.mc_relative,
            "closed_form": tol.closed_form,
            "roundtrip": tol.roundtrip,
            "exact": tol.exact,
        },
        "checks": [r.as_dict() for r in results],
        "failed": [r.name for r in results if not r.passed],
        "all_passed": all(r.passed for r in results),
    }


def format_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
