"""Closed-form logit thresholds and nucleus-mass analysis.

For i.i.d. logits with density f, the sum of exp(logit) over tokens above a
threshold t concentrates (as the vocabulary grows) on V * I(t) with
I(t) = integral_t^inf e^x f(x) dx, so the nucleus mass above t is
I(t) / I(-inf).  Solving mass = p for t gives closed forms for the two
boundary cases treated here: Gaussian logits and uniform logits.

Derivation notes for the Gaussian integral (completing the square):

    e^x * exp(-(x-mu)^2 / (2 sigma^2))
        = exp(mu + sigma^2/2) * exp(-(x - mu - sigma^2)^2 / (2 sigma^2))

hence I(t) = exp(mu + sigma^2/2) * Phi((mu + sigma^2 - t) / sigma), which
the test suite cross-checks against adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_logit_vector, softmax_stable
from .errors import DomainError
from .samplers import N_SIGMA_MAX
from .special import erf, erf_inv, erfc, norm_cdf

__all__ = [
    "GaussianParams", "UniformParams", "NucleusMassReport",
    "gaussian_threshold", "uniform_threshold", "nucleus_mass_empirical",
    "integral_I", "topnsigma_mass_gaussian", "topnsigma_mass_uniform",
    "topnsigma_mass_uniform_bound", "minp_logit_threshold",
    "erf", "erf_inv",
]


@dataclass(frozen=True)
class GaussianParams:
    """Parameters of a Gaussian logit population N(mu, sigma^2)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")


@dataclass(frozen=True)
class UniformParams:
    """Uniform logit population on [upper - width, upper]."""

    upper: float
    width: float

    def __post_init__(self):
        if not (self.width > 0):
            raise DomainError(f"width must be positive, got {self.width!r}")


@dataclass(frozen=True)
class NucleusMassReport:
    threshold: float
    mass: float
    nucleus_size: int


def _check_open_unit(p: float, name: str = "p"):
    if not (isinstance(p, (int, float)) and 0.0 < p < 1.0):
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {p!r}")


def gaussian_threshold(params: GaussianParams, p: float) -> float:
    """Logit threshold whose expected nucleus mass is p under Gaussian
    logits: t = mu + sqrt(2)*sigma*erf_inv(1 - 2p) + sigma^2."""
    _check_open_unit(p)
    return params.mu + math.sqrt(2.0) * params.sigma * erf_inv(1.0 - 2.0 * p) + params.sigma**2


def uniform_threshold(params: UniformParams, p: float) -> float:
    """Logit threshold whose expected nucleus mass is p under uniform
    logits: t = M - ln[1 / (1 - p(1 - e^-a))]."""
    _check_open_unit(p)
    arg = 1.0 - p * (1.0 - math.exp(-params.width))
    if arg <= 0.0:  # cannot happen for p in (0,1) and finite width; guard anyway
        raise DomainError("log argument must be positive")
    return params.upper + math.log(arg)


def nucleus_mass_empirical(l, threshold: float) -> NucleusMassReport:
    """Softmax mass and size of the nucleus {i : l_i >= threshold}."""
    l = as_logit_vector(l)
    member = l >= threshold
    size = int(np.count_nonzero(member))
    if size == 0:
        return NucleusMassReport(threshold=float(threshold), mass=0.0, nucleus_size=0)
    mass = float(softmax_stable(l)[member].sum())
    return NucleusMassReport(threshold=float(threshold), mass=mass, nucleus_size=size)


def integral_I(params: GaussianParams, t: float) -> float:
    """I(t) = integral_t^inf e^x f(x) dx for Gaussian f, in closed form:
    exp(mu + sigma^2/2) * Phi((mu + sigma^2 - t) / sigma)."""
    if t == -math.inf:
        return math.exp(params.mu + 0.5 * params.sigma**2)
    return math.exp(params.mu + 0.5 * params.sigma**2) * float(
        norm_cdf((params.mu + params.sigma**2 - t) / params.sigma))


def topnsigma_mass_gaussian(sigma: float, sigma_distance: float, n: float) -> float:
    """Predicted nucleus mass of the n-sigma cutoff when the whole logit
    vector is Gaussian with standard deviation sigma and the maximum sits
    sigma_distance standard deviations above the mean:

        p = (1/2) * erfc((M - mu - n*sigma - sigma^2) / (sqrt(2)*sigma))

    with M - mu = sigma_distance * sigma.  erfc keeps the deep tail exact:
    for a fixed logit gap M - mu, the mass vanishes as sigma -> 0.
    """
    if not (sigma > 0):
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    arg = (sigma_distance * sigma - n * sigma - sigma**2) / (math.sqrt(2.0) * sigma)
    return 0.5 * float(erfc(arg))


def topnsigma_mass_uniform(sigma: float, n: float, width: float) -> float:
    """Exact nucleus mass of the n-sigma cutoff under uniform logits of
    width a <= 2*sqrt(3)*sigma: (1 - e^{-n sigma}) / (1 - e^{-a}), clamped
    to 1 when the cutoff falls below the support."""
    if not (sigma > 0):
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if not (0.0 < width <= N_SIGMA_MAX * sigma):
        raise DomainError(f"width must lie in (0, 2*sqrt(3)*sigma], got {width!r}")
    if n * sigma >= width:
        return 1.0
    return (1.0 - math.exp(-n * sigma)) / (1.0 - math.exp(-width))


def topnsigma_mass_uniform_bound(sigma: float, n: float) -> float:
    """Lower bound on the uniform-case nucleus mass over all admissible
    widths: (1 - e^{-n sigma}) / (1 - e^{-2 sqrt(3) sigma}).  Saturates at
    exactly 1 at the endpoint n = 2*sqrt(3), which is why n has that upper
    bound."""
    if not (sigma > 0):
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if not (0.0 < n <= N_SIGMA_MAX):
        raise DomainError(f"n must lie in (0, 2*sqrt(3)], got {n!r}")
    return (1.0 - math.exp(-n * sigma)) / (1.0 - math.exp(-N_SIGMA_MAX * sigma))


def minp_logit_threshold(max_logit: float, p: float) -> float:
    """Logit-space threshold of min-p at temperature 1: M + ln p.  Tokens
    at or above it are exactly the min-p nucleus."""
    if not (isinstance(p, (int, float)) and 0.0 < p <= 1.0):
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    return float(max_logit) + math.log(p)
