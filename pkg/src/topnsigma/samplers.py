"""The six decoding strategies.

Every stochastic sampler factors into a mask-construction step (which
tokens form the nucleus) and a shared renormalize-then-sample step: masked
logits are set to -inf, the temperature-scaled survivor set goes through
the stable softmax, and one token is drawn by inverse CDF.

Boundary comparisons are inclusive (>=) everywhere, ties break toward the
lower token index, and the argmax token is always a member of the nucleus.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    NucleusMask,
    as_logit_vector,
    categorical_sample,
    categorical_sample_many,
    check_temperature,
    softmax_stable,
    stats_of_validated,
    temperature_scale,
    validated_logits,
)
from .errors import InvalidParameterError
from .rng import RngState

SAMPLER_KINDS = ("greedy", "temperature", "top_k", "top_p", "min_p", "top_n_sigma")

N_SIGMA_MAX = 2.0 * math.sqrt(3.0)
N_SIGMA_SOFT_MIN = 0.5


@dataclass(frozen=True)
class SamplerSpec:
    """Configuration of one decoding strategy.

    Exactly the parameters of the declared kind may be set: ``k`` for
    top_k, ``p`` for top_p and min_p, ``n`` for top_n_sigma.  Temperature
    applies to every kind (greedy ignores it).
    """

    kind: str
    temperature: float = 1.0
    k: int | None = None
    p: float | None = None
    n: float | None = None

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise InvalidParameterError(f"unknown sampler kind {self.kind!r}")
        if not (isinstance(self.temperature, (int, float)) and math.isfinite(self.temperature)
                and self.temperature > 0):
            raise InvalidParameterError(f"temperature must be positive, got {self.temperature!r}")

        wanted = {"top_k": "k", "top_p": "p", "min_p": "p", "top_n_sigma": "n"}.get(self.kind)
        for name in ("k", "p", "n"):
            value = getattr(self, name)
            if name == wanted:
                if value is None:
                    raise InvalidParameterError(f"{self.kind} requires parameter {name!r}")
            elif value is not None:
                raise InvalidParameterError(f"{self.kind} does not take parameter {name!r}")

        if self.kind == "top_k":
            if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1:
                raise InvalidParameterError(f"k must be a positive integer, got {self.k!r}")
        elif self.kind in ("top_p", "min_p"):
            if not (isinstance(self.p, (int, float)) and 0.0 < self.p <= 1.0):
                raise InvalidParameterError(f"p must lie in (0, 1], got {self.p!r}")
        elif self.kind == "top_n_sigma":
            if not (isinstance(self.n, (int, float)) and math.isfinite(self.n)
                    and 0.0 < self.n < N_SIGMA_MAX):
                raise InvalidParameterError(
                    f"n must lie in (0, 2*sqrt(3)) ~ (0, {N_SIGMA_MAX:.4f}), got {self.n!r}")
            if self.n < N_SIGMA_SOFT_MIN:
                warnings.warn(
                    f"n = {self.n} is below {N_SIGMA_SOFT_MIN}; very tight nuclei may drop "
                    "informative tokens", stacklevel=2)


def mask_top_nsigma(l, temperature: float, n: float) -> NucleusMask:
    """Keep tokens whose scaled logit is within n standard deviations of the
    scaled maximum (inclusive).

    The comparison l'_i >= M' - n*sigma' is invariant under the temperature
    scaling, so the nucleus does not depend on ``temperature``.  When the
    finite logits are all equal (sigma' = 0) every finite token is kept.
    """
    if not (isinstance(n, (int, float)) and math.isfinite(n) and 0.0 < n < N_SIGMA_MAX):
        raise InvalidParameterError(f"n must lie in (0, 2*sqrt(3)), got {n!r}")
    # single validation pass; division by 1 would be a bit-exact no-op, so
    # skip the copy on the common T = 1 path
    t = check_temperature(temperature)
    l, finite = validated_logits(l)
    scaled = l if t == 1.0 else l / t
    stats = stats_of_validated(scaled, finite)
    return NucleusMask.from_included(scaled >= stats.max - n * stats.std)


def mask_top_k(l, k: int) -> NucleusMask:
    """Keep the k largest finite logits; boundary ties keep the lowest
    indices.  If fewer than k finite logits exist, all of them are kept."""
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise InvalidParameterError(f"k must be a positive integer, got {k!r}")
    l = as_logit_vector(l)
    finite = np.isfinite(l)
    n_finite = int(np.count_nonzero(finite))
    if k >= n_finite:
        return NucleusMask.from_included(finite)
    # value of the k-th largest entry; -inf entries sort below everything
    kth = np.partition(l, l.size - k)[l.size - k]
    included = l > kth
    short = k - int(np.count_nonzero(included))
    if short > 0:
        ties = np.flatnonzero(l == kth)[:short]
        included[ties] = True
    return NucleusMask.from_included(included)


def mask_top_p(l, temperature: float, p: float) -> NucleusMask:
    """Smallest prefix of the probability-sorted tokens whose cumulative
    mass reaches p; the crossing token is included.  Ties sort by index."""
    if not (isinstance(p, (int, float)) and 0.0 < p <= 1.0):
        raise InvalidParameterError(f"p must lie in (0, 1], got {p!r}")
    scaled = temperature_scale(l, temperature)
    q = softmax_stable(scaled)
    # ordering by logit equals ordering by probability (softmax is
    # monotone) but stays strict where exp collapses distinct logits to
    # equal doubles, keeping the argmax token first
    order = np.argsort(-scaled, kind="stable")
    ordered = q[order]
    nonzero = int(np.count_nonzero(ordered))
    csum = np.cumsum(ordered[:nonzero])
    cut = int(np.searchsorted(csum, p, side="left"))
    if cut >= nonzero:  # float cumsum fell short of p; take all nonzero mass
        cut = nonzero - 1
    included = np.zeros(q.size, dtype=bool)
    included[order[: cut + 1]] = True
    return NucleusMask.from_included(included)


def mask_min_p(l, temperature: float, p: float) -> NucleusMask:
    """Keep tokens whose probability is at least p times the maximum
    probability (inclusive); equivalently l'_i >= M' + ln p."""
    if not (isinstance(p, (int, float)) and 0.0 < p <= 1.0):
        raise InvalidParameterError(f"p must lie in (0, 1], got {p!r}")
    q = softmax_stable(temperature_scale(l, temperature))
    return NucleusMask.from_included(q >= p * np.max(q))


def build_mask(l, spec: SamplerSpec) -> NucleusMask:
    """Nucleus for ``spec``; greedy and temperature keep every finite token
    (greedy restricts further to the argmax at draw time)."""
    if spec.kind == "top_n_sigma":
        return mask_top_nsigma(l, spec.temperature, spec.n)
    if spec.kind == "top_k":
        return mask_top_k(l, spec.k)
    if spec.kind == "top_p":
        return mask_top_p(l, spec.temperature, spec.p)
    if spec.kind == "min_p":
        return mask_min_p(l, spec.temperature, spec.p)
    if spec.kind == "greedy":
        l = as_logit_vector(l)
        included = np.zeros(l.size, dtype=bool)
        included[int(np.argmax(l))] = True
        return NucleusMask.from_included(included)
    return NucleusMask.from_included(np.isfinite(as_logit_vector(l)))


def masked_distribution(l, spec: SamplerSpec) -> np.ndarray:
    """Probability vector the sampler actually draws from: temperature is
    applied exactly once, excluded logits are dropped to -inf, then the
    stable softmax renormalizes the nucleus."""
    l = as_logit_vector(l)
    scaled = temperature_scale(l, spec.temperature)
    mask = build_mask(l, spec)
    return softmax_stable(np.where(mask.included, scaled, -np.inf))


def sample(l, spec: SamplerSpec, rng: RngState | None = None) -> int:
    """Draw the next token id under ``spec``.

    Greedy returns the argmax (ties to the lowest index) and does not touch
    the RNG; every other kind consumes exactly one uniform.
    """
    l = as_logit_vector(l)
    if spec.kind == "greedy":
        return int(np.argmax(l))
    if rng is None:
        raise InvalidParameterError(f"sampler kind {spec.kind!r} needs an RNG state")
    return categorical_sample(masked_distribution(l, spec), rng)


def sample_many(l, spec: SamplerSpec, rng: RngState | None, count: int) -> np.ndarray:
    """``count`` draws from one vector, identical to repeated :func:`sample`."""
    l = as_logit_vector(l)
    if spec.kind == "greedy":
        return np.full(count, int(np.argmax(l)), dtype=np.int64)
    if rng is None:
        raise InvalidParameterError(f"sampler kind {spec.kind!r} needs an RNG state")
    return categorical_sample_many(masked_distribution(l, spec), rng, count)
