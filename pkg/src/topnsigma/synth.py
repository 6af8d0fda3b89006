"""Seeded generator for the two-region logit model.

A generated vector is a Gaussian "noisy region" (the bulk of the
vocabulary) plus a small "informative region" of high logits placed at
fixed gaps below an intended maximum.  Informative tokens always occupy
indices 0..k-1, in offset order, so tests can assert masks by index.

Noise draws are taken from the Gaussian truncated strictly below the
lowest informative logit (inverse-CDF construction, equivalent in law to
rejection-resampling), which keeps the intended maximum authoritative and
the informative tokens on top by value.  At the sigma-distances of
interest the truncation removes a vanishing sliver of mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import compute_stats
from .errors import InvalidParameterError
from .special import norm_cdf, norm_ppf
from .theory import GaussianParams, UniformParams

_SEQUENCE_TOL = 0.5


@dataclass(frozen=True)
class MixtureSpec:
    """Recipe for one synthetic logit vector.

    ``informative_offsets`` are the logit gaps below ``target_max``; the
    first must be 0 (the maximum itself) and they must be nondecreasing.
    """

    vocab_size: int
    noise: GaussianParams
    informative_offsets: tuple[float, ...]
    target_max: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "informative_offsets", tuple(float(o) for o in self.informative_offsets))
        offs = self.informative_offsets
        if self.vocab_size < 1:
            raise InvalidParameterError("vocab_size must be positive")
        if len(offs) == 0:
            raise InvalidParameterError("informative_offsets must be nonempty")
        if offs[0] != 0.0:
            raise InvalidParameterError("informative_offsets[0] must be 0 (the maximum itself)")
        if any(o < 0 for o in offs) or any(b < a for a, b in zip(offs, offs[1:])):
            raise InvalidParameterError("informative_offsets must be nonnegative and nondecreasing")
        if self.vocab_size <= len(offs):
            raise InvalidParameterError("vocab_size must exceed the informative token count")
        if not (self.target_max > self.noise.mu):
            raise InvalidParameterError("target_max must sit above the noise mean")

    @property
    def informative_count(self) -> int:
        return len(self.informative_offsets)


def _truncated_noise(u: np.ndarray, mu: float, sigma: float, cutoff: float) -> np.ndarray:
    """Map uniforms to N(mu, sigma^2) draws conditioned on value < cutoff."""
    frac = float(norm_cdf((cutoff - mu) / sigma))
    q = np.clip(u * frac, np.finfo(np.float64).tiny, None)
    return mu + sigma * norm_ppf(q)


def _assemble(spec: MixtureSpec, target_max: float, offsets: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.empty(spec.vocab_size, dtype=np.float64)
    out[: len(offsets)] = target_max - offsets
    cutoff = target_max - offsets[-1]
    out[len(offsets):] = _truncated_noise(u, spec.noise.mu, spec.noise.sigma, cutoff)
    return out


def generate(spec: MixtureSpec) -> np.ndarray:
    """One logit vector per the spec; deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    u = rng.random(spec.vocab_size - spec.informative_count)
    return _assemble(spec, spec.target_max, np.asarray(spec.informative_offsets), u)


def generate_sequence(spec: MixtureSpec, steps: int, sigma_distance_schedule) -> list[np.ndarray]:
    """One vector per step with the realized sigma-distance tracking the
    schedule.

    The intended maximum is solved per step so the measured
    (max - mean) / std of the finished vector lands on the scheduled value,
    and the informative offsets are scaled with the solved confidence gap
    (gap relative to the spec's own target_max - noise.mu).  Low-confidence
    steps therefore pack more candidates within reach of the maximum, which
    is what produces the inverse relationship between sigma-distance and
    nucleus size.
    """
    schedule = [float(d) for d in sigma_distance_schedule]
    if steps < 1:
        raise InvalidParameterError("steps must be positive")
    if len(schedule) != steps:
        raise InvalidParameterError(f"schedule length {len(schedule)} != steps {steps}")
    if any(d < 1.0 for d in schedule):
        raise InvalidParameterError("sigma-distance targets below 1 are infeasible")

    mu, sigma = spec.noise.mu, spec.noise.sigma
    base_offsets = np.asarray(spec.informative_offsets)
    base_gap = spec.target_max - mu
    children = np.random.SeedSequence(spec.seed).spawn(steps)

    vectors = []
    for step, target in enumerate(schedule):
        u = np.random.default_rng(children[step]).random(spec.vocab_size - spec.informative_count)

        def realized(m: float) -> float:
            offs = base_offsets * ((m - mu) / base_gap)
            return compute_stats(_assemble(spec, m, offs, u)).sigma_distance

        lo = mu + 1e-6 * sigma
        hi = mu + (target + 8.0) * sigma
        f_lo, f_hi = realized(lo) - target, realized(hi) - target
        # the realized distance saturates near sqrt(V / k) when the scaled
        # informative region starts dominating the variance; push the upper
        # bracket a few times before declaring the target infeasible
        for _ in range(6):
            if f_lo * f_hi <= 0:
                break
            hi = mu + 2.0 * (hi - mu)
            f_hi = realized(hi) - target
        if f_lo * f_hi <= 0:
            m_star = brentq(lambda m: realized(m) - target, lo, hi, xtol=1e-9 * sigma)
        else:
            m_star = lo if abs(f_lo) <= abs(f_hi) else hi
        got = realized(m_star)
        if abs(got - target) > _SEQUENCE_TOL:
            raise InvalidParameterError(
                f"step {step}: sigma-distance {target} infeasible (closest achievable {got:.3f})")
        vectors.append(_assemble(spec, m_star, base_offsets * ((m_star - mu) / base_gap), u))
    return vectors


def gaussian_logits(params: GaussianParams, vocab_size: int, seed) -> np.ndarray:
    """Whole-vector i.i.d. Gaussian logits (boundary case for the theory
    checks)."""
    if vocab_size < 1:
        raise InvalidParameterError("vocab_size must be positive")
    rng = np.random.default_rng(seed)
    return rng.normal(params.mu, params.sigma, vocab_size)


def uniform_logits(params: UniformParams, vocab_size: int, seed) -> np.ndarray:
    """Whole-vector i.i.d. uniform logits on [upper - width, upper]."""
    if vocab_size < 1:
        raise InvalidParameterError("vocab_size must be positive")
    rng = np.random.default_rng(seed)
    return rng.uniform(params.upper - params.width, params.upper, vocab_size)


# --- plain-text key=value config ------------------------------------------

_MIXTURE_KEYS = ("vocab_size", "noise_mu", "noise_sigma", "informative_offsets", "target_max", "seed")


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def parse_mixture_config(text: str) -> MixtureSpec:
    values = parse_key_values(text)
    missing = [k for k in _MIXTURE_KEYS if k not in values]
    if missing:
        raise InvalidParameterError(f"mixture config missing keys: {', '.join(missing)}")
    offsets = tuple(float(tok) for tok in values["informative_offsets"].split(",") if tok.strip())
    return MixtureSpec(
        vocab_size=int(values["vocab_size"]),
        noise=GaussianParams(mu=float(values["noise_mu"]), sigma=float(values["noise_sigma"])),
        informative_offsets=offsets,
        target_max=float(values["target_max"]),
        seed=int(values["seed"]),
    )


def format_mixture_config(spec: MixtureSpec) -> str:
    offsets = ", ".join(repr(o) for o in spec.informative_offsets)
    return (
        f"vocab_size = {spec.vocab_size}\n"
        f"noise_mu = {spec.noise.mu!r}\n"
        f"noise_sigma = {spec.noise.sigma!r}\n"
        f"informative_offsets = {offsets}\n"
        f"target_max = {spec.target_max!r}\n"
        f"seed = {spec.seed}\n"
    )
