"""Foundational types and numerically stable primitives.

Logit vectors are plain float64 numpy arrays.  Entries may be ``-inf``
(tokens masked out upstream) but never NaN or ``+inf``, and at least one
entry must be finite.  All statistics are computed over the finite entries
only; ``-inf`` sentinels denote tokens that are already excluded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidParameterError
from .rng import RngState

PROB_SUM_TOL = 1e-9

_UNKNOWN = object()  # sentinel: finiteness not yet scanned


def validated_logits(values) -> tuple[np.ndarray, np.ndarray | None]:
    """Validate ``values`` and return it as a float64 vector together with
    its finite mask, or None for the common all-finite case (so callers can
    reuse the single finiteness pass).

    Raises InvalidParameterError on NaN or +inf entries and
    DegenerateInputError when no finite entry remains.
    """
    l = np.asarray(values, dtype=np.float64)
    if l.ndim != 1 or l.size < 1:
        raise InvalidParameterError("logit vector must be one-dimensional with V >= 1")
    finite = np.isfinite(l)
    if finite.all():
        return l, None
    nonfinite = l[~finite]
    if np.isnan(nonfinite).any():
        raise InvalidParameterError("logit vector contains NaN")
    if (nonfinite > 0).any():
        raise InvalidParameterError("logit vector contains +inf")
    if not finite.any():
        raise DegenerateInputError("logit vector has no finite entry")
    return l, finite


def as_logit_vector(values) -> np.ndarray:
    """Validate and return ``values`` as a float64 logit vector."""
    return validated_logits(values)[0]


@dataclass(frozen=True)
class LogitStats:
    """Summary of one logit vector's finite entries.

    ``std`` is the population standard deviation (divide by the count, not
    count - 1), matching the erf-based threshold derivations.
    ``sigma_distance`` is (max - mean) / std, defined as 0 when std is 0.
    """

    max: float
    mean: float
    std: float
    sigma_distance: float


@dataclass(frozen=True)
class NucleusMask:
    """Boolean membership vector identifying the sampling nucleus."""

    included: np.ndarray
    size: int

    @classmethod
    def from_included(cls, included: np.ndarray) -> "NucleusMask":
        inc = np.asarray(included, dtype=bool)
        return cls(included=inc, size=int(np.count_nonzero(inc)))

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.included)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NucleusMask):
            return NotImplemented
        return self.size == other.size and np.array_equal(self.included, other.included)


def check_temperature(temperature) -> float:
    try:
        t = float(temperature)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"temperature must be a positive finite real, got {temperature!r}")
    if not math.isfinite(t) or t <= 0:
        raise InvalidParameterError(f"temperature must be a positive finite real, got {temperature!r}")
    return t


def temperature_scale(l, temperature: float) -> np.ndarray:
    """Divide every finite logit by ``temperature``; -inf sentinels survive."""
    return as_logit_vector(l) / check_temperature(temperature)


def softmax_stable(l) -> np.ndarray:
    """Softmax with max-subtraction; -inf entries map to exactly 0."""
    l = as_logit_vector(l)
    # validation guarantees at least one finite entry and no +inf, so the
    # array max is the finite max
    e = np.exp(l - np.max(l))
    return e / e.sum()


def compute_stats(l) -> LogitStats:
    """Max, mean, population std and sigma-distance over the finite entries."""
    return stats_of_validated(*validated_logits(l))


def stats_of_validated(l: np.ndarray, finite: np.ndarray | None = _UNKNOWN) -> LogitStats:
    """Statistics core for inputs already through :func:`validated_logits`;
    ``finite`` is that function's mask (None meaning all entries finite).
    Hot paths pass it through to avoid repeating the finiteness scan."""
    if finite is _UNKNOWN:
        mask = np.isfinite(l)
        finite = None if mask.all() else mask
    vals = l if finite is None else l[finite]
    if vals.size < 2:
        raise DegenerateInputError("need at least 2 finite logits to compute statistics")
    mx = float(np.max(vals))
    mean = float(np.mean(vals))
    std = float(np.std(vals))
    if not (math.isfinite(mx) and math.isfinite(mean) and math.isfinite(std)):
        # only reachable when a caller scaled validated logits into overflow
        raise InvalidParameterError("logit statistics overflowed (temperature too small?)")
    sigma_distance = 0.0 if std == 0.0 else (mx - mean) / std
    return LogitStats(max=mx, mean=mean, std=std, sigma_distance=sigma_distance)


def as_prob_vector(p) -> np.ndarray:
    q = np.asarray(p, dtype=np.float64)
    if q.ndim != 1 or q.size < 1:
        raise InvalidParameterError("probability vector must be one-dimensional with V >= 1")
    if np.isnan(q).any() or (q < 0).any():
        raise InvalidParameterError("probabilities must be nonnegative and not NaN")
    if abs(float(q.sum()) - 1.0) > PROB_SUM_TOL:
        raise InvalidParameterError(f"probabilities sum to {q.sum()!r}, expected 1 within {PROB_SUM_TOL}")
    return q


def categorical_sample(p, rng: RngState) -> int:
    """Draw one index with probability p_i via inverse CDF on a single uniform.

    Deterministic given the RNG state; advances the state by exactly one
    64-bit output.  Entries that are exactly 0 are never drawn.
    """
    q = as_prob_vector(p)
    cum = np.cumsum(q)
    u = rng.next_uniform()
    idx = int(np.searchsorted(cum, u, side="right"))
    if idx >= q.size:  # u landed past a float cumsum that fell short of 1
        idx = int(np.flatnonzero(q > 0)[-1])
    return idx


def categorical_sample_many(p, rng: RngState, count: int) -> np.ndarray:
    """Vectorized block of draws, identical to ``count`` successive
    :func:`categorical_sample` calls on the same state."""
    q = as_prob_vector(p)
    cum = np.cumsum(q)
    u = rng.uniforms(count)
    idx = np.searchsorted(cum, u, side="right")
    over = idx >= q.size
    if over.any():
        idx[over] = int(np.flatnonzero(q > 0)[-1])
    return idx.astype(np.int64)
