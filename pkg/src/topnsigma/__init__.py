"""Truncation sampling directly on pre-softmax logits.

The package implements the top-n-sigma rule (keep tokens within n standard
deviations of the maximum scaled logit) next to the usual baselines
(greedy, temperature, top-k, top-p, min-p), plus the analytical machinery
that predicts nucleus masses and thresholds for Gaussian and uniform logit
populations, a seeded two-region synthetic generator, and a CLI harness
for dumps, sweeps, majority voting, and theory verification.
"""

__version__ = "0.1.0"

from .core import (
    LogitStats,
    NucleusMask,
    as_logit_vector,
    categorical_sample,
    categorical_sample_many,
    compute_stats,
    softmax_stable,
    temperature_scale,
)
from .dumpio import LogitDump, read_dump, write_dump_binary, write_dump_ndjson
from .errors import (
    DegenerateInputError,
    DomainError,
    DumpFormatError,
    InvalidParameterError,
    TopNSigmaError,
    VerificationError,
)
from .harness import (
    MajVoteResult,
    MajVoteTask,
    SweepCell,
    TraceRecord,
    analyze,
    majvote,
    sweep,
)
from .rng import RngState, derive_seed
from .samplers import (
    N_SIGMA_MAX,
    SamplerSpec,
    build_mask,
    mask_min_p,
    mask_top_k,
    mask_top_nsigma,
    mask_top_p,
    masked_distribution,
    sample,
    sample_many,
)
from .special import erf, erf_inv, erfc, norm_cdf, norm_ppf
from .synth import (
    MixtureSpec,
    gaussian_logits,
    generate,
    generate_sequence,
    parse_mixture_config,
    uniform_logits,
)
from .theory import (
    GaussianParams,
    NucleusMassReport,
    UniformParams,
    gaussian_threshold,
    integral_I,
    minp_logit_threshold,
    nucleus_mass_empirical,
    topnsigma_mass_gaussian,
    topnsigma_mass_uniform,
    topnsigma_mass_uniform_bound,
    uniform_threshold,
)
from .verify import Tolerances, verify_theory
