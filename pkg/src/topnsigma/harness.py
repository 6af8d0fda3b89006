"""Experiment harness: per-step diagnostics, sampler sweeps, majority-vote
tasks, and CSV/JSON table output.

Real-model accuracy numbers are out of scope; the sweep and majority-vote
commands reproduce the experimental *structure* on synthetic tasks where
the informative tokens, and therefore correctness, are known exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .core import compute_stats, softmax_stable
from .errors import DegenerateInputError, InvalidParameterError
from .rng import RngState, derive_seed
from .samplers import SamplerSpec, build_mask, mask_top_nsigma, mask_top_p, masked_distribution, sample_many
from .synth import MixtureSpec, generate, parse_key_values
from .theory import GaussianParams

INVALID_ANSWER = "__invalid__"


@dataclass(frozen=True)
class TraceRecord:
    """Per-step diagnostics of one logit vector."""

    step: int
    sigma_distance: float
    nucleus_size_topnsigma: int
    nucleus_mass_topnsigma: float
    nucleus_size_topp: int
    chosen_token: int | None = None


@dataclass(frozen=True)
class RowError:
    step: int
    message: str


def analyze(vectors, n: float, p: float, tokens=None) -> tuple[list[TraceRecord], list[RowError]]:
    """Sigma-distance and nucleus diagnostics per step (temperature 1).

    Degenerate rows (fewer than two finite logits) are reported in the
    second return value and the run continues.
    """
    records: list[TraceRecord] = []
    errors: list[RowError] = []
    for step, l in enumerate(vectors):
        try:
            stats = compute_stats(l)
            ns_mask = mask_top_nsigma(l, 1.0, n)
            mass = float(softmax_stable(l)[ns_mask.included].sum())
            tp_mask = mask_top_p(l, 1.0, p)
        except DegenerateInputError as exc:
            errors.append(RowError(step=step, message=str(exc)))
            continue
        token = None
        if tokens is not None and tokens[step] is not None:
            token = int(tokens[step])
        records.append(TraceRecord(
            step=step,
            sigma_distance=stats.sigma_distance,
            nucleus_size_topnsigma=ns_mask.size,
            nucleus_mass_topnsigma=mass,
            nucleus_size_topp=tp_mask.size,
            chosen_token=token,
        ))
    return records, errors


@dataclass(frozen=True)
class SweepCell:
    """Aggregate result of one (sampler, temperature, seed) combination."""

    sampler: str
    temperature: float
    seed: int
    steps: int
    draws: int
    mean_nucleus_size: float
    mean_sigma_distance: float
    informative_hit_fraction: float | None = None
    exact_informative_mass: float | None = None
    error: str | None = None


def sweep(source, sampler_specs, temperatures, n_seeds: int, draws_per_step: int,
          base_seed: int = 0) -> list[SweepCell]:
    """Run every sampler at every temperature for ``n_seeds`` replicates.

    ``source`` is either a MixtureSpec (synthetic mode: one fresh vector
    per replicate, informative ground truth known) or a sequence of logit
    vectors (dump mode).  Failures are recorded per cell and the sweep
    continues.
    """
    if n_seeds < 1 or draws_per_step < 1:
        raise InvalidParameterError("n_seeds and draws_per_step must be positive")
    temperatures = [float(t) for t in temperatures]
    synthetic = isinstance(source, MixtureSpec)
    if synthetic:
        # one fresh vector per replicate, shared across samplers and
        # temperatures so comparisons are paired
        replicate_vectors = [
            [generate(replace(source, seed=derive_seed(base_seed, 101, seed_ix)))]
            for seed_ix in range(n_seeds)
        ]
    else:
        fixed_vectors = [np.asarray(v, dtype=np.float64) for v in source]

    cells: list[SweepCell] = []
    for si, spec in enumerate(sampler_specs):
        for ti, temp in enumerate(temperatures):
            spec_t = replace(spec, temperature=temp)
            for seed_ix in range(n_seeds):
                if synthetic:
                    vectors = replicate_vectors[seed_ix]
                    informative = source.informative_count
                else:
                    vectors = fixed_vectors
                    informative = None
                rng = RngState(derive_seed(base_seed, si, ti, seed_ix))
                try:
                    cells.append(_sweep_cell(spec_t, temp, seed_ix, vectors, informative,
                                             draws_per_step, rng))
                except (InvalidParameterError, DegenerateInputError) as exc:
                    cells.append(SweepCell(
                        sampler=spec.kind, temperature=temp, seed=seed_ix, steps=len(vectors),
                        draws=0, mean_nucleus_size=math.nan, mean_sigma_distance=math.nan,
                        error=str(exc)))
    return cells


def _sweep_cell(spec: SamplerSpec, temp: float, seed_ix: int, vectors, informative,
                draws_per_step: int, rng: RngState) -> SweepCell:
    sizes, dists, masses = [], [], []
    hits = 0
    total = 0
    for l in vectors:
        dists.append(compute_stats(l).sigma_distance)
        sizes.append(build_mask(l, spec).size)
        tokens = sample_many(l, spec, rng, draws_per_step)
        total += draws_per_step
        if informative is not None:
            hits += int(np.count_nonzero(tokens < informative))
            masses.append(float(masked_distribution(l, spec)[:informative].sum()))
    return SweepCell(
        sampler=spec.kind,
        temperature=temp,
        seed=seed_ix,
        steps=len(vectors),
        draws=total,
        mean_nucleus_size=float(np.mean(sizes)),
        mean_sigma_distance=float(np.mean(dists)),
        informative_hit_fraction=(hits / total) if informative is not None else None,
        exact_informative_mass=float(np.mean(masses)) if masses else None,
    )


@dataclass(frozen=True)
class MajVoteTask:
    """Synthetic majority-vote task over the two-region logit model.

    Sampled token ids map to answer labels through ``answer_token_map``;
    tokens outside the map count as an always-wrong answer.  Majority ties
    resolve to the lexicographically smallest label.
    """

    num_answers: int
    answer_token_map: dict[int, str]
    correct_answer: str
    logit_spec: MixtureSpec
    n_samples: int
    temperature_grid: tuple[float, ...]
    num_queries: int = 200

    def __post_init__(self):
        object.__setattr__(self, "temperature_grid", tuple(float(t) for t in self.temperature_grid))
        labels = set(self.answer_token_map.values())
        if self.num_answers != len(labels):
            raise InvalidParameterError(
                f"num_answers = {self.num_answers} but the token map carries {len(labels)} labels")
        if self.correct_answer not in labels:
            raise InvalidParameterError(f"correct answer {self.correct_answer!r} not in the token map")
        if self.n_samples < 1 or self.num_queries < 1:
            raise InvalidParameterError("n_samples and num_queries must be positive")
        if not self.temperature_grid:
            raise InvalidParameterError("temperature_grid must be nonempty")


@dataclass(frozen=True)
class MajVoteResult:
    temperature: float
    accuracy: float
    n_samples: int
    num_queries: int


def majority_label(labels: list[str]) -> str:
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def majvote(task: MajVoteTask, sampler: SamplerSpec, seed: int) -> list[MajVoteResult]:
    """Maj@N accuracy per temperature.

    Query vectors are drawn once from the task's logit model and shared
    across temperatures, so temperature effects are paired.
    """
    queries = [generate(replace(task.logit_spec, seed=derive_seed(task.logit_spec.seed, q)))
               for q in range(task.num_queries)]
    results = []
    for ti, temp in enumerate(task.temperature_grid):
        spec_t = replace(sampler, temperature=temp)
        rng = RngState(derive_seed(seed, ti))
        correct = 0
        for l in queries:
            tokens = sample_many(l, spec_t, rng, task.n_samples)
            labels = [task.answer_token_map.get(int(t), INVALID_ANSWER) for t in tokens]
            if majority_label(labels) == task.correct_answer:
                correct += 1
        results.append(MajVoteResult(
            temperature=temp, accuracy=correct / task.num_queries,
            n_samples=task.n_samples, num_queries=task.num_queries))
    return results


def parse_majvote_config(text: str) -> MajVoteTask:
    """Task config as key = value lines; the logit model uses ``logit_``-
    prefixed keys (same fields as the mixture config)."""
    values = parse_key_values(text)
    required = ("num_answers", "answer_token_map", "correct_answer", "n_samples",
                "temperature_grid", "logit_vocab_size", "logit_noise_mu", "logit_noise_sigma",
                "logit_informative_offsets", "logit_target_max", "logit_seed")
    missing = [k for k in required if k not in values]
    if missing:
        raise InvalidParameterError(f"majvote config missing keys: {', '.join(missing)}")
    token_map = {}
    for pair in values["answer_token_map"].split(","):
        pair = pair.strip()
        if not pair:
            continue
        tok, _, label = pair.partition(":")
        if not label:
            raise InvalidParameterError(f"bad token map entry {pair!r}, expected 'id:label'")
        token_map[int(tok)] = label.strip()
    spec = MixtureSpec(
        vocab_size=int(values["logit_vocab_size"]),
        noise=GaussianParams(mu=float(values["logit_noise_mu"]),
                             sigma=float(values["logit_noise_sigma"])),
        informative_offsets=tuple(float(t) for t in values["logit_informative_offsets"].split(",")),
        target_max=float(values["logit_target_max"]),
        seed=int(values["logit_seed"]),
    )
    return MajVoteTask(
        num_answers=int(values["num_answers"]),
        answer_token_map=token_map,
        correct_answer=values["correct_answer"],
        logit_spec=spec,
        n_samples=int(values["n_samples"]),
        temperature_grid=tuple(float(t) for t in values["temperature_grid"].split(",")),
        num_queries=int(values.get("num_queries", 200)),
    )


# --- tabular output ---------------------------------------------------------

def rows_from_dataclasses(items) -> list[dict]:
    rows = []
    for item in items:
        rows.append({f.name: getattr(item, f.name) for f in fields(item)})
    return rows


def write_table(rows: list[dict], fmt: str, out=None) -> str:
    """Serialize rows as CSV or JSON; returns the text and optionally
    writes it to a path or file object."""
    if fmt == "json":
        text = json.dumps(rows, indent=2, sort_keys=True, default=_json_default) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_cell(v) for k, v in row.items()})
        text = buf.getvalue()
    else:
        raise InvalidParameterError(f"unknown output format {fmt!r}")
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
    return text


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    raise TypeError(f"not JSON serializable: {type(value)}")


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # repr round-trips float64 exactly
    return value


def read_table_csv(text: str) -> list[dict]:
    """Inverse of the CSV writer: '' -> None, numeric strings -> numbers."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {}
        for key, cell in raw.items():
            if cell == "" or cell is None:
                row[key] = None
            else:
                try:
                    row[key] = int(cell)
                except ValueError:
                    try:
                        row[key] = float(cell)
                    except ValueError:
                        row[key] = cell
        rows.append(row)
    return rows
