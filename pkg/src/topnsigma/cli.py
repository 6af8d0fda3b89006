"""Command-line interface.

Commands: analyze, sample, sweep, majvote, verify-theory, gen-synth.
Exit codes: 0 success, 2 invalid parameters, 3 dump/config parse error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .dumpio import read_dump, write_dump_binary, write_dump_ndjson
from .errors import DumpFormatError, InvalidParameterError, TopNSigmaError
from .harness import (
    analyze,
    majvote,
    parse_majvote_config,
    rows_from_dataclasses,
    sweep,
    write_table,
)
from .rng import RngState, derive_seed
from .samplers import SamplerSpec, build_mask, sample
from .synth import generate, generate_sequence, parse_mixture_config
from .verify import Tolerances, format_report, verify_theory

EX_OK = 0
EX_INVALID = 2
EX_PARSE = 3
EX_VERIFY = 4

DEFAULT_PARAMS = {"n": 1.0, "p_top": 0.9, "p_min": 0.1, "k": 20}


def _add_common(parser: argparse.ArgumentParser, fmt_default: str = "csv"):
    parser.add_argument("--seed", type=int, default=0, help="base seed (u64)")
    parser.add_argument("--format", choices=("csv", "json"), default=fmt_default)
    parser.add_argument("--out", type=Path, default=None, help="output path (default: stdout)")


def _add_sampler_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--sampler", required=True,
                        choices=("greedy", "temperature", "top_k", "top_p", "min_p", "top_n_sigma"))
    parser.add_argument("--temperature", type=float, default=1.0)
    parser.add_argument("--n", type=float, default=None, help="top_n_sigma threshold multiplier")
    parser.add_argument("--p", type=float, default=None, help="top_p / min_p threshold")
    parser.add_argument("--k", type=int, default=None, help="top_k size")


def _sampler_spec(kind: str, temperature: float, n, p, k) -> SamplerSpec:
    params = {}
    if kind == "top_n_sigma":
        params["n"] = n if n is not None else DEFAULT_PARAMS["n"]
    elif kind == "top_p":
        params["p"] = p if p is not None else DEFAULT_PARAMS["p_top"]
    elif kind == "min_p":
        params["p"] = p if p is not None else DEFAULT_PARAMS["p_min"]
    elif kind == "top_k":
        params["k"] = k if k is not None else DEFAULT_PARAMS["k"]
    return SamplerSpec(kind=kind, temperature=temperature, **params)


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def cmd_gen_synth(args) -> int:
    spec = parse_mixture_config(args.config.read_text(encoding="utf-8"))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.schedule:
        schedule = [float(tok) for tok in args.schedule.split(",") if tok.strip()]
        vectors = generate_sequence(spec, len(schedule), schedule)
    else:
        vectors = [generate(replace(spec, seed=derive_seed(spec.seed, i))) for i in range(args.steps)]
    arr = np.stack(vectors)
    if args.dump_format == "binary":
        write_dump_binary(args.out_dump, arr)
    else:
        write_dump_ndjson(args.out_dump, arr)
    print(f"wrote {arr.shape[0]} x {arr.shape[1]} logits to {args.out_dump}", file=sys.stderr)
    return EX_OK


def cmd_analyze(args) -> int:
    dump = read_dump(args.dump)
    records, errors = analyze(dump.vectors, n=args.n, p=args.p, tokens=dump.tokens)
    for err in errors:
        print(f"row {err.step}: {err.message}", file=sys.stderr)
    _emit(write_table(rows_from_dataclasses(records), args.format), args.out)
    return EX_OK


def cmd_sample(args) -> int:
    dump = read_dump(args.dump)
    spec = _sampler_spec(args.sampler, args.temperature, args.n, args.p, args.k)
    rng = RngState(args.seed)
    rows = []
    for step in range(dump.rows):
        l = dump.vectors[step]
        token = sample(l, spec, rng)
        row = {"step": step, "token": token}
        if args.with_mask:
            mask = build_mask(l, spec)
            row["mask_size"] = mask.size
            row["mask_indices"] = mask.indices().tolist()
        rows.append(row)
    if args.format == "csv" and args.with_mask:
        for row in rows:
            row["mask_indices"] = " ".join(str(i) for i in row["mask_indices"])
    _emit(write_table(rows, args.format), args.out)
    return EX_OK


def cmd_sweep(args) -> int:
    if (args.dump is None) == (args.config is None):
        raise InvalidParameterError("provide exactly one of --dump or --config")
    if args.dump is not None:
        source = list(read_dump(args.dump).vectors)
    else:
        source = parse_mixture_config(args.config.read_text(encoding="utf-8"))
    kinds = [tok.strip() for tok in args.samplers.split(",") if tok.strip()]
    specs = [_sampler_spec(kind, 1.0, args.n, args.p, args.k) for kind in kinds]
    temperatures = [float(tok) for tok in args.temperatures.split(",") if tok.strip()]
    cells = sweep(source, specs, temperatures, n_seeds=args.seeds,
                  draws_per_step=args.draws, base_seed=args.seed)
    _emit(write_table(rows_from_dataclasses(cells), args.format), args.out)
    return EX_OK


def cmd_majvote(args) -> int:
    task = parse_majvote_config(args.task.read_text(encoding="utf-8"))
    spec = _sampler_spec(args.sampler, 1.0, args.n, args.p, args.k)
    results = majvote(task, spec, seed=args.seed)
    _emit(write_table(rows_from_dataclasses(results), args.format), args.out)
    return EX_OK


def cmd_verify_theory(args) -> int:
    tol = Tolerances()
    if args.mc_tol is not None:
        tol = replace(tol, mc_mass=args.mc_tol, mc_relative=args.mc_tol)
    report = verify_theory(seed=args.seed, tolerances=tol)
    _emit(format_report(report), args.out)
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}: value={check['value']:.3g} "
              f"tol={check['tolerance']:.3g}", file=sys.stderr)
    if not report["all_passed"]:
        print("failed checks: " + ", ".join(report["failed"]), file=sys.stderr)
        return EX_VERIFY
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topnsigma",
        description="Truncation sampling on raw logits: top-n-sigma, baselines, "
                    "diagnostics, and numerical verification of the threshold theory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate a synthetic logit dump")
    p.add_argument("--config", type=Path, required=True, help="mixture config (key = value)")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--schedule", type=str, default=None,
                   help="comma list of per-step sigma-distance targets (overrides --steps)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--dump-format", choices=("binary", "ndjson"), default="binary")
    p.add_argument("--out-dump", type=Path, required=True)
    p.set_defaults(fn=cmd_gen_synth)

    p = sub.add_parser("analyze", help="per-step sigma-distance and nucleus diagnostics")
    p.add_argument("--dump", type=Path, required=True)
    p.add_argument("--n", type=float, default=1.0)
    p.add_argument("--p", type=float, default=0.9)
    _add_common(p)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("sample", help="draw one token per dump row")
    p.add_argument("--dump", type=Path, required=True)
    _add_sampler_flags(p)
    p.add_argument("--with-mask", action="store_true", help="include nucleus indices per row")
    _add_common(p, fmt_default="json")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("sweep", help="run samplers across a temperature grid")
    p.add_argument("--dump", type=Path, default=None)
    p.add_argument("--config", type=Path, default=None, help="synthetic mixture config")
    p.add_argument("--samplers", type=str, required=True,
                   help="comma list of kinds, e.g. 'greedy,top_p,top_n_sigma'")
    p.add_argument("--temperatures", type=str, default="1.0")
    p.add_argument("--seeds", type=int, default=1, help="replicates per cell")
    p.add_argument("--draws", type=int, default=1000, help="draws per step")
    p.add_argument("--n", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("majvote", help="majority-vote accuracy on a synthetic task")
    p.add_argument("--task", type=Path, required=True, help="task config (key = value)")
    _add_sampler_flags(p)
    _add_common(p)
    p.set_defaults(fn=cmd_majvote)

    p = sub.add_parser("verify-theory", help="run the numerical verification suite")
    p.add_argument("--mc-tol", type=float, default=None,
                   help="override the Monte Carlo tolerances (absolute and relative)")
    _add_common(p, fmt_default="json")
    p.set_defaults(fn=cmd_verify_theory)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DumpFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EX_PARSE
    except TopNSigmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INVALID


if __name__ == "__main__":
    sys.exit(main())
