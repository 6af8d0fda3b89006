"""Long-lived sampler worker behind the foreign-binding packages.

A host process (any language) creates one worker per sampler handle and
drives it through a minimal line protocol: JSON control messages on
stdin/stdout, bulk data in a shared buffer file so each call crosses the
process boundary with one bulk copy of the logits and none of the reply.

Handshake (first stdin line):

    {"op": "create", "kind": "top_n_sigma", "temperature": 1.5, "n": 1.0,
     "seed": 42, "buffer": "/dev/shm/xyz", "max_vocab": 100000}

The buffer file must hold at least 5 * max_vocab bytes.  Calls:

    {"op": "mask", "v": V}    logits: V little-endian float32 at offset 0;
                              reply {"ok": true, "size": S}; the worker
                              writes V mask bytes (0/1) at offset 4 * V.
    {"op": "sample", "v": V}  same input; reply {"ok": true, "token": T};
                              advances the handle's RNG by one draw.
    {"op": "free"}            reply {"ok": true}, then exit.

Results are bit-identical to the in-process API: float32 input is upcast
to float64 and fed through the same mask/sample code, and the RNG stream
is the package's seeded 64-bit generator.  Errors carry the core error
text: {"ok": false, "error": "..."}.  One worker serves one handle;
callers serialize their own calls.
"""

from __future__ import annotations

import json
import mmap
import sys

import numpy as np

from .core import stats_of_validated, validated_logits
from .errors import TopNSigmaError
from .rng import RngState
from .samplers import SamplerSpec, build_mask, sample

_PARAM_KEYS = ("n", "p", "k")


def _reply(obj: dict):
    sys.stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")
    sys.stdout.flush()


def _open_buffer(path: str, max_vocab: int) -> mmap.mmap:
    size = 5 * max_vocab
    with open(path, "r+b") as fh:
        fh.seek(0, 2)
        if fh.tell() < size:
            raise TopNSigmaError(f"buffer file holds {fh.tell()} bytes, need {size}")
        return mmap.mmap(fh.fileno(), size)


def serve(stdin=None) -> int:
    stdin = stdin or sys.stdin
    line = stdin.readline()
    if not line:
        return 0
    try:
        msg = json.loads(line)
        if msg.get("op") != "create":
            raise TopNSigmaError("first message must be 'create'")
        params = {k: msg[k] for k in _PARAM_KEYS if msg.get(k) is not None}
        spec = SamplerSpec(kind=msg["kind"],
                           temperature=float(msg.get("temperature", 1.0)), **params)
        rng = RngState(int(msg["seed"]))
        max_vocab = int(msg["max_vocab"])
        buf = _open_buffer(msg["buffer"], max_vocab)
    except (TopNSigmaError, KeyError, ValueError, OSError) as exc:
        _reply({"ok": False, "error": str(exc)})
        return 1
    _reply({"ok": True})

    logits_f32 = np.frombuffer(buf, dtype="<f4", count=max_vocab, offset=0)
    mask_bytes = np.frombuffer(buf, dtype=np.uint8, count=max_vocab, offset=4 * max_vocab)
    # per-call 800 KB allocations would bounce through glibc's mmap path and
    # pay page faults every call; the hot loop works in preallocated scratch
    scratch64 = np.empty(max_vocab, dtype=np.float64)
    scaled64 = np.empty(max_vocab, dtype=np.float64)
    var64 = np.empty(max_vocab, dtype=np.float64)
    finite_buf = np.empty(max_vocab, dtype=bool)

    def nsigma_mask_fast(raw32: np.ndarray, v: int) -> int:
        """Allocation-free replica of mask_top_nsigma working from the raw
        float32 view: the upcast is exact (finiteness included), the divide
        is forced onto the float64 loop, np.mean is add.reduce / n, and
        np.std is the same centered two-pass, so every bit matches the core
        path; the binding parity suite pins that down end to end."""
        fin = finite_buf[:v]
        np.isfinite(raw32, out=fin)
        all_finite = bool(fin.all())
        scaled = scaled64[:v]
        if spec.temperature == 1.0:
            np.copyto(scaled, raw32)
        else:
            np.divide(raw32, spec.temperature, out=scaled, dtype=np.float64)
        if all_finite:
            vals = scaled
        else:
            _, finite = validated_logits(scratch64_fill(raw32, v))  # full checks
            vals = scaled[finite]
        if vals.size < 2:
            raise TopNSigmaError("need at least 2 finite logits to compute statistics")
        mx = float(np.max(vals))
        mean = float(np.add.reduce(vals) / vals.size)
        tmp = var64[: vals.size]
        np.subtract(vals, mean, out=tmp)
        np.multiply(tmp, tmp, out=tmp)
        std = float(np.sqrt(np.add.reduce(tmp) / vals.size))
        if not (np.isfinite(mx) and np.isfinite(mean) and np.isfinite(std)):
            raise TopNSigmaError("logit statistics overflowed (temperature too small?)")
        np.greater_equal(scaled, mx - spec.n * std, out=mask_bytes[:v], casting="unsafe")
        return int(np.count_nonzero(mask_bytes[:v]))

    def scratch64_fill(raw32: np.ndarray, v: int) -> np.ndarray:
        np.copyto(scratch64[:v], raw32)
        return scratch64[:v]

    for line in stdin:
        try:
            msg = json.loads(line)
            op = msg.get("op")
            if op == "free":
                _reply({"ok": True})
                break
            v = int(msg["v"])
            if not (2 <= v <= max_vocab):
                raise TopNSigmaError(f"vocab size {v} outside [2, {max_vocab}]")
            if op == "mask" and spec.kind == "top_n_sigma":
                _reply({"ok": True, "size": nsigma_mask_fast(logits_f32[:v], v)})
                continue
            logits = scratch64[:v]
            np.copyto(logits, logits_f32[:v])  # exact f32 -> f64 upcast
            if op == "mask":
                mask = build_mask(logits, spec)
                mask_bytes[:v] = mask.included
                _reply({"ok": True, "size": mask.size})
            elif op == "sample":
                _reply({"ok": True, "token": sample(logits, spec, rng)})
            else:
                raise TopNSigmaError(f"unknown op {op!r}")
        except (TopNSigmaError, KeyError, ValueError) as exc:
            _reply({"ok": False, "error": str(exc)})
    del logits_f32, mask_bytes
    buf.close()
    return 0


if __name__ == "__main__":
    sys.exit(serve())
