"""Logit dump readers and writers.

Two interchangeable on-disk formats, both trivially producible from any
inference engine:

* binary: magic ``LGTD``, version u16 = 1, vocabulary size as u32, row
  count as u64 (all little-endian), then rows of V little-endian float32.
* text: NDJSON, one object per row with key ``logits`` (array of numbers)
  and an optional ``token`` (chosen token id).

Values are upcast to float64 on read.  NaN or +inf entries are rejected
with the offending row index; -inf is legal (pre-masked token sentinel).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DumpFormatError

MAGIC = b"LGTD"
VERSION = 1
_HEADER = struct.Struct("<4sHIQ")


@dataclass
class LogitDump:
    """In-memory dump: one float64 row per decoding step."""

    vectors: np.ndarray  # shape (rows, vocab_size)
    tokens: list[int | None] = field(default_factory=list)

    @property
    def rows(self) -> int:
        return self.vectors.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.vectors.shape[1]


def _validate_row(row: np.ndarray, index: int):
    if np.isnan(row).any():
        raise DumpFormatError("NaN logit", row=index)
    if np.isposinf(row).any():
        raise DumpFormatError("+inf logit", row=index)


def write_dump_binary(path, vectors) -> None:
    arr = np.asarray(vectors, dtype=np.float32)
    if arr.ndim != 2:
        raise DumpFormatError("expected a (rows, vocab) array")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, arr.shape[1], arr.shape[0]))
        fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def write_dump_ndjson(path, vectors, tokens=None) -> None:
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise DumpFormatError("expected a (rows, vocab) array")
    with open(path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(arr):
            obj = {"logits": row.tolist()}
            if tokens is not None and tokens[i] is not None:
                obj["token"] = int(tokens[i])
            fh.write(json.dumps(obj) + "\n")


def _read_binary(data: bytes) -> LogitDump:
    if len(data) < _HEADER.size:
        raise DumpFormatError("truncated header")
    magic, version, vocab, rows = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DumpFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise DumpFormatError(f"unsupported version {version}")
    if vocab < 1:
        raise DumpFormatError("vocabulary size must be positive")
    body = data[_HEADER.size:]
    expected = rows * vocab * 4
    if len(body) != expected:
        raise DumpFormatError(f"payload is {len(body)} bytes, header implies {expected}")
    flat = np.frombuffer(body, dtype="<f4")
    vectors = flat.reshape(rows, vocab).astype(np.float64)
    bad = np.isnan(vectors) | np.isposinf(vectors)
    if bad.any():
        first = int(np.argmax(bad.any(axis=1)))
        _validate_row(vectors[first], first)
    return LogitDump(vectors=vectors, tokens=[None] * rows)


def _read_ndjson(text: str) -> LogitDump:
    rows: list[np.ndarray] = []
    tokens: list[int | None] = []
    vocab = None
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DumpFormatError(f"invalid JSON ({exc.msg})", row=i) from exc
        if not isinstance(obj, dict) or "logits" not in obj:
            raise DumpFormatError("expected an object with a 'logits' key", row=i)
        try:
            row = np.asarray(obj["logits"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise DumpFormatError("'logits' entries must be numbers", row=i) from exc
        if row.ndim != 1 or row.size < 1:
            raise DumpFormatError("'logits' must be a nonempty array", row=i)
        if vocab is None:
            vocab = row.size
        elif row.size != vocab:
            raise DumpFormatError(f"vocabulary size {row.size} differs from first row's {vocab}", row=i)
        _validate_row(row, i)
        rows.append(row)
        tokens.append(int(obj["token"]) if "token" in obj else None)
    if not rows:
        raise DumpFormatError("dump contains no rows")
    return LogitDump(vectors=np.stack(rows), tokens=tokens)


def read_dump(path) -> LogitDump:
    """Parse either supported format, sniffing the binary magic bytes."""
    raw = Path(path).read_bytes()
    if raw[:4] == MAGIC:
        return _read_binary(raw)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DumpFormatError("file is neither a binary dump nor UTF-8 text") from exc
    return _read_ndjson(text)
