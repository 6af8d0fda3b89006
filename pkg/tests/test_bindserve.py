import json
import os
import subprocess
import sys

import numpy as np
import pytest

from topnsigma import RngState, SamplerSpec, build_mask, sample


class Worker:
    """Minimal host driving one bindserve process."""

    def __init__(self, tmp_path, create_msg, max_vocab):
        self.buffer = tmp_path / "shared.buf"
        with open(self.buffer, "wb") as fh:
            fh.truncate(5 * max_vocab)
        self.max_vocab = max_vocab
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "topnsigma.bindserve"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
        self.fd = os.open(self.buffer, os.O_RDWR)
        self.created = self.send({"op": "create", "buffer": str(self.buffer),
                                  "max_vocab": max_vocab, **create_msg})

    def send(self, obj):
        self.proc.stdin.write(json.dumps(obj) + "\n")
        self.proc.stdin.flush()
        return json.loads(self.proc.stdout.readline())

    def put_logits(self, logits32: np.ndarray):
        os.pwrite(self.fd, logits32.astype("<f4").tobytes(), 0)

    def read_mask(self, v: int) -> np.ndarray:
        return np.frombuffer(os.pread(self.fd, v, 4 * self.max_vocab), dtype=np.uint8).astype(bool)

    def close(self):
        # the worker may already be gone (rejected create, explicit free)
        for step in (lambda: self.send({"op": "free"}), self.proc.stdin.close):
            try:
                step()
            except (BrokenPipeError, ValueError, OSError):
                pass
        self.proc.wait(timeout=10)
        os.close(self.fd)


@pytest.fixture
def make_worker(tmp_path):
    workers = []

    def factory(create_msg, max_vocab=4096):
        w = Worker(tmp_path, create_msg, max_vocab)
        workers.append(w)
        return w

    yield factory
    for w in workers:
        w.close()


def test_create_rejects_bad_params(make_worker):
    w = make_worker({"kind": "top_n_sigma", "n": 5.0, "seed": 1})
    assert w.created["ok"] is False
    assert "2*sqrt(3)" in w.created["error"]
    assert w.proc.wait(timeout=10) == 1


@pytest.mark.parametrize("kind,params", [
    ("top_n_sigma", {"n": 1.0, "temperature": 1.5}),
    ("top_n_sigma", {"n": 1.0, "temperature": 1.0}),
    ("top_p", {"p": 0.9, "temperature": 2.0}),
    ("min_p", {"p": 0.1}),
    ("top_k", {"k": 7}),
    ("greedy", {}),
])
def test_mask_and_sample_match_core(make_worker, kind, params):
    w = make_worker({"kind": kind, "seed": 99, **params})
    assert w.created == {"ok": True}
    spec = SamplerSpec(kind=kind, **params)
    host_rng = RngState(99)
    rng = np.random.default_rng(5)
    for trial in range(20):
        v = int(rng.integers(2, 4096))
        logits32 = rng.normal(0, 2, v).astype("<f4")
        logits32[int(rng.integers(0, v))] += 11.0
        if trial % 3 == 0 and v > 4:
            logits32[int(rng.integers(0, v))] = -np.inf
        w.put_logits(logits32)
        l64 = logits32.astype(np.float64)

        reply = w.send({"op": "mask", "v": v})
        expect = build_mask(l64, spec)
        assert reply == {"ok": True, "size": expect.size}
        assert np.array_equal(w.read_mask(v), expect.included)

        reply = w.send({"op": "sample", "v": v})
        assert reply == {"ok": True, "token": sample(l64, spec, host_rng)}


def test_vocab_bounds_checked(make_worker):
    w = make_worker({"kind": "greedy", "seed": 0}, max_vocab=64)
    w.put_logits(np.zeros(64, dtype=np.float32))
    assert w.send({"op": "mask", "v": 1})["ok"] is False
    assert w.send({"op": "mask", "v": 65})["ok"] is False
    assert w.send({"op": "mask", "v": 64})["ok"] is True


def test_unknown_op_reported_and_worker_survives(make_worker):
    w = make_worker({"kind": "greedy", "seed": 0})
    w.put_logits(np.array([1.0, 2.0], dtype=np.float32))
    assert w.send({"op": "softmax", "v": 2})["ok"] is False
    assert w.send({"op": "mask", "v": 2})["ok"] is True


def test_free_exits_cleanly(make_worker):
    w = make_worker({"kind": "greedy", "seed": 0})
    assert w.send({"op": "free"}) == {"ok": True}
    assert w.proc.wait(timeout=10) == 0
