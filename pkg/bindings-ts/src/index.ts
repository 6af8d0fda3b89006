/**
 * Node bindings for the topnsigma sampler core.
 *
 * Each handle owns one long-lived Python worker (`topnsigma.bindserve`)
 * plus a shared buffer file: logits cross the process boundary as one bulk
 * write into the buffer, control messages are single JSON lines, and the
 * mask comes back through the same buffer. Results are bit-identical to
 * the core library and CLI for the same sampler spec and seed, because the
 * worker *is* the core.
 *
 * Concurrency: calls on one handle are serialized internally; use one
 * handle per worker thread for parallelism.
 */

import { spawn, type ChildProcessByStdio } from "node:child_process";
import { randomBytes } from "node:crypto";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import type { Readable, Writable } from "node:stream";

type WorkerProcess = ChildProcessByStdio<Writable, Readable, null>;

export type SamplerKind =
  | "greedy"
  | "temperature"
  | "top_k"
  | "top_p"
  | "min_p"
  | "top_n_sigma";

export interface SamplerParams {
  temperature?: number;
  /** top_n_sigma threshold multiplier, in (0, 2*sqrt(3)) */
  n?: number;
  /** top_p / min_p threshold, in (0, 1] */
  p?: number;
  /** top_k nucleus size, >= 1 */
  k?: number;
}

export interface CreateOptions {
  /** largest vocabulary a single call may carry (buffer is sized from it) */
  maxVocab?: number;
  /** python executable running the core (default: env TOPNSIGMA_PYTHON or python3) */
  python?: string;
  /** directory for the shared buffer file (default: /dev/shm when present) */
  bufferDir?: string;
}

/** Error text comes through verbatim from the core. */
export class SamplerError extends Error {}

interface Reply {
  ok: boolean;
  error?: string;
  size?: number;
  token?: number;
}

const DEFAULT_MAX_VOCAB = 1 << 17;

function defaultBufferDir(): string {
  return fs.existsSync("/dev/shm") ? "/dev/shm" : os.tmpdir();
}

export class SamplerHandle {
  private child: WorkerProcess;
  private fd: number;
  private bufferPath: string;
  private stdoutRest = "";
  private pending: Array<{
    resolve: (r: Reply) => void;
    reject: (e: Error) => void;
  }> = [];
  private chain: Promise<unknown> = Promise.resolve();
  private freed = false;
  readonly maxVocab: number;

  private constructor(
    child: WorkerProcess,
    fd: number,
    bufferPath: string,
    maxVocab: number,
  ) {
    this.child = child;
    this.fd = fd;
    this.bufferPath = bufferPath;
    this.maxVocab = maxVocab;

    child.stdout.on("data", (chunk: Buffer) => this.onStdout(chunk));
    child.on("exit", () => this.failPending(new SamplerError("worker exited")));
    child.on("error", (err) => this.failPending(err));
  }

  /** Spawn a worker configured for one sampler spec and RNG seed. */
  static async create(
    kind: SamplerKind,
    params: SamplerParams = {},
    seed = 0,
    options: CreateOptions = {},
  ): Promise<SamplerHandle> {
    const maxVocab = options.maxVocab ?? DEFAULT_MAX_VOCAB;
    const python =
      options.python ?? process.env.TOPNSIGMA_PYTHON ?? "python3";
    const dir = options.bufferDir ?? defaultBufferDir();
    const bufferPath = path.join(
      dir,
      `topnsigma-${process.pid}-${randomBytes(6).toString("hex")}.buf`,
    );

    const fd = fs.openSync(bufferPath, "w+");
    fs.ftruncateSync(fd, 5 * maxVocab);

    const child = spawn(python, ["-m", "topnsigma.bindserve"], {
      stdio: ["pipe", "pipe", "inherit"],
    });
    const handle = new SamplerHandle(child, fd, bufferPath, maxVocab);

    const reply = await handle.request({
      op: "create",
      kind,
      temperature: params.temperature,
      n: params.n,
      p: params.p,
      k: params.k,
      seed,
      buffer: bufferPath,
      max_vocab: maxVocab,
    });
    if (!reply.ok) {
      handle.destroy();
      throw new SamplerError(reply.error ?? "create failed");
    }
    return handle;
  }

  /**
   * Nucleus membership for one logit vector: byte i is 1 iff token i is in
   * the sampling nucleus. Does not advance the RNG. Pass a reusable `out`
   * buffer (length >= logits.length) to avoid a per-call allocation; the
   * returned view aliases it.
   */
  mask(logits: Float32Array, out?: Uint8Array): Promise<Uint8Array> {
    return this.call(logits, { op: "mask" }, (reply, v) => {
      if (out !== undefined && out.length < v) {
        throw new SamplerError(`out buffer holds ${out.length} bytes, need ${v}`);
      }
      const target = out ?? new Uint8Array(v);
      fs.readSync(this.fd, target, 0, v, 4 * v);
      return target.subarray(0, v);
    });
  }

  /** Draw the next token id; advances the handle's RNG by one draw. */
  sampleToken(logits: Float32Array): Promise<number> {
    return this.call(logits, { op: "sample" }, (reply) => reply.token as number);
  }

  /** Shut the worker down and remove the shared buffer. Idempotent. */
  async free(): Promise<void> {
    if (this.freed) return;
    this.freed = true;
    try {
      await this.request({ op: "free" });
    } catch {
      // worker may already be gone
    }
    this.destroy();
  }

  private call<T>(
    logits: Float32Array,
    msg: Record<string, unknown>,
    finish: (reply: Reply, v: number) => T,
  ): Promise<T> {
    const run = this.chain.then(async () => {
      if (this.freed) throw new SamplerError("handle already freed");
      const v = logits.length;
      if (v < 2 || v > this.maxVocab) {
        throw new SamplerError(
          `logits length ${v} outside [2, ${this.maxVocab}]`,
        );
      }
      const bytes = Buffer.from(logits.buffer, logits.byteOffset, 4 * v);
      fs.writeSync(this.fd, bytes, 0, 4 * v, 0);
      const reply = await this.request({ ...msg, v });
      if (!reply.ok) throw new SamplerError(reply.error ?? "call failed");
      return finish(reply, v);
    });
    this.chain = run.catch(() => undefined); // keep the queue alive after errors
    return run;
  }

  private request(msg: Record<string, unknown>): Promise<Reply> {
    return new Promise<Reply>((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.child.stdin.write(JSON.stringify(msg) + "\n", (err) => {
        if (err) this.failPending(err);
      });
    });
  }

  private onStdout(chunk: Buffer) {
    this.stdoutRest += chunk.toString("utf8");
    let nl: number;
    while ((nl = this.stdoutRest.indexOf("\n")) >= 0) {
      const line = this.stdoutRest.slice(0, nl);
      this.stdoutRest = this.stdoutRest.slice(nl + 1);
      const waiter = this.pending.shift();
      if (!waiter) continue;
      try {
        waiter.resolve(JSON.parse(line) as Reply);
      } catch (err) {
        waiter.reject(err as Error);
      }
    }
  }

  private failPending(err: Error) {
    const waiters = this.pending;
    this.pending = [];
    for (const w of waiters) w.reject(err);
  }

  private destroy() {
    this.freed = true;
    this.child.kill();
    try {
      fs.closeSync(this.fd);
    } catch {
      /* already closed */
    }
    fs.rmSync(this.bufferPath, { force: true });
  }
}

/** Convenience wrapper mirroring the core's create/mask/sample/free surface. */
export function createSampler(
  kind: SamplerKind,
  params: SamplerParams = {},
  seed = 0,
  options: CreateOptions = {},
): Promise<SamplerHandle> {
  return SamplerHandle.create(kind, params, seed, options);
}

export { writeLgtd } from "./lgtd.js";
