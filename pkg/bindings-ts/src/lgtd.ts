/**
 * Writer for the binary logit-dump format consumed by the core CLI:
 * magic "LGTD", version u16 = 1, vocab u32, rows u64 (little-endian),
 * then rows of vocab little-endian float32.
 */

import * as fs from "node:fs";

export function writeLgtd(filePath: string, rows: Float32Array[]): void {
  if (rows.length === 0) throw new Error("dump needs at least one row");
  const vocab = rows[0].length;
  for (const row of rows) {
    if (row.length !== vocab) throw new Error("rows must share one vocabulary size");
  }
  const header = Buffer.alloc(18);
  header.write("LGTD", 0, "ascii");
  header.writeUInt16LE(1, 4);
  header.writeUInt32LE(vocab, 6);
  header.writeBigUInt64LE(BigInt(rows.length), 10);

  const body = Buffer.alloc(rows.length * vocab * 4);
  rows.forEach((row, r) => {
    for (let i = 0; i < vocab; i++) {
      body.writeFloatLE(row[i], (r * vocab + i) * 4);
    }
  });
  fs.writeFileSync(filePath, Buffer.concat([header, body]));
}
