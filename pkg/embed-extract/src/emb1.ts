/**
 * EMB1 binary writer. Layout, little-endian, no padding:
 *
 *   magic "EMB1" | u32 dim | u32 count
 *   then per record: u32 key byte-length | UTF-8 key | dim x f32
 *
 * Floats are written through a DataView so the bytes are little-endian on
 * every host.
 */

import { writeFileSync } from "node:fs";

export type Emb1Record = [key: string, vector: Float32Array];

export function encodeEmb1(dim: number, records: Emb1Record[]): Buffer {
  if (!Number.isInteger(dim) || dim < 1) {
    throw new Error(`dim must be a positive integer, got ${dim}`);
  }
  const header = Buffer.alloc(12);
  header.write("EMB1", 0, "ascii");
  header.writeUInt32LE(dim, 4);
  header.writeUInt32LE(records.length, 8);

  const chunks: Buffer[] = [header];
  for (const [key, vector] of records) {
    if (vector.length !== dim) {
      throw new Error(
        `vector for ${JSON.stringify(key)} has ${vector.length} components, expected ${dim}`
      );
    }
    const keyBytes = Buffer.from(key, "utf8");
    const lenBuf = Buffer.alloc(4);
    lenBuf.writeUInt32LE(keyBytes.length, 0);
    const floats = Buffer.alloc(4 * dim);
    const view = new DataView(floats.buffer, floats.byteOffset, floats.byteLength);
    for (let i = 0; i < dim; i++) {
      const v = vector[i];
      if (!Number.isFinite(v)) {
        throw new Error(`vector for ${JSON.stringify(key)} has a non-finite component`);
      }
      view.setFloat32(4 * i, v, true);
    }
    chunks.push(lenBuf, keyBytes, floats);
  }
  return Buffer.concat(chunks);
}

export function writeEmb1(path: string, dim: number, records: Emb1Record[]): void {
  writeFileSync(path, encodeEmb1(dim, records));
}
