/**
 * Published pretrained sentence encoders this tool knows how to describe.
 *
 * Checkpoints are never downloaded; callers point --assets at a local
 * directory holding the upstream distribution files. The checkpoint formats
 * themselves (Python pickle, Theano npz) need the reference implementations'
 * runtime to execute, so this extractor validates the assets and reports
 * precisely what is missing rather than silently emitting vectors; --fake
 * exercises the full output path without assets.
 */

import { existsSync } from "node:fs";
import { join } from "node:path";

export interface EncoderSpec {
  name: string;
  dim: number;
  assetFiles: string[];
  preprocessing: string;
}

export const ENCODERS: Record<string, EncoderSpec> = {
  infersent: {
    name: "infersent",
    dim: 4096,
    assetFiles: ["infersent2.pkl", "glove.840B.300d.txt"],
    preprocessing: "upstream InferSent pipeline: word tokenization, GloVe lookup, bi-LSTM max pooling",
  },
  skipthought: {
    name: "skipthought",
    dim: 4800,
    assetFiles: ["uni_skip.npz", "bi_skip.npz", "utable.npy", "btable.npy", "dictionary.txt"],
    preprocessing: "upstream skip-thoughts pipeline: word tokenization, combined uni/bi encoder",
  },
};

export class EncoderError extends Error {}

export function requireAssets(spec: EncoderSpec, assetsDir: string | undefined): never {
  if (!assetsDir) {
    throw new EncoderError(
      `encoder ${spec.name} needs --assets pointing at its checkpoint files ` +
        `(${spec.assetFiles.join(", ")}); use --fake DIM for asset-free extraction`
    );
  }
  const missing = spec.assetFiles.filter((f) => !existsSync(join(assetsDir, f)));
  if (missing.length) {
    throw new EncoderError(
      `missing encoder assets in ${assetsDir}: ${missing.join(", ")}`
    );
  }
  throw new EncoderError(
    `assets found, but ${spec.name} checkpoints are Python-runtime artifacts this ` +
      `extractor cannot execute; run the upstream encoder to produce vectors, or ` +
      `use --fake DIM for integration testing`
  );
}
