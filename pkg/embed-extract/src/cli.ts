#!/usr/bin/env node
/**
 * extract: run an encoder over a corpus and emit an EMB1 embedding file,
 * a one-token-per-line vocabulary file, and a metadata sidecar.
 *
 * Every segment contributes exactly two records, keyed `<seg_id>#hyp` and
 * `<seg_id>#ref`, in corpus order. A sentence that cannot be encoded aborts
 * the run naming its segment; there are no silent skips.
 */

import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { parseCorpus, Segment } from "./corpus.js";
import { writeEmb1, Emb1Record } from "./emb1.js";
import { ENCODERS, EncoderError, requireAssets } from "./encoders.js";
import { fakeEmbedding } from "./fake.js";
import { tokenize } from "./tokenize.js";

const USAGE =
  "usage: embed-extract extract --corpus <tsv> --encoder {infersent|skipthought} " +
  "[--assets <dir>] --out <emb1> --vocab-out <txt> [--fake DIM]";

interface ExtractJob {
  corpus: string;
  encoder: string;
  assets?: string;
  out: string;
  vocabOut: string;
  fakeDim?: number;
}

function parseCliArgs(argv: string[]): ExtractJob {
  if (argv[0] !== "extract") {
    throw new Error(`unknown command ${JSON.stringify(argv[0] ?? "")}; ${USAGE}`);
  }
  const { values } = parseArgs({
    args: argv.slice(1),
    options: {
      corpus: { type: "string" },
      encoder: { type: "string" },
      assets: { type: "string" },
      out: { type: "string" },
      "vocab-out": { type: "string" },
      fake: { type: "string" },
    },
  });
  for (const required of ["corpus", "encoder", "out", "vocab-out"] as const) {
    if (!values[required]) {
      throw new Error(`missing required option --${required}; ${USAGE}`);
    }
  }
  const encoder = values.encoder as string;
  if (!(encoder in ENCODERS)) {
    throw new Error(
      `unknown encoder ${JSON.stringify(encoder)}; expected one of ${Object.keys(ENCODERS).join(", ")}`
    );
  }
  let fakeDim: number | undefined;
  if (values.fake !== undefined) {
    fakeDim = Number(values.fake);
    if (!Number.isInteger(fakeDim) || fakeDim < 1) {
      throw new Error(`--fake needs a positive integer dimension, got ${values.fake}`);
    }
  }
  return {
    corpus: values.corpus as string,
    encoder,
    assets: values.assets,
    out: values.out as string,
    vocabOut: values["vocab-out"] as string,
    fakeDim,
  };
}

function collectVocabulary(segments: Segment[]): string[] {
  // Fake encoding knows every token it sees; the vocabulary is the sorted
  // token set of both text sides.
  const tokens = new Set<string>();
  for (const seg of segments) {
    for (const tok of tokenize(seg.hypothesis)) tokens.add(tok);
    for (const tok of tokenize(seg.reference)) tokens.add(tok);
  }
  return [...tokens].sort();
}

export function runExtract(job: ExtractJob): string {
  const spec = ENCODERS[job.encoder];
  const segments = parseCorpus(job.corpus);

  let dim: number;
  let embed: (key: string, text: string) => Float32Array;
  if (job.fakeDim !== undefined) {
    dim = job.fakeDim;
    embed = (key, _text) => fakeEmbedding(key, dim);
  } else {
    requireAssets(spec, job.assets);
  }

  const records: Emb1Record[] = [];
  for (const seg of segments) {
    for (const [side, text] of [["hyp", seg.hypothesis], ["ref", seg.reference]] as const) {
      const key = `${seg.id}#${side}`;
      try {
        records.push([key, embed!(key, text)]);
      } catch (err) {
        throw new Error(`segment ${JSON.stringify(seg.id)} (${side}): ${(err as Error).message}`);
      }
    }
  }

  writeEmb1(job.out, dim!, records);
  writeFileSync(job.vocabOut, collectVocabulary(segments).join("\n") + "\n");

  const meta = [
    `encoder=${spec.name}`,
    `mode=${job.fakeDim !== undefined ? "fake" : "assets"}`,
    `dim=${dim!}`,
    `records=${records.length}`,
    `preprocessing=${job.fakeDim !== undefined
      ? "lowercase, whitespace split, ASCII punctuation stripped from token ends"
      : spec.preprocessing}`,
    `checkpoints=${job.fakeDim !== undefined ? "none (hash-seeded pseudo-embeddings)" : job.assets}`,
  ].join("\n");
  writeFileSync(`${job.out}.meta.txt`, meta + "\n");

  return `wrote ${job.out} (${records.length} records, dim ${dim!}) and ${job.vocabOut}`;
}

export function main(argv: string[]): number {
  try {
    console.log(runExtract(parseCliArgs(argv)));
    return 0;
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    console.error(`error: ${message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
