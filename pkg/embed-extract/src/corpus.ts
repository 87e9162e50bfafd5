/**
 * Strict reader for the seven-column corpus TSV consumed by the evaluation
 * pipeline. Rows are validated the same way the pipeline validates them, so
 * a corpus that extracts cleanly here also loads cleanly there.
 */

import { readFileSync } from "node:fs";

export const CORPUS_HEADER =
  "pair\tdataset\tsystem\tseg_id\thypothesis\treference\tda_score";

const LANG_PAIR = /^[a-z]{2,3}-[a-z]{2,3}$/;

export interface Segment {
  id: string;
  pair: string;
  dataset: string;
  system: string;
  hypothesis: string;
  reference: string;
  daScore: number;
}

export class CorpusError extends Error {}

function fail(lineNo: number, message: string): never {
  throw new CorpusError(`line ${lineNo}: ${message}`);
}

export function parseCorpus(path: string): Segment[] {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n");
  if (lines.length && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (!lines.length) {
    fail(1, "empty file, expected header line");
  }
  if (lines[0] !== CORPUS_HEADER) {
    fail(1, `bad header, expected ${JSON.stringify(CORPUS_HEADER)}`);
  }

  const segments: Segment[] = [];
  const seen = new Set<string>();
  for (let i = 1; i < lines.length; i++) {
    const lineNo = i + 1;
    const fields = lines[i].split("\t");
    if (fields.length !== 7) {
      fail(lineNo, `expected 7 columns, got ${fields.length}`);
    }
    const [pair, dataset, system, rawId, hypothesis, reference, rawScore] = fields;
    if (!LANG_PAIR.test(pair)) {
      fail(lineNo, `bad language pair ${JSON.stringify(pair)}`);
    }
    const daScore = Number(rawScore);
    if (rawScore.trim() === "" || !Number.isFinite(daScore)) {
      fail(lineNo, `da_score is not a finite number: ${JSON.stringify(rawScore)}`);
    }
    if (!hypothesis.trim()) {
      fail(lineNo, "hypothesis is empty");
    }
    if (!reference.trim()) {
      fail(lineNo, "reference is empty");
    }
    const id = rawId || `${dataset}/${pair}/${system}/${lineNo}`;
    if (seen.has(id)) {
      throw new CorpusError(`duplicate segment id ${JSON.stringify(id)}`);
    }
    seen.add(id);
    segments.push({ id, pair, dataset, system, hypothesis, reference, daScore });
  }
  return segments;
}
