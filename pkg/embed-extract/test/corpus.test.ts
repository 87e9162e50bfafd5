import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { CORPUS_HEADER, CorpusError, parseCorpus } from "../src/corpus.js";

function corpusFile(rows: string[]): string {
  const dir = mkdtempSync(join(tmpdir(), "corpus-"));
  const path = join(dir, "corpus.tsv");
  writeFileSync(path, [CORPUS_HEADER, ...rows].join("\n") + "\n");
  return path;
}

describe("parseCorpus", () => {
  it("reads rows in file order", () => {
    const path = corpusFile([
      "cs-en\twmt\tsys\tb\thyp b\tref b\t0.5",
      "cs-en\twmt\tsys\ta\thyp a\tref a\t-1.25",
    ]);
    const segments = parseCorpus(path);
    expect(segments.map((s) => s.id)).toEqual(["b", "a"]);
    expect(segments[1].daScore).toBe(-1.25);
  });

  it("assigns positional ids to blank seg_id fields", () => {
    const path = corpusFile(["cs-en\twmt\tsys\t\thyp\tref\t0"]);
    expect(parseCorpus(path)[0].id).toBe("wmt/cs-en/sys/2");
  });

  it("rejects a bad header", () => {
    const dir = mkdtempSync(join(tmpdir(), "corpus-"));
    const path = join(dir, "bad.tsv");
    writeFileSync(path, "id\tscore\n");
    expect(() => parseCorpus(path)).toThrow(/line 1/);
  });

  it("reports the offending line for malformed rows", () => {
    const path = corpusFile([
      "cs-en\twmt\tsys\ta\thyp\tref\t0.5",
      "cs-en\twmt\tsys\tb\thyp\tref",
    ]);
    expect(() => parseCorpus(path)).toThrow(/line 3.*columns/);
  });

  it("rejects non-numeric scores with the line number", () => {
    const path = corpusFile(["cs-en\twmt\tsys\ta\thyp\tref\tabc"]);
    expect(() => parseCorpus(path)).toThrow(/line 2.*da_score/);
  });

  it("rejects duplicate ids", () => {
    const path = corpusFile([
      "cs-en\twmt\tsys\tsame\thyp\tref\t0",
      "de-en\twmt\tsys\tsame\thyp\tref\t0",
    ]);
    expect(() => parseCorpus(path)).toThrow(CorpusError);
  });

  it("rejects empty text sides", () => {
    const path = corpusFile(["cs-en\twmt\tsys\ta\t   \tref\t0"]);
    expect(() => parseCorpus(path)).toThrow(/hypothesis/);
  });
});
