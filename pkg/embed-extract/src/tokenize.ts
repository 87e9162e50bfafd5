/**
 * Tokenization for vocabulary files: lowercase, split on whitespace, strip
 * ASCII punctuation off token ends. Mirrors the evaluation pipeline's rule
 * so unknown-word analysis sees consistent tokens on both sides.
 */

const PUNCT = new Set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~");

export function tokenize(text: string): string[] {
  const out: string[] = [];
  for (const raw of text.toLowerCase().split(/\s+/)) {
    let start = 0;
    let end = raw.length;
    while (start < end && PUNCT.has(raw[start])) start++;
    while (end > start && PUNCT.has(raw[end - 1])) end--;
    if (end > start) {
      out.push(raw.slice(start, end));
    }
  }
  return out;
}
