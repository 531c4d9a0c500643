import { readFileSync } from "node:fs";

export interface PairRecord {
  id: string;
  lang1: string;
  lang2: string;
  sentence1: string;
  sentence2: string;
}

const LANG_PAIR_RE = /(?:^|[._-])([a-z]{2})-([a-z]{2})(?:[._-]|$)/;

export function langPairFromId(id: string): [string, string] | null {
  const m = LANG_PAIR_RE.exec(id);
  return m ? [m[1], m[2]] : null;
}

/** Read a pair file (JSON array of records with id/sentence1/sentence2). */
export function loadPairs(path: string): PairRecord[] {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`cannot parse pair file ${path}: ${(err as Error).message}`);
  }
  if (!Array.isArray(raw)) {
    throw new Error(`${path}: expected a JSON array of pair records`);
  }
  const out: PairRecord[] = [];
  raw.forEach((record, index) => {
    if (typeof record !== "object" || record === null) {
      throw new Error(`${path}: record ${index} is not an object`);
    }
    const rec = record as Record<string, unknown>;
    const id = rec.id;
    const sentence1 = rec.sentence1;
    const sentence2 = rec.sentence2;
    if (typeof id !== "string" || !id) {
      throw new Error(`${path}: record ${index} lacks an id`);
    }
    if (typeof sentence1 !== "string" || typeof sentence2 !== "string") {
      throw new Error(`${path}: record ${index} (${id}) lacks sentences`);
    }
    const langs = langPairFromId(id);
    if (!langs) {
      throw new Error(`${path}: record ${index} (${id}) has no xx-yy language tag`);
    }
    out.push({ id, lang1: langs[0], lang2: langs[1], sentence1, sentence2 });
  });
  return out;
}
