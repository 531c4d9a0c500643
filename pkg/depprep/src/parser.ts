import { tagToken, Upos } from "./tagger.js";
import { Token } from "./tokenize.js";

export interface ParsedToken extends Token {
  upos: Upos;
  head: number; // 1-based token id, 0 = root
  deprel: string;
}

export const PARSER_NAME = "heuristic-ud/0.1";

function nearestNoun(tags: Upos[], index: number): number {
  let best = -1;
  let bestDistance = Number.POSITIVE_INFINITY;
  for (let j = 0; j < tags.length; j += 1) {
    if (j === index || tags[j] !== "NOUN") continue;
    // prefer the following noun on ties (determiners/adjectives lean right)
    const distance = j > index ? (j - index) - 0.25 : index - j;
    if (distance < bestDistance) {
      best = j;
      bestDistance = distance;
    }
  }
  return best;
}

function followingNoun(tags: Upos[], index: number): number {
  for (let j = index + 1; j < tags.length; j += 1) {
    if (tags[j] === "NOUN") return j;
  }
  return -1;
}

/**
 * Deterministic single-root dependency assignment:
 * the first verb (else first predicate adjective, else first noun, else
 * the first token) is the root; determiners, adjectives, and adpositions
 * attach to nearby nouns; nouns become subjects left of the root and
 * objects/obliques right of it; everything else hangs off the root.
 */
export function parse(tokens: Token[], lang: string): ParsedToken[] {
  const tags = tokens.map((t) => tagToken(t.form, lang));
  const n = tokens.length;

  let root = tags.findIndex((t) => t === "VERB");
  if (root < 0) {
    // copula-free predicate: only adjectives with no following noun qualify
    root = tags.findIndex((t, i) => t === "ADJ" && followingNoun(tags, i) < 0);
  }
  if (root < 0) root = tags.findIndex((t) => t === "NOUN");
  if (root < 0) root = 0;

  const result: ParsedToken[] = tokens.map((token, i) => ({
    ...token, upos: tags[i], head: root + 1, deprel: "dep",
  }));
  result[root].head = 0;
  result[root].deprel = "root";

  for (let i = 0; i < n; i += 1) {
    if (i === root) continue;
    const tag = tags[i];
    const entry = result[i];
    if (tag === "PUNCT") {
      entry.deprel = "punct";
    } else if (tag === "DET") {
      const noun = followingNoun(tags, i);
      if (noun >= 0) {
        entry.head = noun + 1;
        entry.deprel = "det";
      }
    } else if (tag === "ADJ") {
      const noun = nearestNoun(tags, i);
      if (noun >= 0) {
        entry.head = noun + 1;
        entry.deprel = "amod";
      }
    } else if (tag === "ADP") {
      const noun = followingNoun(tags, i);
      if (noun >= 0) {
        entry.head = noun + 1;
        entry.deprel = "case";
      }
    } else if (tag === "ADV") {
      entry.deprel = "advmod";
    } else if (tag === "PRON") {
      entry.deprel = i < root ? "nsubj" : "obj";
    } else if (tag === "NOUN") {
      if (tags[i + 1] === "NOUN") {
        entry.head = i + 2; // compound chains lean right
        entry.deprel = "compound";
      } else if (i < root) {
        entry.deprel = "nsubj";
      } else {
        const hasCase = tags.slice(root + 1, i).includes("ADP");
        entry.deprel = hasCase ? "obl" : "obj";
      }
    }
  }
  return result;
}
