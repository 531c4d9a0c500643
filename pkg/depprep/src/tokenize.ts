export interface Token {
  form: string;
  start: number; // code-point index into the sentence
  end: number;
}

const PUNCT = new Set([
  ".", ",", ";", ":", "!", "?", "(", ")", "\"", "'", "«", "»",
  "。", "，", "、", "！", "？", "：", "；", "「", "」",
]);

function isCjk(ch: string): boolean {
  const code = ch.codePointAt(0)!;
  return (
    (code >= 0x3000 && code <= 0x303f) ||
    (code >= 0x3400 && code <= 0x4dbf) ||
    (code >= 0x4e00 && code <= 0x9fff) ||
    (code >= 0xf900 && code <= 0xfaff) ||
    (code >= 0xff00 && code <= 0xffef)
  );
}

export function isPunct(form: string): boolean {
  return [...form].every((ch) => PUNCT.has(ch));
}

/**
 * Split a sentence into tokens with code-point offsets. Whitespace
 * delimits words; punctuation splits off words; CJK runs are segmented
 * greedily against a lexicon with a one-character fallback.
 */
export function tokenize(text: string, cjkLexicon: ReadonlySet<string>): Token[] {
  const chars = [...text];
  const tokens: Token[] = [];
  let i = 0;
  while (i < chars.length) {
    const ch = chars[i];
    if (/\s/.test(ch)) {
      i += 1;
      continue;
    }
    if (PUNCT.has(ch)) {
      tokens.push({ form: ch, start: i, end: i + 1 });
      i += 1;
      continue;
    }
    if (isCjk(ch)) {
      // greedy longest lexicon match, else a single character
      let matched = 1;
      const limit = Math.min(chars.length - i, 6);
      for (let len = limit; len >= 2; len -= 1) {
        const candidate = chars.slice(i, i + len).join("");
        if (cjkLexicon.has(candidate)) {
          matched = len;
          break;
        }
      }
      tokens.push({ form: chars.slice(i, i + matched).join(""), start: i, end: i + matched });
      i += matched;
      continue;
    }
    let j = i;
    while (j < chars.length && !/\s/.test(chars[j]) && !PUNCT.has(chars[j]) && !isCjk(chars[j])) {
      j += 1;
    }
    tokens.push({ form: chars.slice(i, j).join(""), start: i, end: j });
    i = j;
  }
  return tokens;
}
