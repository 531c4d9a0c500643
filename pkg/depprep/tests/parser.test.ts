import { describe, expect, it } from "vitest";

import { parse } from "../src/parser.js";
import { cjkLexicon, tagToken } from "../src/tagger.js";
import { tokenize } from "../src/tokenize.js";

function parseText(text: string, lang: string) {
  return parse(tokenize(text, cjkLexicon(lang)), lang);
}

describe("tokenize", () => {
  it("splits words and trailing punctuation with offsets", () => {
    const tokens = tokenize("La souris mange le fromage.", new Set());
    expect(tokens.map((t) => t.form)).toEqual(
      ["La", "souris", "mange", "le", "fromage", "."],
    );
    const text = "La souris mange le fromage.";
    for (const token of tokens) {
      expect([...text].slice(token.start, token.end).join("")).toBe(token.form);
    }
  });

  it("segments CJK greedily against the lexicon", () => {
    const tokens = tokenize("苹果发布新手机。", cjkLexicon("zh"));
    expect(tokens.map((t) => t.form)).toEqual(["苹果", "发布", "新", "手机", "。"]);
  });

  it("falls back to single CJK characters", () => {
    const tokens = tokenize("猫吃鱼。", cjkLexicon("zh"));
    expect(tokens.map((t) => t.form)).toEqual(["猫", "吃", "鱼", "。"]);
  });
});

describe("tagger", () => {
  it("uses closed-class lexicons", () => {
    expect(tagToken("the", "en")).toBe("DET");
    expect(tagToken("after", "en")).toBe("ADP");
    expect(tagToken("chases", "en")).toBe("VERB");
    expect(tagToken("mouse", "en")).toBe("NOUN");
    expect(tagToken(".", "en")).toBe("PUNCT");
  });

  it("applies Russian suffix heuristics", () => {
    expect(tagToken("Беспроводная", "ru")).toBe("ADJ");
    expect(tagToken("мышь", "ru")).toBe("NOUN");
  });
});

describe("parse", () => {
  it("gives souris a verb head", () => {
    const parsed = parseText("La souris mange le fromage.", "fr");
    const souris = parsed.find((t) => t.form === "souris")!;
    const head = parsed[souris.head - 1];
    expect(head.form).toBe("mange");
    expect(head.upos).toBe("VERB");
    expect(souris.deprel).toBe("nsubj");
  });

  it("produces exactly one root per sentence", () => {
    const samples: Array<[string, string]> = [
      ["The cat chases after the mouse.", "en"],
      ["Click the right mouse button.", "en"],
      ["Мышь бежит по полу.", "ru"],
      ["苹果很好吃。", "zh"],
      ["La souris grise court vite.", "fr"],
    ];
    for (const [text, lang] of samples) {
      const parsed = parseText(text, lang);
      expect(parsed.filter((t) => t.head === 0)).toHaveLength(1);
      for (const token of parsed) {
        expect(token.head).toBeGreaterThanOrEqual(0);
        expect(token.head).toBeLessThanOrEqual(parsed.length);
      }
    }
  });

  it("handles a verbless predicate with an adjective root", () => {
    const parsed = parseText("苹果很好吃。", "zh");
    const root = parsed.find((t) => t.head === 0)!;
    expect(root.form).toBe("好吃");
    const subject = parsed.find((t) => t.form === "苹果")!;
    expect(subject.deprel).toBe("nsubj");
  });

  it("attaches compound nouns rightward", () => {
    const parsed = parseText("The bank raised interest rates.", "en");
    const interest = parsed.find((t) => t.form === "interest")!;
    expect(parsed[interest.head - 1].form).toBe("rates");
    expect(interest.deprel).toBe("compound");
  });

  it("is deterministic", () => {
    const a = JSON.stringify(parseText("The cat chases after the mouse.", "en"));
    const b = JSON.stringify(parseText("The cat chases after the mouse.", "en"));
    expect(a).toBe(b);
  });
});
