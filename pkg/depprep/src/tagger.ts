import { isPunct } from "./tokenize.js";

export type Upos =
  | "ADJ" | "ADP" | "ADV" | "DET" | "NOUN" | "PRON" | "PUNCT" | "VERB" | "X";

interface Lexicon {
  det: Set<string>;
  adp: Set<string>;
  pron: Set<string>;
  adv: Set<string>;
  verb: Set<string>;
  adj: Set<string>;
  adjSuffixes: string[];
  verbSuffixes: string[];
  cjkWords: Set<string>;
}

function lex(partial: Partial<Lexicon>): Lexicon {
  return {
    det: new Set(), adp: new Set(), pron: new Set(), adv: new Set(),
    verb: new Set(), adj: new Set(), adjSuffixes: [], verbSuffixes: [],
    cjkWords: new Set(),
    ...partial,
  };
}

const LEXICONS: Record<string, Lexicon> = {
  en: lex({
    det: new Set(["the", "a", "an", "this", "that", "these", "those"]),
    adp: new Set(["of", "in", "on", "at", "by", "for", "with", "to", "from",
                  "after", "before", "over", "under", "into"]),
    pron: new Set(["i", "you", "he", "she", "it", "we", "they"]),
    adv: new Set(["today", "now", "quickly", "slowly", "here", "there", "very"]),
    verb: new Set(["is", "are", "was", "were", "be", "has", "have", "had",
                   "chase", "chases", "chased", "click", "clicks", "clicked",
                   "eat", "eats", "ate", "raise", "raises", "raised",
                   "run", "runs", "ran", "sit", "sits", "lies", "lie"]),
    adj: new Set(["right", "left", "old", "new", "small", "green", "big", "grey"]),
  }),
  fr: lex({
    det: new Set(["le", "la", "les", "un", "une", "des", "du"]),
    adp: new Set(["de", "à", "dans", "sur", "sous", "avec", "pour", "après",
                  "avant", "chez"]),
    pron: new Set(["je", "tu", "il", "elle", "nous", "vous", "ils", "elles"]),
    adv: new Set(["vite", "lentement", "très", "aujourd'hui", "ici"]),
    verb: new Set(["est", "sont", "a", "ont", "mange", "mangent", "court",
                   "courent", "dort", "voit", "aime"]),
    adj: new Set(["grise", "gris", "petit", "petite", "grand", "grande",
                  "rouge", "vert", "verte"]),
  }),
  ru: lex({
    adp: new Set(["в", "на", "по", "с", "у", "о", "к", "от", "до", "за", "из"]),
    pron: new Set(["я", "ты", "он", "она", "оно", "мы", "вы", "они"]),
    adv: new Set(["сегодня", "вчера", "быстро", "медленно", "очень", "здесь"]),
    verb: new Set(["бежит", "бегут", "лежит", "лежат", "ест", "едят", "закрыт",
                   "закрыта", "закрыто", "открыт", "идет", "идёт", "спит"]),
    adjSuffixes: ["ая", "яя", "ый", "ий", "ое", "ее", "ые", "ие"],
    verbSuffixes: ["ет", "ит", "ут", "ют", "ат", "ят"],
  }),
  zh: lex({
    pron: new Set(["我", "你", "他", "她", "它", "我们", "你们", "他们"]),
    adv: new Set(["很", "都", "也", "再"]),
    verb: new Set(["吃", "喝", "追", "点击", "发布", "是", "有", "去", "来",
                   "看", "买"]),
    adj: new Set(["新", "好吃", "好", "大", "小", "红"]),
    cjkWords: new Set(["苹果", "老鼠", "鼠标", "手机", "发布", "点击", "好吃",
                       "我们", "你们", "他们", "奶酪", "猫"]),
  }),
};

export const SUPPORTED_LANGUAGES = Object.keys(LEXICONS);

export function cjkLexicon(lang: string): ReadonlySet<string> {
  return LEXICONS[lang]?.cjkWords ?? new Set();
}

export function tagToken(form: string, lang: string): Upos {
  if (isPunct(form)) return "PUNCT";
  const lexicon = LEXICONS[lang];
  if (!lexicon) return "X";
  const lower = form.toLowerCase();
  if (lexicon.det.has(lower)) return "DET";
  if (lexicon.adp.has(lower)) return "ADP";
  if (lexicon.pron.has(lower)) return "PRON";
  if (lexicon.adv.has(lower)) return "ADV";
  if (lexicon.verb.has(lower)) return "VERB";
  if (lexicon.adj.has(lower)) return "ADJ";
  if (lexicon.adjSuffixes.some((s) => lower.endsWith(s) && lower.length > s.length + 1)) {
    return "ADJ";
  }
  if (lexicon.verbSuffixes.some((s) => lower.endsWith(s) && lower.length > s.length + 1)) {
    return "VERB";
  }
  return "NOUN";
}
