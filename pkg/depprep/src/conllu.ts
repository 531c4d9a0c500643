import { ParsedToken } from "./parser.js";

export interface SentenceBlock {
  sentId: string;
  text: string;
  tokens: ParsedToken[];
  comments?: string[];
}

/** Render one sentence as CoNLL-U (10 tab-separated columns). */
export function renderSentence(block: SentenceBlock): string {
  const lines = [`# sent_id = ${block.sentId}`, `# text = ${block.text}`];
  for (const comment of block.comments ?? []) {
    lines.push(`# ${comment}`);
  }
  block.tokens.forEach((token, i) => {
    lines.push([
      String(i + 1),
      token.form,
      token.form.toLowerCase(),
      token.upos,
      "_",
      "_",
      String(token.head),
      token.deprel,
      "_",
      "_",
    ].join("\t"));
  });
  return lines.join("\n") + "\n";
}

export function renderDocument(blocks: SentenceBlock[]): string {
  return blocks.map(renderSentence).join("\n");
}

export interface ValidationIssue {
  sentId: string;
  message: string;
}

/** Structural validation: column count, contiguous ids, head range,
 * single root, and forms recoverable from the text. */
export function validateDocument(content: string): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  const blocks = content.split(/\n\s*\n/).filter((b) => b.trim());
  for (const block of blocks) {
    let sentId = "<unknown>";
    let text: string | null = null;
    const rows: string[][] = [];
    for (const line of block.split("\n")) {
      if (!line.trim()) continue;
      if (line.startsWith("#")) {
        const body = line.slice(1).trim();
        if (body.startsWith("sent_id")) sentId = body.split("=")[1]?.trim() ?? sentId;
        if (body.startsWith("text")) text = body.slice(body.indexOf("=") + 1).trim();
        continue;
      }
      rows.push(line.split("\t"));
    }
    if (text === null) {
      issues.push({ sentId, message: "missing # text comment" });
      continue;
    }
    let rootCount = 0;
    rows.forEach((cols, index) => {
      if (cols.length !== 10) {
        issues.push({ sentId, message: `row ${index + 1}: ${cols.length} columns` });
        return;
      }
      if (Number(cols[0]) !== index + 1) {
        issues.push({ sentId, message: `row ${index + 1}: id ${cols[0]} not contiguous` });
      }
      const head = Number(cols[6]);
      if (!Number.isInteger(head) || head < 0 || head > rows.length) {
        issues.push({ sentId, message: `row ${index + 1}: head ${cols[6]} out of range` });
      }
      if (head === 0) rootCount += 1;
    });
    if (rootCount !== 1) {
      issues.push({ sentId, message: `${rootCount} roots, expected exactly 1` });
    }
    // forms must be recoverable left-to-right from the text
    let cursor = 0;
    const chars = [...text];
    for (const cols of rows) {
      if (cols.length !== 10) continue;
      const form = [...cols[1]];
      while (cursor < chars.length && /\s/.test(chars[cursor])) cursor += 1;
      const slice = chars.slice(cursor, cursor + form.length).join("");
      if (slice !== cols[1]) {
        issues.push({ sentId, message: `form ${cols[1]} not at text offset ${cursor}` });
        break;
      }
      cursor += form.length;
    }
  }
  return issues;
}
