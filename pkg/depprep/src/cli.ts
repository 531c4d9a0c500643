#!/usr/bin/env node
/**
 * Batch dependency preprocessing: read a word-in-context pair file, parse
 * every sentence side whose language is requested, and write CoNLL-U with
 * `# sent_id = <pair_id>.<side>` keys.
 *
 * Exit codes: 0 success, 1 some records skipped, 2 bad invocation.
 */

import { renameSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import process from "node:process";

import { renderDocument, SentenceBlock } from "./conllu.js";
import { parse, PARSER_NAME } from "./parser.js";
import { loadPairs } from "./pairs.js";
import { cjkLexicon, SUPPORTED_LANGUAGES } from "./tagger.js";
import { tokenize } from "./tokenize.js";

interface Args {
  input: string;
  output: string;
  languages: string[];
  parser: string;
}

const USAGE = `usage: depprep --input pairs.json --output out.conllu \\
               [--languages en,fr,ru,zh] [--parser ${PARSER_NAME}]`;

function parseArgs(argv: string[]): Args {
  const args: Partial<Args> = { languages: [...SUPPORTED_LANGUAGES] };
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`missing value for ${flag}`);
    }
    switch (flag) {
      case "--input": args.input = value; break;
      case "--output": args.output = value; break;
      case "--languages":
        args.languages = value.split(",").map((s) => s.trim()).filter(Boolean);
        break;
      case "--parser": args.parser = value; break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.input || !args.output) {
    throw new Error("both --input and --output are required");
  }
  args.parser = args.parser ?? PARSER_NAME;
  return args as Args;
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  if (args.parser !== PARSER_NAME) {
    console.error(
      `error: parser ${args.parser} is not installed; available: ${PARSER_NAME}. ` +
      "External parsers must emit this CoNLL-U shape themselves.",
    );
    return 2;
  }
  if (args.languages.includes("ar")) {
    console.error("error: Arabic has no dependency parser support; drop 'ar'");
    return 2;
  }
  const unsupported = args.languages.filter((l) => !SUPPORTED_LANGUAGES.includes(l));
  if (unsupported.length > 0) {
    console.error(`error: unsupported languages: ${unsupported.join(", ")}; ` +
                  `supported: ${SUPPORTED_LANGUAGES.join(", ")}`);
    return 2;
  }

  let pairs;
  try {
    pairs = loadPairs(args.input);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }

  const blocks: SentenceBlock[] = [];
  let skipped = 0;
  for (const pair of pairs) {
    const sides: Array<[number, string, string]> = [
      [1, pair.lang1, pair.sentence1],
      [2, pair.lang2, pair.sentence2],
    ];
    for (const [side, lang, sentence] of sides) {
      if (!args.languages.includes(lang)) continue;
      const sentId = `${pair.id}.${side}`;
      const tokens = tokenize(sentence, cjkLexicon(lang));
      if (tokens.length === 0) {
        console.error(`skip ${sentId}: no tokens`);
        skipped += 1;
        continue;
      }
      blocks.push({
        sentId,
        text: sentence,
        tokens: parse(tokens, lang),
        comments: [`parser = ${PARSER_NAME} (${lang})`],
      });
    }
  }

  // atomic write: stage next to the target, then rename into place
  const stagingPath = join(dirname(args.output) || ".",
                           `.depprep-${process.pid}.tmp`);
  writeFileSync(stagingPath, renderDocument(blocks), "utf-8");
  renameSync(stagingPath, args.output);
  console.error(`wrote ${blocks.length} sentences to ${args.output}` +
                (skipped ? `, skipped ${skipped}` : ""));
  return skipped > 0 ? 1 : 0;
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js") ||
  process.argv[1]?.endsWith("cli.ts");
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
