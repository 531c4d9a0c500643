export { loadPairs, langPairFromId } from "./pairs.js";
export { tokenize, isPunct } from "./tokenize.js";
export { tagToken, cjkLexicon, SUPPORTED_LANGUAGES } from "./tagger.js";
export { parse, PARSER_NAME } from "./parser.js";
export { renderSentence, renderDocument, validateDocument } from "./conllu.js";
export { run } from "./cli.js";
