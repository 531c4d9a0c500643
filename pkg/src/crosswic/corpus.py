"""Data model and ingestion for word-in-context sentence pairs, gold labels,
dataset splits, and dependency annotations in CoNLL-U form.

Pair files are UTF-8 JSON arrays of records with fields
`id, lemma, pos, sentence1, sentence2, start1, end1, start2, end2`;
gold files are parallel arrays of `{id, tag}` with tag in {T, F}.
All character offsets are Unicode scalar-value indices.
"""

import json
import re
from dataclasses import dataclass, field, replace

from .errors import (
    AlignmentError,
    ParseError,
    ValidationError,
)

GOLD_TRUE = "T"
GOLD_FALSE = "F"
GOLD_UNKNOWN = "?"
GOLD_VALUES = (GOLD_TRUE, GOLD_FALSE, GOLD_UNKNOWN)

_LANG_PAIR_RE = re.compile(r"(?:^|[._-])([a-z]{2})-([a-z]{2})(?:[._-]|$)")


@dataclass(frozen=True)
class WicPair:
    """A sentence pair with per-sentence target-word character spans."""

    pair_id: str
    lang_pair: tuple[str, str]
    sentence1: str
    sentence2: str
    span1: tuple[int, int]
    span2: tuple[int, int]
    lemma: str = ""
    pos: str = ""
    gold: str = GOLD_UNKNOWN

    def __post_init__(self):
        for side, sentence, span in ((1, self.sentence1, self.span1),
                                     (2, self.sentence2, self.span2)):
            start, end = span
            if not (0 <= start < end <= len(sentence)):
                raise ValidationError(
                    f"pair {self.pair_id}: span{side} {span} outside sentence "
                    f"of length {len(sentence)}"
                )
            target = sentence[start:end]
            if "\n" in target:
                raise ValidationError(
                    f"pair {self.pair_id}: span{side} crosses a newline"
                )
        if self.gold not in GOLD_VALUES:
            raise ValidationError(
                f"pair {self.pair_id}: gold tag {self.gold!r} not in {GOLD_VALUES}"
            )

    def sentence(self, side: int) -> str:
        return self.sentence1 if side == 1 else self.sentence2

    def span(self, side: int) -> tuple[int, int]:
        return self.span1 if side == 1 else self.span2

    def target(self, side: int) -> str:
        s, e = self.span(side)
        return self.sentence(side)[s:e]


@dataclass(frozen=True)
class DepAnnotation:
    """One sentence's dependency parse with recovered character offsets.

    tokens hold (form, char_start, char_end, head_index, deprel) where
    head_index is 1-based into the token list and 0 marks the root.
    """

    sentence_id: str
    tokens: tuple[tuple[str, int, int, int, str], ...]

    def head_of(self, index: int) -> int | None:
        """0-based index of the head token, None when `index` is the root."""
        head = self.tokens[index][3]
        return None if head == 0 else head - 1

    def dependents_of(self, index: int) -> list[int]:
        """0-based indices of direct children, in surface order."""
        return [i for i, tok in enumerate(self.tokens) if tok[3] == index + 1]


@dataclass
class DatasetSplit:
    """All pairs of one (split, language-pair) slice."""

    name: str
    lang_pair: tuple[str, str]
    pairs: list[WicPair] = field(default_factory=list)
    dev_subset: int | None = None

    def __post_init__(self):
        for pair in self.pairs:
            if pair.lang_pair != self.lang_pair:
                raise ValidationError(
                    f"pair {pair.pair_id} has language pair "
                    f"{format_lang_pair(pair.lang_pair)}, split expects "
                    f"{format_lang_pair(self.lang_pair)}"
                )
        if self.dev_subset is not None and self.dev_subset > len(self.pairs):
            raise ValidationError(
                f"dev subset {self.dev_subset} larger than split of {len(self.pairs)}"
            )

    def selected(self) -> list[WicPair]:
        """Pairs used for evaluation: the file-order prefix when a dev
        subset is configured, everything otherwise."""
        if self.dev_subset is None:
            return list(self.pairs)
        return self.pairs[: self.dev_subset]

    def __len__(self) -> int:
        return len(self.pairs)


def parse_lang_pair(text: str) -> tuple[str, str]:
    parts = text.split("-")
    if len(parts) != 2 or not all(len(p) == 2 and p.isalpha() for p in parts):
        raise ValidationError(f"malformed language pair {text!r}")
    return (parts[0].lower(), parts[1].lower())


def format_lang_pair(lang_pair: tuple[str, str]) -> str:
    return f"{lang_pair[0]}-{lang_pair[1]}"


def _infer_lang_pair(pair_id: str) -> tuple[str, str] | None:
    m = _LANG_PAIR_RE.search(pair_id)
    return (m.group(1), m.group(2)) if m else None


def _coerce_offset(record_index: int, record: dict, key: str) -> int:
    value = record.get(key)
    if value is None:
        raise ParseError(f"record {record_index}: missing field {key!r}")
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"record {record_index}: field {key!r} is not an integer") from exc


def load_pair_records(data_path: str, gold_path: str | None = None,
                      lang_pair: tuple[str, str] | None = None) -> list[WicPair]:
    """Load a pair file (and optionally join a gold file by id).

    Unlike load_pairs this allows mixed language pairs, which multi-pair
    fixture files use; per-language routing happens at the split level.
    """
    try:
        with open(data_path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"pair file not found: {data_path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{data_path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise ParseError(f"{data_path}: expected a JSON array of pair records")

    gold_by_id: dict[str, str] = {}
    if gold_path is not None:
        gold_by_id = load_gold(gold_path)

    pairs: list[WicPair] = []
    seen_ids: set[str] = set()
    for i, record in enumerate(raw):
        if not isinstance(record, dict):
            raise ParseError(f"record {i}: expected an object")
        pair_id = record.get("id")
        if not isinstance(pair_id, str) or not pair_id:
            raise ParseError(f"record {i}: missing or empty field 'id'")
        if pair_id in seen_ids:
            raise ValidationError(f"duplicate pair id {pair_id!r}")
        seen_ids.add(pair_id)
        for key in ("sentence1", "sentence2"):
            if not isinstance(record.get(key), str):
                raise ParseError(f"record {i}: missing field {key!r}")
        record_lang = _infer_lang_pair(pair_id)
        pair_lang = lang_pair or record_lang
        if pair_lang is None:
            raise ValidationError(
                f"pair {pair_id}: language pair neither given nor inferable from id"
            )
        gold = GOLD_UNKNOWN
        if gold_by_id:
            if pair_id not in gold_by_id:
                raise ValidationError(f"gold file has no tag for pair {pair_id!r}")
            gold = gold_by_id.pop(pair_id)
        pairs.append(WicPair(
            pair_id=pair_id,
            lang_pair=pair_lang,
            sentence1=record["sentence1"],
            sentence2=record["sentence2"],
            span1=(_coerce_offset(i, record, "start1"), _coerce_offset(i, record, "end1")),
            span2=(_coerce_offset(i, record, "start2"), _coerce_offset(i, record, "end2")),
            lemma=record.get("lemma", "") or "",
            pos=record.get("pos", "") or "",
            gold=gold,
        ))
    if gold_by_id:
        extras = sorted(gold_by_id)[:5]
        raise ValidationError(f"gold file has tags for unknown pairs: {extras}")
    return pairs


def load_pairs(data_path: str, gold_path: str | None = None,
               lang_pair: tuple[str, str] | None = None,
               name: str = "test",
               dev_subset: int | None = None) -> DatasetSplit:
    """Load one (split, language-pair) slice; all records must agree."""
    pairs = load_pair_records(data_path, gold_path, lang_pair)
    if lang_pair is None:
        distinct = {p.lang_pair for p in pairs}
        if len(distinct) > 1:
            raise ValidationError(
                f"mixed language pairs in {data_path}: "
                f"{sorted(format_lang_pair(lp) for lp in distinct)}"
            )
        lang_pair = pairs[0].lang_pair if pairs else ("en", "en")
    return DatasetSplit(
        name=name,
        lang_pair=lang_pair,
        pairs=pairs,
        dev_subset=dev_subset,
    )


def load_gold(gold_path: str) -> dict[str, str]:
    try:
        with open(gold_path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"gold file not found: {gold_path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{gold_path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise ParseError(f"{gold_path}: expected a JSON array of tag records")
    tags: dict[str, str] = {}
    for i, record in enumerate(raw):
        if not isinstance(record, dict) or "id" not in record or "tag" not in record:
            raise ParseError(f"gold record {i}: expected an object with id and tag")
        tag = record["tag"]
        if tag not in (GOLD_TRUE, GOLD_FALSE):
            raise ValidationError(f"gold record {i}: tag {tag!r} not in (T, F)")
        if record["id"] in tags:
            raise ValidationError(f"duplicate gold id {record['id']!r}")
        tags[record["id"]] = tag
    return tags


def save_pairs(pairs: list[WicPair], data_path: str,
               gold_path: str | None = None) -> None:
    """Serialize pairs back to the pair/gold JSON formats."""
    records = []
    for p in pairs:
        records.append({
            "id": p.pair_id,
            "lemma": p.lemma,
            "pos": p.pos,
            "sentence1": p.sentence1,
            "sentence2": p.sentence2,
            "start1": p.span1[0],
            "end1": p.span1[1],
            "start2": p.span2[0],
            "end2": p.span2[1],
        })
    with open(data_path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, ensure_ascii=False, indent=1)
        fh.write("\n")
    if gold_path is not None:
        tags = [{"id": p.pair_id, "tag": p.gold} for p in pairs
                if p.gold != GOLD_UNKNOWN]
        with open(gold_path, "w", encoding="utf-8") as fh:
            json.dump(tags, fh, ensure_ascii=False, indent=1)
            fh.write("\n")


def strip_gold(pairs: list[WicPair]) -> list[WicPair]:
    return [replace(p, gold=GOLD_UNKNOWN) for p in pairs]


# ---------------------------------------------------------------------------
# CoNLL-U ingestion
# ---------------------------------------------------------------------------

def sentence_key(pair_id: str, side: int) -> str:
    """CoNLL-U sent_id convention joining annotations to pair sides."""
    return f"{pair_id}.{side}"


def _recover_offsets(sent_id: str, text: str,
                     forms: list[str]) -> list[tuple[int, int]]:
    """Left-to-right match of token forms against the sentence text."""
    offsets = []
    cursor = 0
    for form in forms:
        while cursor < len(text) and text[cursor].isspace():
            cursor += 1
        if not text.startswith(form, cursor):
            raise AlignmentError(
                f"sentence {sent_id}: token {form!r} not found at offset {cursor}"
            )
        offsets.append((cursor, cursor + len(form)))
        cursor += len(form)
    return offsets


def load_conllu(path: str) -> dict[str, DepAnnotation]:
    """Read CoNLL-U sentences keyed by their `# sent_id` comments."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise ParseError(f"CoNLL-U file not found: {path}") from None

    annotations: dict[str, DepAnnotation] = {}
    sent_id: str | None = None
    text: str | None = None
    rows: list[tuple[str, int]] = []

    def flush() -> None:
        nonlocal sent_id, text, rows
        if not rows and sent_id is None:
            sent_id, text = None, None
            return
        if sent_id is None:
            raise ParseError(f"{path}: sentence without a # sent_id comment")
        if text is None:
            raise AlignmentError(f"sentence {sent_id}: missing # text comment")
        forms: list[str] = []
        heads: list[int] = []
        deprels: list[str] = []
        for line, lineno in rows:
            cols = line.split("\t")
            if len(cols) != 10:
                raise ParseError(f"{path}:{lineno}: expected 10 columns, got {len(cols)}")
            token_id = cols[0]
            if "-" in token_id or "." in token_id:
                continue  # multiword ranges and empty nodes carry no tree edges
            try:
                tid = int(token_id)
                head = int(cols[6]) if cols[6] != "_" else 0
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: malformed id/head column") from exc
            if tid != len(forms) + 1:
                raise ParseError(
                    f"{path}:{lineno}: token ids not contiguous (got {tid})"
                )
            forms.append(cols[1])
            heads.append(head)
            deprels.append(cols[7])
        n = len(forms)
        for head in heads:
            if not 0 <= head <= n:
                raise ValidationError(
                    f"sentence {sent_id}: head index {head} outside 0..{n}"
                )
        offsets = _recover_offsets(sent_id, text, forms)
        if sent_id in annotations:
            raise ValidationError(f"{path}: duplicate sent_id {sent_id!r}")
        annotations[sent_id] = DepAnnotation(
            sentence_id=sent_id,
            tokens=tuple(
                (form, start, end, head, rel)
                for form, (start, end), head, rel in zip(forms, offsets, heads, deprels)
            ),
        )
        sent_id, text, rows = None, None, []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            if rows or sent_id is not None:
                flush()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("sent_id"):
                sent_id = body.partition("=")[2].strip()
            elif body.startswith("text ") or body.startswith("text="):
                text = body.partition("=")[2].strip()
            continue
        rows.append((line, lineno))
    if rows or sent_id is not None:
        flush()
    return annotations


def find_target_token(pair: WicPair, side: int, ann: DepAnnotation) -> int:
    """Token with maximal character overlap with the target span
    (leftmost on ties)."""
    start, end = pair.span(side)
    best_index, best_overlap = -1, 0
    for i, (_, tstart, tend, _, _) in enumerate(ann.tokens):
        overlap = min(end, tend) - max(start, tstart)
        if overlap > best_overlap:
            best_index, best_overlap = i, overlap
    if best_index < 0:
        raise AlignmentError(
            f"pair {pair.pair_id} side {side}: target span {pair.span(side)} "
            f"overlaps no token of {ann.sentence_id}"
        )
    return best_index
