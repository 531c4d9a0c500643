"""Sub-word vocabulary, deterministic tokenization with character offsets,
span-to-sub-token alignment, and pooling of sub-token vectors.

Tokenization is greedy longest-match within whitespace-delimited words
(CJK characters are pre-split one per unit); anything the vocabulary
cannot cover becomes a single unk piece spanning the residue, so every
word always maps to at least one token with a valid character range.
"""

import enum
from dataclasses import dataclass

from . import numgrad as ng
from .errors import AlignmentError, DimensionError, ParseError, ValidationError

CONTINUATION = "##"

# CJK ideographs, CJK punctuation, and fullwidth forms: split one char per unit
_CJK_RANGES = (
    (0x3000, 0x303F),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0xFF00, 0xFFEF),
)


def _is_cjk(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


class PoolingMode(str, enum.Enum):
    AVERAGE = "average"
    SUM = "sum"


@dataclass(frozen=True)
class Vocabulary:
    """Sub-word inventory with dense ids and special-token bookkeeping."""

    pieces: tuple[str, ...]
    piece_to_id: dict[str, int]
    cls_id: int
    sep_id: int
    unk_id: int
    pad_id: int
    max_piece_chars: int

    def __len__(self) -> int:
        return len(self.pieces)

    @property
    def special_ids(self) -> frozenset[int]:
        return frozenset((self.cls_id, self.sep_id, self.unk_id, self.pad_id))


def build_vocabulary(pieces: list[str], specials: dict[str, str]) -> Vocabulary:
    """Assemble and validate a vocabulary from an ordered piece list."""
    if len(set(pieces)) != len(pieces):
        dupes = sorted({p for p in pieces if pieces.count(p) > 1})
        raise ValidationError(f"duplicate vocabulary pieces: {dupes}")
    if any(not p for p in pieces):
        raise ValidationError("empty vocabulary piece")
    piece_to_id = {p: i for i, p in enumerate(pieces)}
    ids = {}
    for role in ("cls", "sep", "unk", "pad"):
        piece = specials.get(role)
        if piece is None:
            raise ValidationError(f"vocabulary header missing special {role!r}")
        if piece not in piece_to_id:
            raise ValidationError(f"special piece {piece!r} not in the piece list")
        ids[role] = piece_to_id[piece]
    if len(set(ids.values())) != 4:
        raise ValidationError(f"special pieces must be distinct, got {specials}")
    longest = max(
        (len(p) - len(CONTINUATION) if p.startswith(CONTINUATION) else len(p))
        for p in pieces
    )
    return Vocabulary(
        pieces=tuple(pieces),
        piece_to_id=piece_to_id,
        cls_id=ids["cls"],
        sep_id=ids["sep"],
        unk_id=ids["unk"],
        pad_id=ids["pad"],
        max_piece_chars=max(longest, 1),
    )


def load_vocabulary(path: str) -> Vocabulary:
    """Read a vocabulary file: `#! role=piece` header lines, then one piece
    per line in id order."""
    specials: dict[str, str] = {}
    pieces: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#!"):
                body = line[2:].strip()
                if "=" not in body:
                    raise ParseError(f"{path}:{lineno}: malformed header line {line!r}")
                role, _, piece = body.partition("=")
                specials[role.strip()] = piece.strip()
            else:
                pieces.append(line)
    if not pieces:
        raise ParseError(f"{path}: no vocabulary pieces found")
    return build_vocabulary(pieces, specials)


def save_vocabulary(vocab: Vocabulary, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#! cls={vocab.pieces[vocab.cls_id]}\n")
        fh.write(f"#! sep={vocab.pieces[vocab.sep_id]}\n")
        fh.write(f"#! unk={vocab.pieces[vocab.unk_id]}\n")
        fh.write(f"#! pad={vocab.pieces[vocab.pad_id]}\n")
        for piece in vocab.pieces:
            fh.write(piece + "\n")


@dataclass(frozen=True)
class TokenizedSentence:
    """Sub-token ids plus character ranges back into the source text.

    Ranges are Unicode scalar-value indices. Specials (when present in a
    wrapped sequence) carry the empty range (0, 0).
    """

    ids: tuple[int, ...]
    offsets: tuple[tuple[int, int], ...]
    text: str

    def __post_init__(self):
        if len(self.ids) != len(self.offsets):
            raise DimensionError(
                f"{len(self.ids)} ids but {len(self.offsets)} offsets"
            )


def _word_units(text: str) -> list[tuple[int, int]]:
    """Character ranges of whitespace-delimited words, CJK chars split out."""
    units: list[tuple[int, int]] = []
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                units.append((start, i))
                start = None
        elif _is_cjk(ch):
            if start is not None:
                units.append((start, i))
                start = None
            units.append((i, i + 1))
        else:
            if start is None:
                start = i
    if start is not None:
        units.append((start, len(text)))
    return units


def tokenize(vocab: Vocabulary, text: str) -> TokenizedSentence:
    """Greedy longest-match segmentation; unk absorbs unmatched residue."""
    if not text:
        raise ValidationError("cannot tokenize empty text")
    ids: list[int] = []
    offsets: list[tuple[int, int]] = []
    for wstart, wend in _word_units(text):
        cursor = wstart
        while cursor < wend:
            prefix = "" if cursor == wstart else CONTINUATION
            match_id = None
            match_end = cursor
            limit = min(wend, cursor + vocab.max_piece_chars)
            for end in range(limit, cursor, -1):
                candidate = prefix + text[cursor:end]
                pid = vocab.piece_to_id.get(candidate)
                if pid is not None and pid not in vocab.special_ids:
                    match_id, match_end = pid, end
                    break
            if match_id is None:
                ids.append(vocab.unk_id)
                offsets.append((cursor, wend))
                break
            ids.append(match_id)
            offsets.append((cursor, match_end))
            cursor = match_end
    return TokenizedSentence(ids=tuple(ids), offsets=tuple(offsets), text=text)


def with_specials(vocab: Vocabulary, tok: TokenizedSentence) -> tuple[list[int], int]:
    """Wrap bare piece ids as [cls] ... [sep]; returns (ids, index shift)."""
    return [vocab.cls_id, *tok.ids, vocab.sep_id], 1


def align_span(tok: TokenizedSentence, span: tuple[int, int]) -> list[int]:
    """Indices of all non-special tokens overlapping a character span."""
    start, end = span
    if not (0 <= start < end <= len(tok.text)):
        raise ValidationError(f"span {span} outside text of length {len(tok.text)}")
    hits = [
        i
        for i, (tstart, tend) in enumerate(tok.offsets)
        if tstart < tend and tstart < end and start < tend
    ]
    if not hits:
        raise AlignmentError(
            f"span {span} ({tok.text[start:end]!r}) overlaps no token"
        )
    return hits


def pool(vectors: ng.Tensor, mode: PoolingMode) -> ng.Tensor:
    """Collapse k sub-token vectors (k x H) into one H vector."""
    vectors = ng.as_tensor(vectors)
    if vectors.ndim != 2 or vectors.shape[0] < 1:
        raise DimensionError(f"pool expects a non-empty k x H matrix, got {vectors.shape}")
    if mode == PoolingMode.SUM:
        return ng.tsum(vectors, axis=0)
    if mode == PoolingMode.AVERAGE:
        return ng.tmean(vectors, axis=0)
    raise ValidationError(f"unknown pooling mode {mode!r}")
