"""Frozen-encoder feature construction.

Two variants: target-word concatenation (2H per pair) and dependency-based
syntax-incorporated embeddings (3H per sentence — target, head word,
combined dependents — giving 6H per pair). Sentences are always encoded
independently here; the joint-encoding variant lives behind an explicit
flag in the harness.

Feature cache files start with `D=<int>` and carry one
`pair_id TAB label TAB values` line per pair.
"""

import enum
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import numgrad as ng
from .corpus import DepAnnotation, WicPair, find_target_token
from .encoder import HiddenStates, TransformerEncoder
from .errors import DimensionError, ParseError, ValidationError
from .subword import PoolingMode, TokenizedSentence, Vocabulary, align_span, pool, tokenize

NULL_WORD = "null"


class FeatureVariant(str, enum.Enum):
    TARGET_CONCAT = "target_concat"
    SYNTAX = "syntax"


class DependentCombine(str, enum.Enum):
    SUM = "sum"
    AVERAGE = "average"


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-size real feature vector for one sentence pair."""

    values: ng.Tensor
    pair_id: str
    variant: FeatureVariant
    hidden_dim: int
    lang_pair: tuple[str, str] = ("en", "en")
    gold: str = "?"

    def __post_init__(self):
        expected = self.expected_dim(self.variant, self.hidden_dim)
        if self.values.shape != (expected,):
            raise DimensionError(
                f"pair {self.pair_id}: {self.variant.value} feature must have "
                f"dimension {expected}, got {self.values.shape}"
            )
        self.values.assert_finite("feature vector")

    @staticmethod
    def expected_dim(variant: FeatureVariant, hidden_dim: int) -> int:
        return 2 * hidden_dim if variant == FeatureVariant.TARGET_CONCAT else 6 * hidden_dim

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def build_target_concat(h1: HiddenStates, h2: HiddenStates,
                        span1: Sequence[int], span2: Sequence[int],
                        pooling: PoolingMode, *, pair_id: str = "",
                        lang_pair: tuple[str, str] = ("en", "en"),
                        gold: str = "?") -> FeatureVector:
    """Concatenate the pooled target-word embeddings of both sentences."""
    if h1.hidden_dim != h2.hidden_dim:
        raise DimensionError(
            f"hidden dims disagree: {h1.hidden_dim} vs {h2.hidden_dim}"
        )
    e1 = pool(ng.gather_rows(h1.matrix, span1), pooling)
    e2 = pool(ng.gather_rows(h2.matrix, span2), pooling)
    return FeatureVector(
        values=ng.concat([e1, e2]).detach(),
        pair_id=pair_id,
        variant=FeatureVariant.TARGET_CONCAT,
        hidden_dim=h1.hidden_dim,
        lang_pair=lang_pair,
        gold=gold,
    )


def null_embedding(model: TransformerEncoder, vocab: Vocabulary,
                   pooling: PoolingMode = PoolingMode.AVERAGE) -> ng.Tensor:
    """Embedding of the bare word "null" (specials only around it), cached
    per encoder instance and pooling mode."""
    cache = getattr(model, "_null_cache", None)
    if cache is None:
        cache = {}
        model._null_cache = cache
    key = (id(vocab), pooling)
    if key not in cache:
        tok = tokenize(vocab, NULL_WORD)
        hidden, shift = model.encode_wrapped(vocab, list(tok.ids))
        rows = ng.gather_rows(hidden.matrix, [i + shift for i in range(len(tok.ids))])
        cache[key] = pool(rows, pooling).detach()
    return cache[key]


def syntax_sentence_vector(target_rows: ng.Tensor,
                           head_rows: ng.Tensor | None,
                           dependent_rows: Sequence[ng.Tensor],
                           pooling: PoolingMode,
                           combine: DependentCombine,
                           null: ng.Tensor) -> ng.Tensor:
    """concat(target, head-or-null, combined-dependents-or-null) -> 3H."""
    target = pool(target_rows, pooling)
    head = null if head_rows is None else pool(head_rows, pooling)
    if dependent_rows:
        pooled = [pool(rows, pooling) for rows in dependent_rows]
        dep = pooled[0]
        for extra in pooled[1:]:
            dep = dep + extra
        if combine == DependentCombine.AVERAGE:
            dep = dep / len(pooled)
    else:
        dep = null
    if head.shape != target.shape or dep.shape != target.shape:
        raise DimensionError(
            f"slot dims disagree: target {target.shape}, head {head.shape}, "
            f"dependents {dep.shape}"
        )
    return ng.concat([target, head, dep])


@dataclass(frozen=True)
class SyntaxWordRows:
    """Hidden-state rows for the three syntax slots of one sentence."""

    target: ng.Tensor
    head: ng.Tensor | None
    dependents: tuple[ng.Tensor, ...]


def resolve_syntax_rows(hidden: HiddenStates, tok: TokenizedSentence, shift: int,
                        ann: DepAnnotation, target_token: int) -> SyntaxWordRows:
    """Map the target token plus its head and direct dependents onto
    sub-token rows of an encoded sentence."""

    def word_rows(token_index: int) -> ng.Tensor:
        _, start, end, _, _ = ann.tokens[token_index]
        indices = [i + shift for i in align_span(tok, (start, end))]
        return ng.gather_rows(hidden.matrix, indices)

    head_index = ann.head_of(target_token)
    return SyntaxWordRows(
        target=word_rows(target_token),
        head=None if head_index is None else word_rows(head_index),
        dependents=tuple(word_rows(i) for i in ann.dependents_of(target_token)),
    )


def build_syntax_sentence(hidden: HiddenStates, tok: TokenizedSentence, shift: int,
                          ann: DepAnnotation, target_token: int,
                          pooling: PoolingMode, combine: DependentCombine,
                          null: ng.Tensor) -> ng.Tensor:
    rows = resolve_syntax_rows(hidden, tok, shift, ann, target_token)
    return syntax_sentence_vector(rows.target, rows.head, rows.dependents,
                                  pooling, combine, null)


def build_syntax_pair(s1_vec: ng.Tensor, s2_vec: ng.Tensor, *, pair_id: str = "",
                      lang_pair: tuple[str, str] = ("en", "en"),
                      gold: str = "?") -> FeatureVector:
    """Concatenate the two per-sentence 3H vectors into a 6H pair feature."""
    if s1_vec.shape != s2_vec.shape:
        raise DimensionError(
            f"sentence vectors disagree: {s1_vec.shape} vs {s2_vec.shape}"
        )
    if s1_vec.ndim != 1 or s1_vec.shape[0] % 3 != 0:
        raise DimensionError(f"expected 3H sentence vectors, got {s1_vec.shape}")
    return FeatureVector(
        values=ng.concat([s1_vec, s2_vec]).detach(),
        pair_id=pair_id,
        variant=FeatureVariant.SYNTAX,
        hidden_dim=s1_vec.shape[0] // 3,
        lang_pair=lang_pair,
        gold=gold,
    )


def syntax_vector_for_pair_side(pair: WicPair, side: int, hidden: HiddenStates,
                                tok: TokenizedSentence, shift: int,
                                ann: DepAnnotation, pooling: PoolingMode,
                                combine: DependentCombine,
                                null: ng.Tensor) -> ng.Tensor:
    target_token = find_target_token(pair, side, ann)
    return build_syntax_sentence(hidden, tok, shift, ann, target_token,
                                 pooling, combine, null)


# ---------------------------------------------------------------------------
# Feature cache files
# ---------------------------------------------------------------------------

def save_feature_cache(path: str, vectors: list[FeatureVector]) -> None:
    if not vectors:
        raise ValidationError("refusing to write an empty feature cache")
    dim = vectors[0].dim
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"D={dim}\n")
        for vec in vectors:
            if vec.dim != dim:
                raise DimensionError(
                    f"pair {vec.pair_id}: dimension {vec.dim} != cache dim {dim}"
                )
            values = " ".join(repr(float(v)) for v in vec.values.data)
            fh.write(f"{vec.pair_id}\t{vec.gold}\t{values}\n")


def load_feature_cache(path: str) -> tuple[int, list[tuple[str, str, np.ndarray]]]:
    """Returns (dim, [(pair_id, label, values), ...]) in file order."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise ParseError(f"feature cache not found: {path}") from None
    if not lines or not lines[0].startswith("D="):
        raise ParseError(f"{path}: missing D=<int> header")
    try:
        dim = int(lines[0][2:])
    except ValueError:
        raise ParseError(f"{path}: malformed header {lines[0]!r}") from None
    rows: list[tuple[str, str, np.ndarray]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected pair_id TAB label TAB values")
        pair_id, label, values_text = parts
        try:
            values = np.array(values_text.split(), dtype=np.float64)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: malformed values") from None
        if values.size != dim:
            raise ParseError(
                f"{path}:{lineno}: {values.size} values, header says D={dim}"
            )
        rows.append((pair_id, label, values))
    return dim, rows
