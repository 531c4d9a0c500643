"""Span classification head: a shared scoring vector produces unnormalized
per-token attention scores, the scores inside each target span are softmax
normalized, and the attention-weighted span embeddings of the two targets
are concatenated and mapped to two logits by a linear layer.

Everything outside the two spans is masked out by construction: only rows
indexed by a span ever enter the computation.
"""

from collections.abc import Sequence

import numpy as np

from . import numgrad as ng
from .encoder import HiddenStates
from .errors import DimensionError, SpanError

LABEL_TRUE = "T"
LABEL_FALSE = "F"


class SpanHeadParams:
    """Learnable state: scoring vector + bias and the 2 x 2H output layer."""

    def __init__(self, hidden_dim: int, seed: int = 0):
        if hidden_dim < 1:
            raise DimensionError(f"hidden dim must be positive, got {hidden_dim}")
        rng = np.random.default_rng(seed)
        self.hidden_dim = hidden_dim
        self.attn_vector = ng.Parameter(rng.normal(0.0, 0.02, size=hidden_dim),
                                        "head.attn_vector")
        self.attn_bias = ng.Parameter(np.zeros(1), "head.attn_bias")
        self.w_out = ng.Parameter(rng.normal(0.0, 0.02, size=(2, 2 * hidden_dim)),
                                  "head.w_out")
        self.b_out = ng.Parameter(np.zeros(2), "head.b_out")

    def parameters(self) -> list[ng.Parameter]:
        return [self.attn_vector, self.attn_bias, self.w_out, self.b_out]


def _check_span(span: Sequence[int], length: int) -> list[int]:
    span = list(span)
    if not span:
        raise SpanError("empty token span")
    bad = [i for i in span if not 0 <= i < length]
    if bad:
        raise DimensionError(f"span indices {bad} outside 0..{length - 1}")
    return span


def span_embed(hidden: HiddenStates, span: Sequence[int],
               params: SpanHeadParams) -> ng.Tensor:
    """Attention-weighted combination of the hidden rows inside one span."""
    span = _check_span(span, hidden.length)
    rows = ng.gather_rows(hidden.matrix, span)  # (k, H)
    scores = ng.matmul(rows, params.attn_vector) + params.attn_bias[0]
    weights = ng.softmax(scores)  # normalized over the span only
    return ng.matmul(weights, rows)


def span_attention_weights(hidden: HiddenStates, span: Sequence[int],
                           params: SpanHeadParams) -> np.ndarray:
    """The normalized span attention distribution (diagnostics/tests)."""
    span = _check_span(span, hidden.length)
    rows = hidden.matrix.data[span]
    scores = rows @ params.attn_vector.data + params.attn_bias.data[0]
    shifted = np.exp(scores - scores.max())
    return shifted / shifted.sum()


def forward_pair(hidden: HiddenStates, span1: Sequence[int], span2: Sequence[int],
                 params: SpanHeadParams) -> ng.Tensor:
    """Two output logits from the concatenated span embeddings."""
    e1 = span_embed(hidden, span1, params)
    e2 = span_embed(hidden, span2, params)
    return ng.matmul(params.w_out, ng.concat([e1, e2])) + params.b_out


def forward_pair_separate(hidden1: HiddenStates, hidden2: HiddenStates,
                          span1: Sequence[int], span2: Sequence[int],
                          params: SpanHeadParams) -> ng.Tensor:
    """Same head over separately encoded sentences."""
    e1 = span_embed(hidden1, span1, params)
    e2 = span_embed(hidden2, span2, params)
    return ng.matmul(params.w_out, ng.concat([e1, e2])) + params.b_out


def predict(logits: ng.Tensor) -> str:
    """Argmax with index 0 -> F and 1 -> T; exact ties resolve to F."""
    logits.assert_finite("logits")
    if logits.shape != (2,):
        raise DimensionError(f"expected 2 logits, got shape {logits.shape}")
    return LABEL_TRUE if logits.data[1] > logits.data[0] else LABEL_FALSE
