"""Tests for the span classification head."""

import math

import numpy as np
import pytest

from crosswic import numgrad as ng
from crosswic import spanhead as sh
from crosswic.checkpoint import load_checkpoint, restore_parameters, save_checkpoint
from crosswic.encoder import HiddenStates
from crosswic.errors import DimensionError, SpanError


def hidden_from(rows) -> HiddenStates:
    return HiddenStates(matrix=ng.tensor(rows))


def rand_hidden(rng, t=6, h=8) -> HiddenStates:
    return hidden_from(rng.normal(size=(t, h)))


class TestSpanEmbed:
    def test_singleton_span_returns_raw_row(self):
        rng = np.random.default_rng(0)
        hidden = rand_hidden(rng)
        params = sh.SpanHeadParams(8, seed=1)
        out = sh.span_embed(hidden, [3], params)
        np.testing.assert_array_equal(out.data, hidden.matrix.data[3])

    def test_zero_vector_gives_uniform_mean(self):
        rng = np.random.default_rng(1)
        hidden = rand_hidden(rng)
        params = sh.SpanHeadParams(8, seed=1)
        params.attn_vector.data[...] = 0.0
        out = sh.span_embed(hidden, [1, 2, 4], params)
        np.testing.assert_allclose(out.data, hidden.matrix.data[[1, 2, 4]].mean(axis=0),
                                   atol=1e-12)

    def test_hand_computed_two_token_mix(self):
        # scores engineered to (0, ln 3) -> weights (0.25, 0.75)
        h = np.zeros((2, 4))
        h[0, 1:] = [5.0, -1.0, 2.0]
        h[1, 0] = math.log(3.0)
        h[1, 1:] = [1.0, 0.5, -2.0]
        params = sh.SpanHeadParams(4, seed=0)
        params.attn_vector.data[...] = [1.0, 0.0, 0.0, 0.0]
        params.attn_bias.data[...] = 0.0
        out = sh.span_embed(hidden_from(h), [0, 1], params)
        np.testing.assert_allclose(out.data, 0.25 * h[0] + 0.75 * h[1], atol=1e-12)

    def test_empty_span_rejected(self):
        params = sh.SpanHeadParams(4)
        with pytest.raises(SpanError):
            sh.span_embed(hidden_from(np.zeros((3, 4))), [], params)

    def test_out_of_range_rejected(self):
        params = sh.SpanHeadParams(4)
        with pytest.raises(DimensionError):
            sh.span_embed(hidden_from(np.zeros((3, 4))), [5], params)

    @pytest.mark.parametrize("seed", range(10))
    def test_weights_positive_sum_one(self, seed):
        rng = np.random.default_rng(seed)
        hidden = rand_hidden(rng)
        params = sh.SpanHeadParams(8, seed=seed)
        w = sh.span_attention_weights(hidden, [0, 2, 5], params)
        assert np.all(w > 0)
        assert abs(w.sum() - 1.0) <= 1e-12


class TestForwardPair:
    def test_zero_output_layer_gives_bias(self):
        rng = np.random.default_rng(2)
        hidden = rand_hidden(rng)
        params = sh.SpanHeadParams(8, seed=2)
        params.w_out.data[...] = 0.0
        params.b_out.data[...] = [0.7, -0.3]
        logits = sh.forward_pair(hidden, [0, 1], [3], params)
        np.testing.assert_allclose(logits.data, [0.7, -0.3], atol=1e-15)

    def test_two_logits(self):
        rng = np.random.default_rng(3)
        logits = sh.forward_pair(rand_hidden(rng), [0], [1],
                                 sh.SpanHeadParams(8, seed=3))
        assert logits.shape == (2,)

    def test_masking_nonspan_rows_bit_exact(self):
        rng = np.random.default_rng(4)
        base = rng.normal(size=(7, 8))
        params = sh.SpanHeadParams(8, seed=4)
        span1, span2 = [1, 2], [5]
        reference = sh.forward_pair(hidden_from(base), span1, span2, params).data
        outside = [i for i in range(7) if i not in {1, 2, 5}]
        for i in outside:
            perturbed = base.copy()
            perturbed[i] += rng.normal(size=8) * 100
            logits = sh.forward_pair(hidden_from(perturbed), span1, span2, params).data
            np.testing.assert_array_equal(logits, reference)

    def test_swapped_spans_generally_differ(self):
        # concatenation order matters: not guaranteed symmetric by design
        rng = np.random.default_rng(5)
        hidden = rand_hidden(rng)
        params = sh.SpanHeadParams(8, seed=5)
        a = sh.forward_pair(hidden, [0], [1], params).data
        b = sh.forward_pair(hidden, [1], [0], params).data
        assert not np.array_equal(a, b)

    def test_separate_encoding_variant_matches_manual_concat(self):
        rng = np.random.default_rng(6)
        h1, h2 = rand_hidden(rng, 4), rand_hidden(rng, 5)
        params = sh.SpanHeadParams(8, seed=6)
        logits = sh.forward_pair_separate(h1, h2, [1], [2], params)
        e1 = sh.span_embed(h1, [1], params).data
        e2 = sh.span_embed(h2, [2], params).data
        manual = params.w_out.data @ np.concatenate([e1, e2]) + params.b_out.data
        np.testing.assert_allclose(logits.data, manual, atol=1e-15)


class TestPredict:
    def test_true_when_second_larger(self):
        assert sh.predict(ng.tensor([0.1, 0.9])) == "T"

    def test_false_when_first_larger(self):
        assert sh.predict(ng.tensor([0.9, 0.1])) == "F"

    def test_tie_breaks_false(self):
        assert sh.predict(ng.tensor([0.4, 0.4])) == "F"

    def test_shape_checked(self):
        with pytest.raises(DimensionError):
            sh.predict(ng.tensor([1.0, 2.0, 3.0]))


class TestGradients:
    @pytest.mark.parametrize("seed", range(5))
    def test_head_and_hidden_gradients(self, seed):
        rng = np.random.default_rng(seed)
        params = sh.SpanHeadParams(6, seed=seed)
        hidden_param = ng.Parameter(rng.normal(size=(5, 6)), "hidden")

        def loss():
            hidden = HiddenStates(matrix=ng.as_tensor(hidden_param))
            logits = sh.forward_pair(hidden, [0, 1], [3, 4], params)
            return ng.cross_entropy(logits, seed % 2)

        err = ng.grad_check(loss, params.parameters() + [hidden_param], eps=1e-5)
        assert err < 1e-4


class TestCheckpoint:
    def test_roundtrip_bit_exact(self, tmp_path):
        params = sh.SpanHeadParams(8, seed=9)
        path = tmp_path / "head.ckpt"
        save_checkpoint(str(path), params.parameters())
        restored = sh.SpanHeadParams(8, seed=123)
        restore_parameters(restored.parameters(), load_checkpoint(str(path)))
        for a, b in zip(params.parameters(), restored.parameters()):
            np.testing.assert_array_equal(a.data, b.data)
