"""Tests for tokenization, span alignment, and sub-token pooling."""

import numpy as np
import pytest

from crosswic import numgrad as ng
from crosswic import subword as sw
from crosswic.errors import AlignmentError, DimensionError, ValidationError


def make_vocab(extra=()):
    pieces = ["[PAD]", "[CLS]", "[SEP]", "[UNK]", "quali", "##fy", "cat", "dog",
              "run", "##s", "null", *extra]
    return sw.build_vocabulary(
        pieces, {"cls": "[CLS]", "sep": "[SEP]", "unk": "[UNK]", "pad": "[PAD]"}
    )


class TestVocabulary:
    def test_duplicate_piece_rejected(self):
        with pytest.raises(ValidationError):
            sw.build_vocabulary(["a", "a"], {"cls": "a", "sep": "a", "unk": "a", "pad": "a"})

    def test_specials_must_be_distinct(self):
        with pytest.raises(ValidationError):
            sw.build_vocabulary(
                ["[X]", "a"], {"cls": "[X]", "sep": "[X]", "unk": "[X]", "pad": "[X]"}
            )

    def test_file_roundtrip(self, tmp_path):
        vocab = make_vocab()
        path = tmp_path / "vocab.txt"
        sw.save_vocabulary(vocab, str(path))
        loaded = sw.load_vocabulary(str(path))
        assert loaded.pieces == vocab.pieces
        assert loaded.cls_id == vocab.cls_id
        assert loaded.unk_id == vocab.unk_id


class TestTokenize:
    def test_multipiece_word(self):
        tok = sw.tokenize(make_vocab(), "qualify")
        assert [make_vocab().pieces[i] for i in tok.ids] == ["quali", "##fy"]
        assert tok.offsets == ((0, 5), (5, 7))

    def test_exact_word_single_piece(self):
        vocab = make_vocab()
        tok = sw.tokenize(vocab, "cat")
        assert tok.ids == (vocab.piece_to_id["cat"],)
        assert tok.offsets == ((0, 3),)

    def test_unknown_word_is_single_unk(self):
        vocab = make_vocab()
        tok = sw.tokenize(vocab, "zebra")
        assert tok.ids == (vocab.unk_id,)
        assert tok.offsets == ((0, 5),)

    def test_unk_absorbs_residue(self):
        vocab = make_vocab()
        tok = sw.tokenize(vocab, "qualizzz")
        assert [vocab.pieces[i] for i in tok.ids] == ["quali", "[UNK]"]
        assert tok.offsets == ((0, 5), (5, 8))

    def test_continuation_matching(self):
        vocab = make_vocab()
        tok = sw.tokenize(vocab, "runs")
        assert [vocab.pieces[i] for i in tok.ids] == ["run", "##s"]

    def test_cjk_split_per_char(self):
        vocab = make_vocab(extra=["苹", "果"])
        tok = sw.tokenize(vocab, "苹果cat")
        assert [vocab.pieces[i] for i in tok.ids] == ["苹", "果", "cat"]
        assert tok.offsets == ((0, 1), (1, 2), (2, 5))

    def test_deterministic(self):
        vocab = make_vocab()
        text = "cat runs qualify zebra"
        assert sw.tokenize(vocab, text) == sw.tokenize(vocab, text)

    def test_empty_text_rejected(self):
        with pytest.raises(ValidationError):
            sw.tokenize(make_vocab(), "")

    @pytest.mark.parametrize("text", [
        "cat dog runs",
        "qualify the zebra",
        "苹果 runs",
        "  padded   words ",
    ])
    def test_offsets_reconstruct_words(self, text):
        tok = sw.tokenize(make_vocab(extra=["苹", "果", "the"]), text)
        rebuilt = "".join(tok.text[s:e] for s, e in tok.offsets)
        assert rebuilt == "".join(text.split())

    def test_offsets_ascending_nonoverlapping(self):
        tok = sw.tokenize(make_vocab(), "qualify runs cat")
        for (s1, e1), (s2, e2) in zip(tok.offsets, tok.offsets[1:]):
            assert s1 < e1 <= s2 < e2


class TestAlignSpan:
    def test_exact_token_span(self):
        tok = sw.tokenize(make_vocab(), "cat runs")
        assert sw.align_span(tok, (0, 3)) == [0]

    def test_multipiece_target(self):
        tok = sw.tokenize(make_vocab(), "qualify")
        assert sw.align_span(tok, (0, 7)) == [0, 1]

    def test_straddling_two_words(self):
        tok = sw.tokenize(make_vocab(), "qualify runs")
        # brute-force oracle: every token whose range intersects the span
        span = (5, 12)
        expected = [
            i for i, (s, e) in enumerate(tok.offsets) if s < span[1] and span[0] < e
        ]
        assert sw.align_span(tok, span) == expected
        assert len(expected) == 3  # ##fy, run, ##s

    def test_whole_word_span_returns_its_pieces(self):
        vocab = make_vocab()
        text = "cat qualify dog"
        tok = sw.tokenize(vocab, text)
        assert sw.align_span(tok, (4, 11)) == [1, 2]

    def test_whitespace_only_span_fails(self):
        tok = sw.tokenize(make_vocab(), "cat dog")
        with pytest.raises(AlignmentError):
            sw.align_span(tok, (3, 4))

    def test_span_outside_text_rejected(self):
        tok = sw.tokenize(make_vocab(), "cat")
        with pytest.raises(ValidationError):
            sw.align_span(tok, (0, 99))

    def test_specials_never_aligned(self):
        vocab = make_vocab()
        tok = sw.tokenize(vocab, "cat")
        ids, shift = sw.with_specials(vocab, tok)
        assert ids == [vocab.cls_id, vocab.piece_to_id["cat"], vocab.sep_id]
        assert shift == 1


class TestPool:
    def test_average_hand_value(self):
        out = sw.pool(ng.tensor([[2.0, 4.0], [4.0, 6.0]]), sw.PoolingMode.AVERAGE)
        assert out.tolist() == [3.0, 5.0]

    def test_single_row_identity(self):
        row = [[1.5, -2.0, 0.25]]
        out = sw.pool(ng.tensor(row), sw.PoolingMode.AVERAGE)
        assert out.tolist() == row[0]

    def test_empty_rejected(self):
        with pytest.raises(DimensionError):
            sw.pool(ng.Tensor(np.zeros((0, 4))), sw.PoolingMode.SUM)

    @pytest.mark.parametrize("k", range(1, 9))
    def test_sum_is_k_times_average(self, k):
        rng = np.random.default_rng(k)
        mat = ng.tensor(rng.normal(size=(k, 5)))
        avg = sw.pool(mat, sw.PoolingMode.AVERAGE)
        total = sw.pool(mat, sw.PoolingMode.SUM)
        np.testing.assert_allclose(total.data, k * avg.data, atol=1e-12)
        # direct recomputation oracle
        np.testing.assert_allclose(total.data, mat.data.sum(axis=0), atol=1e-15)
