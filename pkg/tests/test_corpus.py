"""Tests for pair/gold ingestion, CoNLL-U loading, and target resolution."""

import json

import pytest

from crosswic import corpus
from crosswic.errors import AlignmentError, ParseError, ValidationError


def write_json(path, payload):
    path.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")
    return str(path)


class TestLoadPairs:
    def test_fixture_loads_eight(self, pairs8):
        assert len(pairs8) == 8

    def test_table_fixture_labels(self, pairs8):
        # the first two pairs share their first sentence and carry F then T
        assert pairs8[0].gold == "F"
        assert pairs8[1].gold == "T"
        assert pairs8[0].sentence1 == pairs8[1].sentence1
        assert pairs8[0].target(1) == "mouse"
        assert pairs8[1].target(2) == "souris"

    def test_every_span_nonempty(self, pairs8):
        for p in pairs8:
            for side in (1, 2):
                assert p.target(side)
                assert p.target(side) == p.sentence(side)[slice(*p.span(side))]

    def test_empty_array_ok(self, tmp_path):
        path = write_json(tmp_path / "empty.json", [])
        split = corpus.load_pairs(path, lang_pair=("en", "en"), name="train")
        assert len(split) == 0

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("[{", encoding="utf-8")
        with pytest.raises(ParseError):
            corpus.load_pair_records(str(path))

    def test_record_missing_field_names_index(self, tmp_path):
        path = write_json(tmp_path / "p.json", [
            {"id": "x.en-en.0", "sentence1": "a cat", "sentence2": "a dog",
             "start1": 2, "end1": 5, "start2": 2},
        ])
        with pytest.raises(ParseError, match="record 0"):
            corpus.load_pair_records(str(path))

    def test_span_outside_sentence_names_id(self, tmp_path):
        path = write_json(tmp_path / "p.json", [
            {"id": "x.en-en.0", "sentence1": "a cat", "sentence2": "a dog",
             "start1": 2, "end1": 99, "start2": 2, "end2": 5},
        ])
        with pytest.raises(ValidationError, match="x.en-en.0"):
            corpus.load_pair_records(str(path))

    def test_duplicate_id(self, tmp_path):
        rec = {"id": "x.en-en.0", "sentence1": "a cat", "sentence2": "a dog",
               "start1": 2, "end1": 5, "start2": 2, "end2": 5}
        path = write_json(tmp_path / "p.json", [rec, rec])
        with pytest.raises(ValidationError, match="duplicate"):
            corpus.load_pair_records(str(path))

    def test_gold_join_by_id(self, tmp_path, fixture_dir):
        data = str(fixture_dir / "pairs_8.json")
        gold = str(fixture_dir / "gold_8.json")
        with_gold = corpus.load_pair_records(data, gold)
        without = corpus.load_pair_records(data)
        assert [p.gold for p in without] == ["?"] * 8
        assert corpus.strip_gold(with_gold) == without

    def test_gold_missing_pair(self, tmp_path):
        data = write_json(tmp_path / "p.json", [
            {"id": "x.en-en.0", "sentence1": "a cat", "sentence2": "a dog",
             "start1": 2, "end1": 5, "start2": 2, "end2": 5},
        ])
        gold = write_json(tmp_path / "g.json", [{"id": "other", "tag": "T"}])
        with pytest.raises(ValidationError):
            corpus.load_pair_records(data, gold)

    def test_roundtrip_serialization(self, pairs8, tmp_path):
        data = tmp_path / "out.json"
        gold = tmp_path / "out.gold.json"
        corpus.save_pairs(pairs8, str(data), str(gold))
        again = corpus.load_pair_records(str(data), str(gold))
        assert again == pairs8

    def test_mixed_lang_rejected_at_split_level(self, fixture_dir):
        with pytest.raises(ValidationError, match="mixed"):
            corpus.load_pairs(str(fixture_dir / "pairs_8.json"))

    def test_dev_subset_prefix(self, tmp_path):
        records = [
            {"id": f"d.en-en.{i}", "sentence1": "a cat", "sentence2": "a dog",
             "start1": 2, "end1": 5, "start2": 2, "end2": 5}
            for i in range(6)
        ]
        path = write_json(tmp_path / "dev.json", records)
        split = corpus.load_pairs(path, name="dev", dev_subset=3)
        assert [p.pair_id for p in split.selected()] == [r["id"] for r in records[:3]]
        with pytest.raises(ValidationError):
            corpus.load_pairs(path, name="dev", dev_subset=7)


class TestLoadConllu:
    def test_souris_head_is_mange(self, fixture_annotations):
        ann = fixture_annotations["fix.en-fr.0.2"]
        forms = [t[0] for t in ann.tokens]
        souris = forms.index("souris")
        head = ann.head_of(souris)
        assert ann.tokens[head][0] == "mange"

    def test_offsets_recovered(self, fixture_annotations):
        ann = fixture_annotations["fix.en-en.0.1"]
        text = "The cat chases after the mouse."
        for form, start, end, _, _ in ann.tokens:
            assert text[start:end] == form

    def test_zh_offsets_without_spaces(self, fixture_annotations):
        ann = fixture_annotations["fix.zh-zh.0.2"]
        assert [t[:3] for t in ann.tokens] == [
            ("苹果", 0, 2), ("发布", 2, 4), ("新", 4, 5), ("手机", 5, 7), ("。", 7, 8)
        ]

    def test_single_token_sentence_is_root(self, tmp_path):
        path = tmp_path / "solo.conllu"
        path.write_text(
            "# sent_id = solo.1\n# text = Bonjour\n"
            "1\tBonjour\tbonjour\tINTJ\t_\t_\t0\troot\t_\t_\n\n",
            encoding="utf-8",
        )
        ann = corpus.load_conllu(str(path))["solo.1"]
        assert len(ann.tokens) == 1
        assert ann.head_of(0) is None

    def test_missing_text_comment(self, tmp_path):
        path = tmp_path / "x.conllu"
        path.write_text(
            "# sent_id = a.1\n1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n",
            encoding="utf-8",
        )
        with pytest.raises(AlignmentError, match="a.1"):
            corpus.load_conllu(str(path))

    def test_form_not_in_text(self, tmp_path):
        path = tmp_path / "x.conllu"
        path.write_text(
            "# sent_id = a.1\n# text = Hello\n"
            "1\tGoodbye\t_\t_\t_\t_\t0\troot\t_\t_\n",
            encoding="utf-8",
        )
        with pytest.raises(AlignmentError, match="Goodbye"):
            corpus.load_conllu(str(path))

    def test_multiword_range_rows_skipped(self, tmp_path):
        path = tmp_path / "mwt.conllu"
        path.write_text(
            "# sent_id = m.1\n# text = du pain\n"
            "1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_\n"
            "1\tdu\tde\tADP\t_\t_\t2\tcase\t_\t_\n"
            "2\tpain\tpain\tNOUN\t_\t_\t0\troot\t_\t_\n\n",
            encoding="utf-8",
        )
        ann = corpus.load_conllu(str(path))["m.1"]
        assert [t[0] for t in ann.tokens] == ["du", "pain"]

    def test_bad_column_count(self, tmp_path):
        path = tmp_path / "x.conllu"
        path.write_text(
            "# sent_id = a.1\n# text = Hi\n1\tHi\thi\n", encoding="utf-8"
        )
        with pytest.raises(ParseError, match="10 columns"):
            corpus.load_conllu(str(path))

    def test_dependents_in_surface_order(self, fixture_annotations):
        ann = fixture_annotations["fix.en-en.0.2"]
        forms = [t[0] for t in ann.tokens]
        button = forms.index("button")
        deps = [forms[i] for i in ann.dependents_of(button)]
        assert deps == ["the", "right", "mouse"]


class TestFindTargetToken:
    def test_exact_token_match(self, pairs8, fixture_annotations):
        pair = pairs8[1]  # en-fr, souris target
        ann = fixture_annotations["fix.en-fr.0.2"]
        idx = corpus.find_target_token(pair, 2, ann)
        assert ann.tokens[idx][0] == "souris"

    def test_larger_overlap_wins(self):
        ann = corpus.DepAnnotation(
            sentence_id="t.1",
            tokens=(("a", 0, 1, 2, "det"), ("well", 2, 6, 4, "amod"),
                    ("-", 6, 7, 4, "punct"), ("known", 7, 12, 5, "amod"),
                    ("fact", 13, 17, 0, "root")),
        )
        pair = corpus.WicPair(
            pair_id="t.en-en.0", lang_pair=("en", "en"),
            sentence1="a well-known fact", sentence2="a well-known fact",
            span1=(4, 10), span2=(4, 10),
        )
        # overlap oracle: well=2, '-'=1, known=3 -> known
        overlaps = {
            tok[0]: max(0, min(10, tok[2]) - max(4, tok[1])) for tok in ann.tokens
        }
        assert max(overlaps, key=overlaps.get) == "known"
        idx = corpus.find_target_token(pair, 1, ann)
        assert ann.tokens[idx][0] == "known"

    def test_tie_breaks_leftmost(self):
        ann = corpus.DepAnnotation(
            sentence_id="t.1",
            tokens=(("ab", 0, 2, 0, "root"), ("cd", 3, 5, 1, "dep")),
        )
        pair = corpus.WicPair(
            pair_id="t.en-en.1", lang_pair=("en", "en"),
            sentence1="ab cd", sentence2="ab cd",
            span1=(1, 4), span2=(1, 4),  # one char overlap with each token
        )
        assert corpus.find_target_token(pair, 1, ann) == 0

    def test_no_overlap_errors(self):
        ann = corpus.DepAnnotation(
            sentence_id="t.1", tokens=(("hi", 0, 2, 0, "root"),),
        )
        pair = corpus.WicPair(
            pair_id="t.en-en.2", lang_pair=("en", "en"),
            sentence1="hi   x", sentence2="hi   x",
            span1=(3, 4), span2=(3, 4),
        )
        with pytest.raises(AlignmentError):
            corpus.find_target_token(pair, 1, ann)


class TestFixtureAlignment:
    def test_all_nonarabic_sides_annotated(self, pairs8, fixture_annotations):
        for pair in pairs8:
            for side, lang in ((1, pair.lang_pair[0]), (2, pair.lang_pair[1])):
                key = corpus.sentence_key(pair.pair_id, side)
                if lang == "ar":
                    assert key not in fixture_annotations
                    continue
                ann = fixture_annotations[key]
                idx = corpus.find_target_token(pair, side, ann)
                token = ann.tokens[idx]
                assert pair.sentence(side)[token[1]:token[2]] == token[0]

    def test_target_heads_match_hand_annotation(self, pairs8, fixture_annotations):
        # the motivating contrast: mouse <- chases vs mouse <- button
        pair = pairs8[0]
        ann1 = fixture_annotations["fix.en-en.0.1"]
        ann2 = fixture_annotations["fix.en-en.0.2"]
        idx1 = corpus.find_target_token(pair, 1, ann1)
        idx2 = corpus.find_target_token(pair, 2, ann2)
        assert ann1.tokens[ann1.head_of(idx1)][0] == "chases"
        assert ann2.tokens[ann2.head_of(idx2)][0] == "button"
