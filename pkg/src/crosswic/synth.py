"""Synthetic corpora for self-tests and demos.

Marker corpus: every sentence follows `the <filler> bank <marker> today .`
with the target span on "bank". The pair label is T exactly when the two
marker words agree, so the label is a deterministic function of the token
adjacent to the target and any competent model can be driven to high
accuracy quickly.
"""

import os

import numpy as np

from . import corpus, subword

TARGET_WORD = "bank"
MARKERS = ("river", "money")
FILLERS = ("old", "small", "green")
SENTENCE_WORDS = ("the", "today", ".")


def marker_vocabulary() -> subword.Vocabulary:
    pieces = ["[PAD]", "[CLS]", "[SEP]", "[UNK]", "null",
              TARGET_WORD, *MARKERS, *FILLERS, *SENTENCE_WORDS]
    return subword.build_vocabulary(
        pieces, {"cls": "[CLS]", "sep": "[SEP]", "unk": "[UNK]", "pad": "[PAD]"}
    )


def _sentence(rng: np.random.Generator) -> tuple[str, tuple[int, int], str]:
    filler = FILLERS[rng.integers(0, len(FILLERS))]
    marker = MARKERS[rng.integers(0, len(MARKERS))]
    text = f"the {filler} {TARGET_WORD} {marker} today ."
    start = len(f"the {filler} ")
    return text, (start, start + len(TARGET_WORD)), marker


def make_marker_pairs(n: int, seed: int, id_prefix: str = "synth") -> list[corpus.WicPair]:
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        s1, span1, m1 = _sentence(rng)
        s2, span2, m2 = _sentence(rng)
        pairs.append(corpus.WicPair(
            pair_id=f"{id_prefix}.en-en.{i}",
            lang_pair=("en", "en"),
            sentence1=s1, sentence2=s2,
            span1=span1, span2=span2,
            lemma=TARGET_WORD, pos="NOUN",
            gold="T" if m1 == m2 else "F",
        ))
    return pairs


def marker_conllu_lines(pairs: list[corpus.WicPair]) -> list[str]:
    """Hand-written dependency stand-ins for the fixed marker template.

    `the <filler> bank <marker> today .` parses with bank as root, so the
    marker lands in bank's dependent set and the label signal survives the
    syntax feature construction.
    """
    lines = []
    heads_rels = [(3, "det"), (3, "amod"), (0, "root"), (3, "nmod"),
                  (3, "nmod"), (3, "punct")]
    for pair in pairs:
        for side in (1, 2):
            text = pair.sentence(side)
            words = text.split()
            assert len(words) == len(heads_rels), text
            lines.append(f"# sent_id = {corpus.sentence_key(pair.pair_id, side)}")
            lines.append(f"# text = {text}")
            for i, (word, (head, rel)) in enumerate(zip(words, heads_rels), start=1):
                lines.append("\t".join([str(i), word, word, "X", "_", "_",
                                        str(head), rel, "_", "_"]))
            lines.append("")
    return lines


def write_marker_corpus(out_dir: str, n_train: int = 200, n_test: int = 100,
                        seed: int = 0, with_conllu: bool = False) -> dict[str, str]:
    """Write training/test pair+gold files plus the vocabulary; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "train_data": os.path.join(out_dir, "training.en-en.data"),
        "train_gold": os.path.join(out_dir, "training.en-en.gold"),
        "test_data": os.path.join(out_dir, "test.en-en.data"),
        "test_gold": os.path.join(out_dir, "test.en-en.gold"),
        "vocab": os.path.join(out_dir, "vocab.txt"),
    }
    train = make_marker_pairs(n_train, seed=seed, id_prefix="training")
    test = make_marker_pairs(n_test, seed=seed + 1, id_prefix="test")
    corpus.save_pairs(train, paths["train_data"], paths["train_gold"])
    corpus.save_pairs(test, paths["test_data"], paths["test_gold"])
    subword.save_vocabulary(marker_vocabulary(), paths["vocab"])
    if with_conllu:
        for split, pairs in (("training", train), ("test", test)):
            path = os.path.join(out_dir, f"{split}.en-en.conllu")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("\n".join(marker_conllu_lines(pairs)))
            paths[f"{split}_conllu"] = path
    return paths
