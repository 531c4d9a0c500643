import pathlib
import shutil

import pytest

from crosswic import corpus, subword, synth

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def build_lab_dir(root: pathlib.Path, n_train: int = 120, n_test: int = 48,
                  seed: int = 0) -> dict:
    """A self-contained experiment directory: marker-corpus en-en training
    and test splits, the 8-pair fixture fanned out into per-language test
    files, matching annotations, and a merged vocabulary."""
    data_dir = root / "data"
    conllu_dir = root / "conllu"
    data_dir.mkdir(parents=True, exist_ok=True)
    conllu_dir.mkdir(parents=True, exist_ok=True)
    paths = synth.write_marker_corpus(str(data_dir), n_train=n_train,
                                      n_test=n_test, seed=seed, with_conllu=True)
    shutil.move(paths["training_conllu"], conllu_dir / "training.en-en.conllu")
    shutil.move(paths["test_conllu"], conllu_dir / "test.en-en.conllu")

    fixture_pairs = corpus.load_pair_records(
        str(FIXTURES / "pairs_8.json"), str(FIXTURES / "gold_8.json")
    )
    by_lang: dict[str, list] = {}
    for pair in fixture_pairs:
        by_lang.setdefault(corpus.format_lang_pair(pair.lang_pair), []).append(pair)
    marker_test = corpus.load_pair_records(paths["test_data"], paths["test_gold"])
    for lang, pairs in by_lang.items():
        if lang == "en-en":
            pairs = marker_test + pairs
        corpus.save_pairs(pairs, str(data_dir / f"test.{lang}.data"),
                          str(data_dir / f"test.{lang}.gold"))

    annotations = (FIXTURES / "fixture.conllu").read_text(encoding="utf-8")
    blocks = [b for b in annotations.split("\n\n") if b.strip()]
    marker_blocks = (conllu_dir / "test.en-en.conllu").read_text(encoding="utf-8")
    for lang in by_lang:
        if lang == "ar-ar":
            continue  # no Arabic annotations on purpose
        wanted = [b for b in blocks if f"# sent_id = fix.{lang}." in b]
        content = "\n\n".join(wanted) + "\n"
        if lang == "en-en":
            content = marker_blocks.rstrip("\n") + "\n\n" + content
        (conllu_dir / f"test.{lang}.conllu").write_text(content, encoding="utf-8")

    merged_vocab = str(root / "vocab.txt")
    toy = subword.load_vocabulary(str(FIXTURES / "vocab_toy.txt"))
    marker = synth.marker_vocabulary()
    pieces = list(toy.pieces)
    pieces.extend(p for p in marker.pieces if p not in set(pieces))
    merged = subword.build_vocabulary(
        pieces, {"cls": "[CLS]", "sep": "[SEP]", "unk": "[UNK]", "pad": "[PAD]"}
    )
    subword.save_vocabulary(merged, merged_vocab)
    return {
        "data_dir": str(data_dir),
        "conllu_dir": str(conllu_dir),
        "vocab": merged_vocab,
        "lang_pairs": sorted(by_lang),
    }


@pytest.fixture(scope="session")
def fixture_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def pairs8():
    return corpus.load_pair_records(
        str(FIXTURES / "pairs_8.json"), str(FIXTURES / "gold_8.json")
    )


@pytest.fixture(scope="session")
def toy_vocab():
    return subword.load_vocabulary(str(FIXTURES / "vocab_toy.txt"))


@pytest.fixture(scope="session")
def fixture_annotations():
    return corpus.load_conllu(str(FIXTURES / "fixture.conllu"))


@pytest.fixture(scope="session")
def lab(tmp_path_factory):
    root = tmp_path_factory.mktemp("lab")
    return build_lab_dir(root)
