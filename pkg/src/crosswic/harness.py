"""Experiment orchestration: the fine-tuning loop, frozen-feature
experiments, evaluation, grid reporting, and deterministic seeding.

Data files live under a directory using `<split>.<pair>.data` /
`<split>.<pair>.gold` names with split prefixes training/dev/test;
dependency annotations (when used) under `<split>.<pair>.conllu` in the
configured annotation directory. Every run writes results.csv,
predictions.csv, report.txt and report.csv into its output directory, and
identical (config, seed) runs produce byte-identical files.
"""

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from . import classifiers as cl
from . import corpus
from . import features as ft
from . import numgrad as ng
from . import spanhead as sh
from . import subword as sw
from .checkpoint import save_checkpoint
from .encoder import (
    EncoderConfig,
    PrecomputedStore,
    TransformerEncoder,
    load_store,
)
from .errors import ConfigError, DataError, DimensionError
from .subword import PoolingMode

log = logging.getLogger("crosswic")

STRATEGIES = (
    "finetune",
    "feature_lr",
    "feature_mlp",
    "feature_syntax_lr",
    "feature_syntax_mlp",
)

SYNTAX_STRATEGIES = ("feature_syntax_lr", "feature_syntax_mlp")

# canonical column order for report grids
DEFAULT_PAIR_ORDER = (
    "en-en", "zh-zh", "fr-fr", "ru-ru", "ar-ar",
    "en-zh", "en-fr", "en-ru", "en-ar",
)

# expected (train, dev, test) sizes of the public release, asserted only
# when the real dataset is present
PUBLIC_SPLIT_SIZES = {
    "en-en": (8000, 500, 1000),
    "ar-ar": (None, 500, 1000),
    "fr-fr": (None, 500, 1000),
    "ru-ru": (None, 500, 1000),
    "zh-zh": (None, 500, 1000),
    "en-ar": (None, None, 1000),
    "en-fr": (None, None, 1000),
    "en-ru": (None, None, 1000),
    "en-zh": (None, None, 1000),
}

SPLIT_FILE_PREFIX = {"train": "training", "dev": "dev", "test": "test"}


def finetune_regime(seed: int = 0) -> cl.TrainRegime:
    """3 epochs, batch 32, lr 1e-5, AdamW."""
    return cl.TrainRegime(
        max_iters=3, batch_size=32, learning_rate=1e-5,
        optimizer=ng.OptimizerConfig("adamw", 1e-5), seed=seed,
    )


@dataclass(frozen=True)
class EncoderSource:
    kind: str  # "toy" | "store"
    config: EncoderConfig | None = None
    vocab_path: str | None = None
    store_path: str | None = None

    def __post_init__(self):
        if self.kind == "toy":
            if self.config is None or not self.vocab_path:
                raise ConfigError("toy encoder source needs a config and a vocabulary path")
        elif self.kind == "store":
            if not self.store_path:
                raise ConfigError("store encoder source needs a store path")
        else:
            raise ConfigError(f"unknown encoder source kind {self.kind!r}")


@dataclass
class ExperimentConfig:
    strategy: str
    encoder: EncoderSource
    data_dir: str
    out_dir: str
    eval_pairs: tuple[str, ...] = ("en-en",)
    train_pair: str = "en-en"
    pooling: PoolingMode = PoolingMode.AVERAGE
    dependent_combine: ft.DependentCombine = ft.DependentCombine.SUM
    regime: cl.TrainRegime | None = None
    dev_subset: int | None = None
    conllu_dir: str | None = None
    joint_features: bool = False
    seed: int = 0
    system_label: str | None = None
    checkpoint_path: str | None = None
    features_dir: str | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; pick one of {STRATEGIES}")
        if self.strategy in SYNTAX_STRATEGIES and self.encoder.kind == "toy" \
                and not self.conllu_dir:
            raise ConfigError("syntax strategies need a conllu_dir with annotations")
        if self.strategy == "finetune" and self.encoder.kind == "store":
            raise ConfigError("a precomputed store cannot be fine-tuned")
        if self.train_pair != "en-en":
            raise ConfigError(
                "training data exists only for en-en; refusing to train on "
                f"{self.train_pair!r} (zero-shot contract)"
            )
        if self.joint_features and self.encoder.kind == "store":
            raise ConfigError("joint feature encoding needs the toy encoder")
        if self.joint_features and self.strategy == "finetune":
            raise ConfigError("joint_features applies to feature strategies only")
        for pair in self.eval_pairs:
            corpus.parse_lang_pair(pair)

    @property
    def label(self) -> str:
        base = self.system_label or self.strategy
        if self.joint_features and not base.endswith("+joint"):
            base += "+joint"
        return base

    def default_regime(self) -> cl.TrainRegime:
        if self.strategy == "finetune":
            return finetune_regime(seed=self.seed)
        if self.strategy.endswith("_lr"):
            return cl.lr_regime(seed=self.seed)
        return cl.mlp_regime(seed=self.seed)

    def resolved_regime(self) -> cl.TrainRegime:
        return self.regime if self.regime is not None else self.default_regime()


@dataclass(frozen=True)
class ResultRow:
    system: str
    lang_pair: str
    n: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.n


@dataclass(frozen=True)
class PredictionRow:
    system: str
    lang_pair: str
    pair_id: str
    prediction: str
    gold: str


@dataclass
class RunResult:
    system: str
    rows: list[ResultRow] = field(default_factory=list)
    predictions: list[PredictionRow] = field(default_factory=list)
    metrics: list[dict] = field(default_factory=list)
    skipped: dict[str, str] = field(default_factory=dict)  # lang_pair -> reason
    results_path: str | None = None
    predictions_path: str | None = None
    report_path: str | None = None


def evaluate(predictions: list[str], gold: list[str]) -> float:
    """Fraction of matching labels."""
    if len(predictions) != len(gold):
        raise DimensionError(
            f"{len(predictions)} predictions but {len(gold)} gold labels"
        )
    if not predictions:
        raise DimensionError("cannot evaluate zero predictions")
    return sum(p == g for p, g in zip(predictions, gold)) / len(predictions)


# ---------------------------------------------------------------------------
# Data access
# ---------------------------------------------------------------------------

def split_paths(data_dir: str, split: str, pair: str) -> tuple[str, str]:
    prefix = SPLIT_FILE_PREFIX[split]
    return (os.path.join(data_dir, f"{prefix}.{pair}.data"),
            os.path.join(data_dir, f"{prefix}.{pair}.gold"))


def load_split(data_dir: str, split: str, pair: str, *, required: bool = True,
               dev_subset: int | None = None) -> corpus.DatasetSplit | None:
    data_path, gold_path = split_paths(data_dir, split, pair)
    if not os.path.exists(data_path):
        if required:
            raise DataError(f"missing {split} data for {pair}: {data_path}")
        return None
    gold = gold_path if os.path.exists(gold_path) else None
    return corpus.load_pairs(
        data_path, gold, lang_pair=corpus.parse_lang_pair(pair), name=split,
        dev_subset=dev_subset if split == "dev" else None,
    )


def conllu_path(conllu_dir: str, split: str, pair: str) -> str:
    return os.path.join(conllu_dir, f"{SPLIT_FILE_PREFIX[split]}.{pair}.conllu")


def load_annotations(conllu_dir: str | None, split: str,
                     pair: str) -> dict[str, corpus.DepAnnotation] | None:
    if conllu_dir is None:
        return None
    path = conllu_path(conllu_dir, split, pair)
    if not os.path.exists(path):
        return None
    return corpus.load_conllu(path)


# ---------------------------------------------------------------------------
# Feature construction over whole splits
# ---------------------------------------------------------------------------

class _SkipLangPair(Exception):
    """Internal: this (split, lang-pair) cell cannot be built; render `--`."""


class ToyEncoderContext:
    """Frozen or trainable toy encoder plus its vocabulary and caches."""

    def __init__(self, source: EncoderSource, seed: int):
        self.vocab = sw.load_vocabulary(source.vocab_path)
        cfg = source.config
        self.model = TransformerEncoder(cfg, vocab_size=len(self.vocab), seed=seed)
        self._tok_cache: dict[str, sw.TokenizedSentence] = {}

    def tokenized(self, text: str) -> sw.TokenizedSentence:
        tok = self._tok_cache.get(text)
        if tok is None:
            tok = sw.tokenize(self.vocab, text)
            self._tok_cache[text] = tok
        return tok

    def encode_side(self, text: str):
        tok = self.tokenized(text)
        hidden, shift = self.model.encode_wrapped(self.vocab, list(tok.ids))
        return tok, hidden, shift


def _toy_target_concat(ctx: ToyEncoderContext, pair: corpus.WicPair,
                       pooling: PoolingMode, joint: bool) -> ft.FeatureVector:
    if joint:
        tok1, tok2 = ctx.tokenized(pair.sentence1), ctx.tokenized(pair.sentence2)
        enc = ctx.model.encode_joint(list(tok1.ids), list(tok2.ids),
                                     ctx.vocab.cls_id, ctx.vocab.sep_id)
        idx1 = [i + enc.shift1 for i in sw.align_span(tok1, pair.span1)]
        idx2 = [i + enc.shift2 for i in sw.align_span(tok2, pair.span2)]
        return ft.build_target_concat(enc.hidden, enc.hidden, idx1, idx2, pooling,
                                      pair_id=pair.pair_id,
                                      lang_pair=pair.lang_pair, gold=pair.gold)
    tok1, h1, shift1 = ctx.encode_side(pair.sentence1)
    tok2, h2, shift2 = ctx.encode_side(pair.sentence2)
    idx1 = [i + shift1 for i in sw.align_span(tok1, pair.span1)]
    idx2 = [i + shift2 for i in sw.align_span(tok2, pair.span2)]
    return ft.build_target_concat(h1, h2, idx1, idx2, pooling,
                                  pair_id=pair.pair_id,
                                  lang_pair=pair.lang_pair, gold=pair.gold)


def _toy_syntax(ctx: ToyEncoderContext, pair: corpus.WicPair,
                annotations: dict[str, corpus.DepAnnotation] | None,
                pooling: PoolingMode, combine: ft.DependentCombine) -> ft.FeatureVector:
    if annotations is None:
        raise _SkipLangPair("no annotation file")
    null = ft.null_embedding(ctx.model, ctx.vocab, pooling)
    side_vectors = []
    for side in (1, 2):
        key = corpus.sentence_key(pair.pair_id, side)
        ann = annotations.get(key)
        if ann is None:
            raise _SkipLangPair(f"no annotation for sentence {key}")
        tok, hidden, shift = ctx.encode_side(pair.sentence(side))
        side_vectors.append(ft.syntax_vector_for_pair_side(
            pair, side, hidden, tok, shift, ann, pooling, combine, null))
    return ft.build_syntax_pair(side_vectors[0], side_vectors[1],
                                pair_id=pair.pair_id,
                                lang_pair=pair.lang_pair, gold=pair.gold)


def _store_word_rows(store: PrecomputedStore, key: str) -> ng.Tensor | None:
    hidden = store.get_raw(key)
    return None if hidden is None else hidden.matrix


def _store_target_concat(store: PrecomputedStore, pair: corpus.WicPair,
                         pooling: PoolingMode) -> ft.FeatureVector:
    sides = []
    for side in (1, 2):
        hidden = store.get(pair.pair_id, side)
        if hidden is None:
            raise _SkipLangPair(f"store lacks record {pair.pair_id}.{side}")
        sides.append(hidden)
    return ft.build_target_concat(
        sides[0], sides[1], range(sides[0].length), range(sides[1].length),
        pooling, pair_id=pair.pair_id, lang_pair=pair.lang_pair, gold=pair.gold,
    )


def _store_syntax(store: PrecomputedStore, pair: corpus.WicPair,
                  pooling: PoolingMode,
                  combine: ft.DependentCombine) -> ft.FeatureVector:
    null_rows = _store_word_rows(store, "null.1")
    if null_rows is None:
        raise DataError("store lacks the null.1 record required for syntax features")
    null = sw.pool(null_rows, pooling)
    side_vectors = []
    for side in (1, 2):
        base = f"{pair.pair_id}.{side}"
        target = _store_word_rows(store, base)
        if target is None:
            raise _SkipLangPair(f"store lacks record {base}")
        head = _store_word_rows(store, base + ".h")
        deps_mat = _store_word_rows(store, base + ".d")
        deps = [] if deps_mat is None else [deps_mat[i:i + 1, :]
                                            for i in range(deps_mat.shape[0])]
        side_vectors.append(ft.syntax_sentence_vector(
            target, head, deps, pooling, combine, null))
    return ft.build_syntax_pair(side_vectors[0], side_vectors[1],
                                pair_id=pair.pair_id,
                                lang_pair=pair.lang_pair, gold=pair.gold)


def build_split_features(cfg: ExperimentConfig, backend, split: corpus.DatasetSplit,
                         annotations=None) -> list[ft.FeatureVector]:
    """Feature vectors for every selected pair of one split; raises
    _SkipLangPair when the cell cannot be built at all."""
    syntax = cfg.strategy in SYNTAX_STRATEGIES
    vectors = []
    for pair in split.selected():
        if isinstance(backend, ToyEncoderContext):
            if syntax:
                vec = _toy_syntax(backend, pair, annotations, cfg.pooling,
                                  cfg.dependent_combine)
            else:
                vec = _toy_target_concat(backend, pair, cfg.pooling,
                                         cfg.joint_features)
        else:
            if syntax:
                vec = _store_syntax(backend, pair, cfg.pooling, cfg.dependent_combine)
            else:
                vec = _store_target_concat(backend, pair, cfg.pooling)
        vectors.append(vec)
    return vectors


def _assert_training_provenance(vectors) -> None:
    off_pairs = sorted({
        corpus.format_lang_pair(v.lang_pair) for v in vectors
        if v.lang_pair != ("en", "en")
    })
    if off_pairs:
        raise ConfigError(
            f"zero-shot contract violated: non en-en examples {off_pairs} "
            "reached a training loop"
        )


# ---------------------------------------------------------------------------
# Feature-extraction experiments
# ---------------------------------------------------------------------------

def _make_backend(cfg: ExperimentConfig):
    if cfg.encoder.kind == "toy":
        return ToyEncoderContext(cfg.encoder, seed=cfg.seed)
    return load_store(cfg.encoder.store_path)


def _train_classifier(cfg: ExperimentConfig, train_vectors):
    labels = [v.gold for v in train_vectors]
    unknown = [v.pair_id for v in train_vectors if v.gold == corpus.GOLD_UNKNOWN]
    if unknown:
        raise DataError(f"training pairs without gold labels: {unknown[:5]}")
    _assert_training_provenance(train_vectors)
    regime = cfg.resolved_regime()
    if cfg.strategy.endswith("_lr"):
        return cl.train_lr(train_vectors, labels, regime)
    return cl.train_mlp(train_vectors, labels, regime)


def _load_cached_features(cfg: ExperimentConfig, split: str, pair: str):
    path = os.path.join(cfg.features_dir, f"{SPLIT_FILE_PREFIX[split]}.{pair}."
                        f"{_variant(cfg).value}.features")
    if not os.path.exists(path):
        raise _SkipLangPair(f"no feature cache {path}")
    _, rows = ft.load_feature_cache(path)
    lang = corpus.parse_lang_pair(pair)
    return [
        ft.FeatureVector(
            values=ng.Tensor(values), pair_id=pair_id, variant=_variant(cfg),
            hidden_dim=_cache_hidden_dim(_variant(cfg), values.size),
            lang_pair=lang, gold=label,
        )
        for pair_id, label, values in rows
    ]


def _variant(cfg: ExperimentConfig) -> ft.FeatureVariant:
    return (ft.FeatureVariant.SYNTAX if cfg.strategy in SYNTAX_STRATEGIES
            else ft.FeatureVariant.TARGET_CONCAT)


def _cache_hidden_dim(variant: ft.FeatureVariant, dim: int) -> int:
    divisor = 2 if variant == ft.FeatureVariant.TARGET_CONCAT else 6
    if dim % divisor:
        raise DataError(f"cached feature dim {dim} not divisible by {divisor}")
    return dim // divisor


def run_feature_experiment(cfg: ExperimentConfig) -> RunResult:
    """Train a frozen-feature classifier on en-en and evaluate zero-shot."""
    if cfg.strategy == "finetune":
        raise ConfigError("run_feature_experiment cannot run the finetune strategy")
    backend = None if cfg.features_dir else _make_backend(cfg)
    result = RunResult(system=cfg.label)

    def features_for(split_name: str, pair: str, required: bool):
        if cfg.features_dir:
            return _load_cached_features(cfg, split_name, pair)
        split = load_split(cfg.data_dir, split_name, pair, required=required,
                           dev_subset=cfg.dev_subset)
        if split is None:
            raise _SkipLangPair(f"no {split_name} data for {pair}")
        annotations = load_annotations(cfg.conllu_dir, split_name, pair)
        return build_split_features(cfg, backend, split, annotations)

    try:
        train_vectors = features_for("train", cfg.train_pair, required=True)
    except _SkipLangPair as skip:
        raise DataError(f"cannot build training features: {skip}") from None
    if isinstance(backend, PrecomputedStore):
        expected = ft.FeatureVector.expected_dim(_variant(cfg), backend.hidden_dim)
        for vec in train_vectors:
            if vec.dim != expected:
                raise DataError(
                    f"feature dim {vec.dim} != expected {expected} for "
                    f"H={backend.hidden_dim}"
                )
    model = _train_classifier(cfg, train_vectors)
    if cfg.checkpoint_path:
        save_checkpoint(cfg.checkpoint_path, model.parameters())

    for pair in cfg.eval_pairs:
        try:
            vectors = features_for("test", pair, required=False)
        except _SkipLangPair as skip:
            log.warning("skipping %s: %s", pair, skip)
            result.skipped[pair] = str(skip)
            continue
        predictions = model.predict(vectors)
        golds = [v.gold for v in vectors]
        result.predictions.extend(
            PredictionRow(cfg.label, pair, v.pair_id, p, g)
            for v, p, g in zip(vectors, predictions, golds)
        )
        scored = [(p, g) for p, g in zip(predictions, golds)
                  if g != corpus.GOLD_UNKNOWN]
        if scored:
            correct = sum(p == g for p, g in scored)
            result.rows.append(ResultRow(cfg.label, pair, len(scored), correct))
        else:
            log.warning("no gold labels for %s; accuracy cell left empty", pair)
            result.skipped[pair] = "no gold labels"
    return result


def extract_features(cfg: ExperimentConfig, splits: tuple[str, ...] = ("train", "test"),
                     out_dir: str | None = None) -> list[str]:
    """Write feature cache files for the configured pairs; returns paths."""
    backend = _make_backend(cfg)
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for split_name in splits:
        pairs = (cfg.train_pair,) if split_name == "train" else cfg.eval_pairs
        for pair in pairs:
            split = load_split(cfg.data_dir, split_name, pair, required=False,
                               dev_subset=cfg.dev_subset)
            if split is None:
                continue
            annotations = load_annotations(cfg.conllu_dir, split_name, pair)
            try:
                vectors = build_split_features(cfg, backend, split, annotations)
            except _SkipLangPair as skip:
                log.warning("not caching %s %s: %s", split_name, pair, skip)
                continue
            path = os.path.join(
                out_dir,
                f"{SPLIT_FILE_PREFIX[split_name]}.{pair}.{_variant(cfg).value}.features",
            )
            ft.save_feature_cache(path, vectors)
            written.append(path)
    return written


# ---------------------------------------------------------------------------
# Fine-tuning
# ---------------------------------------------------------------------------

@dataclass
class FinetunedModel:
    ctx: ToyEncoderContext
    head: sh.SpanHeadParams

    def predict_pair(self, pair: corpus.WicPair) -> str:
        logits = self._logits(pair, train=False, dropout_rng=None)
        return sh.predict(logits)

    def _logits(self, pair: corpus.WicPair, train: bool, dropout_rng):
        tok1 = self.ctx.tokenized(pair.sentence1)
        tok2 = self.ctx.tokenized(pair.sentence2)
        enc = self.ctx.model.encode_joint(
            list(tok1.ids), list(tok2.ids),
            self.ctx.vocab.cls_id, self.ctx.vocab.sep_id,
            train=train, dropout_rng=dropout_rng,
        )
        idx1 = [i + enc.shift1 for i in sw.align_span(tok1, pair.span1)]
        idx2 = [i + enc.shift2 for i in sw.align_span(tok2, pair.span2)]
        return sh.forward_pair(enc.hidden, idx1, idx2, self.head)


def run_finetune(cfg: ExperimentConfig) -> tuple[RunResult, FinetunedModel]:
    """Joint-encode pairs, train encoder + span head end to end with AdamW."""
    if cfg.strategy != "finetune":
        raise ConfigError(f"run_finetune got strategy {cfg.strategy!r}")
    regime = cfg.resolved_regime()
    ctx = ToyEncoderContext(cfg.encoder, seed=cfg.seed)
    head = sh.SpanHeadParams(ctx.model.hidden_dim, seed=cfg.seed + 1)
    model = FinetunedModel(ctx=ctx, head=head)

    train_split = load_split(cfg.data_dir, "train", cfg.train_pair, required=True)
    if not train_split.pairs:
        raise DataError(f"training split for {cfg.train_pair} is empty")
    unknown = [p.pair_id for p in train_split.pairs if p.gold == corpus.GOLD_UNKNOWN]
    if unknown:
        raise DataError(f"training pairs without gold labels: {unknown[:5]}")
    off_lang = [p.pair_id for p in train_split.pairs if p.lang_pair != ("en", "en")]
    if off_lang:
        raise ConfigError(
            f"zero-shot contract violated by training pairs: {off_lang[:5]}"
        )
    dev_split = load_split(cfg.data_dir, "dev", cfg.train_pair, required=False,
                           dev_subset=cfg.dev_subset)

    params = ctx.model.parameters() + head.parameters()
    optimizer = ng.Optimizer(params, regime.optimizer)
    shuffle_rng = np.random.default_rng(cfg.seed + 2)
    dropout_rng = np.random.default_rng(cfg.seed + 3)
    golds = [1 if p.gold == "T" else 0 for p in train_split.pairs]

    result = RunResult(system=cfg.label)
    for epoch in range(1, regime.max_iters + 1):
        order = shuffle_rng.permutation(len(train_split.pairs))
        epoch_loss = 0.0
        for start in range(0, len(order), regime.batch_size):
            batch = order[start:start + regime.batch_size]
            optimizer.zero_grad()
            losses = []
            for j in batch:
                logits = model._logits(train_split.pairs[j], train=True,
                                       dropout_rng=dropout_rng)
                losses.append(ng.cross_entropy(logits, golds[j]))
            total = losses[0]
            for extra in losses[1:]:
                total = total + extra
            loss = total / len(batch)
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item() * len(batch)
        entry = {"epoch": epoch, "train_loss": epoch_loss / len(order)}
        if dev_split is not None and dev_split.selected():
            scored = [p for p in dev_split.selected() if p.gold != corpus.GOLD_UNKNOWN]
            if scored:
                predictions = [model.predict_pair(p) for p in scored]
                entry["dev_accuracy"] = evaluate(predictions, [p.gold for p in scored])
        result.metrics.append(entry)

    for pair in cfg.eval_pairs:
        split = load_split(cfg.data_dir, "test", pair, required=False)
        if split is None:
            log.warning("no test data for %s", pair)
            result.skipped[pair] = "no test data"
            continue
        predictions = [model.predict_pair(p) for p in split.pairs]
        result.predictions.extend(
            PredictionRow(cfg.label, pair, p.pair_id, pred, p.gold)
            for p, pred in zip(split.pairs, predictions)
        )
        scored = [(pred, p.gold) for p, pred in zip(split.pairs, predictions)
                  if p.gold != corpus.GOLD_UNKNOWN]
        if scored:
            correct = sum(pred == g for pred, g in scored)
            result.rows.append(ResultRow(cfg.label, pair, len(scored), correct))
        else:
            result.skipped[pair] = "no gold labels"

    if cfg.checkpoint_path:
        save_checkpoint(cfg.checkpoint_path, params)
    return result, model


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Dispatch on strategy, then persist results under cfg.out_dir."""
    if cfg.strategy == "finetune":
        result, _ = run_finetune(cfg)
    else:
        result = run_feature_experiment(cfg)
    write_run_outputs(cfg, result)
    return result


# ---------------------------------------------------------------------------
# Result files and the report grid
# ---------------------------------------------------------------------------

class ResultGrid:
    """(system label, lang pair) -> counted accuracy cell."""

    def __init__(self):
        self._cells: dict[tuple[str, str], ResultRow] = {}
        self._systems: list[str] = []

    def add_row(self, row: ResultRow) -> None:
        if not 0 <= row.correct <= row.n or row.n <= 0:
            raise DataError(f"invalid result row {row}")
        key = (row.system, row.lang_pair)
        if key in self._cells:
            raise DataError(f"duplicate result cell for {key}")
        self._cells[key] = row
        if row.system not in self._systems:
            self._systems.append(row.system)

    @property
    def systems(self) -> list[str]:
        return list(self._systems)

    def lang_pairs(self) -> list[str]:
        present = {pair for _, pair in self._cells}
        ordered = [p for p in DEFAULT_PAIR_ORDER if p in present]
        ordered.extend(sorted(present - set(DEFAULT_PAIR_ORDER)))
        return ordered

    def cell(self, system: str, pair: str) -> ResultRow | None:
        return self._cells.get((system, pair))

    def is_empty(self) -> bool:
        return not self._cells

    def filtered(self, *, include_joint: bool) -> "ResultGrid":
        grid = ResultGrid()
        for (system, _), row in sorted(self._cells.items(),
                                       key=lambda kv: (self._systems.index(kv[0][0]),
                                                       kv[0][1])):
            if not include_joint and system.endswith("+joint"):
                continue
            grid.add_row(row)
        return grid


def format_percent(accuracy: float) -> str:
    if not 0.0 <= accuracy <= 1.0:
        raise DataError(f"accuracy {accuracy} outside [0, 1]")
    return f"{100.0 * accuracy:.1f}%"

ABSENT_CELL = "--"


def emit_report(grid: ResultGrid, pairs: list[str] | None = None) -> tuple[str, str]:
    """Render the grid as an aligned text table and as CSV.

    `pairs` forces the column set (absent cells render as --); by default
    the columns are the pairs present, in the canonical order.
    """
    if grid.is_empty():
        raise DataError("cannot report an empty result grid")
    if pairs is None:
        pairs = grid.lang_pairs()
    header = ["system", *pairs]
    body = []
    for system in grid.systems:
        cells = []
        for pair in pairs:
            row = grid.cell(system, pair)
            cells.append(ABSENT_CELL if row is None else format_percent(row.accuracy))
        body.append([system, *cells])

    widths = [max(len(line[i]) for line in [header, *body]) for i in range(len(header))]
    def fmt(line):
        return "  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
    text = "\n".join([fmt(header), *(fmt(line) for line in body)]) + "\n"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for line in body:
        writer.writerow(line)
    return text, buf.getvalue()


def write_results_csv(path: str, rows: list[ResultRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["system", "lang_pair", "n", "correct", "accuracy"])
        for row in rows:
            writer.writerow([row.system, row.lang_pair, row.n, row.correct,
                             repr(row.accuracy)])


def read_results_csv(path: str) -> list[ResultRow]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            rows = []
            for record in reader:
                rows.append(ResultRow(record["system"], record["lang_pair"],
                                      int(record["n"]), int(record["correct"])))
            return rows
    except FileNotFoundError:
        raise DataError(f"results file not found: {path}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed results file: {exc}") from exc


def write_predictions_csv(path: str, rows: list[PredictionRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["system", "lang_pair", "pair_id", "prediction", "gold"])
        for row in rows:
            writer.writerow([row.system, row.lang_pair, row.pair_id,
                             row.prediction, row.gold])


def read_predictions_csv(path: str) -> list[PredictionRow]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            return [PredictionRow(r["system"], r["lang_pair"], r["pair_id"],
                                  r["prediction"], r["gold"]) for r in reader]
    except FileNotFoundError:
        raise DataError(f"predictions file not found: {path}") from None
    except (KeyError, TypeError) as exc:
        raise DataError(f"{path}: malformed predictions file: {exc}") from exc


def write_run_outputs(cfg: ExperimentConfig, result: RunResult) -> None:
    os.makedirs(cfg.out_dir, exist_ok=True)
    result.results_path = os.path.join(cfg.out_dir, "results.csv")
    result.predictions_path = os.path.join(cfg.out_dir, "predictions.csv")
    result.report_path = os.path.join(cfg.out_dir, "report.txt")
    write_results_csv(result.results_path, result.rows)
    write_predictions_csv(result.predictions_path, result.predictions)
    grid = ResultGrid()
    for pair in cfg.eval_pairs:
        row = next((r for r in result.rows if r.lang_pair == pair), None)
        if row is not None:
            grid.add_row(row)
    if not grid.is_empty():
        ordered = [p for p in DEFAULT_PAIR_ORDER if p in cfg.eval_pairs]
        ordered.extend(p for p in cfg.eval_pairs if p not in DEFAULT_PAIR_ORDER)
        # skipped pairs keep their column and render as --
        text, csv_text = emit_report(grid, pairs=ordered)
    else:
        text, csv_text = "", ""
    with open(result.report_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    with open(os.path.join(cfg.out_dir, "report.csv"), "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    metrics_path = os.path.join(cfg.out_dir, "metrics.json")
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump({"system": result.system, "metrics": result.metrics,
                   "skipped": result.skipped}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def rederive_results(predictions: list[PredictionRow]) -> list[ResultRow]:
    """Recompute accuracy rows from per-pair predictions (the audit path)."""
    counts: dict[tuple[str, str], list[int]] = {}
    order: list[tuple[str, str]] = []
    for row in predictions:
        if row.gold == corpus.GOLD_UNKNOWN:
            continue
        key = (row.system, row.lang_pair)
        if key not in counts:
            counts[key] = [0, 0]
            order.append(key)
        counts[key][0] += 1
        counts[key][1] += int(row.prediction == row.gold)
    return [ResultRow(system, pair, n, correct)
            for (system, pair), (n, correct) in
            ((k, counts[k]) for k in order)]


def validate_conllu_against_pairs(pairs_path: str, conllu_path: str,
                                  require_languages: tuple[str, ...] = ()
                                  ) -> dict:
    """Structural + alignment validation of annotations against a pair file.

    Loading already enforces CoNLL-U structure and text/offset alignment;
    this additionally resolves every covered target span to a token and,
    for the required languages, demands coverage of every sentence side.
    """
    pairs = corpus.load_pair_records(pairs_path)
    annotations = corpus.load_conllu(conllu_path)
    errors: list[str] = []
    covered = 0
    missing: list[str] = []
    for pair in pairs:
        for side in (1, 2):
            key = corpus.sentence_key(pair.pair_id, side)
            lang = pair.lang_pair[side - 1]
            ann = annotations.get(key)
            if ann is None:
                missing.append(key)
                if lang in require_languages:
                    errors.append(f"required sentence {key} ({lang}) not annotated")
                continue
            covered += 1
            roots = [i for i, tok in enumerate(ann.tokens) if tok[3] == 0]
            if len(roots) != 1:
                errors.append(f"sentence {key}: {len(roots)} roots, expected 1")
            try:
                corpus.find_target_token(pair, side, ann)
            except DataError as exc:
                errors.append(str(exc))
    return {
        "sentences": len(annotations),
        "sides_covered": covered,
        "sides_missing": missing,
        "errors": errors,
    }


def assert_public_split_sizes(data_dir: str) -> dict[str, tuple]:
    """Check Table-style split sizes when the real dataset is present."""
    found = {}
    for pair, (train_n, dev_n, test_n) in PUBLIC_SPLIT_SIZES.items():
        for split, expected in (("train", train_n), ("dev", dev_n), ("test", test_n)):
            if expected is None:
                continue
            split_obj = load_split(data_dir, split, pair, required=False)
            if split_obj is None:
                continue
            if len(split_obj) != expected:
                raise DataError(
                    f"{split}.{pair} has {len(split_obj)} pairs, expected {expected}"
                )
            found[(split, pair)] = len(split_obj)
    return found
