"""Pydantic request/response models for the HTTP service.

These mirror the experiment configuration one-to-one; `to_experiment_config`
converts a validated request into the runtime dataclasses.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from .. import classifiers as cl
from .. import features as ft
from .. import harness as hz
from .. import numgrad as ng
from ..encoder import EncoderConfig
from ..subword import PoolingMode


class EncoderSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["toy", "store"] = "toy"
    # toy encoder
    layers: int = 2
    heads: int = 2
    hidden: int = 32
    ffn: int = 64
    max_len: int = 128
    dropout: float = 0.1
    init_std: float = 0.02
    vocab_path: str | None = None
    # precomputed store
    store_path: str | None = None

    def to_source(self) -> hz.EncoderSource:
        if self.kind == "store":
            return hz.EncoderSource(kind="store", store_path=self.store_path)
        cfg = EncoderConfig(layers=self.layers, heads=self.heads,
                            hidden=self.hidden, ffn=self.ffn,
                            max_len=self.max_len, dropout=self.dropout,
                            init_std=self.init_std)
        return hz.EncoderSource(kind="toy", config=cfg, vocab_path=self.vocab_path)


class RegimeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_iters: int
    batch_size: int = 32
    learning_rate: float
    optimizer: Literal["sgd", "adam", "adamw"]
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float | None = None
    epsilon: float = 1e-8
    iteration_unit: Literal["epochs", "steps"] = "epochs"
    seed: int = 0

    def to_regime(self) -> cl.TrainRegime:
        opt = ng.OptimizerConfig(self.optimizer, self.learning_rate,
                                 beta1=self.beta1, beta2=self.beta2,
                                 weight_decay=self.weight_decay,
                                 epsilon=self.epsilon)
        return cl.TrainRegime(max_iters=self.max_iters, batch_size=self.batch_size,
                              learning_rate=self.learning_rate, optimizer=opt,
                              seed=self.seed, iteration_unit=self.iteration_unit)


class ExperimentRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strategy: Literal[
        "finetune", "feature_lr", "feature_mlp",
        "feature_syntax_lr", "feature_syntax_mlp",
    ]
    encoder: EncoderSpec
    data_dir: str
    out_dir: str
    eval_pairs: list[str] = Field(default_factory=lambda: ["en-en"])
    train_pair: str = "en-en"
    pooling: Literal["average", "sum"] = "average"
    dependent_combine: Literal["sum", "average"] = "sum"
    regime: RegimeSpec | None = None
    dev_subset: int | None = None
    conllu_dir: str | None = None
    joint_features: bool = False
    seed: int = 0
    system_label: str | None = None
    checkpoint_path: str | None = None
    features_dir: str | None = None

    def to_experiment_config(self) -> hz.ExperimentConfig:
        return hz.ExperimentConfig(
            strategy=self.strategy,
            encoder=self.encoder.to_source(),
            data_dir=self.data_dir,
            out_dir=self.out_dir,
            eval_pairs=tuple(self.eval_pairs),
            train_pair=self.train_pair,
            pooling=PoolingMode(self.pooling),
            dependent_combine=ft.DependentCombine(self.dependent_combine),
            regime=self.regime.to_regime() if self.regime else None,
            dev_subset=self.dev_subset,
            conllu_dir=self.conllu_dir,
            joint_features=self.joint_features,
            seed=self.seed,
            system_label=self.system_label,
            checkpoint_path=self.checkpoint_path,
            features_dir=self.features_dir,
        )


class ExtractRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    variant: Literal["target_concat", "syntax"] = "target_concat"
    encoder: EncoderSpec
    data_dir: str
    out_dir: str
    eval_pairs: list[str] = Field(default_factory=lambda: ["en-en"])
    train_pair: str = "en-en"
    splits: list[Literal["train", "dev", "test"]] = Field(
        default_factory=lambda: ["train", "test"]
    )
    pooling: Literal["average", "sum"] = "average"
    dependent_combine: Literal["sum", "average"] = "sum"
    dev_subset: int | None = None
    conllu_dir: str | None = None
    joint_features: bool = False
    seed: int = 0

    def to_experiment_config(self) -> hz.ExperimentConfig:
        strategy = "feature_syntax_lr" if self.variant == "syntax" else "feature_lr"
        return hz.ExperimentConfig(
            strategy=strategy,
            encoder=self.encoder.to_source(),
            data_dir=self.data_dir,
            out_dir=self.out_dir,
            eval_pairs=tuple(self.eval_pairs),
            train_pair=self.train_pair,
            pooling=PoolingMode(self.pooling),
            dependent_combine=ft.DependentCombine(self.dependent_combine),
            conllu_dir=self.conllu_dir,
            dev_subset=self.dev_subset,
            joint_features=self.joint_features,
            seed=self.seed,
        )


class ResultRowModel(BaseModel):
    system: str
    lang_pair: str
    n: int
    correct: int
    accuracy: float


class EpochMetric(BaseModel):
    epoch: int
    train_loss: float
    dev_accuracy: float | None = None


class ExperimentResponse(BaseModel):
    system: str
    rows: list[ResultRowModel]
    metrics: list[EpochMetric] = Field(default_factory=list)
    skipped: dict[str, str] = Field(default_factory=dict)
    results_path: str | None = None
    predictions_path: str | None = None
    report_path: str | None = None
    report_text: str = ""


class ExtractResponse(BaseModel):
    written: list[str]


class EvaluateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    predictions_path: str
    out_path: str | None = None


class EvaluateResponse(BaseModel):
    rows: list[ResultRowModel]
    out_path: str | None = None


class ReportRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    results_paths: list[str]
    pairs: list[str] | None = None
    include_joint: bool = False
    out_text: str | None = None
    out_csv: str | None = None


class ReportResponse(BaseModel):
    text: str
    csv_text: str


class ConlluValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pairs_path: str
    conllu_path: str
    require_languages: list[str] = Field(default_factory=list)


class ConlluValidateResponse(BaseModel):
    sentences: int
    sides_covered: int
    sides_missing: list[str]
    errors: list[str]


class SynthRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    out_dir: str
    n_train: int = 200
    n_test: int = 100
    seed: int = 0
    with_conllu: bool = False


class SynthResponse(BaseModel):
    paths: dict[str, str]


class HealthResponse(BaseModel):
    status: str
    version: str
