"""The two frozen-feature classifiers: logistic regression trained with
plain SGD, and a two-layer MLP p = softmax(W2 relu(W1 e + b1) + b2) whose
hidden width equals the input dimension, trained with Adam.

"Iterations" in a regime count full passes over the data (epochs) by
default; set iteration_unit="steps" to count mini-batches instead.
Shuffling is a deterministic per-epoch permutation drawn from the run seed.
"""

from dataclasses import dataclass, field

import numpy as np

from . import numgrad as ng
from .errors import ConfigError, DegenerateDataError, DimensionError

LABEL_TRUE = "T"
LABEL_FALSE = "F"


@dataclass(frozen=True)
class TrainRegime:
    max_iters: int
    batch_size: int
    learning_rate: float
    optimizer: ng.OptimizerConfig
    seed: int = 0
    iteration_unit: str = "epochs"  # or "steps"

    def __post_init__(self):
        if self.max_iters < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ConfigError(f"regime values must be positive: {self}")
        if self.iteration_unit not in ("epochs", "steps"):
            raise ConfigError(f"unknown iteration unit {self.iteration_unit!r}")


def lr_regime(seed: int = 0) -> TrainRegime:
    """150 epochs, batch 32, lr 0.0025, plain SGD."""
    return TrainRegime(
        max_iters=150, batch_size=32, learning_rate=0.0025,
        optimizer=ng.OptimizerConfig("sgd", 0.0025), seed=seed,
    )


def mlp_regime(seed: int = 0) -> TrainRegime:
    """Up to 200 epochs, batch 32, lr 0.001, Adam(0.9, 0.999)."""
    return TrainRegime(
        max_iters=200, batch_size=32, learning_rate=0.001,
        optimizer=ng.OptimizerConfig("adam", 0.001, beta1=0.9, beta2=0.999),
        seed=seed,
    )


# Training-loss improvement below this over a 10-epoch window stops the MLP.
MLP_EARLY_STOP_DELTA = 1e-6
MLP_EARLY_STOP_PATIENCE = 10


def _label_to_int(label: str) -> int:
    if label == LABEL_TRUE:
        return 1
    if label == LABEL_FALSE:
        return 0
    raise ConfigError(f"cannot train on label {label!r}")


def _check_two_classes(labels: list[int]) -> None:
    classes = set(labels)
    if len(labels) == 0:
        raise DegenerateDataError("no training examples")
    if classes != {0, 1}:
        raise DegenerateDataError(
            f"training needs both classes, got only {sorted(classes)}"
        )


def _as_matrix(features) -> np.ndarray:
    mat = np.asarray(
        [f.values.data if hasattr(f, "values") else f for f in features],
        dtype=np.float64,
    )
    if mat.ndim != 2:
        raise DimensionError(f"features must form an N x D matrix, got {mat.shape}")
    return mat


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


class LRModel:
    """Binary logistic regression over feature vectors."""

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionError(f"feature dim must be positive, got {dim}")
        self.dim = dim
        self.w = ng.Parameter(np.zeros(dim), "lr.w")
        self.b = ng.Parameter(np.zeros(1), "lr.b")

    def parameters(self) -> list[ng.Parameter]:
        return [self.w, self.b]

    def scores(self, mat: np.ndarray) -> np.ndarray:
        return mat @ self.w.data + self.b.data[0]

    def probabilities(self, features) -> np.ndarray:
        z = self.scores(_as_matrix(features))
        return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                        np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))

    def predict(self, features) -> list[str]:
        """T when p > 0.5, F otherwise (ties resolve to F)."""
        z = self.scores(_as_matrix(features))
        return [LABEL_TRUE if zi > 0 else LABEL_FALSE for zi in z]


class MLPModel:
    """Two fully-connected layers with a ReLU between and softmax on top.

    The hidden width is tied to the input dimension; hidden_dim overrides
    it when a different capacity is needed.
    """

    def __init__(self, dim: int, hidden_dim: int | None = None, seed: int = 0):
        if dim < 1:
            raise DimensionError(f"feature dim must be positive, got {dim}")
        self.dim = dim
        self.hidden_dim = hidden_dim if hidden_dim is not None else dim
        rng = np.random.default_rng(seed)
        # He initialization for the ReLU layer, scaled-down output layer
        self.w1 = ng.Parameter(
            rng.normal(0.0, np.sqrt(2.0 / dim), size=(self.hidden_dim, dim)), "mlp.w1"
        )
        self.b1 = ng.Parameter(np.zeros(self.hidden_dim), "mlp.b1")
        self.w2 = ng.Parameter(
            rng.normal(0.0, np.sqrt(1.0 / self.hidden_dim), size=(2, self.hidden_dim)),
            "mlp.w2",
        )
        self.b2 = ng.Parameter(np.zeros(2), "mlp.b2")

    def parameters(self) -> list[ng.Parameter]:
        return [self.w1, self.b1, self.w2, self.b2]

    def logits(self, x: ng.Tensor) -> ng.Tensor:
        """Batch logits for an (N, D) input tensor."""
        h = ng.relu(ng.matmul(x, ng.transpose(self.w1)) + self.b1)
        return ng.matmul(h, ng.transpose(self.w2)) + self.b2

    def forward(self, e) -> ng.Tensor:
        """Class probabilities for a single feature vector."""
        e = e.values if hasattr(e, "values") else ng.as_tensor(e)
        if e.shape != (self.dim,):
            raise DimensionError(f"expected a {self.dim}-vector, got {e.shape}")
        h = ng.relu(ng.matmul(self.w1, e) + self.b1)
        return ng.softmax(ng.matmul(self.w2, h) + self.b2)

    def predict(self, features) -> list[str]:
        mat = _as_matrix(features)
        logits = self.logits(ng.Tensor(mat)).data
        return [LABEL_TRUE if row[1] > row[0] else LABEL_FALSE for row in logits]


def mlp_forward(model: MLPModel, e) -> ng.Tensor:
    return model.forward(e)


@dataclass
class TrainLog:
    epoch_losses: list[float] = field(default_factory=list)
    stopped_early: bool = False


def train_lr(features, labels: list[str], regime: TrainRegime | None = None,
             *, log: TrainLog | None = None) -> LRModel:
    """Fit logistic regression by mini-batch SGD on binary cross-entropy."""
    if regime is None:
        regime = lr_regime()
    mat = _as_matrix(features)
    ys = [_label_to_int(label) for label in labels]
    if mat.shape[0] != len(ys):
        raise DimensionError(f"{mat.shape[0]} features but {len(ys)} labels")
    _check_two_classes(ys)

    model = LRModel(mat.shape[1])
    opt = ng.Optimizer(model.parameters(), regime.optimizer)
    rng = np.random.default_rng(regime.seed)
    ys_arr = np.asarray(ys)
    steps_left = regime.max_iters if regime.iteration_unit == "steps" else None
    epochs = regime.max_iters if regime.iteration_unit == "epochs" else 10 ** 9
    for _ in range(epochs):
        epoch_loss = 0.0
        for batch in _batches(len(ys), regime.batch_size, rng):
            opt.zero_grad()
            x = ng.Tensor(mat[batch])
            z = ng.matmul(x, model.w) + model.b[0]
            loss = ng.binary_cross_entropy_logits(z, ys_arr[batch].tolist())
            loss.backward()
            opt.step()
            epoch_loss += loss.item() * len(batch)
            if steps_left is not None:
                steps_left -= 1
                if steps_left == 0:
                    break
        if log is not None:
            log.epoch_losses.append(epoch_loss / len(ys))
        if steps_left == 0:
            break
    return model


def train_mlp(features, labels: list[str], regime: TrainRegime | None = None,
              *, hidden_dim: int | None = None,
              log: TrainLog | None = None) -> MLPModel:
    """Fit the MLP with Adam; stops early once the training loss plateaus."""
    if regime is None:
        regime = mlp_regime()
    mat = _as_matrix(features)
    ys = [_label_to_int(label) for label in labels]
    if mat.shape[0] != len(ys):
        raise DimensionError(f"{mat.shape[0]} features but {len(ys)} labels")
    _check_two_classes(ys)

    model = MLPModel(mat.shape[1], hidden_dim=hidden_dim, seed=regime.seed)
    opt = ng.Optimizer(model.parameters(), regime.optimizer)
    rng = np.random.default_rng(regime.seed)
    ys_arr = np.asarray(ys)
    best_loss = np.inf
    stale = 0
    steps_left = regime.max_iters if regime.iteration_unit == "steps" else None
    epochs = regime.max_iters if regime.iteration_unit == "epochs" else 10 ** 9
    for _ in range(epochs):
        epoch_loss = 0.0
        for batch in _batches(len(ys), regime.batch_size, rng):
            opt.zero_grad()
            logits = model.logits(ng.Tensor(mat[batch]))
            loss = ng.cross_entropy_batch(logits, ys_arr[batch].tolist())
            loss.backward()
            opt.step()
            epoch_loss += loss.item() * len(batch)
            if steps_left is not None:
                steps_left -= 1
                if steps_left == 0:
                    break
        epoch_loss /= len(ys)
        if log is not None:
            log.epoch_losses.append(epoch_loss)
        if steps_left == 0:
            break
        if best_loss - epoch_loss < MLP_EARLY_STOP_DELTA:
            stale += 1
            if stale >= MLP_EARLY_STOP_PATIENCE:
                if log is not None:
                    log.stopped_early = True
                break
        else:
            stale = 0
        best_loss = min(best_loss, epoch_loss)
    return model


def training_accuracy(model, features, labels: list[str]) -> float:
    predictions = model.predict(features)
    return sum(p == g for p, g in zip(predictions, labels)) / len(labels)
