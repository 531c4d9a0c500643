"""Dense float64 tensors with reverse-mode gradients, plus the three
optimizers used by the training loops (SGD, Adam, AdamW) and a
finite-difference gradient checker.

Tensors wrap numpy arrays in row-major order. An op records a backward
closure only when some input requires a gradient, so frozen forward passes
build no graph. Training is single-threaded and deterministic; gradient
accumulation is explicit zero-then-accumulate per batch.
"""

from collections.abc import Callable, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, LabelError, NumericError

Array = np.ndarray


class Tensor:
    """A dense float64 tensor participating in a reverse-mode graph."""

    __slots__ = ("data", "requires_grad", "grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Array | None = None
        self._backward: Callable[[Array], None] | None = None
        self._parents: tuple["Tensor", ...] = ()

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def tolist(self):
        return self.data.tolist()

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def assert_finite(self, what: str = "tensor") -> "Tensor":
        if not self.is_finite():
            raise NumericError(f"{what} contains NaN or Inf")
        return self

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: Array) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self) -> None:
        """Reverse-mode sweep from a scalar output."""
        if self.size != 1:
            raise DimensionError(
                f"backward() needs a scalar output, got shape {self.shape}"
            )
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, c):
        if not isinstance(c, (int, float)):
            raise DimensionError("tensor division supports scalar constants only")
        return mul(self, 1.0 / float(c))

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return narrow(self, key)


class Parameter(Tensor):
    """A named leaf tensor updated by an optimizer."""

    __slots__ = ("name",)

    def __init__(self, data, name: str):
        super().__init__(data, requires_grad=True)
        self.name = name

    @property
    def value(self) -> Array:
        return self.data

    def grad_array(self) -> Array:
        """Accumulated gradient, zeros if backward has not touched it."""
        if self.grad is None:
            return np.zeros_like(self.data)
        return self.grad

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"


def tensor(data, requires_grad: bool = False) -> Tensor:
    """Public constructor; rejects non-finite entries."""
    t = Tensor(data, requires_grad=requires_grad)
    t.assert_finite()
    return t


def from_flat(shape: Sequence[int], values: Sequence[float]) -> Tensor:
    """Build a tensor from an explicit shape plus row-major values."""
    shape = tuple(int(s) for s in shape)
    if any(s <= 0 for s in shape):
        raise DimensionError(f"shape entries must be positive, got {shape}")
    n = 1
    for s in shape:
        n *= s
    if n != len(values):
        raise DimensionError(
            f"shape {shape} holds {n} entries but {len(values)} values given"
        )
    return tensor(np.asarray(values, dtype=np.float64).reshape(shape))


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def zero_grads(params: Sequence[Tensor]) -> None:
    for p in params:
        p.zero_grad()


def _unbroadcast(g: Array, shape: tuple[int, ...]) -> Array:
    """Sum a broadcast gradient back down to the original shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def _make(out_data: Array, parents: tuple[Tensor, ...],
          backward: Callable[[Array], None]) -> Tensor:
    out = Tensor(out_data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data + b.data
    except ValueError as exc:
        raise DimensionError(f"add: cannot broadcast {a.shape} with {b.shape}") from exc

    def backward(g: Array) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    return _make(data, (a, b), backward)


def neg(a) -> Tensor:
    a = as_tensor(a)

    def backward(g: Array) -> None:
        if a.requires_grad:
            a._accumulate(-g)

    return _make(-a.data, (a,), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data * b.data
    except ValueError as exc:
        raise DimensionError(f"mul: cannot broadcast {a.shape} with {b.shape}") from exc

    def backward(g: Array) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    return _make(data, (a, b), backward)


def matmul(a, b) -> Tensor:
    """Matrix product for 1-D/2-D operands with numpy contraction rules."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise DimensionError(f"matmul supports 1-D/2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"matmul: inner dimensions disagree, {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def backward(g: Array) -> None:
        if a.ndim == 2 and b.ndim == 2:
            ga, gb = g @ b.data.T, a.data.T @ g
        elif a.ndim == 2 and b.ndim == 1:
            ga, gb = np.outer(g, b.data), a.data.T @ g
        elif a.ndim == 1 and b.ndim == 2:
            ga, gb = b.data @ g, np.outer(a.data, g)
        else:
            ga, gb = g * b.data, g * a.data
        if a.requires_grad:
            a._accumulate(ga)
        if b.requires_grad:
            b._accumulate(gb)

    return _make(data, (a, b), backward)


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def backward(g: Array) -> None:
        if x.requires_grad:
            x._accumulate(g * mask)

    return _make(np.where(mask, x.data, 0.0), (x,), backward)


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    # stable logistic: exp on the negative branch only
    data = np.where(x.data >= 0,
                    1.0 / (1.0 + np.exp(-np.abs(x.data))),
                    np.exp(-np.abs(x.data)) / (1.0 + np.exp(-np.abs(x.data))))

    def backward(g: Array) -> None:
        if x.requires_grad:
            x._accumulate(g * data * (1.0 - data))

    return _make(data, (x,), backward)


def tsum(x, axis: int | None = None) -> Tensor:
    x = as_tensor(x)
    data = x.data.sum(axis=axis)

    def backward(g: Array) -> None:
        if not x.requires_grad:
            return
        if axis is None:
            x._accumulate(np.full(x.shape, float(g)))
        else:
            x._accumulate(np.broadcast_to(np.expand_dims(g, axis), x.shape).copy())

    return _make(data, (x,), backward)


def tmean(x, axis: int | None = None) -> Tensor:
    x = as_tensor(x)
    if x.size == 0:
        raise DimensionError("mean of an empty tensor")
    n = x.size if axis is None else x.shape[axis]
    return mul(tsum(x, axis=axis), 1.0 / n)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    if not parts:
        raise DimensionError("concat of zero tensors")
    try:
        data = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as exc:
        raise DimensionError(f"concat: incompatible shapes {[p.shape for p in parts]}") from exc
    sizes = [p.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def backward(g: Array) -> None:
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                index = [slice(None)] * g.ndim
                index[axis] = slice(lo, hi)
                p._accumulate(g[tuple(index)])

    return _make(data, tuple(parts), backward)


def gather_rows(x, indices: Sequence[int]) -> Tensor:
    """Select rows by index; duplicates allowed, gradients scatter-add."""
    x = as_tensor(x)
    if x.ndim != 2:
        raise DimensionError(f"gather_rows needs a matrix, got shape {x.shape}")
    idx = np.asarray(list(indices), dtype=np.intp)
    if idx.size == 0:
        raise DimensionError("gather_rows with an empty index set")
    if idx.min() < 0 or idx.max() >= x.shape[0]:
        raise DimensionError(
            f"row index out of range for {x.shape[0]} rows: {idx.tolist()}"
        )

    def backward(g: Array) -> None:
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            np.add.at(gx, idx, g)
            x._accumulate(gx)

    return _make(x.data[idx], (x,), backward)


def narrow(x, key) -> Tensor:
    """Basic (non-repeating) indexing with int/slice keys."""
    x = as_tensor(x)
    data = x.data[key]

    def backward(g: Array) -> None:
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            gx[key] += g
            x._accumulate(gx)

    return _make(np.array(data, copy=True), (x,), backward)


def transpose(x) -> Tensor:
    x = as_tensor(x)
    if x.ndim != 2:
        raise DimensionError(f"transpose needs a matrix, got shape {x.shape}")

    def backward(g: Array) -> None:
        if x.requires_grad:
            x._accumulate(g.T)

    return _make(x.data.T.copy(), (x,), backward)


def softmax(x, axis: int = -1) -> Tensor:
    """Numerically stable softmax along one axis."""
    x = as_tensor(x)
    if x.size == 0:
        raise DimensionError("softmax of an empty tensor")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def backward(g: Array) -> None:
        if x.requires_grad:
            inner = (g * s).sum(axis=axis, keepdims=True)
            x._accumulate(s * (g - inner))

    return _make(s, (x,), backward)


def _check_gold(gold, n: int) -> int:
    if isinstance(gold, bool) or not isinstance(gold, (int, np.integer)):
        raise LabelError(f"gold label must be an integer, got {gold!r}")
    if not 0 <= int(gold) < n:
        raise LabelError(f"gold label {gold} outside 0..{n - 1}")
    return int(gold)


def cross_entropy(logits, gold: int) -> Tensor:
    """Negative log-softmax of the gold class, for a 1-D logit vector."""
    logits = as_tensor(logits)
    if logits.ndim != 1:
        raise DimensionError(f"cross_entropy expects a vector, got {logits.shape}")
    logits.assert_finite("logits")
    g = _check_gold(gold, logits.shape[0])
    m = logits.data.max()
    lse = m + np.log(np.exp(logits.data - m).sum())
    p = np.exp(logits.data - lse)

    def backward(grad: Array) -> None:
        if logits.requires_grad:
            gvec = p.copy()
            gvec[g] -= 1.0
            logits._accumulate(float(grad) * gvec)

    return _make(np.asarray(lse - logits.data[g]), (logits,), backward)


def cross_entropy_batch(logits, golds: Sequence[int]) -> Tensor:
    """Mean negative log-softmax over rows of a logit matrix."""
    logits = as_tensor(logits)
    if logits.ndim != 2:
        raise DimensionError(f"cross_entropy_batch expects a matrix, got {logits.shape}")
    if logits.shape[0] != len(golds):
        raise DimensionError(
            f"{logits.shape[0]} logit rows but {len(golds)} gold labels"
        )
    logits.assert_finite("logits")
    gold_idx = np.asarray([_check_gold(g, logits.shape[1]) for g in golds], dtype=np.intp)
    m = logits.data.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(logits.data - m).sum(axis=1, keepdims=True))
    p = np.exp(logits.data - lse)
    rows = np.arange(len(golds))
    losses = lse[:, 0] - logits.data[rows, gold_idx]

    def backward(grad: Array) -> None:
        if logits.requires_grad:
            gmat = p.copy()
            gmat[rows, gold_idx] -= 1.0
            logits._accumulate(float(grad) * gmat / len(golds))

    return _make(np.asarray(losses.mean()), (logits,), backward)


def binary_cross_entropy_logits(z, targets: Sequence[int]) -> Tensor:
    """Mean logistic loss of a 1-D score vector against 0/1 targets."""
    z = as_tensor(z)
    if z.ndim != 1:
        raise DimensionError(f"expected a score vector, got {z.shape}")
    if z.shape[0] != len(targets):
        raise DimensionError(f"{z.shape[0]} scores but {len(targets)} targets")
    y = np.asarray([_check_gold(t, 2) for t in targets], dtype=np.float64)
    zd = z.data
    # max(z,0) - z*y + log1p(exp(-|z|)) is exact and overflow-free
    losses = np.maximum(zd, 0.0) - zd * y + np.log1p(np.exp(-np.abs(zd)))
    sig = np.where(zd >= 0,
                   1.0 / (1.0 + np.exp(-np.abs(zd))),
                   np.exp(-np.abs(zd)) / (1.0 + np.exp(-np.abs(zd))))

    def backward(g: Array) -> None:
        if z.requires_grad:
            z._accumulate(float(g) * (sig - y) / len(targets))

    return _make(np.asarray(losses.mean()), (z,), backward)


def layer_norm(x, gain, bias, eps: float = 1e-5) -> Tensor:
    """Per-row normalization with learned gain and bias."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    if x.shape[-1] != gain.shape[-1] or x.shape[-1] != bias.shape[-1]:
        raise DimensionError(
            f"layer_norm: feature dim {x.shape[-1]} vs gain {gain.shape} bias {bias.shape}"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    data = xhat * gain.data + bias.data

    def backward(g: Array) -> None:
        if gain.requires_grad:
            gain._accumulate(_unbroadcast(g * xhat, gain.shape))
        if bias.requires_grad:
            bias._accumulate(_unbroadcast(g, bias.shape))
        if x.requires_grad:
            gg = g * gain.data
            h = x.shape[-1]
            mean_gg = gg.mean(axis=-1, keepdims=True)
            mean_ggx = (gg * xhat).mean(axis=-1, keepdims=True)
            x._accumulate(inv * (gg - mean_gg - xhat * mean_ggx))

    return _make(data, (x, gain, bias), backward)


def dropout(x, p: float, rng: np.random.Generator, training: bool = True) -> Tensor:
    """Inverted dropout; identity when not training or p == 0."""
    x = as_tensor(x)
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    keep = (rng.random(x.shape) >= p) / (1.0 - p)

    def backward(g: Array) -> None:
        if x.requires_grad:
            x._accumulate(g * keep)

    return _make(x.data * keep, (x,), backward)


# ---------------------------------------------------------------------------
# Optimizers
# ---------------------------------------------------------------------------

OPTIMIZER_KINDS = ("sgd", "adam", "adamw")


class OptimizerConfig:
    """Update rule and hyperparameters for an optimizer.

    weight_decay defaults to 0.01 for adamw and 0 otherwise; Adam ignores
    it entirely (decoupled decay is what distinguishes adamw).
    """

    def __init__(self, kind: str, learning_rate: float, beta1: float = 0.9,
                 beta2: float = 0.999, weight_decay: float | None = None,
                 epsilon: float = 1e-8):
        if kind not in OPTIMIZER_KINDS:
            raise ConfigError(f"unknown optimizer kind {kind!r}")
        if learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {learning_rate}")
        if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
            raise ConfigError(f"betas must lie in (0, 1), got {beta1}, {beta2}")
        if epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {epsilon}")
        if weight_decay is None:
            weight_decay = 0.01 if kind == "adamw" else 0.0
        if weight_decay < 0:
            raise ConfigError(f"weight decay must be non-negative, got {weight_decay}")
        self.kind = kind
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.weight_decay = float(weight_decay)
        self.epsilon = float(epsilon)

    def __repr__(self) -> str:
        return (f"OptimizerConfig({self.kind}, lr={self.learning_rate}, "
                f"wd={self.weight_decay})")


class Optimizer:
    """Applies sgd/adam/adamw steps to a fixed parameter list."""

    def __init__(self, params: Sequence[Parameter], cfg: OptimizerConfig):
        self.params = list(params)
        self.cfg = cfg
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        zero_grads(self.params)

    def step(self) -> None:
        cfg = self.cfg
        self.t += 1
        for i, p in enumerate(self.params):
            g = p.grad_array()
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient for parameter {p.name!r}")
            if cfg.kind == "sgd":
                p.data -= cfg.learning_rate * g
                continue
            m, v = self._m[i], self._v[i]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * g * g
            mhat = m / (1.0 - cfg.beta1 ** self.t)
            vhat = v / (1.0 - cfg.beta2 ** self.t)
            p.data -= cfg.learning_rate * mhat / (np.sqrt(vhat) + cfg.epsilon)
            if cfg.kind == "adamw" and cfg.weight_decay > 0.0:
                p.data -= cfg.learning_rate * cfg.weight_decay * p.data


# ---------------------------------------------------------------------------
# Gradient verification
# ---------------------------------------------------------------------------

def grad_check(f: Callable[[], Tensor], params: Sequence[Parameter],
               eps: float = 1e-5, max_coords_per_param: int | None = None,
               rng: np.random.Generator | None = None) -> float:
    """Max relative error between reverse-mode and central-difference grads.

    f re-evaluates the scalar loss from the params' current values. The
    relative error denominator is floored at 1 so exact-zero gradients
    (dead ReLU paths) compare absolutely instead of blowing up. Set
    max_coords_per_param to probe a random coordinate subset of large
    parameters.
    """
    if not 1e-6 <= eps <= 1e-4:
        raise ConfigError(f"finite-difference eps must lie in [1e-6, 1e-4], got {eps}")
    zero_grads(params)
    loss = f()
    loss.backward()
    analytic = [p.grad_array().copy() for p in params]

    worst = 0.0
    for p, ana in zip(params, analytic):
        flat = p.data.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords_per_param is not None and flat.size > max_coords_per_param:
            if rng is None:
                rng = np.random.default_rng(0)
            coords = rng.choice(flat.size, size=max_coords_per_param, replace=False)
        ana_flat = ana.reshape(-1)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + eps
            f_plus = f().item()
            flat[c] = orig - eps
            f_minus = f().item()
            flat[c] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = ana_flat[c]
            rel = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            if rel > worst:
                worst = rel
    zero_grads(params)
    return worst
