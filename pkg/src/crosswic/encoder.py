"""Per-sub-token contextual hidden states from two interchangeable sources:
a trainable toy transformer and a text store of precomputed states exported
from external encoders.

The transformer is post-norm: embedding + learned positions, then blocks of
multi-head self-attention -> add & norm -> ReLU feed-forward -> add & norm.
The last layer's states are returned. Store files start with an `H=<int>`
header followed by one record per line: `key TAB row_count TAB values...`
(row-major doubles serialized with shortest round-trip repr).
"""

from dataclasses import dataclass

import numpy as np

from . import numgrad as ng
from .errors import (
    ConfigError,
    DimensionError,
    LengthError,
    ParseError,
    VocabularyError,
)
from .subword import Vocabulary


@dataclass(frozen=True)
class EncoderConfig:
    layers: int = 2
    heads: int = 2
    hidden: int = 32
    ffn: int = 64
    max_len: int = 128
    vocab_size: int = 0  # filled from the vocabulary when 0
    dropout: float = 0.1
    # weight init scale; raise it to make an untrained encoder mix context
    # at a usable magnitude (pretrained encoders do so out of the box)
    init_std: float = 0.02

    def __post_init__(self):
        if self.layers < 0 or self.heads < 1 or self.hidden < 1 or self.ffn < 1:
            raise ConfigError(f"invalid encoder sizes: {self}")
        if self.hidden % self.heads != 0:
            raise ConfigError(
                f"hidden dim {self.hidden} not divisible by {self.heads} heads"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.max_len < 3:
            raise ConfigError("max_len must allow at least [cls] x [sep]")
        if self.init_std <= 0:
            raise ConfigError(f"init_std must be positive, got {self.init_std}")


@dataclass
class HiddenStates:
    """Matrix of per-sub-token contextual vectors from the last layer."""

    matrix: ng.Tensor  # (T, H)
    layer_tag: str = "last"

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise DimensionError(f"hidden states must be T x H, got {self.matrix.shape}")
        self.matrix.assert_finite("hidden states")

    @property
    def length(self) -> int:
        return self.matrix.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class JointEncoding:
    """Hidden states of `[cls] ids1 [sep] ids2 [sep]` plus index shifts that
    map bare per-sentence token positions into the joint sequence."""

    hidden: HiddenStates
    shift1: int
    shift2: int


def joint_sequence(ids1: list[int], ids2: list[int], cls_id: int,
                   sep_id: int) -> tuple[list[int], int, int]:
    """Concatenate two bare piece-id lists with specials; returns
    (ids, shift1, shift2)."""
    if not ids1:
        raise DimensionError("joint encoding: first sentence has no tokens")
    if not ids2:
        raise DimensionError("joint encoding: second sentence has no tokens")
    ids = [cls_id, *ids1, sep_id, *ids2, sep_id]
    return ids, 1, len(ids1) + 2


class TransformerEncoder:
    """Trainable toy encoder; freeze by simply never stepping an optimizer."""

    def __init__(self, cfg: EncoderConfig, vocab_size: int | None = None,
                 seed: int = 0):
        if vocab_size is None:
            vocab_size = cfg.vocab_size
        if vocab_size < 1:
            raise ConfigError("encoder needs a positive vocabulary size")
        self.cfg = cfg
        self.vocab_size = vocab_size
        rng = np.random.default_rng(seed)
        H, F = cfg.hidden, cfg.ffn

        def weight(name, shape):
            return ng.Parameter(rng.normal(0.0, cfg.init_std, size=shape), name)

        def zeros(name, shape):
            return ng.Parameter(np.zeros(shape), name)

        def ones(name, shape):
            return ng.Parameter(np.ones(shape), name)

        self.tok_emb = weight("tok_emb", (vocab_size, H))
        self.pos_emb = weight("pos_emb", (cfg.max_len, H))
        self.blocks = []
        for i in range(cfg.layers):
            p = f"layer{i}."
            self.blocks.append({
                "wq": weight(p + "wq", (H, H)), "bq": zeros(p + "bq", H),
                "wk": weight(p + "wk", (H, H)), "bk": zeros(p + "bk", H),
                "wv": weight(p + "wv", (H, H)), "bv": zeros(p + "bv", H),
                "wo": weight(p + "wo", (H, H)), "bo": zeros(p + "bo", H),
                "ln1_g": ones(p + "ln1_g", H), "ln1_b": zeros(p + "ln1_b", H),
                "w1": weight(p + "w1", (H, F)), "b1": zeros(p + "b1", F),
                "w2": weight(p + "w2", (F, H)), "b2": zeros(p + "b2", H),
                "ln2_g": ones(p + "ln2_g", H), "ln2_b": zeros(p + "ln2_b", H),
            })

    def parameters(self) -> list[ng.Parameter]:
        params = [self.tok_emb, self.pos_emb]
        for block in self.blocks:
            params.extend(block.values())
        return params

    @property
    def hidden_dim(self) -> int:
        return self.cfg.hidden

    def _check_ids(self, ids: list[int]) -> None:
        if len(ids) == 0:
            raise DimensionError("cannot encode an empty id sequence")
        if len(ids) > self.cfg.max_len:
            raise LengthError(
                f"sequence of {len(ids)} tokens exceeds max_len {self.cfg.max_len}"
            )
        bad = [i for i in ids if not 0 <= i < self.vocab_size]
        if bad:
            raise VocabularyError(
                f"token ids {bad} outside vocabulary of size {self.vocab_size}"
            )

    def _attention(self, x: ng.Tensor, block: dict, collect_attn: list | None):
        H = self.cfg.hidden
        dh = H // self.cfg.heads
        q = ng.matmul(x, block["wq"]) + block["bq"]
        k = ng.matmul(x, block["wk"]) + block["bk"]
        v = ng.matmul(x, block["wv"]) + block["bv"]
        heads = []
        for h in range(self.cfg.heads):
            cols = slice(h * dh, (h + 1) * dh)
            qh, kh, vh = q[:, cols], k[:, cols], v[:, cols]
            scores = ng.matmul(qh, ng.transpose(kh)) * (1.0 / np.sqrt(dh))
            weights = ng.softmax(scores, axis=-1)
            if collect_attn is not None:
                collect_attn.append(weights.data.copy())
            heads.append(ng.matmul(weights, vh))
        merged = heads[0] if len(heads) == 1 else ng.concat(heads, axis=1)
        return ng.matmul(merged, block["wo"]) + block["bo"]

    def encode(self, ids: list[int], train: bool = False,
               dropout_rng: np.random.Generator | None = None,
               collect_attn: list | None = None) -> HiddenStates:
        """Forward pass over one id sequence; dropout only when training."""
        ids = list(ids)
        self._check_ids(ids)
        if train and self.cfg.dropout > 0.0 and dropout_rng is None:
            raise ConfigError("training-mode encode needs a dropout rng")

        def drop(t: ng.Tensor) -> ng.Tensor:
            return ng.dropout(t, self.cfg.dropout, dropout_rng, training=train)

        x = ng.gather_rows(self.tok_emb, ids) + ng.gather_rows(
            self.pos_emb, range(len(ids))
        )
        x = drop(x)
        for block in self.blocks:
            attn = self._attention(x, block, collect_attn)
            x = ng.layer_norm(x + drop(attn), block["ln1_g"], block["ln1_b"])
            ffn = ng.matmul(ng.relu(ng.matmul(x, block["w1"]) + block["b1"]),
                            block["w2"]) + block["b2"]
            x = ng.layer_norm(x + drop(ffn), block["ln2_g"], block["ln2_b"])
        return HiddenStates(matrix=x)

    def encode_wrapped(self, vocab: Vocabulary, piece_ids: list[int],
                       train: bool = False,
                       dropout_rng: np.random.Generator | None = None
                       ) -> tuple[HiddenStates, int]:
        """Encode `[cls] pieces [sep]`; returns states and the +1 index shift."""
        ids = [vocab.cls_id, *piece_ids, vocab.sep_id]
        return self.encode(ids, train=train, dropout_rng=dropout_rng), 1

    def encode_joint(self, ids1: list[int], ids2: list[int], cls_id: int,
                     sep_id: int, train: bool = False,
                     dropout_rng: np.random.Generator | None = None
                     ) -> JointEncoding:
        ids, shift1, shift2 = joint_sequence(ids1, ids2, cls_id, sep_id)
        hidden = self.encode(ids, train=train, dropout_rng=dropout_rng)
        return JointEncoding(hidden=hidden, shift1=shift1, shift2=shift2)


# ---------------------------------------------------------------------------
# Precomputed-state store
# ---------------------------------------------------------------------------

NULL_STORE_KEY = "null.1"


def store_key(pair_id: str, side: int) -> str:
    return f"{pair_id}.{side}"


class PrecomputedStore:
    """Read-only map from record keys to hidden-state matrices.

    Target records live under `<pair_id>.<side>`; syntax slots (exporter
    pre-sliced) under `<pair_id>.<side>.h` (head-word rows) and
    `<pair_id>.<side>.d` (one pre-pooled row per dependent word). The
    embedding of the bare word "null" lives under `null.1`.
    """

    def __init__(self, hidden_dim: int, records: dict[str, np.ndarray]):
        self.hidden_dim = hidden_dim
        self._records = {}
        for key, mat in records.items():
            arr = np.asarray(mat, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != hidden_dim:
                raise ParseError(
                    f"store record {key!r} has shape {arr.shape}, expected (*, {hidden_dim})"
                )
            self._records[key] = arr
        self._keys = frozenset(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def keys(self):
        return sorted(self._records)

    def get_raw(self, key: str) -> HiddenStates | None:
        mat = self._records.get(key)
        if mat is None:
            return None
        return HiddenStates(matrix=ng.Tensor(mat))

    def get(self, pair_id: str, side: int) -> HiddenStates | None:
        """Exact lookup; absence is reported as None, never as a default."""
        return self.get_raw(store_key(pair_id, side))

    def has(self, pair_id: str, side: int) -> bool:
        return store_key(pair_id, side) in self._keys


def save_store(path: str, hidden_dim: int, records: dict[str, np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"H={hidden_dim}\n")
        for key in sorted(records):
            mat = np.asarray(records[key], dtype=np.float64)
            if mat.ndim != 2 or mat.shape[1] != hidden_dim:
                raise DimensionError(
                    f"record {key!r}: shape {mat.shape} does not match H={hidden_dim}"
                )
            if "\t" in key or "\n" in key:
                raise DimensionError(f"store key {key!r} may not contain tabs/newlines")
            values = " ".join(repr(float(v)) for v in mat.reshape(-1))
            fh.write(f"{key}\t{mat.shape[0]}\t{values}\n")


def load_store(path: str) -> PrecomputedStore:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise ParseError(f"store file not found: {path}") from None
    if not lines or not lines[0].startswith("H="):
        raise ParseError(f"{path}: missing H=<int> header")
    try:
        hidden_dim = int(lines[0][2:])
    except ValueError:
        raise ParseError(f"{path}: malformed header {lines[0]!r}") from None
    if hidden_dim < 1:
        raise ParseError(f"{path}: hidden dimension must be positive")
    records: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected key TAB rows TAB values")
        key, rows_text, values_text = parts
        if key in records:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            rows = int(rows_text)
            values = np.array(values_text.split(), dtype=np.float64)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: malformed record") from None
        if rows < 1 or values.size != rows * hidden_dim:
            raise ParseError(
                f"{path}:{lineno}: record {key!r} declares {rows} rows "
                f"but carries {values.size} values for H={hidden_dim}"
            )
        records[key] = values.reshape(rows, hidden_dim)
    return PrecomputedStore(hidden_dim, records)
