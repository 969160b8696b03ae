"""Desk-scale arithmetic trainer exercising both integration strategies.

A tiny model (mean-pooled token embeddings feeding per-slot affine heads)
learns worded one-operation problems end to end. The [AGG] placeholder is
never a free parameter: its vector is recomputed from the current digit
embeddings at every forward pass. The auxiliary loss flows through the
soft per-position digit distributions, so the whole objective is
differentiable and its gradient can be checked against finite differences.

The model is deliberately minimal. Pooling is order-free, so schemes that
differ only in marker position produce identical runs, and subtraction is
capped well below 100% because the operand bag loses the operand order;
both are accepted limitations, the harness exists to exercise mechanisms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .aggregation import weights_array
from .embeddings import DIGITS, EmbeddingTable
from .errors import DivergenceError, DomainError
from .lexer import Token, TokenKind, TokenScheme, tokenize
from .metrics import batch_scores

MAX_ANSWER_DIGITS = 4
N_SLOTS = 1 + MAX_ANSWER_DIGITS  # sign slot + left-aligned digit slots
ANSWER_SYMBOLS = DIGITS + ("-", "<pad>")
MINUS_INDEX = 10
PAD_INDEX = 11

DEFAULT_DIM = 16
DEFAULT_SIZE = 400
DEFAULT_LEARNING_RATE = 2.0
DEV_FRACTION = 0.2

_AUX_FLOOR_DISTANCE = 2.0**-20
_LN2 = math.log(2.0)

_TEMPLATES = {
    "add": "Ana has {a} pebbles and Bo gives her {b} more. "
    "How many pebbles does Ana have now?",
    "sub": "Ana has {a} pebbles and Bo takes {b} away. "
    "How many pebbles does Ana have now?",
}


class Operation(Enum):
    ADD = "add"
    SUB = "sub"

    @classmethod
    def from_name(cls, name: str) -> "Operation":
        for op in cls:
            if op.value == name:
                return op
        raise DomainError(f"unknown operation {name!r}")


class AggPosition(Enum):
    PREPEND = "prepend"
    APPEND = "append"
    NONE = "none"


@dataclass(frozen=True)
class ToyTask:
    """Parameters for one synthetic arithmetic dataset."""

    operation: Operation
    operand_digits: int = 1
    size: int = DEFAULT_SIZE
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.operand_digits <= 3:
            raise DomainError(
                f"operand_digits must be in 1..3, got {self.operand_digits}"
            )
        if self.size < 1:
            raise DomainError(f"size must be positive, got {self.size}")
        if self.seed < 0:
            raise DomainError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class ToyInstance:
    """One worded problem: its token sequence and exact gold answer."""

    tokens: tuple[Token, ...]
    gold: str
    text: str


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for a deterministic gradient-descent run."""

    lam: float = 0.65
    learning_rate: float = DEFAULT_LEARNING_RATE
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    use_aux_loss: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError(f"lambda must be in [0, 1], got {self.lam}")
        if not self.learning_rate > 0.0:
            raise DomainError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise DomainError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be positive, got {self.batch_size}")
        if self.seed < 0:
            raise DomainError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class TraceRow:
    epoch: int
    total: float
    ce: float
    aux: float
    dev_accuracy: float
    dev_cer: float


@dataclass(frozen=True)
class TrainingTrace:
    rows: tuple[TraceRow, ...]

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]


@dataclass(frozen=True)
class AblationRow:
    """One trained variant next to the baseline."""

    label: str
    scheme: TokenScheme
    use_aux_loss: bool
    accuracy: float
    cer: float
    accuracy_delta: float
    cer_delta: float


def make_instance(
    operation: Operation, a: int, b: int, scheme: TokenScheme
) -> ToyInstance:
    """One worded problem for concrete operands."""
    if a < 0 or b < 0:
        raise DomainError(f"operands must be non-negative, got {a}, {b}")
    result = a + b if operation is Operation.ADD else a - b
    text = _TEMPLATES[operation.value].format(a=a, b=b)
    return ToyInstance(tokens=tuple(tokenize(text, scheme)), gold=str(result), text=text)


def generate_task(
    task: ToyTask, scheme: TokenScheme = TokenScheme.F_DIGITS
) -> list[ToyInstance]:
    """Deterministic worded-problem instances for a task.

    Single-digit operands are drawn from 1..9: with 0 included, distinct
    answers share identical operand bags, which caps what the order-free
    model can separate. Wider ranges start at 10^(d-1) anyway.
    """
    rng = np.random.default_rng(task.seed)
    lo = 1 if task.operand_digits == 1 else 10 ** (task.operand_digits - 1)
    hi = 10**task.operand_digits - 1
    operands = rng.integers(lo, hi + 1, size=(task.size, 2))
    return [
        make_instance(task.operation, int(a), int(b), scheme) for a, b in operands
    ]


def encode_answer(gold: str) -> np.ndarray:
    """Slot symbol indices: sign slot, then left-aligned digits, then pads."""
    sign = gold.startswith("-")
    digits = gold[1:] if sign else gold
    if not digits.isdigit() or not 1 <= len(digits) <= MAX_ANSWER_DIGITS:
        raise DomainError(f"answer out of encodable range: {gold!r}")
    slots = [MINUS_INDEX if sign else PAD_INDEX]
    slots.extend(int(c) for c in digits)
    slots.extend([PAD_INDEX] * (MAX_ANSWER_DIGITS - len(digits)))
    return np.array(slots, dtype=np.int64)


def decode_answer(slot_indices: np.ndarray) -> str:
    """Inverse of encode_answer on argmax predictions; digit slots read
    until the first pad, so malformed outputs decode to malformed strings
    and get scored as such."""
    sign = "-" if slot_indices[0] == MINUS_INDEX else ""
    chars = []
    for index in slot_indices[1:]:
        if index == PAD_INDEX:
            break
        chars.append(ANSWER_SYMBOLS[index])
    return sign + "".join(chars)


_SCHEME_AGG_POSITION = {
    TokenScheme.F_AGG_DIGITS: AggPosition.PREPEND,
    TokenScheme.F_DIGITS_AGG: AggPosition.APPEND,
}


def _token_key(token: Token) -> str:
    return token.text


class ToyModel:
    """Mean-pooled embedding bag with one affine head per answer slot.

    All embedding rows are learnable. The rows for the ten digits double as
    the aggregation alphabet; a frozen copy taken at initialization serves
    as the reference table for the auxiliary loss, so the loss target does
    not drift while the input embeddings train.
    """

    def __init__(
        self,
        instances: list[ToyInstance],
        scheme: TokenScheme,
        dim: int = DEFAULT_DIM,
        seed: int = 0,
    ):
        if dim < 2:
            raise DomainError(f"dim must be >= 2, got {dim}")
        if not instances:
            raise DomainError("at least one instance required")
        vocab: list[str] = list(DIGITS)
        seen = set(vocab)
        for inst in instances:
            for token in inst.tokens:
                if token.kind is TokenKind.AGG:
                    continue
                key = _token_key(token)
                if key not in seen:
                    seen.add(key)
                    vocab.append(key)
        self.scheme = scheme
        self.uses_agg_token = scheme in _SCHEME_AGG_POSITION
        self.agg_position = _SCHEME_AGG_POSITION.get(scheme, AggPosition.NONE)
        self.vocab = tuple(vocab)
        self.index = {key: i for i, key in enumerate(vocab)}
        self.dim = dim
        self.seed = seed
        rng = np.random.default_rng(seed)
        emb = rng.standard_normal((len(vocab), dim))
        emb /= np.linalg.norm(emb, axis=1, keepdims=True)
        self.emb = emb
        self.head_w = np.zeros((N_SLOTS, len(ANSWER_SYMBOLS), dim))
        self.head_b = np.zeros((N_SLOTS, len(ANSWER_SYMBOLS)))
        self.digit_rows = np.arange(len(DIGITS), dtype=np.int64)
        self.aux_reference = emb[: len(DIGITS)].copy()

    def aux_table(self) -> EmbeddingTable:
        """The frozen digit table the auxiliary loss aggregates against."""
        return EmbeddingTable(
            {d: self.aux_reference[i].copy() for i, d in enumerate(DIGITS)}
        )

    def agg_vector(self, characters: str) -> np.ndarray:
        """The injected placeholder vector: the positional-weight
        aggregation of the current embeddings of a number's characters."""
        if not characters:
            raise DomainError("empty character span")
        w = weights_array(len(characters))
        out = np.zeros(self.dim)
        for i, ch in enumerate(characters):
            if ch not in self.index:
                raise DomainError(f"character {ch!r} not in vocabulary")
            out += w[i] * self.emb[self.index[ch]]
        return out

    def pool_matrix(self, instances: list[ToyInstance]) -> np.ndarray:
        """Row i maps the embedding matrix to instance i's pooled input:
        pooled = coeffs @ emb. Ordinary tokens contribute count 1; each
        [AGG] token contributes the positional weights of its span's
        characters, which keeps the placeholder a pure function of the
        digit embeddings while staying linear."""
        coeffs = np.zeros((len(instances), len(self.vocab)))
        for i, inst in enumerate(instances):
            length = 0
            for token in inst.tokens:
                if token.kind is TokenKind.AGG:
                    chars = token.span.characters
                    w = weights_array(len(chars))
                    for j, ch in enumerate(chars):
                        coeffs[i, self.index[ch]] += w[j]
                else:
                    coeffs[i, self.index[_token_key(token)]] += 1.0
                length += 1
            coeffs[i] /= length
        return coeffs

    def logits(self, pooled: np.ndarray) -> np.ndarray:
        """(n, N_SLOTS, alphabet) logits for pooled inputs."""
        return np.einsum("sad,nd->nsa", self.head_w, pooled) + self.head_b

    def predict(self, coeffs: np.ndarray) -> list[str]:
        """Decoded answer strings for pool-matrix rows."""
        pooled = coeffs @ self.emb
        z = self.logits(pooled)
        return [decode_answer(row) for row in z.argmax(axis=2)]


@dataclass(frozen=True)
class _Prepared:
    """Per-dataset tensors shared by every epoch."""

    coeffs: np.ndarray  # (n, vocab)
    targets: np.ndarray  # (n, N_SLOTS)
    golds: tuple[str, ...]
    gold_lengths: np.ndarray  # (n,) digits in |gold|
    gold_aggregates: np.ndarray  # (n, dim) against the frozen reference
    weight_rows: dict[int, np.ndarray] = field(repr=False)


def prepare(model: ToyModel, instances: list[ToyInstance]) -> _Prepared:
    coeffs = model.pool_matrix(instances)
    targets = np.stack([encode_answer(inst.gold) for inst in instances])
    golds = tuple(inst.gold for inst in instances)
    lengths = np.array([len(g.lstrip("-")) for g in golds], dtype=np.int64)
    ref = model.aux_reference
    aggregates = np.zeros((len(instances), model.dim))
    for i, gold in enumerate(golds):
        digits = gold.lstrip("-")
        w = weights_array(len(digits))
        for j, ch in enumerate(digits):
            aggregates[i] += w[j] * ref[int(ch)]
    weight_rows = {
        int(n): weights_array(int(n)) for n in np.unique(lengths)
    }
    return _Prepared(
        coeffs=coeffs,
        targets=targets,
        golds=golds,
        gold_lengths=lengths,
        gold_aggregates=aggregates,
        weight_rows=weight_rows,
    )


def objective(
    model: ToyModel,
    prep: _Prepared,
    batch: np.ndarray,
    lam: float,
    use_aux_loss: bool,
) -> tuple[float, float, float, np.ndarray, np.ndarray, np.ndarray]:
    """Batch loss plus analytic gradients for (emb, head_w, head_b).

    Returns (total, ce, aux, g_emb, g_head_w, g_head_b). The aux value is
    always reported; it only enters total and the gradients when
    use_aux_loss is set, scaled by (1 - lam).
    """
    n = batch.size
    coeffs = prep.coeffs[batch]
    pooled = coeffs @ model.emb
    z = model.logits(pooled)
    targets = prep.targets[batch]

    shifted = z - z.max(axis=2, keepdims=True)
    exps = np.exp(shifted)
    sums = exps.sum(axis=2, keepdims=True)
    log_probs = shifted - np.log(sums)
    picked = np.take_along_axis(log_probs, targets[:, :, None], axis=2)
    ce = float(-picked.mean())
    dz_ce = exps / sums
    np.put_along_axis(
        dz_ce,
        targets[:, :, None],
        np.take_along_axis(dz_ce, targets[:, :, None], axis=2) - 1.0,
        axis=2,
    )
    dz_ce /= N_SLOTS * n

    aux_weight = (1.0 - lam) if use_aux_loss else 0.0
    need_aux_grad = aux_weight != 0.0
    aux_values = np.zeros(n)
    dz_aux = np.zeros_like(z) if need_aux_grad else None
    ref = model.aux_reference
    lengths = prep.gold_lengths[batch]
    for n_digits, w in prep.weight_rows.items():
        sel = np.flatnonzero(lengths == n_digits)
        if sel.size == 0:
            continue
        zg = z[sel][:, 1 : 1 + n_digits, : len(DIGITS)]
        mg = zg.max(axis=2, keepdims=True)
        eg = np.exp(zg - mg)
        q = eg / eg.sum(axis=2, keepdims=True)
        predicted = np.einsum("gls,sd,l->gd", q, ref, w)
        diff = predicted - prep.gold_aggregates[batch][sel]
        dist = np.linalg.norm(diff, axis=1)
        clamped = np.log2(np.maximum(dist, _AUX_FLOOR_DISTANCE))
        aux_values[sel] = np.clip(clamped, -20.0, 20.0)
        if need_aux_grad:
            active = (dist > _AUX_FLOOR_DISTANCE) & (clamped < 20.0)
            scale = np.where(
                active, 1.0 / (np.maximum(dist, _AUX_FLOOR_DISTANCE) ** 2 * _LN2), 0.0
            )
            d_diff = diff * scale[:, None]
            dq = np.einsum("gd,sd,l->gls", d_diff, ref, w)
            dzg = q * (dq - (dq * q).sum(axis=2, keepdims=True))
            block = np.zeros((sel.size,) + z.shape[1:])
            block[:, 1 : 1 + n_digits, : len(DIGITS)] = dzg / n
            dz_aux[sel] += block
    aux = float(aux_values.mean())

    if use_aux_loss:
        total = lam * ce + (1.0 - lam) * aux
        dz = lam * dz_ce + aux_weight * dz_aux if need_aux_grad else lam * dz_ce
    else:
        total = ce
        dz = dz_ce

    g_head_w = np.einsum("nsa,nd->sad", dz, pooled)
    g_head_b = dz.sum(axis=0)
    d_pooled = np.einsum("sad,nsa->nd", model.head_w, dz)
    g_emb = coeffs.T @ d_pooled
    return total, ce, aux, g_emb, g_head_w, g_head_b


def _evaluate(model: ToyModel, prep: _Prepared, indices: np.ndarray) -> tuple[float, float]:
    predictions = model.predict(prep.coeffs[indices])
    pairs = [(pred, prep.golds[i]) for pred, i in zip(predictions, indices)]
    scores = batch_scores(pairs)
    return scores["accuracy_percent"], scores["mean_cer_percent"]


def split_indices(n: int, dev_fraction: float = DEV_FRACTION) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic train/dev split: the tail fraction is held out."""
    n_dev = max(1, int(round(n * dev_fraction)))
    if n_dev >= n:
        raise DomainError(f"{n} instances cannot hold out {n_dev} for dev")
    return np.arange(n - n_dev, dtype=np.int64), np.arange(n - n_dev, n, dtype=np.int64)


def train(
    model: ToyModel, instances: list[ToyInstance], config: TrainConfig
) -> TrainingTrace:
    """Plain gradient descent on the combined objective.

    Fixed step, fixed batch order, no adaptive state: two runs from the
    same seeds produce bitwise-identical traces. Raises DivergenceError the
    moment the batch loss stops being finite.
    """
    prep = prepare(model, instances)
    train_idx, dev_idx = split_indices(len(instances))
    rows = []
    for epoch in range(1, config.epochs + 1):
        total_sum = ce_sum = aux_sum = 0.0
        for start in range(0, train_idx.size, config.batch_size):
            batch = train_idx[start : start + config.batch_size]
            total, ce, aux, g_emb, g_w, g_b = objective(
                model, prep, batch, config.lam, config.use_aux_loss
            )
            if not math.isfinite(total):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch start {start}"
                )
            model.emb -= config.learning_rate * g_emb
            model.head_w -= config.learning_rate * g_w
            model.head_b -= config.learning_rate * g_b
            total_sum += total * batch.size
            ce_sum += ce * batch.size
            aux_sum += aux * batch.size
        accuracy, cer_value = _evaluate(model, prep, dev_idx)
        rows.append(
            TraceRow(
                epoch=epoch,
                total=total_sum / train_idx.size,
                ce=ce_sum / train_idx.size,
                aux=aux_sum / train_idx.size,
                dev_accuracy=accuracy,
                dev_cer=cer_value,
            )
        )
    return TrainingTrace(rows=tuple(rows))


ABLATION_VARIANTS: tuple[tuple[str, TokenScheme, bool], ...] = (
    ("digits", TokenScheme.F_DIGITS, False),
    ("agg-digits", TokenScheme.F_AGG_DIGITS, False),
    ("digits-agg", TokenScheme.F_DIGITS_AGG, False),
    ("pause-digits", TokenScheme.F_PAUSE_DIGITS, False),
    ("digits-aux", TokenScheme.F_DIGITS, True),
)


def ablation_report(
    task: ToyTask,
    config: TrainConfig,
    variants: tuple[tuple[str, TokenScheme, bool], ...] = ABLATION_VARIANTS,
    dim: int = DEFAULT_DIM,
) -> list[AblationRow]:
    """Train every variant from identical seeds; report metrics and deltas
    against the first (baseline) variant."""
    if len(variants) < 2:
        raise DomainError("at least two variants required")
    rows: list[AblationRow] = []
    for label, scheme, use_aux in variants:
        instances = generate_task(task, scheme)
        model = ToyModel(instances, scheme, dim=dim, seed=config.seed)
        run_config = replace(config, use_aux_loss=use_aux)
        trace = train(model, instances, run_config)
        accuracy, cer_value = trace.final.dev_accuracy, trace.final.dev_cer
        if not rows:
            base_accuracy, base_cer = accuracy, cer_value
        rows.append(
            AblationRow(
                label=label,
                scheme=scheme,
                use_aux_loss=use_aux,
                accuracy=accuracy,
                cer=cer_value,
                accuracy_delta=accuracy - base_accuracy,
                cer_delta=cer_value - base_cer,
            )
        )
    return rows
