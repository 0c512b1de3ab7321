"""Skip-gram word embeddings trained with negative sampling.

Pure numpy: one stochastic gradient step per (center, context) pair
against k noise words drawn from the count^0.75 unigram table. The word
embeddings are the input-side matrix. Single-worker training under a
fixed seed is bit-reproducible; multi-worker mode trades that for speed
(lock-free shared-matrix updates, benign races accepted).
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ParseError, ValidationError

LR_FLOOR_FRACTION = 1e-4
NEGATIVE_TABLE_POWER = 0.75
_MAX_EXP = 30.0


@dataclass(frozen=True)
class TrainConfig:
    window: int = 12
    negatives: int = 15
    dim: int = 300
    min_count: int = 15
    epochs: int = 5
    learning_rate: float = 0.025
    subsample: float | None = None  # e.g. 1e-3; None disables
    seed: int = 1
    dynamic_window: bool = True  # effective window ~ uniform(1..window)
    workers: int = 1

    def validate(self) -> None:
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if self.negatives < 1:
            raise ConfigError(f"negatives must be >= 1, got {self.negatives}")
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


class Vocabulary:
    """Dense token index with counts and the count^0.75 sampling table."""

    def __init__(self, tokens: Sequence[str], counts: Sequence[int] | None, total_tokens: int):
        self.tokens: list[str] = list(tokens)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValidationError("duplicate tokens in vocabulary")
        self.counts = None if counts is None else np.asarray(counts, dtype=np.int64)
        self.total_tokens = total_tokens
        self._cumulative: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def encode(self, tokens: Iterable[str]) -> np.ndarray:
        """Map tokens to indices, dropping out-of-vocabulary tokens."""
        idx = self.index
        return np.fromiter((idx[t] for t in tokens if t in idx), dtype=np.int64)

    @property
    def sampling_cumulative(self) -> np.ndarray:
        """Cumulative probabilities proportional to count^0.75."""
        if self._cumulative is None:
            if self.counts is None:
                raise ValidationError("vocabulary loaded without counts cannot sample negatives")
            weights = self.counts.astype(np.float64) ** NEGATIVE_TABLE_POWER
            cum = np.cumsum(weights)
            self._cumulative = cum / cum[-1]
        return self._cumulative

    def draw_negatives(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.searchsorted(self.sampling_cumulative, rng.random(n), side="right")


def build_vocab(streams: Iterable[Sequence[str]], min_count: int = 15) -> Vocabulary:
    """Exact counts; tokens below min_count excluded; indices sorted by (-count, token)."""
    counter: Counter[str] = Counter()
    total = 0
    for tokens in streams:
        counter.update(tokens)
        total += len(tokens)
    if total == 0:
        raise ValidationError("cannot build a vocabulary from an empty corpus")
    kept = sorted((t for t, c in counter.items() if c >= min_count), key=lambda t: (-counter[t], t))
    if not kept:
        raise ValidationError(f"no token reaches min_count={min_count}")
    return Vocabulary(kept, [counter[t] for t in kept], total)


@dataclass
class EmbeddingMatrix:
    """Input-side word vectors plus the context-side training parameters."""

    vocab: Vocabulary
    input_vectors: np.ndarray  # (V, d); the word embeddings
    output_vectors: np.ndarray | None  # (V, d); None once loaded from disk
    dim: int
    config: TrainConfig | None = None

    def vector(self, token: str) -> np.ndarray:
        try:
            return self.input_vectors[self.vocab.index[token]]
        except KeyError:
            raise ValidationError(f"token {token!r} not in embedding vocabulary") from None


def generate_pairs(
    indices: Sequence[int], window: int, rng: np.random.Generator | None = None
) -> list[tuple[int, int]]:
    """(center, context) pairs; effective window per position is uniform
    in 1..window when ``rng`` is given, else fixed at ``window``."""
    pairs: list[tuple[int, int]] = []
    n = len(indices)
    for t in range(n):
        b = window if rng is None else int(rng.integers(1, window + 1))
        for j in range(max(0, t - b), min(n, t + b + 1)):
            if j != t:
                pairs.append((int(indices[t]), int(indices[j])))
    return pairs


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -_MAX_EXP, _MAX_EXP)))


def pair_loss_and_gradients(
    center_vec: np.ndarray, context_rows: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Negative-sampling loss for one pair and its exact gradients.

    ``labels`` is 1 for the observed context row and 0 for noise rows. The
    minimized loss is -[log s(u+.v) + sum log s(-u-.v)]; descending it
    ascends the training objective.
    """
    scores = context_rows @ center_vec
    # log(1 + e^x) computed stably; loss = sum softplus(-s) over positives
    # plus sum softplus(s) over negatives.
    loss = float(np.sum(np.logaddexp(0.0, np.where(labels == 1.0, -scores, scores))))
    g = _sigmoid(scores) - labels  # d loss / d score
    grad_center = g @ context_rows
    grad_rows = np.outer(g, center_vec)
    return loss, grad_center, grad_rows


def _pair_counts(length: int, windows: np.ndarray) -> int:
    t = np.arange(length)
    return int(np.minimum(t, windows).sum() + np.minimum(length - 1 - t, windows).sum())


def _sentence_pairs(indices: np.ndarray, windows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(indices)
    t = np.arange(n)
    reps = np.minimum(t, windows) + np.minimum(n - 1 - t, windows)
    centers = np.repeat(indices, reps)
    contexts = np.empty(int(reps.sum()), dtype=np.int64)
    pos = 0
    for i in range(n):
        b = int(windows[i])
        lo, hi = max(0, i - b), min(n, i + b + 1)
        m = hi - lo - 1
        contexts[pos : pos + m] = np.concatenate((indices[lo:i], indices[i + 1 : hi]))
        pos += m
    return centers, contexts


class _Trainer:
    def __init__(self, vocab: Vocabulary, config: TrainConfig):
        self.vocab = vocab
        self.config = config
        self.cumulative = vocab.sampling_cumulative
        self.w_in: np.ndarray | None = None
        self.w_out: np.ndarray | None = None
        self.total_pairs = 0
        self.pairs_done = 0

    def init_matrices(self, rng: np.random.Generator) -> None:
        v, d = len(self.vocab), self.config.dim
        self.w_in = (rng.random((v, d)) - 0.5) / d
        self.w_out = np.zeros((v, d))

    def _keep_mask(self, indices: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        thr = self.config.subsample
        freq = self.vocab.counts[indices] / self.vocab.total_tokens
        p_keep = np.minimum(1.0, np.sqrt(thr / freq) + thr / freq)
        return rng.random(len(indices)) < p_keep

    def prepare_epochs(
        self, sentences: list[np.ndarray], rng: np.random.Generator
    ) -> list[list[tuple[np.ndarray, np.ndarray]]]:
        """Pre-draw subsampling masks and effective windows for every epoch
        so the learning-rate schedule can use the exact total pair count."""
        cfg = self.config
        plan: list[list[tuple[np.ndarray, np.ndarray]]] = []
        for _ in range(cfg.epochs):
            epoch_plan: list[tuple[np.ndarray, np.ndarray]] = []
            for sent in sentences:
                kept = sent[self._keep_mask(sent, rng)] if cfg.subsample else sent
                if len(kept) < 2:
                    continue
                if cfg.dynamic_window:
                    windows = rng.integers(1, cfg.window + 1, size=len(kept)).astype(np.int64)
                else:
                    windows = np.full(len(kept), cfg.window, dtype=np.int64)
                self.total_pairs += _pair_counts(len(kept), windows)
                epoch_plan.append((kept, windows))
            plan.append(epoch_plan)
        return plan

    def run_sentence(
        self, indices: np.ndarray, windows: np.ndarray, rng: np.random.Generator
    ) -> None:
        centers, contexts = _sentence_pairs(indices, windows)
        w_in, w_out = self.w_in, self.w_out
        k = self.config.negatives
        lr0 = self.config.learning_rate
        total = max(1, self.total_pairs)
        cumulative = self.cumulative
        for center, context in zip(centers.tolist(), contexts.tolist()):
            lr = lr0 * max(LR_FLOOR_FRACTION, 1.0 - self.pairs_done / total)
            self.pairs_done += 1
            negatives = np.searchsorted(cumulative, rng.random(k), side="right")
            negatives = negatives[negatives != context]  # skip the true context
            rows = np.empty(1 + len(negatives), dtype=np.int64)
            rows[0] = context
            rows[1:] = negatives
            labels = np.zeros(len(rows))
            labels[0] = 1.0
            v = w_in[center]
            _, grad_center, grad_rows = pair_loss_and_gradients(v, w_out[rows], labels)
            if len(negatives) > 1 and np.unique(negatives).size != negatives.size:
                np.add.at(w_out, rows, -lr * grad_rows)  # duplicate noise rows accumulate
            else:
                w_out[rows] -= lr * grad_rows
            w_in[center] = v - lr * grad_center


def train(
    streams: Iterable[Sequence[str]], vocab: Vocabulary, config: TrainConfig
) -> EmbeddingMatrix:
    """Train embeddings over (center, context) pairs from the token streams.

    Out-of-vocabulary tokens are dropped before pair generation. The
    learning rate decays linearly to LR_FLOOR_FRACTION of its initial
    value over the exact total pair budget (windows are pre-drawn).
    """
    config.validate()
    if vocab.counts is None:
        raise ConfigError("vocabulary was loaded without counts; rebuild it from the corpus")
    sentences = [vocab.encode(toks) for toks in streams]
    sentences = [s for s in sentences if len(s) >= 2]
    if not sentences:
        raise ValidationError("no trainable sentence after vocabulary filtering")
    if int(max(s.max() for s in sentences)) >= len(vocab):
        raise ConfigError("token index exceeds vocabulary size; vocab/corpus mismatch")

    rng = np.random.default_rng(config.seed)
    trainer = _Trainer(vocab, config)
    trainer.init_matrices(rng)
    plan = trainer.prepare_epochs(sentences, rng)

    if config.workers == 1:
        for epoch_plan in plan:
            for indices, windows in epoch_plan:
                trainer.run_sentence(indices, windows, rng)
    else:
        _train_parallel(trainer, plan, config)

    return EmbeddingMatrix(
        vocab=vocab,
        input_vectors=trainer.w_in,
        output_vectors=trainer.w_out,
        dim=config.dim,
        config=config,
    )


def _train_parallel(trainer: _Trainer, plan, config: TrainConfig) -> None:
    """Lock-free shared-matrix updates; results vary run to run."""

    def worker(worker_id: int) -> None:
        rng = np.random.default_rng(config.seed + 1009 * (worker_id + 1))
        for epoch_plan in plan:
            for i in range(worker_id, len(epoch_plan), config.workers):
                indices, windows = epoch_plan[i]
                trainer.run_sentence(indices, windows, rng)

    threads = [threading.Thread(target=worker, args=(w,)) for w in range(config.workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


def average_pair_loss(
    matrix: EmbeddingMatrix, pairs: Sequence[tuple[int, int]], negatives: int, seed: int = 0
) -> float:
    """Mean negative-sampling loss over a fixed pair set with freshly drawn noise."""
    rng = np.random.default_rng(seed)
    cumulative = matrix.vocab.sampling_cumulative
    total = 0.0
    for center, context in pairs:
        negs = np.searchsorted(cumulative, rng.random(negatives), side="right")
        negs = negs[negs != context]
        rows = np.concatenate(([context], negs))
        labels = np.zeros(len(rows))
        labels[0] = 1.0
        loss, _, _ = pair_loss_and_gradients(
            matrix.input_vectors[center], matrix.output_vectors[rows], labels
        )
        total += loss
    return total / max(1, len(pairs))


# ---------------------------------------------------------------------------
# Persistence. Text: the common word-vector convention ("V d" header, one
# token + d decimals per line). Binary: "V d" header line, V token lines,
# then row-major little-endian float32.
# ---------------------------------------------------------------------------

def save_text(matrix: EmbeddingMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(matrix.vocab)} {matrix.dim}\n")
        for token, row in zip(matrix.vocab.tokens, matrix.input_vectors):
            fh.write(token + " " + " ".join(f"{x:.6f}" for x in row) + "\n")


def load_text(path: str | Path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ParseError(f"expected header 'V d', got {header.strip()!r}", 1)
        try:
            v, d = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"non-integer header {header.strip()!r}", 1) from exc
        tokens: list[str] = []
        vectors = np.empty((v, d))
        lineno = 1
        for i in range(v):
            line = fh.readline()
            lineno += 1
            if not line:
                raise ParseError(f"expected {v} vector lines, found {i}", lineno)
            fields = line.split()
            if len(fields) != d + 1:
                raise ParseError(f"expected token + {d} values, found {len(fields) - 1}", lineno)
            tokens.append(fields[0])
            try:
                vectors[i] = [float(x) for x in fields[1:]]
            except ValueError as exc:
                raise ParseError(f"non-numeric entry: {exc}", lineno) from exc
        extra = fh.readline()
        if extra.strip():
            raise ParseError(f"expected {v} vector lines, file has more", lineno + 1)
    vocab = Vocabulary(tokens, None, 0)
    return EmbeddingMatrix(vocab=vocab, input_vectors=vectors, output_vectors=None, dim=d)


def save_binary(matrix: EmbeddingMatrix, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"{len(matrix.vocab)} {matrix.dim}\n".encode("utf-8"))
        for token in matrix.vocab.tokens:
            fh.write(token.encode("utf-8") + b"\n")
        fh.write(matrix.input_vectors.astype("<f4").tobytes(order="C"))


def load_binary(path: str | Path) -> EmbeddingMatrix:
    with open(path, "rb") as fh:
        header = fh.readline().decode("utf-8")
        parts = header.split()
        if len(parts) != 2:
            raise ParseError(f"expected header 'V d', got {header.strip()!r}", 1)
        try:
            v, d = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"non-integer header {header.strip()!r}", 1) from exc
        tokens = []
        for i in range(v):
            line = fh.readline()
            if not line:
                raise ParseError(f"expected {v} token lines, found {i}", i + 2)
            tokens.append(line.decode("utf-8").rstrip("\n"))
        raw = fh.read()
    expected = v * d * 4
    if len(raw) != expected:
        raise ParseError(f"expected {expected} bytes of float32 data, found {len(raw)}")
    vectors = np.frombuffer(raw, dtype="<f4").reshape(v, d)
    vocab = Vocabulary(tokens, None, 0)
    return EmbeddingMatrix(vocab=vocab, input_vectors=vectors, output_vectors=None, dim=d)


def save_vocab_counts(vocab: Vocabulary, path: str | Path) -> None:
    """Token + count per line; feeds the spell-correction lexicon."""
    with open(path, "w", encoding="utf-8") as fh:
        for token, count in zip(vocab.tokens, vocab.counts):
            fh.write(f"{token} {int(count)}\n")


def load_lexicon(path: str | Path) -> set[str]:
    lexicon = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                lexicon.add(line.split()[0])
    return lexicon
