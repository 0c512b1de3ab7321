"""tf-idf statistics at paragraph granularity and embedding composition.

The "document" unit for idf is the paragraph: the weighting is meant to
boost words distinctive to a passage. Paragraph and query vectors are
tf-idf-weighted means of word vectors, so vector magnitude is independent
of passage length.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .corpus import ParagraphRecord, _levenshtein_leq
from .errors import ConfigError, ValidationError
from .skipgram import EmbeddingMatrix

MAX_QUERY_TERMS = 5


class _HasTokens(Protocol):
    para_id: str
    tokens: Sequence[str]


@dataclass
class TfidfStats:
    """Paragraph-level counts backing tf-idf = (f/len) * ln(N/n_t)."""

    doc_freq: dict[str, int]  # n_t: number of paragraphs containing t
    n_paragraphs: int  # N
    paragraph_counts: dict[str, dict[str, int]]
    paragraph_lengths: dict[str, int]

    @property
    def max_idf(self) -> float:
        """Largest observed idf; assigned to terms absent from the corpus."""
        if not self.doc_freq:
            return 0.0
        return math.log(self.n_paragraphs / min(self.doc_freq.values()))

    def idf(self, token: str) -> float:
        n_t = self.doc_freq.get(token)
        if n_t is None:
            return self.max_idf
        return math.log(self.n_paragraphs / n_t)

    def tfidf(self, token: str, para_id: str) -> float:
        counts = self.paragraph_counts[para_id]
        if token not in counts:
            return 0.0
        tf = counts[token] / self.paragraph_lengths[para_id]
        return tf * self.idf(token)

    def save(self, path: str | Path) -> None:
        payload = {
            "doc_freq": self.doc_freq,
            "n_paragraphs": self.n_paragraphs,
            "paragraph_counts": self.paragraph_counts,
            "paragraph_lengths": self.paragraph_lengths,
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfidfStats":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            doc_freq=raw["doc_freq"],
            n_paragraphs=raw["n_paragraphs"],
            paragraph_counts=raw["paragraph_counts"],
            paragraph_lengths=raw["paragraph_lengths"],
        )


@dataclass
class ParagraphVector:
    para_id: str
    vector: np.ndarray
    coverage: float  # fraction of tokens found in the embedding vocabulary
    retrievable: bool


def fit_tfidf(paragraphs: Iterable[_HasTokens]) -> TfidfStats:
    doc_freq: Counter[str] = Counter()
    paragraph_counts: dict[str, dict[str, int]] = {}
    paragraph_lengths: dict[str, int] = {}
    for para in paragraphs:
        counts = Counter(para.tokens)
        if para.para_id in paragraph_counts:
            raise ValidationError(f"duplicate para_id {para.para_id!r}")
        paragraph_counts[para.para_id] = dict(counts)
        paragraph_lengths[para.para_id] = len(para.tokens)
        doc_freq.update(counts.keys())
    if not paragraph_counts:
        raise ValidationError("cannot fit tf-idf on an empty corpus")
    return TfidfStats(
        doc_freq=dict(doc_freq),
        n_paragraphs=len(paragraph_counts),
        paragraph_counts=paragraph_counts,
        paragraph_lengths=paragraph_lengths,
    )


def _check_dims(emb: EmbeddingMatrix) -> None:
    if emb.input_vectors.ndim != 2 or emb.input_vectors.shape[1] != emb.dim:
        raise ConfigError(
            f"embedding matrix shape {emb.input_vectors.shape} does not match dim {emb.dim}"
        )
    if emb.input_vectors.shape[0] != len(emb.vocab):
        raise ConfigError(
            f"embedding rows {emb.input_vectors.shape[0]} != vocabulary size {len(emb.vocab)}"
        )


def embed_paragraph(para: _HasTokens, stats: TfidfStats, emb: EmbeddingMatrix) -> ParagraphVector:
    """tf-idf-weighted mean of the in-vocabulary word vectors.

    Out-of-vocabulary tokens are skipped and reflected in coverage. A
    paragraph with no in-vocabulary token, or whose weights all vanish
    (every term appears in every paragraph), gets the zero vector and is
    flagged non-retrievable.
    """
    _check_dims(emb)
    tokens = para.tokens
    if not tokens:
        return ParagraphVector(para.para_id, np.zeros(emb.dim), 0.0, False)
    counts = Counter(tokens)
    length = len(tokens)
    vector = np.zeros(emb.dim)
    weight_sum = 0.0
    in_vocab_occurrences = 0
    for token, count in counts.items():
        idx = emb.vocab.index.get(token)
        if idx is None:
            continue
        in_vocab_occurrences += count
        weight = (count / length) * stats.idf(token)
        vector += weight * emb.input_vectors[idx]
        weight_sum += weight
    coverage = in_vocab_occurrences / length
    if in_vocab_occurrences == 0 or weight_sum <= 0.0:
        return ParagraphVector(para.para_id, np.zeros(emb.dim), coverage, False)
    return ParagraphVector(para.para_id, vector / weight_sum, coverage, True)


def nearest_vocabulary_terms(token: str, emb: EmbeddingMatrix, n: int = 3) -> list[str]:
    """Closest in-vocabulary tokens by edit distance; suggestion aid for errors."""
    scored = []
    for cand in emb.vocab.tokens:
        for limit in (1, 2, 3):
            if _levenshtein_leq(token, cand, limit):
                scored.append((limit, cand))
                break
    scored.sort()
    return [cand for _, cand in scored[:n]]


def embed_query(terms: Sequence[str], stats: TfidfStats, emb: EmbeddingMatrix) -> np.ndarray:
    """idf-weighted mean of query-term vectors.

    Term frequency inside a <=5-word query is uniform, so tf contributes a
    constant factor that the normalization removes; only idf matters.
    Terms absent from the study corpus get the maximum observed idf.
    """
    _check_dims(emb)
    if not 1 <= len(terms) <= MAX_QUERY_TERMS:
        raise ValidationError(
            f"query must have 1..{MAX_QUERY_TERMS} terms, got {len(terms)}"
        )
    missing = [t for t in terms if t not in emb.vocab]
    if missing:
        hints = "; ".join(
            f"{t!r} (near: {', '.join(nearest_vocabulary_terms(t, emb)) or 'none'})"
            for t in missing
        )
        raise ValidationError(f"query terms not in embedding vocabulary: {hints}")
    weights = np.array([stats.idf(t) for t in terms])
    rows = np.stack([emb.vector(t) for t in terms])
    if weights.sum() <= 0.0:
        # Degenerate corpus where every query term appears in every
        # paragraph: fall back to the unweighted mean.
        return rows.mean(axis=0)
    return (weights @ rows) / weights.sum()


# ---------------------------------------------------------------------------
# Persistence: binary matrix (.npy) + line-delimited para_id index.
# ---------------------------------------------------------------------------

@dataclass
class ParagraphVectorStore:
    """All paragraph vectors of a study corpus plus retrieval metadata."""

    matrix: np.ndarray  # (n, d)
    para_ids: list[str]
    doc_ids: list[str]
    page_numbers: list[int]
    texts: list[str]
    coverages: list[float]
    retrievable: np.ndarray  # bool mask

    def __len__(self) -> int:
        return len(self.para_ids)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def build(
        cls, records: Sequence[ParagraphRecord], stats: TfidfStats, emb: EmbeddingMatrix
    ) -> "ParagraphVectorStore":
        vectors = [embed_paragraph(rec, stats, emb) for rec in records]
        return cls(
            matrix=np.stack([pv.vector for pv in vectors]) if vectors else np.zeros((0, emb.dim)),
            para_ids=[r.para_id for r in records],
            doc_ids=[r.doc_id for r in records],
            page_numbers=[r.page_number for r in records],
            texts=[r.text for r in records],
            coverages=[pv.coverage for pv in vectors],
            retrievable=np.array([pv.retrievable for pv in vectors], dtype=bool),
        )

    def save(self, base: str | Path) -> tuple[Path, Path]:
        base = Path(base)
        matrix_path = base.with_suffix(".npy")
        index_path = base.with_suffix(".index.jsonl")
        np.save(matrix_path, self.matrix)
        with open(index_path, "w", encoding="utf-8") as fh:
            for i in range(len(self)):
                fh.write(
                    json.dumps(
                        {
                            "para_id": self.para_ids[i],
                            "doc_id": self.doc_ids[i],
                            "page_number": self.page_numbers[i],
                            "text": self.texts[i],
                            "coverage": self.coverages[i],
                            "retrievable": bool(self.retrievable[i]),
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        return matrix_path, index_path

    @classmethod
    def load(cls, base: str | Path) -> "ParagraphVectorStore":
        base = Path(base)
        matrix = np.load(base.with_suffix(".npy"))
        para_ids, doc_ids, pages, texts, coverages, retrievable = [], [], [], [], [], []
        with open(base.with_suffix(".index.jsonl"), encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                para_ids.append(rec["para_id"])
                doc_ids.append(rec["doc_id"])
                pages.append(int(rec["page_number"]))
                texts.append(rec.get("text", ""))
                coverages.append(float(rec.get("coverage", 0.0)))
                retrievable.append(bool(rec.get("retrievable", True)))
        if len(para_ids) != matrix.shape[0]:
            raise ConfigError(
                f"vector matrix has {matrix.shape[0]} rows but index lists {len(para_ids)}"
            )
        return cls(
            matrix=matrix,
            para_ids=para_ids,
            doc_ids=doc_ids,
            page_numbers=pages,
            texts=texts,
            coverages=coverages,
            retrievable=np.array(retrievable, dtype=bool),
        )
