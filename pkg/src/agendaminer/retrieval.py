"""Cosine similarity, nearest-word lookup, threshold retrieval, and the
document classification rule.

Everything here is an exhaustive scan over immutable vectors: corpus
sizes make exactness cheap, so no approximate index exists. A document is
positive for an agenda iff at least one of its paragraphs reaches the
query's cosine threshold.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .skipgram import EmbeddingMatrix
from .vectorizer import ParagraphVectorStore

DEFAULT_THRESHOLD = 0.55
DESCENT_STEP = 0.01
DESCENT_FLOOR = 0.40
DEFAULT_NEIGHBORS = 50


@dataclass
class AgendaQuery:
    """A labeled retrieval query standing in for a classification label."""

    label: str
    terms: list[str]
    threshold: float = DEFAULT_THRESHOLD
    notes: str = ""

    def __post_init__(self) -> None:
        if not self.label:
            raise ValidationError("query label must be non-empty")
        if not 1 <= len(self.terms) <= 5:
            raise ValidationError(
                f"query {self.label!r} must have 1..5 terms, got {len(self.terms)}"
            )
        if not 0.0 < self.threshold <= 1.0:
            raise ValidationError(
                f"query {self.label!r} threshold must be in (0, 1], got {self.threshold}"
            )


@dataclass(frozen=True)
class RetrievalHit:
    para_id: str
    doc_id: str
    page_number: int
    similarity: float
    excerpt: str


@dataclass(frozen=True)
class DocLabel:
    doc_id: str
    label: str
    predicted: bool
    best_similarity: float
    best_para_id: str | None


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Raw cosine, unclamped; zero vectors have no defined similarity."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValidationError("cosine similarity is undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))


def nearest_words(
    v: np.ndarray,
    emb: EmbeddingMatrix,
    k: int = DEFAULT_NEIGHBORS,
    exclude: Sequence[str] = (),
) -> list[tuple[str, float]]:
    """Exact top-k tokens by cosine; ties broken lexicographically.

    ``exclude`` removes the query's own constituent terms from the ranking.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValidationError("cannot rank neighbors of a zero vector")
    norms = np.linalg.norm(emb.input_vectors, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    sims = (emb.input_vectors @ v) / (safe * nv)
    sims[norms == 0.0] = -np.inf
    excluded = set(exclude)
    ranked = sorted(
        (
            (-float(sims[i]), token)
            for i, token in enumerate(emb.vocab.tokens)
            if token not in excluded
        )
    )
    return [(token, -neg) for neg, token in ranked[:k]]


def _similarities(query_vec: np.ndarray, store: ParagraphVectorStore) -> np.ndarray:
    """Cosine per paragraph; non-retrievable rows are -inf."""
    nq = np.linalg.norm(query_vec)
    if nq == 0.0:
        raise ValidationError("query vector is zero; cannot retrieve")
    norms = np.linalg.norm(store.matrix, axis=1)
    usable = store.retrievable & (norms > 0.0)
    sims = np.full(len(store), -np.inf)
    if usable.any():
        sims[usable] = (store.matrix[usable] @ query_vec) / (norms[usable] * nq)
    return sims


def _hit(store: ParagraphVectorStore, i: int, sim: float) -> RetrievalHit:
    return RetrievalHit(
        para_id=store.para_ids[i],
        doc_id=store.doc_ids[i],
        page_number=store.page_numbers[i],
        similarity=sim,
        excerpt=store.texts[i],
    )


def _sorted_hits(store: ParagraphVectorStore, sims: np.ndarray, idx: np.ndarray) -> list[RetrievalHit]:
    order = sorted(idx.tolist(), key=lambda i: (-sims[i], store.doc_ids[i], store.para_ids[i]))
    return [_hit(store, i, float(sims[i])) for i in order]


def retrieve(
    query: AgendaQuery,
    query_vec: np.ndarray,
    store: ParagraphVectorStore,
    order: str = "desc",
) -> list[RetrievalHit]:
    """All paragraphs at or above the query threshold.

    ``order="asc"`` serves boundary review: reading the weakest admitted
    paragraphs first to judge whether the threshold has descended too far.
    """
    if order not in ("desc", "asc"):
        raise ValidationError(f"order must be 'asc' or 'desc', got {order!r}")
    sims = _similarities(query_vec, store)
    hits = _sorted_hits(store, sims, np.nonzero(sims >= query.threshold)[0])
    return hits if order == "desc" else list(reversed(hits))


def classify_documents(
    query: AgendaQuery,
    query_vec: np.ndarray,
    store: ParagraphVectorStore,
    doc_ids: Sequence[str] | None = None,
) -> list[DocLabel]:
    """One label per document: positive iff some paragraph reaches the threshold."""
    sims = _similarities(query_vec, store)
    best: dict[str, tuple[float, str | None]] = {d: (-np.inf, None) for d in (doc_ids or [])}
    for i in range(len(store)):
        doc_id = store.doc_ids[i]
        sim = float(sims[i])
        cur = best.get(doc_id, (-np.inf, None))
        if sim > cur[0] or (sim == cur[0] and cur[1] is not None and store.para_ids[i] < cur[1]):
            best[doc_id] = (sim, store.para_ids[i])
    return [
        DocLabel(
            doc_id=doc_id,
            label=query.label,
            predicted=bool(sim >= query.threshold),
            best_similarity=sim,
            best_para_id=para_id,
        )
        for doc_id, (sim, para_id) in sorted(best.items())
    ]


def descend_threshold(
    query: AgendaQuery,
    query_vec: np.ndarray,
    store: ParagraphVectorStore,
    step: float = DESCENT_STEP,
    floor: float = DESCENT_FLOOR,
) -> Iterator[tuple[float, list[RetrievalHit]]]:
    """Yield (threshold, newly admitted hits), starting at the query's own
    threshold and stepping down to the floor. The analyst decides when to
    stop; this only supplies the loop mechanics."""
    if step <= 0:
        raise ValidationError(f"step must be > 0, got {step}")
    sims = _similarities(query_vec, store)
    theta = query.threshold
    previous = np.inf
    while theta >= floor - 1e-12:
        idx = np.nonzero((sims >= theta) & (sims < previous))[0]
        yield round(theta, 9), _sorted_hits(store, sims, idx)
        previous = theta
        theta = round(theta - step, 9)


def export_hits_csv(hits: Sequence[RetrievalHit], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "page_number", "para_id", "similarity", "excerpt"])
        for h in hits:
            writer.writerow([h.doc_id, h.page_number, h.para_id, f"{h.similarity:.6f}", h.excerpt])


# ---------------------------------------------------------------------------
# Query file: one record per query (label, terms, threshold, notes).
# ---------------------------------------------------------------------------

def load_queries(path: str | Path) -> list[AgendaQuery]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        AgendaQuery(
            label=q["label"],
            terms=list(q["terms"]),
            threshold=float(q.get("threshold", DEFAULT_THRESHOLD)),
            notes=q.get("notes", ""),
        )
        for q in raw
    ]


def save_queries(queries: Sequence[AgendaQuery], path: str | Path) -> None:
    rows = [
        {"label": q.label, "terms": q.terms, "threshold": q.threshold, "notes": q.notes}
        for q in queries
    ]
    Path(path).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
