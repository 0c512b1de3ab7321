"""Seeded synthetic corpora: a background corpus of topic-flavored
documents plus a study corpus with planted agenda paragraphs and matching
gold labels. Used by the demo pipeline and the end-to-end benchmark.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COUNTRIES = ("alphaland", "betania", "gammara")
SECTORS = ("forestry", "agriculture", "economy", "land")


@dataclass(frozen=True)
class SyntheticSpec:
    n_agenda: int = 6
    n_distractor_topics: int = 4
    topic_vocab: int = 10  # words per topic
    filler_vocab: int = 400
    background_paragraphs_per_topic: int = 80
    background_filler_paragraphs: int = 400
    n_study_docs: int = 30
    study_filler_paragraphs: tuple[int, int] = (4, 7)  # min/max per document
    planted_paragraphs: tuple[int, int] = (1, 3)  # per present agenda
    sentence_tokens: tuple[int, int] = (8, 14)
    paragraph_sentences: tuple[int, int] = (2, 4)
    present_probability: float = 0.5
    topic_filler_share: float = 0.10  # filler mixed into topic paragraphs
    query_terms: int = 3
    threshold: float = 0.55
    seed: int = 7

    @property
    def n_topics(self) -> int:
        return self.n_agenda + self.n_distractor_topics


def benchmark_train_config(seed: int = 11):
    """Training configuration sized for the planted benchmark: small corpus,
    so a narrower window, more contrastive noise, and longer, hotter
    training than the production defaults."""
    from .skipgram import TrainConfig

    return TrainConfig(
        window=3,
        negatives=15,
        dim=48,
        min_count=5,
        epochs=12,
        learning_rate=0.06,
        seed=seed,
    )


def topic_word(topic: int, i: int) -> str:
    return f"t{topic}w{i}"


def filler_word(i: int) -> str:
    return f"f{i}"


def agenda_label(k: int) -> str:
    return f"agenda-{k}"


class SyntheticCorpus:
    """Deterministic generator; every draw comes from one seeded RNG."""

    def __init__(self, spec: SyntheticSpec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.topics = [
            [topic_word(k, i) for i in range(spec.topic_vocab)] for k in range(spec.n_topics)
        ]
        self.fillers = [filler_word(i) for i in range(spec.filler_vocab)]

    # -- token machinery ---------------------------------------------------

    def _sentence(self, pool: list[str], mix: list[str], mix_share: float) -> str:
        lo, hi = self.spec.sentence_tokens
        n = int(self.rng.integers(lo, hi + 1))
        words = []
        for _ in range(n):
            source = mix if (mix and self.rng.random() < mix_share) else pool
            words.append(source[int(self.rng.integers(0, len(source)))])
        words[0] = words[0].capitalize()
        return " ".join(words) + "."

    def _paragraph(self, pool: list[str], mix: list[str], mix_share: float) -> str:
        lo, hi = self.spec.paragraph_sentences
        n = int(self.rng.integers(lo, hi + 1))
        return " ".join(self._sentence(pool, mix, mix_share) for _ in range(n))

    def topic_paragraph(self, topic: int) -> str:
        """Mostly topic words with filler mixed in; mirrors background usage."""
        return self._paragraph(self.topics[topic], self.fillers, self.spec.topic_filler_share)

    def filler_paragraph(self) -> str:
        """A paragraph about a distractor topic: on-corpus prose that is
        never one of the studied agenda."""
        spec = self.spec
        k = spec.n_agenda + int(self.rng.integers(0, spec.n_distractor_topics))
        return self.topic_paragraph(k)

    # -- corpora -----------------------------------------------------------

    def background_documents(self) -> dict[str, str]:
        """One text file per topic plus one of pure filler paragraphs."""
        spec = self.spec
        docs: dict[str, str] = {}
        for k in range(spec.n_topics):
            paras = [self.topic_paragraph(k) for _ in range(spec.background_paragraphs_per_topic)]
            docs[f"background-topic-{k}"] = "\n\n".join(paras)
        filler_paras = [
            self._paragraph(self.fillers, [], 0.0)
            for _ in range(spec.background_filler_paragraphs)
        ]
        docs["background-filler"] = "\n\n".join(filler_paras)
        return docs

    def study_documents(self) -> tuple[dict[str, dict], list[dict]]:
        """Study docs with planted paragraphs; returns (docs, gold rows).

        Each doc dict carries country/sector/title metadata and page texts
        joined by the form-feed delimiter downstream.
        """
        spec = self.spec
        docs: dict[str, dict] = {}
        gold: list[dict] = []
        for d in range(spec.n_study_docs):
            doc_id = f"study-{d:02d}"
            present = [
                bool(self.rng.random() < spec.present_probability)
                for _ in range(spec.n_agenda)
            ]
            paragraphs: list[str] = []
            lo, hi = spec.study_filler_paragraphs
            for _ in range(int(self.rng.integers(lo, hi + 1))):
                paragraphs.append(self.filler_paragraph())
            for k, is_present in enumerate(present):
                gold.append(
                    {"doc_id": doc_id, "agenda": agenda_label(k), "present": int(is_present)}
                )
                if not is_present:
                    continue
                plo, phi = spec.planted_paragraphs
                for _ in range(int(self.rng.integers(plo, phi + 1))):
                    paragraphs.append(self.topic_paragraph(k))
            order = self.rng.permutation(len(paragraphs))
            paragraphs = [paragraphs[i] for i in order]
            # Split paragraphs across 2-3 pages.
            n_pages = int(self.rng.integers(2, 4))
            pages: list[list[str]] = [[] for _ in range(n_pages)]
            for i, para in enumerate(paragraphs):
                pages[i % n_pages].append(para)
            docs[doc_id] = {
                "doc_id": doc_id,
                "country": COUNTRIES[d % len(COUNTRIES)],
                "sector": SECTORS[d % len(SECTORS)],
                "title": f"Synthetic policy {d:02d}",
                "text": "\f".join("\n\n".join(p) for p in pages),
            }
        return docs, gold

    def queries(self) -> list[dict]:
        spec = self.spec
        return [
            {
                "label": agenda_label(k),
                "terms": self.topics[k][: spec.query_terms],
                "threshold": spec.threshold,
                "notes": "synthetic planted agenda",
            }
            for k in range(spec.n_agenda)
        ]


def write_benchmark(out_dir: str | Path, spec: SyntheticSpec | None = None) -> Path:
    """Materialize the full fixture tree:

    out/background/*.txt            background corpus files
    out/study/*.txt + manifest.csv  study corpus with metadata
    out/gold.csv                    planted gold labels
    out/queries.json                fixed agenda queries
    """
    spec = spec or SyntheticSpec()
    out_dir = Path(out_dir)
    gen = SyntheticCorpus(spec)

    background_dir = out_dir / "background"
    background_dir.mkdir(parents=True, exist_ok=True)
    for name, text in gen.background_documents().items():
        (background_dir / f"{name}.txt").write_text(text, encoding="utf-8")

    study_dir = out_dir / "study"
    study_dir.mkdir(parents=True, exist_ok=True)
    docs, gold = gen.study_documents()
    manifest_path = study_dir / "manifest.csv"
    with open(manifest_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "country", "sector", "title", "path"])
        for doc_id, doc in sorted(docs.items()):
            (study_dir / f"{doc_id}.txt").write_text(doc["text"], encoding="utf-8")
            writer.writerow([doc_id, doc["country"], doc["sector"], doc["title"], f"{doc_id}.txt"])

    with open(out_dir / "gold.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["doc_id", "agenda", "present"])
        writer.writeheader()
        writer.writerows(gold)

    (out_dir / "queries.json").write_text(
        json.dumps(gen.queries(), indent=2) + "\n", encoding="utf-8"
    )
    return out_dir
