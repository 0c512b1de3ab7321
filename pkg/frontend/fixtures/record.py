"""Record service responses as JSON fixtures for the workbench contract
tests. Run from the repository root after installing the package:

    python3 frontend/fixtures/record.py

Every fixture is {"status": <http status>, "body": <response json>} so the
tests exercise exactly what the service returns.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from agendaminer import service
from agendaminer.corpus import ParagraphRecord
from agendaminer.skipgram import EmbeddingMatrix, Vocabulary
from agendaminer.vectorizer import ParagraphVectorStore, fit_tfidf

OUT = Path(__file__).parent


def _embedding() -> EmbeddingMatrix:
    rng = np.random.default_rng(2024)
    named = {
        "local": [1.0, 0.0, 0.0],
        "participation": [0.8, 0.6, 0.0],
        "community": [0.95, 0.31, 0.0],
        "grassroots": [0.9, 0.42, 0.05],
        "devolution": [0.85, 0.5, 0.1],
    }
    tokens = sorted(named)
    vectors = [named[t] for t in tokens]
    for i in range(55):
        tokens.append(f"gov{i:02d}")
        v = rng.normal(size=3)
        vectors.append((v / np.linalg.norm(v)).tolist())
    return EmbeddingMatrix(
        vocab=Vocabulary(tokens, [50] * len(tokens), 50 * len(tokens)),
        input_vectors=np.array(vectors),
        output_vectors=None,
        dim=3,
    )


def _store() -> ParagraphVectorStore:
    # Cosines against vec(local) = e1, chosen so theta=0.55 admits two
    # paragraphs and one 0.01 descent admits exactly two more.
    layout = [
        ("d1", 1, 0.62), ("d1", 2, 0.548), ("d1", 3, 0.20),
        ("d2", 1, 0.58), ("d2", 2, 0.41),
        ("d3", 1, 0.545), ("d3", 2, 0.30),
        ("d4", 1, 0.25), ("d4", 2, 0.10), ("d4", 3, 0.05),
    ]
    rows, para_ids, doc_ids, pages, texts = [], [], [], [], []
    for i, (doc_id, page, sim) in enumerate(layout):
        rows.append([sim, math.sqrt(1 - sim * sim), 0.0])
        para_ids.append(f"{doc_id}-p{page}-{i}")
        doc_ids.append(doc_id)
        pages.append(page)
        texts.append(f"Paragraph {i} of {doc_id} discusses governance and participation on page {page}.")
    return ParagraphVectorStore(
        matrix=np.array(rows),
        para_ids=para_ids,
        doc_ids=doc_ids,
        page_numbers=pages,
        texts=texts,
        coverages=[1.0] * len(rows),
        retrievable=np.ones(len(rows), dtype=bool),
    )


def _stats():
    words = ["local", "participation", "community", "grassroots", "devolution"]
    records = [
        ParagraphRecord(f"s{i}", "d1", 1, (words[i % 5], words[(i + 1) % 5], f"gov{i:02d}"), "")
        for i in range(10)
    ]
    return fit_tfidf(records)


def _save(name: str, response) -> None:
    payload = {"status": response.status_code, "body": response.json()}
    (OUT / f"{name}.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"recorded {name}.json ({response.status_code})")


def main() -> None:
    state = service.build_state(
        _store(), _stats(), _embedding(),
        corpus_id="fixture-corpus", embedding_id="fixture-embeddings",
    )
    client = TestClient(service.create_app(state))

    _save("neighbors_k50", client.get("/neighbors", params={"terms": "local,participation", "k": 50}))
    _save("neighbors_unknown_term", client.get("/neighbors", params={"terms": "communty"}))

    # Draft 1 keeps a single term so its query vector is exactly
    # vec("local") and the staged paragraph cosines hold.
    _save("create_draft", client.post(
        "/queries", json={"label": "local-participation", "terms": ["local"], "threshold": 0.55}
    ))
    _save("hits_before_descend", client.get("/queries/1/hits", params={"order": "desc"}))
    _save("descend_step", client.post("/queries/1/descend"))
    _save("hits_desc", client.get("/queries/1/hits", params={"order": "desc"}))
    _save("hits_asc", client.get("/queries/1/hits", params={"order": "asc"}))
    _save("classify", client.post("/classify/1"))

    full = client.post(
        "/queries",
        json={"label": "crowded", "terms": ["local", "participation", "community", "grassroots", "devolution"]},
    )
    assert full.status_code == 201
    _save("add_term_409", client.patch("/queries/2", json={"action": "add_term", "value": "gov00"}))

    third = client.post("/queries", json={"label": "expansion", "terms": ["local"]})
    assert third.status_code == 201
    _save("add_term_ok", client.patch("/queries/3", json={"action": "add_term", "value": "participation"}))

    _save("page", client.get("/documents/d1/pages/1"))
    _save("session_after", client.get("/session"))


if __name__ == "__main__":
    main()
