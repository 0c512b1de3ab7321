"""Local HTTP+JSON workbench service: neighbor exploration, query drafting,
threshold descent with boundary review, and classification preview.

Single analyst, single session. Every draft mutation is appended to the
session history (and to an on-disk log when configured) so a tuning trail
is itself an audit artifact: replaying the history reproduces the drafts.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import report as report_mod
from . import retrieval, vectorizer
from .errors import ValidationError
from .retrieval import AgendaQuery, DESCENT_FLOOR, DESCENT_STEP
from .skipgram import EmbeddingMatrix
from .vectorizer import ParagraphVectorStore, TfidfStats

TERM_CAP = 5


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(message)


@dataclass
class QueryDraft:
    draft_id: int
    label: str
    terms: list[str]
    threshold: float
    notes: str = ""
    accepted: bool = False
    history: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.draft_id,
            "label": self.label,
            "terms": list(self.terms),
            "threshold": self.threshold,
            "notes": self.notes,
            "accepted": self.accepted,
            "history": list(self.history),
        }


class Session:
    """Append-only edit history over a working set of query drafts."""

    def __init__(self, corpus_id: str, embedding_id: str, log_path: str | Path | None = None):
        self.session_id = uuid.uuid4().hex[:12]
        self.corpus_id = corpus_id
        self.embedding_id = embedding_id
        self.drafts: dict[int, QueryDraft] = {}
        self.log_path = Path(log_path) if log_path else None
        self.lock = threading.Lock()
        self._next_id = 1
        self._seq = 0

    def _record(self, draft: QueryDraft, action: str, value: Any) -> None:
        self._seq += 1
        event = {
            "seq": self._seq,
            "draft_id": draft.draft_id,
            "action": action,
            "value": value,
            "ts": datetime.now(timezone.utc).isoformat(),
        }
        draft.history.append(event)
        if self.log_path:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event) + "\n")

    def create_draft(self, label: str, terms: list[str], threshold: float, notes: str = "") -> QueryDraft:
        AgendaQuery(label=label, terms=list(terms), threshold=threshold, notes=notes)  # validates
        draft = QueryDraft(self._next_id, label, list(terms), threshold, notes)
        self._next_id += 1
        self.drafts[draft.draft_id] = draft
        self._record(
            draft,
            "create",
            {"label": label, "terms": list(terms), "threshold": threshold, "notes": notes},
        )
        return draft

    def get(self, draft_id: int) -> QueryDraft:
        draft = self.drafts.get(draft_id)
        if draft is None:
            raise ApiError(404, "unknown-query", f"no query draft {draft_id}")
        return draft

    def add_term(self, draft: QueryDraft, term: str) -> None:
        if len(draft.terms) >= TERM_CAP:
            raise ApiError(
                409,
                "term-cap",
                f"query already has {TERM_CAP} terms; the five-word cap applies",
                {"terms": list(draft.terms)},
            )
        if term in draft.terms:
            raise ApiError(422, "duplicate-term", f"term {term!r} already in query")
        draft.terms.append(term)
        self._record(draft, "add_term", term)

    def remove_term(self, draft: QueryDraft, term: str) -> None:
        if term not in draft.terms:
            raise ApiError(422, "unknown-term", f"term {term!r} not in query")
        if len(draft.terms) == 1:
            raise ApiError(422, "empty-query", "a query needs at least one term")
        draft.terms.remove(term)
        self._record(draft, "remove_term", term)

    def set_threshold(self, draft: QueryDraft, threshold: float) -> None:
        if not 0.0 < threshold <= 1.0:
            raise ApiError(422, "bad-threshold", f"threshold must be in (0, 1], got {threshold}")
        draft.threshold = threshold
        self._record(draft, "set_threshold", threshold)

    def descend(self, draft: QueryDraft, step: float = DESCENT_STEP, floor: float = DESCENT_FLOOR) -> float:
        new = round(draft.threshold - step, 9)
        if new < floor - 1e-12:
            raise ApiError(409, "floor-reached", f"threshold floor {floor} reached")
        draft.threshold = new
        self._record(draft, "descend", new)
        return new

    def accept(self, draft: QueryDraft) -> None:
        draft.accepted = True
        self._record(draft, "accept", draft.threshold)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "corpus_id": self.corpus_id,
            "embedding_id": self.embedding_id,
            "drafts": [d.to_dict() for d in sorted(self.drafts.values(), key=lambda d: d.draft_id)],
        }


def replay_events(events: list[dict]) -> dict[int, dict]:
    """Rebuild draft states from an event list; the reproducibility check."""
    drafts: dict[int, dict] = {}
    for event in sorted(events, key=lambda e: e["seq"]):
        did = event["draft_id"]
        action = event["action"]
        value = event["value"]
        if action == "create":
            drafts[did] = {
                "label": value["label"],
                "terms": list(value["terms"]),
                "threshold": value["threshold"],
                "notes": value.get("notes", ""),
                "accepted": False,
            }
        elif action == "add_term":
            drafts[did]["terms"].append(value)
        elif action == "remove_term":
            drafts[did]["terms"].remove(value)
        elif action in ("set_threshold", "descend"):
            drafts[did]["threshold"] = value
        elif action == "accept":
            drafts[did]["accepted"] = True
    return drafts


@dataclass
class WorkbenchState:
    store: ParagraphVectorStore
    stats: TfidfStats
    emb: EmbeddingMatrix
    session: Session
    pages: dict[str, dict[int, str]]
    report_dir: Path | None = None


def build_state(
    store: ParagraphVectorStore,
    stats: TfidfStats,
    emb: EmbeddingMatrix,
    corpus_id: str = "",
    embedding_id: str = "",
    session_log: str | Path | None = None,
    report_dir: str | Path | None = None,
) -> WorkbenchState:
    pages: dict[str, dict[int, str]] = {}
    for i in range(len(store)):
        doc_pages = pages.setdefault(store.doc_ids[i], {})
        page = store.page_numbers[i]
        doc_pages[page] = (doc_pages.get(page, "") + "\n\n" + store.texts[i]).strip()
    return WorkbenchState(
        store=store,
        stats=stats,
        emb=emb,
        session=Session(corpus_id, embedding_id, log_path=session_log),
        pages=pages,
        report_dir=Path(report_dir) if report_dir else None,
    )


class CreateQueryBody(BaseModel):
    label: str
    terms: list[str]
    threshold: float = retrieval.DEFAULT_THRESHOLD
    notes: str = ""


class PatchQueryBody(BaseModel):
    action: str  # add_term | remove_term | set_threshold
    value: str | float


def _hit_dict(h: retrieval.RetrievalHit) -> dict:
    return {
        "para_id": h.para_id,
        "doc_id": h.doc_id,
        "page_number": h.page_number,
        "similarity": h.similarity,
        "excerpt": h.excerpt,
    }


def _label_dict(d: retrieval.DocLabel) -> dict:
    return {
        "doc_id": d.doc_id,
        "label": d.label,
        "predicted": d.predicted,
        "best_similarity": None if d.best_similarity == float("-inf") else d.best_similarity,
        "best_para_id": d.best_para_id,
    }


def create_app(state: WorkbenchState, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="agendaminer workbench", version="0.1.0")

    @app.exception_handler(ApiError)
    async def api_error_handler(_request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    def _validate_terms_in_vocab(terms: list[str]) -> None:
        missing = [t for t in terms if t not in state.emb.vocab]
        if missing:
            suggestions = {
                t: vectorizer.nearest_vocabulary_terms(t, state.emb) for t in missing
            }
            raise ApiError(
                422,
                "unknown-term",
                f"terms not in vocabulary: {', '.join(missing)}",
                {"suggestions": suggestions},
            )

    def _query_vector(terms: list[str]):
        try:
            return vectorizer.embed_query(terms, state.stats, state.emb)
        except ValidationError as exc:
            raise ApiError(422, "validation", str(exc)) from exc

    def _draft_query(draft: QueryDraft) -> AgendaQuery:
        return AgendaQuery(
            label=draft.label, terms=list(draft.terms), threshold=draft.threshold, notes=draft.notes
        )

    @app.get("/session")
    def get_session():
        return state.session.to_dict()

    @app.get("/neighbors")
    def neighbors(terms: str = "", k: int = retrieval.DEFAULT_NEIGHBORS):
        term_list = [t.strip() for t in terms.split(",") if t.strip()]
        if not term_list:
            raise ApiError(400, "empty-terms", "pass ?terms=a,b with at least one term")
        if k < 1:
            raise ApiError(422, "bad-k", f"k must be >= 1, got {k}")
        _validate_terms_in_vocab(term_list)
        vec = _query_vector(term_list)
        ranked = retrieval.nearest_words(vec, state.emb, k=k, exclude=term_list)
        return {
            "terms": term_list,
            "k": k,
            "neighbors": [{"token": t, "similarity": s} for t, s in ranked],
        }

    @app.post("/queries", status_code=201)
    def create_query(body: CreateQueryBody):
        with state.session.lock:
            if len(body.terms) > TERM_CAP:
                raise ApiError(409, "term-cap", f"a query is capped at {TERM_CAP} terms")
            _validate_terms_in_vocab(body.terms)
            try:
                draft = state.session.create_draft(body.label, body.terms, body.threshold, body.notes)
            except ValidationError as exc:
                raise ApiError(422, "validation", str(exc)) from exc
        return draft.to_dict()

    @app.patch("/queries/{draft_id}")
    def patch_query(draft_id: int, body: PatchQueryBody):
        with state.session.lock:
            draft = state.session.get(draft_id)
            if draft.accepted:
                raise ApiError(409, "accepted", "draft is frozen; create a new one to keep tuning")
            if body.action == "add_term":
                term = str(body.value)
                _validate_terms_in_vocab([term])
                state.session.add_term(draft, term)
            elif body.action == "remove_term":
                state.session.remove_term(draft, str(body.value))
            elif body.action == "set_threshold":
                try:
                    state.session.set_threshold(draft, float(body.value))
                except (TypeError, ValueError) as exc:
                    raise ApiError(422, "bad-threshold", f"not a number: {body.value!r}") from exc
            else:
                raise ApiError(422, "bad-action", f"unknown action {body.action!r}")
        return draft.to_dict()

    @app.get("/queries/{draft_id}/hits")
    def query_hits(draft_id: int, order: str = "desc"):
        if order not in ("asc", "desc"):
            raise ApiError(422, "bad-order", f"order must be asc or desc, got {order!r}")
        draft = state.session.get(draft_id)
        q = _draft_query(draft)
        hits = retrieval.retrieve(q, _query_vector(draft.terms), state.store, order=order)
        return {
            "query": draft.to_dict(),
            "order": order,
            "hits": [_hit_dict(h) for h in hits],
        }

    @app.post("/queries/{draft_id}/descend")
    def descend(draft_id: int):
        with state.session.lock:
            draft = state.session.get(draft_id)
            if draft.accepted:
                raise ApiError(409, "accepted", "draft is frozen")
            previous = draft.threshold
            new_threshold = state.session.descend(draft)
        q = AgendaQuery(label=draft.label, terms=list(draft.terms), threshold=new_threshold)
        vec = _query_vector(draft.terms)
        sims_hits = retrieval.retrieve(q, vec, state.store)
        admitted = [h for h in sims_hits if h.similarity < previous]
        return {
            "threshold": new_threshold,
            "previous": previous,
            "admitted": [_hit_dict(h) for h in admitted],
        }

    @app.post("/classify/{draft_id}")
    def classify(draft_id: int):
        draft = state.session.get(draft_id)
        q = _draft_query(draft)
        doc_ids = sorted(set(state.store.doc_ids))
        labels = retrieval.classify_documents(q, _query_vector(draft.terms), state.store, doc_ids=doc_ids)
        return {"query": draft.to_dict(), "labels": [_label_dict(d) for d in labels]}

    @app.post("/queries/{draft_id}/accept")
    def accept(draft_id: int):
        with state.session.lock:
            draft = state.session.get(draft_id)
            if draft.accepted:
                raise ApiError(409, "accepted", "draft is already frozen")
            state.session.accept(draft)
        q = _draft_query(draft)
        vec = _query_vector(draft.terms)
        written: list[str] = []
        if state.report_dir is not None:
            hits = retrieval.retrieve(q, vec, state.store)
            doc_ids = sorted(set(state.store.doc_ids))
            labels = retrieval.classify_documents(q, vec, state.store, doc_ids=doc_ids)
            rep = report_mod.generate(q, hits, labels, corpus_id=state.session.corpus_id)
            written = [str(p) for p in report_mod.write_report(rep, state.report_dir)]
        return {"query": draft.to_dict(), "report_paths": written}

    @app.get("/documents/{doc_id}/pages/{page_number}")
    def get_page(doc_id: str, page_number: int):
        doc_pages = state.pages.get(doc_id)
        if doc_pages is None or page_number not in doc_pages:
            raise ApiError(404, "unknown-page", f"no page {page_number} for document {doc_id!r}")
        return {"doc_id": doc_id, "page_number": page_number, "text": doc_pages[page_number]}

    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="workbench")

    return app
