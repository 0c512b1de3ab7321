"""Per-query audit reports: every retrieved passage with document, page,
similarity, and query metadata. Two renderings per query share one base
name: a human-readable text file and a structured JSON file, plus a
similarity-distribution figure alongside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .errors import ValidationError
from .retrieval import AgendaQuery, DocLabel, RetrievalHit


@dataclass
class QueryReport:
    label: str
    terms: list[str]
    threshold: float
    notes: str
    generated_at: str
    corpus_id: str
    hits: list[RetrievalHit]
    doc_labels: list[DocLabel]

    @property
    def totals(self) -> dict:
        return {
            "hits": len(self.hits),
            "documents_positive": sum(1 for d in self.doc_labels if d.predicted),
            "documents_total": len(self.doc_labels),
        }


def generate(
    query: AgendaQuery,
    hits: Sequence[RetrievalHit],
    labels: Sequence[DocLabel],
    corpus_id: str = "",
    timestamp: str | None = None,
) -> QueryReport:
    """Assemble a self-contained report; deterministic except the timestamp."""
    for hit in hits:
        if hit.similarity < query.threshold:
            raise ValidationError(
                f"hit {hit.para_id} below query threshold "
                f"({hit.similarity:.4f} < {query.threshold})"
            )
    best_by_doc: dict[str, float] = {}
    for hit in hits:
        best_by_doc[hit.doc_id] = max(best_by_doc.get(hit.doc_id, float("-inf")), hit.similarity)
    ordered = sorted(hits, key=lambda h: (-best_by_doc[h.doc_id], h.doc_id, -h.similarity, h.para_id))
    return QueryReport(
        label=query.label,
        terms=list(query.terms),
        threshold=query.threshold,
        notes=query.notes,
        generated_at=timestamp or datetime.now(timezone.utc).isoformat(),
        corpus_id=corpus_id,
        hits=list(ordered),
        doc_labels=sorted(labels, key=lambda d: (-d.best_similarity, d.doc_id)),
    )


def render_text(report: QueryReport) -> str:
    totals = report.totals
    lines = [
        f"# Agenda query report: {report.label}",
        f"generated: {report.generated_at}",
        f"corpus: {report.corpus_id}",
        f"query terms: {', '.join(report.terms)}",
        f"threshold: {report.threshold:.2f}",
    ]
    if report.notes:
        lines.append(f"notes: {report.notes}")
    lines += [
        f"documents positive: {totals['documents_positive']} of {totals['documents_total']}",
        f"retrieved paragraphs: {totals['hits']}",
        "",
    ]
    current_doc = None
    for hit in report.hits:
        if hit.doc_id != current_doc:
            current_doc = hit.doc_id
            lines.append(f"## {hit.doc_id}")
        lines.append(f"- [{hit.similarity:.4f}] page {hit.page_number}, {hit.para_id}")
        lines.append(f"  {hit.excerpt}")
    if not report.hits:
        lines.append("(no paragraph reached the threshold)")
    lines += ["", "## Document summary"]
    for d in report.doc_labels:
        verdict = "POSITIVE" if d.predicted else "negative"
        best = "-" if d.best_similarity == float("-inf") else f"{d.best_similarity:.4f}"
        lines.append(f"- {d.doc_id}: {verdict} (best {best}, {d.best_para_id or 'n/a'})")
    return "\n".join(lines) + "\n"


def to_json_dict(report: QueryReport) -> dict:
    return {
        "label": report.label,
        "terms": report.terms,
        "threshold": report.threshold,
        "notes": report.notes,
        "generated_at": report.generated_at,
        "corpus_id": report.corpus_id,
        "totals": report.totals,
        "hits": [
            {
                "para_id": h.para_id,
                "doc_id": h.doc_id,
                "page_number": h.page_number,
                "similarity": h.similarity,
                "excerpt": h.excerpt,
            }
            for h in report.hits
        ],
        "documents": [
            {
                "doc_id": d.doc_id,
                "predicted": d.predicted,
                "best_similarity": None if d.best_similarity == float("-inf") else d.best_similarity,
                "best_para_id": d.best_para_id,
            }
            for d in report.doc_labels
        ],
    }


def report_basename(label: str, threshold: float) -> str:
    safe = "".join(c if c.isalnum() or c in "._-" else "-" for c in label)
    return f"{safe}_{threshold:.2f}"


def write_report(
    report: QueryReport, out_dir: str | Path, figure: bool = True
) -> list[Path]:
    """Write <label>_<threshold>.report.{txt,json} and the sibling figure."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = report_basename(report.label, report.threshold)
    text_path = out_dir / f"{base}.report.txt"
    json_path = out_dir / f"{base}.report.json"
    text_path.write_text(render_text(report), encoding="utf-8")
    json_path.write_text(
        json.dumps(to_json_dict(report), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    written = [text_path, json_path]
    if figure:
        from .figures import similarity_histogram

        fig_path = out_dir / f"{base}.report.png"
        similarity_histogram(
            [h.similarity for h in report.hits],
            report.threshold,
            fig_path,
            title=f"{report.label} (threshold {report.threshold:.2f})",
        )
        written.append(fig_path)
    return written
