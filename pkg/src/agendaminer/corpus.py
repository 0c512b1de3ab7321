"""Document ingestion, cleaning, spell correction, and segmentation.

Plain-text documents arrive one file per document with form-feed page
breaks. Every operation returns a new ``Document``; raw pages are kept
untouched so reports can always point back at the original page text.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .errors import ConfigError, ConflictError, IngestError, ValidationError

DEFAULT_PAGE_DELIMITER = "\f"
DEFAULT_MIN_PARAGRAPH_TOKENS = 8

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_WORD_RE = re.compile(r"[A-Za-z0-9]+")
_BLANK_LINE_RE = re.compile(r"\n[ \t]*\n+")
_SENT_BOUNDARY_RE = re.compile(r"(?<=[.!?])\s+(?=[A-Z])")

# Trailing words that end with a period but do not close a sentence.
ABBREVIATIONS = frozenset(
    {
        "dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "no.", "nos.", "fig.",
        "figs.", "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "vol.", "art.",
        "sec.", "para.", "govt.", "dept.", "min.", "max.", "approx.",
    }
)


@dataclass(frozen=True)
class CleaningRules:
    """Ordered (pattern, replacement) pairs applied to every page.

    Rules are data, not code: analysts extend them per corpus. The shipped
    defaults strip standalone page-number lines, bracketed citation markers,
    and ALL-CAPS header lines. Rules must be written so that a second
    application is a no-op (removal rules are naturally idempotent).
    """

    patterns: tuple[tuple[str, str], ...]

    @classmethod
    def defaults(cls) -> "CleaningRules":
        return cls(
            patterns=(
                # Standalone page numbers: "4", "- 4 -", "Page 4 of 12".
                (r"(?m)^[ \t]*-?[ \t]*\d{1,4}[ \t]*-?[ \t]*(?:\r?\n|$)", ""),
                (r"(?mi)^[ \t]*page[ \t]+\d{1,4}([ \t]+of[ \t]+\d{1,4})?[ \t]*(?:\r?\n|$)", ""),
                # Bracketed citation markers: [12], [3, 7].
                (r"\[\d{1,3}(?:,\s*\d{1,3})*\]", ""),
                # ALL-CAPS header lines (two or more capitals, no lowercase).
                (r"(?m)^(?=[^\na-z]*[A-Z][^\na-z]*[A-Z])[^\na-z]+(?:\r?\n|$)", ""),
            )
        )

    @classmethod
    def load(cls, path: str | Path) -> "CleaningRules":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(patterns=tuple((r["pattern"], r["replacement"]) for r in raw))

    def save(self, path: str | Path) -> None:
        rows = [{"pattern": p, "replacement": r} for p, r in self.patterns]
        Path(path).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")

    def compiled(self) -> list[tuple[re.Pattern, str]]:
        out = []
        for pattern, repl in self.patterns:
            try:
                out.append((re.compile(pattern), repl))
            except re.error as exc:
                raise ConfigError(f"cleaning rule does not compile: {pattern!r} ({exc})") from exc
        return out


@dataclass(frozen=True)
class Paragraph:
    """One classification unit: a block of sentences with page provenance."""

    para_id: str
    doc_id: str
    page_number: int  # 1-based
    sentences: tuple[str, ...]
    tokens: tuple[str, ...]
    text: str


@dataclass(frozen=True)
class Document:
    doc_id: str
    pages: tuple[str, ...]
    country: str = ""
    sector: str = ""
    title: str = ""
    cleaned_pages: tuple[str, ...] | None = None
    paragraphs: tuple[Paragraph, ...] = ()
    spelling_log: tuple[dict, ...] = ()

    def current_pages(self) -> tuple[str, ...]:
        return self.cleaned_pages if self.cleaned_pages is not None else self.pages


def ingest(
    text: str,
    doc_id: str,
    country: str = "",
    sector: str = "",
    title: str = "",
    page_delimiter: str = DEFAULT_PAGE_DELIMITER,
) -> Document:
    """Split raw text into pages; no cleaning is applied yet."""
    if not doc_id:
        raise IngestError("doc_id must be non-empty")
    if not text:
        raise IngestError(f"document {doc_id!r} has empty text")
    text = text.replace("\r\n", "\n")
    pages = tuple(text.split(page_delimiter))
    return Document(doc_id=doc_id, pages=pages, country=country, sector=sector, title=title)


def clean(doc: Document, rules: CleaningRules) -> Document:
    """Apply every rule, in order, to every page. Raw pages are retained."""
    compiled = rules.compiled()
    cleaned = []
    for page in doc.pages:
        for pattern, repl in compiled:
            page = pattern.sub(repl, page)
        cleaned.append(page)
    return replace(doc, cleaned_pages=tuple(cleaned))


def _levenshtein_leq(a: str, b: str, limit: int) -> bool:
    """Banded edit-distance check: True iff levenshtein(a, b) <= limit."""
    if abs(len(a) - len(b)) > limit:
        return False
    if a == b:
        return True
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        row_min = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            val = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            cur.append(val)
            row_min = min(row_min, val)
        if row_min > limit:
            return False
        prev = cur
    return prev[-1] <= limit


def _match_case(template: str, word: str) -> str:
    if template.isupper():
        return word.upper()
    if template[:1].isupper():
        return word.capitalize()
    return word


def correct_spelling(doc: Document, lexicon: set[str]) -> Document:
    """Replace out-of-lexicon tokens by their best in-lexicon neighbor.

    A candidate is any lexicon word within edit distance 2; the winner is
    the candidate occurring most often in this document's own word
    distribution, ties broken lexicographically. Tokens without candidates
    are kept. Pure digit runs and tokens shorter than 3 characters are
    exempt (correcting "42" into a word would destroy restoration targets
    like "10% tree cover").
    """
    if not lexicon:
        raise ValidationError("lexicon must be non-empty")
    pages = doc.current_pages()
    distribution: Counter[str] = Counter()
    for page in pages:
        distribution.update(m.group(0).lower() for m in _WORD_RE.finditer(page))

    decisions: dict[str, str | None] = {}
    log: Counter[tuple[str, str]] = Counter()

    def decide(token: str) -> str | None:
        if token in decisions:
            return decisions[token]
        candidates = [w for w in lexicon if _levenshtein_leq(token, w, 2)]
        best = min(candidates, key=lambda w: (-distribution[w], w)) if candidates else None
        decisions[token] = best
        return best

    def substitute(match: re.Match) -> str:
        word = match.group(0)
        low = word.lower()
        if low in lexicon or len(low) < 3 or low.isdigit():
            return word
        best = decide(low)
        if best is None or best == low:
            return word
        log[(low, best)] += 1
        return _match_case(word, best)

    corrected = tuple(_WORD_RE.sub(substitute, page) for page in pages)
    entries = tuple(
        {"from": src, "to": dst, "count": n} for (src, dst), n in sorted(log.items())
    )
    return replace(doc, cleaned_pages=corrected, spelling_log=doc.spelling_log + entries)


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation + whitespace + capital, guarding abbreviations."""
    parts = []
    start = 0
    for m in _SENT_BOUNDARY_RE.finditer(text):
        head = text[: m.start()]
        tail_word = head.rsplit(None, 1)[-1].lower() if head.strip() else ""
        if tail_word in ABBREVIATIONS:
            continue
        parts.append(text[start : m.start()])
        start = m.end()
    parts.append(text[start:])
    return [p.strip() for p in parts if p.strip()]


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, keep numerals."""
    return _TOKEN_RE.findall(text.lower())


def segment(doc: Document, min_paragraph_tokens: int = DEFAULT_MIN_PARAGRAPH_TOKENS) -> Document:
    """Split cleaned pages into paragraphs (blank lines) and sentences.

    Paragraphs shorter than ``min_paragraph_tokens`` are merged into the
    following paragraph on the same page, or dropped when nothing follows.
    """
    if doc.cleaned_pages is None:
        raise ValidationError(f"document {doc.doc_id!r} must be cleaned before segmentation")
    if min_paragraph_tokens < 1:
        raise ValidationError("min_paragraph_tokens must be >= 1")

    paragraphs: list[Paragraph] = []
    for page_number, page in enumerate(doc.cleaned_pages, start=1):
        blocks = [b.strip() for b in _BLANK_LINE_RE.split(page) if b.strip()]
        merged: list[str] = []
        pending = ""
        for block in blocks:
            text = " ".join((pending + " " + block).split()) if pending else " ".join(block.split())
            if len(tokenize(text)) < min_paragraph_tokens:
                pending = text  # merge into the following block on this page
            else:
                merged.append(text)
                pending = ""
        # A short trailing block has no successor on the page: dropped.
        for k, text in enumerate(merged, start=1):
            sentences = tuple(split_sentences(text))
            tokens = tuple(tokenize(text))
            paragraphs.append(
                Paragraph(
                    para_id=f"{doc.doc_id}-p{page_number}-{k}",
                    doc_id=doc.doc_id,
                    page_number=page_number,
                    sentences=sentences,
                    tokens=tokens,
                    text=text,
                )
            )
    return replace(doc, paragraphs=tuple(paragraphs))


def preprocess(
    text: str,
    doc_id: str,
    rules: CleaningRules | None = None,
    lexicon: set[str] | None = None,
    min_paragraph_tokens: int = DEFAULT_MIN_PARAGRAPH_TOKENS,
    **metadata,
) -> Document:
    """ingest -> clean -> optional spell correction -> segment."""
    doc = ingest(text, doc_id, **metadata)
    doc = clean(doc, rules or CleaningRules.defaults())
    if lexicon:
        doc = correct_spelling(doc, lexicon)
    return segment(doc, min_paragraph_tokens=min_paragraph_tokens)


# ---------------------------------------------------------------------------
# Corpus-level I/O: manifest CSV in, line-delimited paragraph records out.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParagraphRecord:
    """The on-disk paragraph unit consumed by phrasing and vectorization."""

    para_id: str
    doc_id: str
    page_number: int
    tokens: tuple[str, ...]
    text: str


def load_manifest(path: str | Path) -> list[dict]:
    """One CSV row per document: doc_id, country, sector, title, path."""
    path = Path(path)
    rows = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            doc_id = (row.get("doc_id") or "").strip()
            if not doc_id:
                raise IngestError(f"manifest row without doc_id: {row}")
            if doc_id in seen:
                raise ConflictError(f"duplicate doc_id in manifest: {doc_id!r}")
            seen.add(doc_id)
            row["path"] = str((path.parent / row["path"]).resolve())
            rows.append(row)
    if not rows:
        raise IngestError(f"manifest {path} lists no documents")
    return rows


def load_corpus(
    manifest_path: str | Path,
    rules: CleaningRules | None = None,
    lexicon: set[str] | None = None,
    min_paragraph_tokens: int = DEFAULT_MIN_PARAGRAPH_TOKENS,
) -> list[Document]:
    docs = []
    for row in load_manifest(manifest_path):
        text = Path(row["path"]).read_text(encoding="utf-8")
        docs.append(
            preprocess(
                text,
                row["doc_id"],
                rules=rules,
                lexicon=lexicon,
                min_paragraph_tokens=min_paragraph_tokens,
                country=row.get("country", ""),
                sector=row.get("sector", ""),
                title=row.get("title", ""),
            )
        )
    return docs


def write_paragraph_records(docs: Iterable[Document], path: str | Path) -> int:
    """Serialize segmented paragraphs as line-delimited JSON records."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            for para in doc.paragraphs:
                record = {
                    "para_id": para.para_id,
                    "doc_id": para.doc_id,
                    "page_number": para.page_number,
                    "tokens": list(para.tokens),
                    "text": para.text,
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                n += 1
    return n


def read_paragraph_records(path: str | Path) -> list[ParagraphRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            records.append(
                ParagraphRecord(
                    para_id=raw["para_id"],
                    doc_id=raw["doc_id"],
                    page_number=int(raw["page_number"]),
                    tokens=tuple(raw["tokens"]),
                    text=raw.get("text", ""),
                )
            )
    return records
