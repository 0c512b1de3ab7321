"""Command-line pipeline driver: one subcommand per stage, each reading
and writing only the documented file formats, so stages can be re-run or
swapped independently (e.g. retrain embeddings without re-ingesting).

Exit codes: 0 ok, 1 internal error, 2 missing input file, 3 validation
failure. Every failure prints one machine-parsable line to stderr.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import evaluation, phraser, report as report_mod, retrieval, skipgram, vectorizer
from .errors import AgendaMinerError, ConfigError, ParseError, ValidationError

EXIT_INTERNAL = 1
EXIT_MISSING_INPUT = 2
EXIT_VALIDATION = 3


def _fail(category: str, message: str, code: int) -> None:
    click.echo(f"error[{category}]: {message}", err=True)
    sys.exit(code)


def pipeline_command(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FileNotFoundError as exc:
            _fail("missing-input", str(exc), EXIT_MISSING_INPUT)
        except (ValidationError, ConfigError, ParseError) as exc:
            _fail("validation", str(exc), EXIT_VALIDATION)
        except AgendaMinerError as exc:
            _fail("validation", str(exc), EXIT_VALIDATION)
        except click.ClickException:
            raise
        except Exception as exc:  # noqa: BLE001 - boundary of the process
            _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)

    return wrapper


def _require(path: str | Path, what: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(_require(path, "config file"), encoding="utf-8") as fh:
        return json.load(fh)


def _pick(value, config: dict, key: str, default=None):
    """Explicit flag wins; then the config file; then the default."""
    if value is not None:
        return value
    return config.get(key, default)


@click.group()
@click.option("--config", "config_path", default=None, help="JSON pipeline config supplying defaults.")
@click.pass_context
def main(ctx, config_path):
    """Agenda classification pipeline for policy documents."""
    ctx.obj = _load_config(config_path)


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@pipeline_command
def synth(out_dir, seed):
    """Generate the bundled synthetic fixture corpus (background + study)."""
    from .synthetic import SyntheticSpec, write_benchmark

    spec = SyntheticSpec() if seed is None else SyntheticSpec(seed=seed)
    path = write_benchmark(out_dir, spec)
    click.echo(f"synthetic corpus written to {path}")


@main.command()
@click.option("--manifest", default=None, type=click.Path(), help="Study corpus manifest CSV.")
@click.option("--dir", "corpus_dir", default=None, type=click.Path(), help="Directory of .txt files (background corpus).")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--rules", "rules_path", default=None, type=click.Path(), help="Cleaning rules JSON; defaults ship built in.")
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(), help="Known-word list for spell correction.")
@click.option("--min-paragraph-tokens", type=int, default=corpus_mod.DEFAULT_MIN_PARAGRAPH_TOKENS, show_default=True)
@click.pass_context
@pipeline_command
def ingest(ctx, manifest, corpus_dir, out_path, rules_path, lexicon_path, min_paragraph_tokens):
    """Clean, spell-correct, and segment documents into paragraph records."""
    config = ctx.obj or {}
    manifest = _pick(manifest, config, "study_manifest")
    corpus_dir = _pick(corpus_dir, config, "background_dir")
    rules_path = _pick(rules_path, config, "cleaning_rules")
    if bool(manifest) == bool(corpus_dir):
        raise ValidationError("pass exactly one of --manifest or --dir")
    rules = corpus_mod.CleaningRules.load(_require(rules_path, "cleaning rules")) if rules_path else None
    lexicon = skipgram.load_lexicon(_require(lexicon_path, "lexicon")) if lexicon_path else None

    if manifest:
        docs = corpus_mod.load_corpus(
            _require(manifest, "manifest"),
            rules=rules,
            lexicon=lexicon,
            min_paragraph_tokens=min_paragraph_tokens,
        )
    else:
        corpus_dir = _require(corpus_dir, "corpus directory")
        files = sorted(corpus_dir.glob("*.txt"))
        if not files:
            raise ValidationError(f"no .txt files in {corpus_dir}")
        docs = [
            corpus_mod.preprocess(
                f.read_text(encoding="utf-8"),
                f.stem,
                rules=rules,
                lexicon=lexicon,
                min_paragraph_tokens=min_paragraph_tokens,
            )
            for f in files
        ]
    n = corpus_mod.write_paragraph_records(docs, out_path)
    click.echo(f"wrote {n} paragraph records from {len(docs)} documents to {out_path}")


@main.command()
@click.option("--paragraphs", "paragraphs_path", required=True, type=click.Path())
@click.option("--out-embeddings", required=True, type=click.Path())
@click.option("--out-phrases", default=None, type=click.Path())
@click.option("--out-vocab", default=None, type=click.Path())
@click.option("--window", type=int, default=None)
@click.option("--negatives", type=int, default=None)
@click.option("--dim", type=int, default=None)
@click.option("--min-count", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--fixed-window", is_flag=True, default=False, help="Disable effective-window subsampling (deterministic tests).")
@click.option("--phrase-passes", type=int, default=2, show_default=True)
@click.option("--phrase-min-count", type=int, default=phraser.DEFAULT_MIN_PAIR_COUNT, show_default=True)
@click.option("--phrase-threshold", type=float, default=phraser.DEFAULT_SCORE_THRESHOLD, show_default=True)
@click.option("--binary", is_flag=True, default=False, help="Also write the binary embedding format.")
@click.pass_context
@pipeline_command
def train(ctx, paragraphs_path, out_embeddings, out_phrases, out_vocab, window, negatives, dim,
          min_count, epochs, learning_rate, seed, workers, fixed_window, phrase_passes,
          phrase_min_count, phrase_threshold, binary):
    """Learn phrases, build the vocabulary, and train skip-gram embeddings."""
    config = ctx.obj or {}
    tc = config.get("train", {})
    cfg = skipgram.TrainConfig(
        window=_pick(window, tc, "window", 12),
        negatives=_pick(negatives, tc, "negatives", 15),
        dim=_pick(dim, tc, "dim", 300),
        min_count=_pick(min_count, tc, "min_count", 15),
        epochs=_pick(epochs, tc, "epochs", 5),
        learning_rate=_pick(learning_rate, tc, "learning_rate", 0.025),
        seed=_pick(seed, config, "seed", 1),
        dynamic_window=not fixed_window,
        workers=_pick(workers, tc, "workers", 1),
    )
    records = corpus_mod.read_paragraph_records(_require(paragraphs_path, "paragraph records"))
    streams = [list(r.tokens) for r in records]
    table = phraser.learn_phrases(
        streams,
        min_pair_count=phrase_min_count,
        score_threshold=phrase_threshold,
        passes=phrase_passes,
    )
    streams = phraser.apply_all(table, streams)
    vocab = skipgram.build_vocab(streams, min_count=cfg.min_count)
    click.echo(f"vocabulary: {len(vocab)} tokens, {len(table)} phrase merges")
    matrix = skipgram.train(streams, vocab, cfg)
    skipgram.save_text(matrix, out_embeddings)
    click.echo(f"embeddings written to {out_embeddings}")
    if binary:
        skipgram.save_binary(matrix, str(out_embeddings) + ".bin")
    if out_phrases:
        table.save(out_phrases)
    if out_vocab:
        skipgram.save_vocab_counts(vocab, out_vocab)


@main.command()
@click.option("--paragraphs", "paragraphs_path", required=True, type=click.Path())
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path())
@click.option("--phrases", "phrases_path", default=None, type=click.Path())
@click.option("--out", "out_base", required=True, type=click.Path(), help="Base path; writes BASE.npy, BASE.index.jsonl, BASE.stats.json.")
@pipeline_command
def vectorize(paragraphs_path, embeddings_path, phrases_path, out_base):
    """Fit tf-idf on the study corpus and embed every paragraph."""
    records = corpus_mod.read_paragraph_records(_require(paragraphs_path, "paragraph records"))
    emb = skipgram.load_text(_require(embeddings_path, "embedding file"))
    if phrases_path:
        table = phraser.PhraseTable.load(_require(phrases_path, "phrase table"))
        records = [
            corpus_mod.ParagraphRecord(
                para_id=r.para_id,
                doc_id=r.doc_id,
                page_number=r.page_number,
                tokens=tuple(phraser.apply(table, list(r.tokens))),
                text=r.text,
            )
            for r in records
        ]
    stats = vectorizer.fit_tfidf(records)
    store = vectorizer.ParagraphVectorStore.build(records, stats, emb)
    paths = store.save(out_base)
    stats.save(str(out_base) + ".stats.json")
    flagged = int((~store.retrievable).sum())
    click.echo(f"embedded {len(store)} paragraphs ({flagged} non-retrievable) -> {paths[0]}")


def _load_retrieval_inputs(vectors_base, embeddings_path):
    base = Path(vectors_base)
    _require(base.with_suffix(".npy"), "paragraph vectors")
    store = vectorizer.ParagraphVectorStore.load(base)
    stats = vectorizer.TfidfStats.load(_require(str(base) + ".stats.json", "tf-idf stats"))
    emb = skipgram.load_text(_require(embeddings_path, "embedding file"))
    return store, stats, emb


def _parse_inline_query(text: str, threshold: float | None) -> retrieval.AgendaQuery:
    label, _, terms = text.partition(":")
    if not terms:
        raise ValidationError('inline query must look like "label:term1,term2"')
    return retrieval.AgendaQuery(
        label=label.strip(),
        terms=[t.strip() for t in terms.split(",") if t.strip()],
        threshold=threshold if threshold is not None else retrieval.DEFAULT_THRESHOLD,
    )


@main.command()
@click.option("--vectors", "vectors_base", required=True, type=click.Path())
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path())
@click.option("--terms", required=True, help="Comma-separated query terms (max 5).")
@click.option("-k", type=int, default=retrieval.DEFAULT_NEIGHBORS, show_default=True)
@pipeline_command
def query(vectors_base, embeddings_path, terms, k):
    """Rank the closest words and n-grams to a composed query vector."""
    store, stats, emb = _load_retrieval_inputs(vectors_base, embeddings_path)
    term_list = [t.strip() for t in terms.split(",") if t.strip()]
    qvec = vectorizer.embed_query(term_list, stats, emb)
    for token, sim in retrieval.nearest_words(qvec, emb, k=k, exclude=term_list):
        click.echo(f"{sim:.4f}\t{token}")


@main.command()
@click.option("--vectors", "vectors_base", required=True, type=click.Path())
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path())
@click.option("--queries", "queries_path", default=None, type=click.Path())
@click.option("--query", "inline_query", default=None, help='Inline query "label:t1,t2".')
@click.option("--threshold", type=float, default=None, help="Override every query threshold.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@pipeline_command
def classify(vectors_base, embeddings_path, queries_path, inline_query, threshold, out_dir):
    """Retrieve hits and emit per-document labels for each agenda query."""
    store, stats, emb = _load_retrieval_inputs(vectors_base, embeddings_path)
    queries: list[retrieval.AgendaQuery] = []
    if queries_path:
        queries.extend(retrieval.load_queries(_require(queries_path, "query file")))
    if inline_query:
        queries.append(_parse_inline_query(inline_query, threshold))
    if not queries:
        raise ValidationError("pass --queries and/or --query")
    if threshold is not None:
        queries = [
            retrieval.AgendaQuery(q.label, q.terms, threshold, q.notes) for q in queries
        ]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc_ids = sorted(set(store.doc_ids))
    all_labels = []
    for q in queries:
        qvec = vectorizer.embed_query(q.terms, stats, emb)
        hits = retrieval.retrieve(q, qvec, store)
        retrieval.export_hits_csv(hits, out_dir / f"hits_{report_mod.report_basename(q.label, q.threshold)}.csv")
        all_labels.extend(retrieval.classify_documents(q, qvec, store, doc_ids=doc_ids))
    evaluation.write_doc_labels_csv(all_labels, out_dir / "labels.csv")
    positives = sum(1 for lab in all_labels if lab.predicted)
    click.echo(f"classified {len(doc_ids)} documents x {len(queries)} queries ({positives} positive) -> {out_dir}")


@main.command()
@click.option("--labels", "labels_path", required=True, type=click.Path())
@click.option("--gold", "gold_path", required=True, type=click.Path())
@click.option("--manifest", "manifest_path", default=None, type=click.Path(), help="Adds per-country breakdown.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@pipeline_command
def evaluate(labels_path, gold_path, manifest_path, out_dir):
    """Score predictions against gold labels; writes CSV, table, and figure."""
    preds = evaluation.load_doc_labels_csv(_require(labels_path, "doc labels"))
    gold = evaluation.GoldLabels.from_csv(_require(gold_path, "gold labels"))
    countries = None
    if manifest_path:
        rows = corpus_mod.load_manifest(_require(manifest_path, "manifest"))
        countries = {r["doc_id"]: r.get("country", "") for r in rows}
    rep = evaluation.score(preds, gold, countries=countries)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    evaluation.write_metrics_csv(rep, out_dir / "metrics.csv")
    (out_dir / "metrics.txt").write_text(evaluation.format_table(rep), encoding="utf-8")
    from .figures import metrics_bars

    metrics_bars(rep, out_dir / "metrics.png")
    click.echo(evaluation.format_table(rep))
    click.echo(f"macro F1: {rep.macro_f1:.4f}")


@main.command(name="report")
@click.option("--vectors", "vectors_base", required=True, type=click.Path())
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path())
@click.option("--queries", "queries_path", required=True, type=click.Path())
@click.option("--corpus-id", default="", help="Corpus identifier recorded in each report.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@pipeline_command
def report_cmd(vectors_base, embeddings_path, queries_path, corpus_id, out_dir):
    """Write per-query audit reports with excerpts and page references."""
    store, stats, emb = _load_retrieval_inputs(vectors_base, embeddings_path)
    queries = retrieval.load_queries(_require(queries_path, "query file"))
    doc_ids = sorted(set(store.doc_ids))
    for q in queries:
        qvec = vectorizer.embed_query(q.terms, stats, emb)
        hits = retrieval.retrieve(q, qvec, store)
        labels = retrieval.classify_documents(q, qvec, store, doc_ids=doc_ids)
        rep = report_mod.generate(q, hits, labels, corpus_id=corpus_id or str(vectors_base))
        paths = report_mod.write_report(rep, out_dir)
        click.echo(f"{q.label}: {len(hits)} hits -> {paths[0]}")


@main.command()
@click.option("--vectors", "vectors_base", required=True, type=click.Path())
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path())
@click.option("--queries", "queries_path", default=None, type=click.Path(), help="Seed the session with existing queries.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--session-log", "session_log", default=None, type=click.Path())
@click.option("--report-dir", "report_dir", default=None, type=click.Path())
@click.option("--frontend", "frontend_dir", default=None, type=click.Path(), help="Static workbench bundle to serve at /.")
@pipeline_command
def serve(vectors_base, embeddings_path, queries_path, host, port, session_log, report_dir, frontend_dir):
    """Run the local workbench service (HTTP + JSON)."""
    import uvicorn

    from .service import build_state, create_app

    store, stats, emb = _load_retrieval_inputs(vectors_base, embeddings_path)
    state = build_state(
        store,
        stats,
        emb,
        corpus_id=str(vectors_base),
        embedding_id=str(embeddings_path),
        session_log=session_log,
        report_dir=report_dir,
    )
    if queries_path:
        for q in retrieval.load_queries(_require(queries_path, "query file")):
            state.session.create_draft(q.label, q.terms, q.threshold, q.notes)
    app = create_app(state, frontend_dir=frontend_dir)
    click.echo(f"workbench service on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
