"""Scoring of predicted document labels against expert gold labels.

Produces per-agenda accuracy, precision, recall, and F1 plus an
unweighted macro average row, and optional per-country breakdowns
(pooled confusion counts across agenda within each country).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ParseError, ValidationError
from .retrieval import DocLabel


@dataclass
class GoldLabels:
    """Expert (doc_id, agenda) -> present decisions."""

    labels: dict[tuple[str, str], bool]
    source: str = ""

    @classmethod
    def from_csv(cls, path: str | Path) -> "GoldLabels":
        labels = {}
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.DictReader(fh), start=2):
                try:
                    present = row["present"].strip()
                    labels[(row["doc_id"], row["agenda"])] = present in ("1", "true", "True")
                except KeyError as exc:
                    raise ParseError(f"gold label row missing column {exc}", lineno) from exc
        return cls(labels=labels, source=str(path))

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self.labels


@dataclass
class ConfusionMetrics:
    """One scored row: an agenda or a country pool."""

    name: str
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    degenerate: list[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def _ratio(self, num: int, den: int, flag: str) -> float:
        if den == 0:
            if flag not in self.degenerate:
                self.degenerate.append(flag)
            return 0.0
        return num / den

    def finalize(self) -> None:
        self.precision = self._ratio(self.tp, self.tp + self.fp, "precision")
        self.recall = self._ratio(self.tp, self.tp + self.fn, "recall")
        self.accuracy = self._ratio(self.tp + self.tn, self.total, "accuracy")
        p, r = self.precision, self.recall
        self.f1 = 2 * p * r / (p + r) if (p + r) > 0 else self._ratio(0, 0, "f1")


@dataclass
class MetricsReport:
    per_agenda: list[ConfusionMetrics]
    per_country: list[ConfusionMetrics]
    macro_accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    skipped_unlabeled: int


def score(
    predictions: Sequence[DocLabel],
    gold: GoldLabels,
    countries: Mapping[str, str] | None = None,
) -> MetricsReport:
    """Confusion counts per agenda; macro average is the unweighted mean.

    Predictions without a gold label are excluded and counted in
    ``skipped_unlabeled``. Zero denominators yield 0 with a flag so a
    degenerate agenda never aborts the whole report.
    """
    agenda_rows: dict[str, ConfusionMetrics] = {}
    country_rows: dict[str, ConfusionMetrics] = {}
    skipped = 0
    scored = 0
    for pred in predictions:
        key = (pred.doc_id, pred.label)
        if key not in gold.labels:
            skipped += 1
            continue
        scored += 1
        actual = gold.labels[key]
        row = agenda_rows.setdefault(pred.label, ConfusionMetrics(pred.label))
        _tally(row, pred.predicted, actual)
        if countries is not None:
            country = countries.get(pred.doc_id, "unknown")
            crow = country_rows.setdefault(country, ConfusionMetrics(country))
            _tally(crow, pred.predicted, actual)
    if scored == 0:
        raise ValidationError("no prediction matches any gold label")

    per_agenda = [agenda_rows[k] for k in sorted(agenda_rows)]
    per_country = [country_rows[k] for k in sorted(country_rows)]
    for row in per_agenda + per_country:
        row.finalize()
    n = len(per_agenda)
    return MetricsReport(
        per_agenda=per_agenda,
        per_country=per_country,
        macro_accuracy=sum(r.accuracy for r in per_agenda) / n,
        macro_precision=sum(r.precision for r in per_agenda) / n,
        macro_recall=sum(r.recall for r in per_agenda) / n,
        macro_f1=sum(r.f1 for r in per_agenda) / n,
        skipped_unlabeled=skipped,
    )


def _tally(row: ConfusionMetrics, predicted: bool, actual: bool) -> None:
    if predicted and actual:
        row.tp += 1
    elif predicted and not actual:
        row.fp += 1
    elif not predicted and actual:
        row.fn += 1
    else:
        row.tn += 1


def write_metrics_csv(report: MetricsReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["agenda", "tp", "fp", "fn", "tn", "accuracy", "precision", "recall", "f1", "flags"]
        )
        for row in report.per_agenda:
            writer.writerow(
                [
                    row.name, row.tp, row.fp, row.fn, row.tn,
                    f"{row.accuracy:.4f}", f"{row.precision:.4f}",
                    f"{row.recall:.4f}", f"{row.f1:.4f}",
                    ";".join(row.degenerate),
                ]
            )
        writer.writerow(
            [
                "Average", "", "", "", "",
                f"{report.macro_accuracy:.4f}", f"{report.macro_precision:.4f}",
                f"{report.macro_recall:.4f}", f"{report.macro_f1:.4f}", "",
            ]
        )


def format_table(report: MetricsReport) -> str:
    """Text table in the accuracy/precision/recall/F1 shape."""
    width = max([len("Agenda")] + [len(r.name) for r in report.per_agenda + report.per_country])
    lines = [
        f"{'Agenda':<{width}}  Accuracy  Precision  Recall  F1",
        "-" * (width + 38),
    ]
    for row in report.per_agenda:
        lines.append(
            f"{row.name:<{width}}  {row.accuracy:>8.2f}  {row.precision:>9.2f}"
            f"  {row.recall:>6.2f}  {row.f1:>4.2f}"
        )
    lines.append("-" * (width + 38))
    lines.append(
        f"{'Average':<{width}}  {report.macro_accuracy:>8.2f}  {report.macro_precision:>9.2f}"
        f"  {report.macro_recall:>6.2f}  {report.macro_f1:>4.2f}"
    )
    if report.per_country:
        lines.append("")
        lines.append(f"{'Country':<{width}}  Accuracy  Precision  Recall  F1")
        lines.append("-" * (width + 38))
        for row in report.per_country:
            lines.append(
                f"{row.name:<{width}}  {row.accuracy:>8.2f}  {row.precision:>9.2f}"
                f"  {row.recall:>6.2f}  {row.f1:>4.2f}"
            )
    if report.skipped_unlabeled:
        lines.append("")
        lines.append(f"({report.skipped_unlabeled} prediction(s) without gold labels excluded)")
    return "\n".join(lines) + "\n"


def load_doc_labels_csv(path: str | Path) -> list[DocLabel]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            best = row.get("best_similarity", "")
            out.append(
                DocLabel(
                    doc_id=row["doc_id"],
                    label=row["agenda"],
                    predicted=row["predicted"] in ("1", "true", "True"),
                    best_similarity=float(best) if best not in ("", "-inf") else float("-inf"),
                    best_para_id=row.get("best_para_id") or None,
                )
            )
    return out


def write_doc_labels_csv(labels: Sequence[DocLabel], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "agenda", "predicted", "best_similarity", "best_para_id"])
        for lab in labels:
            sim = "-inf" if lab.best_similarity == float("-inf") else f"{lab.best_similarity:.6f}"
            writer.writerow(
                [lab.doc_id, lab.label, int(lab.predicted), sim, lab.best_para_id or ""]
            )
