"""Evaluation: span-level F1 over the four entity types, token-level
accuracy/precision/recall/F1, and dataset statistics.

A predicted span counts as correct only if start, end and type all match a
reference span. Headline precision/recall/F1 are micro-averaged over all
spans. Zero denominators yield 0 by convention.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .corpus import (
    ENTITY_TYPES,
    Document,
    EntityType,
    Iob2Label,
    compute_rat,
    spans_from_labels,
)
from .errors import AlignmentError


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


@dataclass(frozen=True)
class TypeScore:
    precision: float
    recall: float
    f1: float
    predicted: int
    reference: int
    matched: int


@dataclass(frozen=True)
class SpanF1Report:
    per_type: dict[EntityType, TypeScore]
    precision: float
    recall: float
    f1: float
    predicted: int
    reference: int
    matched: int


@dataclass(frozen=True)
class TokenReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    total: int


@dataclass(frozen=True)
class DatasetStats:
    documents: int
    sentences: int
    tokens: int
    rat: float
    span_counts: dict[EntityType, int]


def _aligned_sentences(predicted: Sequence[Document], reference: Sequence[Document]):
    if len(predicted) != len(reference):
        raise AlignmentError(
            f"{len(predicted)} predicted documents vs {len(reference)} reference documents"
        )
    for pred_doc, ref_doc in zip(predicted, reference):
        if pred_doc.id != ref_doc.id:
            raise AlignmentError(f"document id mismatch: {pred_doc.id!r} vs {ref_doc.id!r}")
        if len(pred_doc.sentences) != len(ref_doc.sentences):
            raise AlignmentError(
                f"document {pred_doc.id}: {len(pred_doc.sentences)} predicted sentences "
                f"vs {len(ref_doc.sentences)}"
            )
        for s_idx, (pred, ref) in enumerate(zip(pred_doc.sentences, ref_doc.sentences)):
            if len(pred) != len(ref):
                raise AlignmentError(
                    f"document {pred_doc.id}, sentence {s_idx}: "
                    f"{len(pred)} tokens vs {len(ref)}"
                )
            yield pred, ref


def span_f1(predicted: Sequence[Document], reference: Sequence[Document]) -> SpanF1Report:
    """Span-level precision/recall/F1, micro-averaged and per entity type."""
    pred_count = {t: 0 for t in ENTITY_TYPES}
    ref_count = {t: 0 for t in ENTITY_TYPES}
    match_count = {t: 0 for t in ENTITY_TYPES}
    for pred, ref in _aligned_sentences(predicted, reference):
        pred_spans = {(s.start, s.end, s.type) for s in spans_from_labels(pred.labels)}
        ref_spans = {(s.start, s.end, s.type) for s in spans_from_labels(ref.labels)}
        for _, _, t in pred_spans:
            pred_count[t] += 1
        for _, _, t in ref_spans:
            ref_count[t] += 1
        for _, _, t in pred_spans & ref_spans:
            match_count[t] += 1

    per_type = {}
    for t in ENTITY_TYPES:
        p = _ratio(match_count[t], pred_count[t])
        r = _ratio(match_count[t], ref_count[t])
        per_type[t] = TypeScore(p, r, _f1(p, r), pred_count[t], ref_count[t], match_count[t])
    predicted_total = sum(pred_count.values())
    reference_total = sum(ref_count.values())
    matched_total = sum(match_count.values())
    micro_p = _ratio(matched_total, predicted_total)
    micro_r = _ratio(matched_total, reference_total)
    return SpanF1Report(
        per_type=per_type,
        precision=micro_p,
        recall=micro_r,
        f1=_f1(micro_p, micro_r),
        predicted=predicted_total,
        reference=reference_total,
        matched=matched_total,
    )


def token_metrics(predicted: Sequence[Document], reference: Sequence[Document]) -> TokenReport:
    """Token-level accuracy over all tokens, P/R/F1 over non-O tokens."""
    total = 0
    agree = 0
    pred_non_o = 0
    ref_non_o = 0
    correct_non_o = 0
    for pred, ref in _aligned_sentences(predicted, reference):
        for p_label, r_label in zip(pred.labels, ref.labels):
            total += 1
            if p_label is r_label:
                agree += 1
            if p_label is not Iob2Label.O:
                pred_non_o += 1
                if p_label is r_label:
                    correct_non_o += 1
            if r_label is not Iob2Label.O:
                ref_non_o += 1
    precision = _ratio(correct_non_o, pred_non_o)
    recall = _ratio(correct_non_o, ref_non_o)
    return TokenReport(
        accuracy=_ratio(agree, total),
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        total=total,
    )


def dataset_stats(documents: Sequence[Document]) -> DatasetStats:
    """Token/sentence counts, annotated-token ratio and per-type span counts."""
    rat = compute_rat(documents)  # raises on an empty dataset
    tokens = 0
    sentences = 0
    span_counts = {t: 0 for t in ENTITY_TYPES}
    for doc in documents:
        for sent in doc.sentences:
            sentences += 1
            tokens += len(sent)
            for span in spans_from_labels(sent.labels):
                span_counts[span.type] += 1
    return DatasetStats(
        documents=len(documents),
        sentences=sentences,
        tokens=tokens,
        rat=rat,
        span_counts=span_counts,
    )


# ---------------------------------------------------------------------------
# Report rendering ("key = value" lines; stable across runs)
# ---------------------------------------------------------------------------


def format_span_report(report: SpanF1Report) -> str:
    lines = [
        f"span.micro.precision = {report.precision!r}",
        f"span.micro.recall = {report.recall!r}",
        f"span.micro.f1 = {report.f1!r}",
        f"span.predicted = {report.predicted}",
        f"span.reference = {report.reference}",
        f"span.matched = {report.matched}",
    ]
    for t in ENTITY_TYPES:
        score = report.per_type[t]
        lines.append(f"span.{t.value}.precision = {score.precision!r}")
        lines.append(f"span.{t.value}.recall = {score.recall!r}")
        lines.append(f"span.{t.value}.f1 = {score.f1!r}")
    return "\n".join(lines) + "\n"


def format_token_report(report: TokenReport) -> str:
    return (
        f"token.accuracy = {report.accuracy!r}\n"
        f"token.precision = {report.precision!r}\n"
        f"token.recall = {report.recall!r}\n"
        f"token.f1 = {report.f1!r}\n"
        f"token.total = {report.total}\n"
    )


def format_stats(stats: DatasetStats) -> str:
    lines = [
        f"documents = {stats.documents}",
        f"sentences = {stats.sentences}",
        f"tokens = {stats.tokens}",
        f"rat = {stats.rat!r}",
    ]
    for t in ENTITY_TYPES:
        lines.append(f"spans.{t.value} = {stats.span_counts[t]}")
    return "\n".join(lines) + "\n"


def span_report_dict(report: SpanF1Report) -> dict:
    return {
        "micro": {"precision": report.precision, "recall": report.recall, "f1": report.f1},
        "counts": {
            "predicted": report.predicted,
            "reference": report.reference,
            "matched": report.matched,
        },
        "per_type": {
            t.value: {
                "precision": s.precision,
                "recall": s.recall,
                "f1": s.f1,
                "predicted": s.predicted,
                "reference": s.reference,
                "matched": s.matched,
            }
            for t, s in report.per_type.items()
        },
    }


def token_report_dict(report: TokenReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "total": report.total,
    }


def stats_dict(stats: DatasetStats) -> dict:
    return {
        "documents": stats.documents,
        "sentences": stats.sentences,
        "tokens": stats.tokens,
        "rat": stats.rat,
        "spans": {t.value: n for t, n in stats.span_counts.items()},
    }
