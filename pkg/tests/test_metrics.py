import random

import pytest

from wsner.corpus import Document, EntityType, Iob2Label, LabeledSentence, compute_rat
from wsner.errors import AlignmentError, EmptyDatasetError
from wsner.metrics import (
    dataset_stats,
    format_span_report,
    format_stats,
    format_token_report,
    span_f1,
    token_metrics,
)

from oracles import brute_prf, brute_span_counts, brute_token_counts, random_iob2

L = Iob2Label


def labels(*texts):
    return tuple(Iob2Label(t) for t in texts)


def doc_of(doc_id, *label_rows):
    sentences = tuple(
        LabeledSentence(tuple(f"t{i}" for i in range(len(row))), labels(*row))
        for row in label_rows
    )
    return Document(doc_id, sentences)


def random_corpus_pair(seed, max_docs=4, max_sents=6, max_len=10):
    rng = random.Random(seed)
    pred_docs, ref_docs = [], []
    for d in range(rng.randint(1, max_docs)):
        pred_sents, ref_sents = [], []
        for _ in range(rng.randint(1, max_sents)):
            n = rng.randint(1, max_len)
            tokens = tuple(f"t{i}" for i in range(n))
            pred_sents.append(LabeledSentence(tokens, labels(*random_iob2(rng, n))))
            ref_sents.append(LabeledSentence(tokens, labels(*random_iob2(rng, n))))
        pred_docs.append(Document(f"doc-{d}", tuple(pred_sents)))
        ref_docs.append(Document(f"doc-{d}", tuple(ref_sents)))
    return pred_docs, ref_docs


class TestSpanF1:
    def test_identity_is_perfect(self):
        docs = [doc_of("d", ["B-PER", "I-PER", "O"], ["B-LOC", "O"])]
        report = span_f1(docs, docs)
        assert report.precision == report.recall == report.f1 == 1.0
        assert report.matched == report.predicted == report.reference == 2

    def test_all_outside_predictions_score_zero(self):
        pred = [doc_of("d", ["O", "O"])]
        ref = [doc_of("d", ["B-PER", "O"])]
        report = span_f1(pred, ref)
        assert report.precision == 0.0
        assert report.recall == 0.0
        assert report.f1 == 0.0

    def test_boundary_must_match_exactly(self):
        pred = [doc_of("d", ["B-PER", "I-PER"])]
        ref = [doc_of("d", ["B-PER", "O"])]
        report = span_f1(pred, ref)
        assert report.matched == 0
        assert report.f1 == 0.0

    def test_type_must_match(self):
        pred = [doc_of("d", ["B-PER"])]
        ref = [doc_of("d", ["B-LOC"])]
        assert span_f1(pred, ref).matched == 0

    def test_alignment_error_names_document(self):
        pred = [doc_of("d1", ["O"])]
        ref = [doc_of("d2", ["O"])]
        with pytest.raises(AlignmentError, match="d1"):
            span_f1(pred, ref)

    def test_token_count_mismatch(self):
        pred = [doc_of("d", ["O", "O"])]
        ref = [doc_of("d", ["O"])]
        with pytest.raises(AlignmentError, match="sentence 0"):
            span_f1(pred, ref)

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_brute_force_counts(self, seed):
        pred, ref = random_corpus_pair(seed)
        report = span_f1(pred, ref)
        pred_rows = [[l.value for l in s.labels] for d in pred for s in d.sentences]
        ref_rows = [[l.value for l in s.labels] for d in ref for s in d.sentences]
        counts = brute_span_counts(pred_rows, ref_rows)
        matched = sum(c["match"] for c in counts.values())
        predicted = sum(c["pred"] for c in counts.values())
        reference = sum(c["ref"] for c in counts.values())
        assert (report.matched, report.predicted, report.reference) == (
            matched, predicted, reference,
        )
        p, r, f = brute_prf(matched, predicted, reference)
        assert (report.precision, report.recall, report.f1) == (p, r, f)
        for etype in EntityType:
            c = counts[etype.value]
            score = report.per_type[etype]
            assert (score.matched, score.predicted, score.reference) == (
                c["match"], c["pred"], c["ref"],
            )
            assert (score.precision, score.recall, score.f1) == brute_prf(
                c["match"], c["pred"], c["ref"]
            )

    @pytest.mark.parametrize("seed", range(15))
    def test_swapping_corpora_swaps_precision_and_recall(self, seed):
        pred, ref = random_corpus_pair(seed)
        fwd = span_f1(pred, ref)
        rev = span_f1(ref, pred)
        assert fwd.precision == rev.recall
        assert fwd.recall == rev.precision
        assert fwd.f1 == pytest.approx(rev.f1)

    def test_spurious_span_never_raises_precision(self):
        ref = [doc_of("d", ["B-PER", "O", "O"])]
        with_hit = [doc_of("d", ["B-PER", "O", "O"])]
        with_spurious = [doc_of("d", ["B-PER", "O", "B-LOC"])]
        assert span_f1(with_spurious, ref).precision <= span_f1(with_hit, ref).precision

    def test_added_matched_span_never_lowers_recall(self):
        ref = [doc_of("d", ["B-PER", "O", "B-LOC"])]
        partial = [doc_of("d", ["B-PER", "O", "O"])]
        fuller = [doc_of("d", ["B-PER", "O", "B-LOC"])]
        assert span_f1(fuller, ref).recall >= span_f1(partial, ref).recall


class TestTokenMetrics:
    def test_identity(self):
        docs = [doc_of("d", ["B-PER", "O"])]
        report = token_metrics(docs, docs)
        assert report.accuracy == report.precision == report.recall == report.f1 == 1.0

    def test_all_outside_prediction(self):
        pred = [doc_of("d", ["O", "O"])]
        ref = [doc_of("d", ["B-PER", "O"])]
        report = token_metrics(pred, ref)
        assert report.accuracy == 0.5
        assert report.precision == 0.0  # no non-O predictions
        assert report.recall == 0.0

    def test_exact_label_required(self):
        # B-PER vs I-PER on the second token: same type, different prefix
        pred = [doc_of("d", ["B-PER", "B-PER"])]
        ref = [doc_of("d", ["B-PER", "I-PER"])]
        report = token_metrics(pred, ref)
        assert report.accuracy == 0.5
        assert report.precision == 0.5
        assert report.recall == 0.5

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_counting_oracle(self, seed):
        pred, ref = random_corpus_pair(seed)
        report = token_metrics(pred, ref)
        pred_rows = [[l.value for l in s.labels] for d in pred for s in d.sentences]
        ref_rows = [[l.value for l in s.labels] for d in ref for s in d.sentences]
        counts = brute_token_counts(pred_rows, ref_rows)
        assert report.total == counts["total"]
        assert report.accuracy == counts["agree"] / counts["total"]
        p, r, f = brute_prf(counts["hit"], counts["pred_non_o"], counts["ref_non_o"])
        assert (report.precision, report.recall, report.f1) == (p, r, f)

    @pytest.mark.parametrize("seed", range(10))
    def test_accuracy_is_one_minus_hamming(self, seed):
        pred, ref = random_corpus_pair(seed)
        report = token_metrics(pred, ref)
        hamming = sum(
            1
            for dp, dr in zip(pred, ref)
            for sp, sr in zip(dp.sentences, dr.sentences)
            for a, b in zip(sp.labels, sr.labels)
            if a is not b
        )
        assert report.accuracy == pytest.approx(1 - hamming / report.total)


class TestDatasetStats:
    def test_counts(self):
        docs = [doc_of("d", ["B-PER", "I-PER", "O", "B-PER"], ["B-LOC", "O"])]
        stats = dataset_stats(docs)
        assert stats.tokens == 6
        assert stats.sentences == 2
        assert stats.documents == 1
        assert stats.span_counts == {
            EntityType.PER: 2, EntityType.LOC: 1, EntityType.ORG: 0, EntityType.MISC: 0,
        }

    def test_rat_consistent_with_compute_rat(self):
        docs = [doc_of("d", ["B-PER", "O", "O"])]
        assert dataset_stats(docs).rat == compute_rat(docs)

    def test_empty_dataset_errors(self):
        with pytest.raises(EmptyDatasetError):
            dataset_stats([])


class TestReportRendering:
    def test_key_value_lines(self):
        docs = [doc_of("d", ["B-PER", "O"])]
        text = format_span_report(span_f1(docs, docs))
        assert "span.micro.f1 = 1.0" in text
        assert "span.PER.precision = 1.0" in text
        token_text = format_token_report(token_metrics(docs, docs))
        assert "token.accuracy = 1.0" in token_text
        stats_text = format_stats(dataset_stats(docs))
        assert "tokens = 2" in stats_text and "spans.PER = 1" in stats_text
