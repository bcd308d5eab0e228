import random

import pytest

from wsner.annotate import (
    Anchor,
    Gazetteer,
    annotate_corpus,
    annotate_exact,
    extract_anchors,
    match_entities,
    read_abstracts,
    resolve_anchor_types,
    split_sentences,
    RawAbstract,
)
from wsner.corpus import EntityType, Iob2Label, compute_rat, spans_from_labels, validate_iob2
from wsner.errors import MarkupError, ParseError

PER, LOC, ORG, MISC = EntityType.PER, EntityType.LOC, EntityType.ORG, EntityType.MISC


def gaz(**entries):
    return Gazetteer({tuple(k.split("_")): v for k, v in entries.items()})


class TestExtractAnchors:
    def test_plain_anchor(self):
        tokens, anchors = extract_anchors("[[Paris]] is big")
        assert tokens == ["Paris", "is", "big"]
        assert anchors == [Anchor(("Paris",), "Paris", 0, 0)]

    def test_target_and_surface(self):
        tokens, anchors = extract_anchors("born in [[United Kingdom|the UK]]")
        assert tokens == ["born", "in", "the", "UK"]
        assert anchors == [Anchor(("the", "UK"), "United Kingdom", 2, 3)]

    def test_no_anchors(self):
        tokens, anchors = extract_anchors("no anchors here")
        assert tokens == ["no", "anchors", "here"]
        assert anchors == []

    def test_unterminated_reports_offset(self):
        with pytest.raises(MarkupError, match="offset 5"):
            extract_anchors("well [[Paris is big")

    def test_nested_is_rejected(self):
        with pytest.raises(MarkupError, match="nested"):
            extract_anchors("[[a [[b]] ]]")

    def test_empty_surface_is_rejected(self):
        with pytest.raises(MarkupError, match="empty"):
            extract_anchors("see [[target|]]")

    def test_multiple_anchors_track_positions(self):
        tokens, anchors = extract_anchors("[[A B]] x [[C]]")
        assert tokens == ["A", "B", "x", "C"]
        assert [(a.start, a.end) for a in anchors] == [(0, 1), (3, 3)]


class TestResolveAnchorTypes:
    def test_known_target(self):
        anchors = [Anchor(("Paris",), "Paris", 0, 0)]
        assert resolve_anchor_types(anchors, gaz(Paris=LOC)) == {("Paris",): LOC}

    def test_unknown_target_dropped(self):
        anchors = [Anchor(("Qxzv",), "Qxzv", 0, 0)]
        assert resolve_anchor_types(anchors, gaz(Paris=LOC)) == {}

    def test_same_target_twice_keyed_by_surface(self):
        anchors = [
            Anchor(("Paris",), "Paris", 0, 0),
            Anchor(("Paris",), "Paris", 5, 5),
        ]
        assert resolve_anchor_types(anchors, gaz(Paris=LOC)) == {("Paris",): LOC}

    def test_multiword_target_lookup(self):
        anchors = [Anchor(("the", "UK"), "United Kingdom", 0, 1)]
        mapping = resolve_anchor_types(anchors, gaz(United_Kingdom=LOC))
        assert mapping == {("the", "UK"): LOC}


class TestAnnotateExact:
    def test_two_entities(self):
        labels = annotate_exact(
            ["Barack", "Obama", "visited", "Paris"],
            {("Barack", "Obama"): PER, ("Paris",): LOC},
        )
        assert [l.value for l in labels] == ["B-PER", "I-PER", "O", "B-LOC"]

    def test_longer_surface_wins(self):
        labels = annotate_exact(["New", "York"], {("New", "York"): LOC, ("York",): ORG})
        assert [l.value for l in labels] == ["B-LOC", "I-LOC"]

    def test_empty_mapping(self):
        assert annotate_exact(["a", "b"], {}) == [Iob2Label.O, Iob2Label.O]

    def test_all_occurrences_labeled(self):
        labels = annotate_exact(["Paris", "loves", "Paris"], {("Paris",): LOC})
        assert [l.value for l in labels] == ["B-LOC", "O", "B-LOC"]

    def test_first_writer_wins_on_overlap(self):
        # "a b" is applied before "b c" (same length, leftmost first), so
        # "b c" cannot claim the already-labeled b.
        labels = annotate_exact(["a", "b", "c"], {("a", "b"): PER, ("b", "c"): LOC})
        assert [l.value for l in labels] == ["B-PER", "I-PER", "O"]

    def _random_case(self, seed):
        rng = random.Random(seed)
        alphabet = [f"t{i}" for i in range(6)]
        tokens = [rng.choice(alphabet) for _ in range(rng.randint(1, 14))]
        mapping = {}
        for _ in range(rng.randint(0, 5)):
            width = rng.randint(1, 3)
            surface = tuple(rng.choice(alphabet) for _ in range(width))
            mapping.setdefault(surface, rng.choice(list(EntityType)))
        return tokens, mapping

    @pytest.mark.parametrize("seed", range(30))
    def test_spans_verbatim_and_valid(self, seed):
        tokens, mapping = self._random_case(seed)
        labels = annotate_exact(tokens, mapping)
        assert validate_iob2(labels) is None
        for span in spans_from_labels(labels):
            surface = tuple(tokens[span.start : span.end + 1])
            assert mapping[surface] is span.type

    @pytest.mark.parametrize("seed", range(30))
    def test_longer_spans_stable_under_extension(self, seed):
        tokens, mapping = self._random_case(seed)
        before = spans_from_labels(annotate_exact(tokens, mapping))
        extra = (f"t{seed % 6}", f"t{(seed + 1) % 6}")
        extended = dict(mapping)
        extended.setdefault(extra, PER)
        after = spans_from_labels(annotate_exact(tokens, extended))
        width = len(extra)
        for span in before:
            if span.end - span.start + 1 > width:
                assert span in after


class TestSplitSentences:
    def test_terminators(self):
        assert split_sentences(["a", ".", "b", "!", "c"]) == [["a", "."], ["b", "!"], ["c"]]

    def test_no_terminator_is_one_sentence(self):
        assert split_sentences(["a", "b"]) == [["a", "b"]]


class TestAnnotateCorpus:
    def test_single_abstract(self):
        docs = annotate_corpus([RawAbstract("a1", "[[Paris]] is big .")], gaz(Paris=LOC))
        assert len(docs) == 1
        sent = docs[0].sentences[0]
        assert sent.tokens == ("Paris", "is", "big", ".")
        assert [l.value for l in sent.labels] == ["B-LOC", "O", "O", "O"]

    def test_unresolvable_anchors_give_all_outside(self):
        docs = annotate_corpus([RawAbstract("a1", "[[Qxzv]] said hi .")], gaz(Paris=LOC))
        assert all(l is Iob2Label.O for l in docs[0].sentences[0].labels)

    def test_markup_error_names_document(self):
        with pytest.raises(MarkupError, match="a9"):
            annotate_corpus([RawAbstract("a9", "bad [[anchor")], gaz(Paris=LOC))

    def test_thread_count_does_not_change_output(self, mini_wiki, gazetteer_path):
        abstracts = read_abstracts(mini_wiki)
        gazetteer = Gazetteer.read(gazetteer_path)
        assert annotate_corpus(abstracts, gazetteer, threads=4) == annotate_corpus(
            abstracts, gazetteer
        )

    def test_fixture_rat_matches_hand_count(self, mini_wiki, gazetteer_path):
        # 66 annotated tokens out of 158, counted by hand on the traced goldens
        docs = annotate_corpus(read_abstracts(mini_wiki), Gazetteer.read(gazetteer_path))
        assert compute_rat(docs) == pytest.approx(66 / 158)

    def test_every_sentence_valid(self, mini_wiki, gazetteer_path):
        docs = annotate_corpus(read_abstracts(mini_wiki), Gazetteer.read(gazetteer_path))
        for doc in docs:
            for sent in doc.sentences:
                assert validate_iob2(sent.labels) is None


class TestMatchEntities:
    @pytest.mark.parametrize("seed", range(20))
    def test_output_always_valid(self, seed):
        rng = random.Random(seed)
        tokens = [f"t{rng.randint(0, 5)}" for _ in range(rng.randint(1, 12))]
        entries = []
        for _ in range(rng.randint(0, 6)):
            width = rng.randint(1, 3)
            entries.append(
                (tuple(f"t{rng.randint(0, 5)}" for _ in range(width)), rng.choice(list(EntityType)))
            )
        assert validate_iob2(match_entities(tokens, entries)) is None

    def test_entry_order_breaks_exact_ties(self):
        # Same surface with two types: the earlier entry claims the span.
        labels = match_entities(["x"], [(("x",), PER), (("x",), LOC)])
        assert labels[0] is Iob2Label.B_PER


class TestFileReaders:
    def test_gazetteer_duplicate_surface(self, tmp_path):
        path = tmp_path / "g.tsv"
        path.write_text("Paris\tLOC\nParis\tORG\n", encoding="utf-8")
        with pytest.raises(ParseError, match="duplicate"):
            Gazetteer.read(path)

    def test_gazetteer_unknown_type_reports_line(self, tmp_path):
        path = tmp_path / "g.tsv"
        path.write_text("Paris\tCITY\n", encoding="utf-8")
        with pytest.raises(ParseError, match=":1:"):
            Gazetteer.read(path)

    def test_abstracts_require_tab(self, tmp_path):
        path = tmp_path / "a.tsv"
        path.write_text("justoneid\n", encoding="utf-8")
        with pytest.raises(ParseError):
            read_abstracts(path)

    def test_abstracts_reject_duplicate_ids(self, tmp_path):
        path = tmp_path / "a.tsv"
        path.write_text("a1\tx\na1\ty\n", encoding="utf-8")
        with pytest.raises(ParseError, match="duplicate"):
            read_abstracts(path)

    def test_fixture_gazetteer_has_30_entries(self, gazetteer_path):
        assert len(Gazetteer.read(gazetteer_path)) == 30
