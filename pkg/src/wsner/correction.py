"""Correction dataset construction and curriculum ordering.

A CorrectionPair carries one sentence with two aligned label sequences:
the noisy labels the distant annotator produced and the gold labels
recovered by matching a per-document inventory of human-annotated
entities against the text (longest entity first). Sentences in which no
gold entity matches are excluded from the dataset.

The curriculum ranks pairs by how well the noisy labels already agree
with gold (span-level F1, high to low) and cuts the ranking into three
stages that are trained in order, easiest first.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .annotate import Surface, match_entities
from .corpus import (
    Document,
    EntityType,
    Iob2Label,
    LabeledSentence,
    spans_from_labels,
    validate_iob2,
    _write_text,
)
from .errors import (
    AlignmentError,
    EmptyDatasetError,
    Iob2ValidationError,
    ParseError,
    ShapeError,
)

InventoryEntry = tuple[Surface, EntityType]
GoldInventory = dict[str, list[InventoryEntry]]


@dataclass(frozen=True)
class CorrectionPair:
    tokens: tuple[str, ...]
    noisy: tuple[Iob2Label, ...]
    gold: tuple[Iob2Label, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "noisy", tuple(self.noisy))
        object.__setattr__(self, "gold", tuple(self.gold))
        if not (len(self.tokens) == len(self.noisy) == len(self.gold)):
            raise Iob2ValidationError(
                f"unaligned pair: {len(self.tokens)} tokens, "
                f"{len(self.noisy)} noisy labels, {len(self.gold)} gold labels"
            )
        for name, labels in (("noisy", self.noisy), ("gold", self.gold)):
            bad = validate_iob2(labels)
            if bad is not None:
                raise Iob2ValidationError(f"invalid IOB2 in {name} labels at index {bad}", bad)

    def __len__(self) -> int:
        return len(self.tokens)


def inventory_from_documents(documents: Sequence[Document]) -> GoldInventory:
    """Collect each document's annotated entities as (surface, type) entries.

    Entries keep first-occurrence order and are deduplicated exactly.
    """
    inventory: GoldInventory = {}
    for doc in documents:
        entries: list[InventoryEntry] = []
        seen: set[InventoryEntry] = set()
        for sent in doc.sentences:
            for span in spans_from_labels(sent.labels):
                entry = (tuple(sent.tokens[span.start : span.end + 1]), span.type)
                if entry not in seen:
                    seen.add(entry)
                    entries.append(entry)
        inventory[doc.id] = entries
    return inventory


def match_gold_entities(
    tokens: Sequence[str], entries: Sequence[InventoryEntry]
) -> list[Iob2Label]:
    """Produce gold labels by matching inventory entries, longest entity first."""
    ordered = sorted(entries, key=lambda e: -len(e[0]))
    return match_entities(tokens, ordered)


def build_correction_dataset_from_inventory(
    noisy_documents: Sequence[Document],
    inventory: Mapping[str, Sequence[InventoryEntry]],
    pairing: Mapping[str, str] | None = None,
) -> list[CorrectionPair]:
    """Pair each noisy sentence with gold labels matched from the inventory.

    ``pairing`` maps noisy document ids to inventory ids; by default ids must
    match directly and every inventory id must name a noisy document.
    Sentences whose gold side gets zero matches are excluded.
    """
    by_id = {doc.id: doc for doc in noisy_documents}
    if pairing is None:
        for gold_id in inventory:
            if gold_id not in by_id:
                raise AlignmentError(
                    f"inventory id {gold_id!r} does not match any noisy document"
                )
        pairing = {doc_id: doc_id for doc_id in by_id}
    else:
        for noisy_id, gold_id in pairing.items():
            if noisy_id not in by_id:
                raise AlignmentError(f"pairing references missing noisy document {noisy_id!r}")
            if gold_id not in inventory:
                raise AlignmentError(f"pairing references missing gold document {gold_id!r}")

    pairs: list[CorrectionPair] = []
    for doc in noisy_documents:
        gold_id = pairing.get(doc.id)
        entries = list(inventory.get(gold_id, ())) if gold_id is not None else []
        for sent in doc.sentences:
            gold = match_gold_entities(sent.tokens, entries)
            if all(label is Iob2Label.O for label in gold):
                continue
            pairs.append(CorrectionPair(sent.tokens, sent.labels, tuple(gold)))
    return pairs


def build_correction_dataset(
    noisy_documents: Sequence[Document],
    gold_documents: Sequence[Document],
    pairing: Mapping[str, str] | None = None,
) -> list[CorrectionPair]:
    """Build the correction dataset by aligning a noisy and a gold corpus."""
    return build_correction_dataset_from_inventory(
        noisy_documents, inventory_from_documents(gold_documents), pairing
    )


def sentence_f1(noisy: Sequence[Iob2Label], gold: Sequence[Iob2Label]) -> float:
    """Span-level F1 of the noisy labels against the gold labels.

    Noisy spans count as predictions, gold spans as references; a span
    matches only if start, end and type all agree. With zero spans on both
    sides the score is 1.0; with zero spans on exactly one side it is 0.0.
    """
    if len(noisy) != len(gold):
        raise ShapeError(f"label sequences differ in length: {len(noisy)} vs {len(gold)}")
    predicted = {(s.start, s.end, s.type) for s in spans_from_labels(noisy)}
    reference = {(s.start, s.end, s.type) for s in spans_from_labels(gold)}
    if not predicted and not reference:
        return 1.0
    if not predicted or not reference:
        return 0.0
    matched = len(predicted & reference)
    precision = matched / len(predicted)
    recall = matched / len(reference)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class CurriculumSplit:
    """Three curriculum stages, easiest (highest noisy-vs-gold F1) first."""

    stages: tuple[tuple[CorrectionPair, ...], ...]

    def __post_init__(self):
        if len(self.stages) != 3:
            raise EmptyDatasetError("curriculum split must have exactly 3 stages")


def split_curriculum(pairs: Sequence[CorrectionPair]) -> CurriculumSplit:
    """Rank pairs by sentence F1 (high to low, stable) and cut into thirds.

    Remainder pairs go to the earlier stages, so stage sizes differ by at
    most one and concatenating the stages reproduces the ranking.
    """
    if not pairs:
        raise EmptyDatasetError("cannot split an empty correction dataset")
    scores = [sentence_f1(p.noisy, p.gold) for p in pairs]
    order = sorted(range(len(pairs)), key=lambda i: -scores[i])
    ranked = [pairs[i] for i in order]
    base, remainder = divmod(len(ranked), 3)
    sizes = [base + (1 if i < remainder else 0) for i in range(3)]
    stages: list[tuple[CorrectionPair, ...]] = []
    at = 0
    for size in sizes:
        stages.append(tuple(ranked[at : at + size]))
        at += size
    return CurriculumSplit(tuple(stages))


# ---------------------------------------------------------------------------
# File formats
#
# Correction dataset: three columns "token<TAB>noisy<TAB>gold", blank line
# between sentences, file ends with a blank line.
# Gold inventory: lines "doc_id<TAB>surface form<TAB>TYPE" with the surface
# tokens space-separated.
# ---------------------------------------------------------------------------


def read_correction_file(path) -> list[CorrectionPair]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text == "":
        return []
    if not text.endswith("\n"):
        raise ParseError("missing blank-line terminator at end of file", path)
    lines = text.split("\n")[:-1]

    pairs: list[CorrectionPair] = []
    tokens: list[str] = []
    noisy: list[Iob2Label] = []
    gold: list[Iob2Label] = []
    sentence_start = 0
    for lineno, line in enumerate(lines, start=1):
        if line == "":
            if tokens:
                try:
                    pairs.append(CorrectionPair(tuple(tokens), tuple(noisy), tuple(gold)))
                except Iob2ValidationError as exc:
                    raise ParseError(str(exc), path, sentence_start) from exc
                tokens, noisy, gold = [], [], []
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(
                f"expected 3 tab-separated fields, got {len(fields)}", path, lineno
            )
        if not tokens:
            sentence_start = lineno
        tokens.append(fields[0])
        try:
            noisy.append(Iob2Label.from_string(fields[1]))
            gold.append(Iob2Label.from_string(fields[2]))
        except Exception as exc:
            raise ParseError(str(exc), path, lineno) from exc
    if tokens:
        raise ParseError("missing blank-line terminator after last sentence", path)
    return pairs


def write_correction_file(pairs: Sequence[CorrectionPair], path) -> None:
    chunks: list[str] = []
    for pair in pairs:
        for token, n_label, g_label in zip(pair.tokens, pair.noisy, pair.gold):
            chunks.append(f"{token}\t{n_label.value}\t{g_label.value}\n")
        chunks.append("\n")
    _write_text(path, "".join(chunks))


def read_inventory(path) -> GoldInventory:
    inventory: GoldInventory = {}
    seen: set[tuple[str, InventoryEntry]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    f"expected 3 tab-separated fields, got {len(fields)}", path, lineno
                )
            doc_id, surface_text, type_text = fields
            if not doc_id:
                raise ParseError("empty document id", path, lineno)
            surface = tuple(surface_text.split())
            if not surface:
                raise ParseError("empty surface form", path, lineno)
            try:
                etype = EntityType(type_text)
            except ValueError:
                raise ParseError(f"unknown entity type {type_text!r}", path, lineno) from None
            entry = (surface, etype)
            if (doc_id, entry) in seen:
                continue
            seen.add((doc_id, entry))
            inventory.setdefault(doc_id, []).append(entry)
    return inventory


def write_inventory(inventory: GoldInventory, path) -> None:
    chunks = [
        f"{doc_id}\t{' '.join(surface)}\t{etype.value}\n"
        for doc_id, entries in inventory.items()
        for surface, etype in entries
    ]
    _write_text(path, "".join(chunks))


def pairs_as_noisy_document(pairs: Sequence[CorrectionPair], doc_id: str) -> Document:
    """Wrap pairs' sentences with their noisy labels as one document."""
    return Document(
        doc_id, tuple(LabeledSentence(p.tokens, p.noisy) for p in pairs)
    )


def pairs_as_gold_document(pairs: Sequence[CorrectionPair], doc_id: str) -> Document:
    """Wrap pairs' sentences with their gold labels as one document."""
    return Document(
        doc_id, tuple(LabeledSentence(p.tokens, p.gold) for p in pairs)
    )
