"""Core corpus types: IOB2 label algebra, spans, CoNLL I/O, annotated-token ratio.

The unit of data everywhere is a LabeledSentence (tokens + aligned IOB2
labels). Tokens are opaque, pre-tokenized strings; no tokenizer ships with
the toolkit. Entities carry one of four types (PER, LOC, ORG, MISC), so the
label vocabulary has exactly 9 members.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

from .errors import (
    EmptyDatasetError,
    Iob2ValidationError,
    LabelFormatError,
    ParseError,
    SpanConflictError,
    WsnerError,
)

DOCSTART = "-DOCSTART-"


class EntityType(Enum):
    PER = "PER"
    LOC = "LOC"
    ORG = "ORG"
    MISC = "MISC"


ENTITY_TYPES: tuple[EntityType, ...] = tuple(EntityType)


class Iob2Label(Enum):
    """The 9-label IOB2 vocabulary over the four entity types."""

    O = "O"
    B_PER = "B-PER"
    I_PER = "I-PER"
    B_LOC = "B-LOC"
    I_LOC = "I-LOC"
    B_ORG = "B-ORG"
    I_ORG = "I-ORG"
    B_MISC = "B-MISC"
    I_MISC = "I-MISC"

    @property
    def entity_type(self) -> EntityType | None:
        if self is Iob2Label.O:
            return None
        return EntityType(self.value[2:])

    @property
    def is_begin(self) -> bool:
        return self.value.startswith("B-")

    @property
    def is_inside(self) -> bool:
        return self.value.startswith("I-")

    @classmethod
    def begin(cls, etype: EntityType) -> "Iob2Label":
        return cls("B-" + etype.value)

    @classmethod
    def inside(cls, etype: EntityType) -> "Iob2Label":
        return cls("I-" + etype.value)

    @classmethod
    def from_string(cls, text: str, index: int | None = None) -> "Iob2Label":
        """Parse a label string, raising LabelFormatError on unknown text."""
        try:
            return cls(text)
        except ValueError:
            where = "" if index is None else f" at index {index}"
            raise LabelFormatError(f"invalid label {text!r}{where}", index) from None


LABELS: tuple[Iob2Label, ...] = tuple(Iob2Label)
LABEL_INDEX: dict[Iob2Label, int] = {label: i for i, label in enumerate(LABELS)}
NUM_LABELS = len(LABELS)


def validate_iob2(labels: Sequence[Iob2Label]) -> int | None:
    """Return None if the sequence is valid IOB2, else the first offending index.

    Valid means every I-t is immediately preceded by B-t or I-t of the same
    type t. Total function: never raises.
    """
    prev_type: EntityType | None = None
    for i, label in enumerate(labels):
        if label.is_inside:
            if prev_type is None or prev_type is not label.entity_type:
                return i
        prev_type = label.entity_type
    return None


def iob_to_iob2(labels: Sequence[str]) -> list[Iob2Label]:
    """Convert an IOB (IOB1) label sequence to IOB2.

    In IOB1, entities may open with I-t; IOB2 requires the first token of
    every entity to carry B-t. The conversion rewrites an entity-opening
    I-t to B-t and leaves everything else alone, so it is idempotent and
    preserves spans exactly.
    """
    out: list[Iob2Label] = []
    prev_type: EntityType | None = None
    for i, text in enumerate(labels):
        label = Iob2Label.from_string(text, index=i)
        if label.is_inside and (prev_type is None or prev_type is not label.entity_type):
            label = Iob2Label.begin(label.entity_type)
        out.append(label)
        prev_type = label.entity_type
    return out


@dataclass(frozen=True)
class EntitySpan:
    """A typed entity occupying token indices start..end inclusive."""

    start: int
    end: int
    type: EntityType

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise SpanConflictError(f"invalid span boundaries ({self.start}, {self.end})")


@dataclass(frozen=True)
class LabeledSentence:
    tokens: tuple[str, ...]
    labels: tuple[Iob2Label, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.tokens) == 0:
            raise Iob2ValidationError("sentence must contain at least one token")
        if len(self.tokens) != len(self.labels):
            raise Iob2ValidationError(
                f"{len(self.tokens)} tokens but {len(self.labels)} labels"
            )
        bad = validate_iob2(self.labels)
        if bad is not None:
            raise Iob2ValidationError(f"invalid IOB2 transition at index {bad}", bad)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[LabeledSentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.id:
            raise WsnerError("document id must be non-empty")


def spans_from_labels(labels: Sequence[Iob2Label]) -> list[EntitySpan]:
    """Extract entity spans from a valid IOB2 sequence, sorted by start."""
    bad = validate_iob2(labels)
    if bad is not None:
        raise Iob2ValidationError(f"invalid IOB2 transition at index {bad}", bad)
    spans: list[EntitySpan] = []
    start: int | None = None
    current: EntityType | None = None
    for i, label in enumerate(labels):
        if label.is_begin:
            if start is not None:
                spans.append(EntitySpan(start, i - 1, current))
            start, current = i, label.entity_type
        elif label is Iob2Label.O:
            if start is not None:
                spans.append(EntitySpan(start, i - 1, current))
            start, current = None, None
        # I-t continues the open span; validity was checked above.
    if start is not None:
        spans.append(EntitySpan(start, len(labels) - 1, current))
    return spans


def labels_from_spans(length: int, spans: Sequence[EntitySpan]) -> list[Iob2Label]:
    """Inverse of spans_from_labels: render spans as an IOB2 sequence."""
    labels = [Iob2Label.O] * length
    owner: list[EntitySpan | None] = [None] * length
    for span in spans:
        if span.end >= length:
            raise SpanConflictError(f"span {span} exceeds sentence length {length}")
        for i in range(span.start, span.end + 1):
            if owner[i] is not None:
                raise SpanConflictError(f"span {span} overlaps span {owner[i]}")
            owner[i] = span
        labels[span.start] = Iob2Label.begin(span.type)
        for i in range(span.start + 1, span.end + 1):
            labels[i] = Iob2Label.inside(span.type)
    return labels


def compute_rat(documents: Sequence[Document]) -> float:
    """Ratio of annotated tokens: tokens with a non-O label over all tokens."""
    total = 0
    annotated = 0
    for doc in documents:
        for sent in doc.sentences:
            total += len(sent)
            annotated += sum(1 for label in sent.labels if label is not Iob2Label.O)
    if total == 0:
        raise EmptyDatasetError("annotated-token ratio is undefined on an empty dataset")
    return annotated / total


# ---------------------------------------------------------------------------
# CoNLL-style file I/O
#
# Canonical format: two columns "token<TAB>label", one blank line between
# sentences, each document opened by a "-DOCSTART-<TAB>O" line that is itself
# followed by a blank line. UTF-8, Unix newlines, file ends with a blank line
# (an empty dataset is an empty file). Document ids are not stored; read_conll
# assigns positional ids doc-0001, doc-0002, ...
# ---------------------------------------------------------------------------


def synthesized_doc_id(position: int) -> str:
    """Positional document id used by read_conll (1-based)."""
    return f"doc-{position:04d}"


def read_conll(path) -> list[Document]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text == "":
        return []
    if not text.endswith("\n"):
        raise ParseError("missing blank-line terminator at end of file", path)
    lines = text.split("\n")[:-1]

    docs: list[list[LabeledSentence]] = []
    tokens: list[str] = []
    labels: list[Iob2Label] = []
    sentence_start = 0
    saw_docstart = False

    def close_sentence(lineno: int):
        nonlocal tokens, labels
        if not tokens:
            return
        if not docs:
            docs.append([])
        try:
            docs[-1].append(LabeledSentence(tuple(tokens), tuple(labels)))
        except Iob2ValidationError as exc:
            raise ParseError(
                f"invalid IOB2 sentence starting here: {exc}", path, sentence_start
            ) from exc
        tokens, labels = [], []

    for lineno, line in enumerate(lines, start=1):
        if line == "":
            close_sentence(lineno)
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(
                f"expected 2 tab-separated fields, got {len(fields)}", path, lineno
            )
        token, label_text = fields
        if token == DOCSTART:
            if tokens:
                raise ParseError(f"{DOCSTART} inside a sentence", path, lineno)
            if label_text != "O":
                raise ParseError(f"{DOCSTART} must be labeled O", path, lineno)
            docs.append([])
            saw_docstart = True
            continue
        if not tokens:
            sentence_start = lineno
        tokens.append(token)
        try:
            labels.append(Iob2Label.from_string(label_text))
        except LabelFormatError as exc:
            raise ParseError(str(exc), path, lineno) from exc
    if tokens:
        raise ParseError("missing blank-line terminator after last sentence", path)
    if not docs and not saw_docstart:
        return []
    return [
        Document(synthesized_doc_id(i + 1), tuple(sents)) for i, sents in enumerate(docs)
    ]


def write_conll(documents: Sequence[Document], path) -> None:
    """Write documents in the canonical format; document ids are not stored."""
    chunks: list[str] = []
    for doc in documents:
        chunks.append(f"{DOCSTART}\tO\n\n")
        for sent in doc.sentences:
            for token, label in zip(sent.tokens, sent.labels):
                if "\t" in token or "\n" in token:
                    raise WsnerError(
                        f"token {token!r} in document {doc.id} cannot be serialized"
                    )
                if token == DOCSTART:
                    raise WsnerError(
                        f"token {DOCSTART} is reserved (document {doc.id})"
                    )
                chunks.append(f"{token}\t{label.value}\n")
            chunks.append("\n")
    _write_text(path, "".join(chunks))


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def iter_sentences(documents: Iterable[Document]) -> Iterable[LabeledSentence]:
    for doc in documents:
        yield from doc.sentences
