"""Distant annotation from anchored text plus a gazetteer.

Three steps per abstract: pull out the anchored strings, look their link
targets up in the gazetteer, then label every exact occurrence of each
resolved surface form in the text (longest surface first, leftmost first,
never relabeling a token). Anchors whose target the gazetteer does not
know contribute nothing.

Anchor markup: ``[[target|surface]]`` or ``[[surface]]`` (target equals
surface). No nesting. Bodies are pre-tokenized text; tokens are separated
by whitespace.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .corpus import Document, EntityType, Iob2Label, LabeledSentence
from .errors import MarkupError, ParseError

SENTENCE_TERMINATORS = frozenset({".", "!", "?"})

Surface = tuple[str, ...]


@dataclass(frozen=True)
class Anchor:
    """An anchored string: its surface tokens, link target, and token span."""

    surface: Surface
    target: str
    start: int
    end: int


@dataclass(frozen=True)
class RawAbstract:
    id: str
    body: str


@dataclass(frozen=True)
class Gazetteer:
    """Lookup from entity surface form (token sequence) to entity type."""

    entries: Mapping[Surface, EntityType]

    def lookup_target(self, target: str) -> EntityType | None:
        return self.entries.get(tuple(target.split()))

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def read(cls, path) -> "Gazetteer":
        """Read a TSV gazetteer: "surface form<TAB>TYPE", surface tokens space-separated."""
        entries: dict[Surface, EntityType] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 2:
                    raise ParseError(
                        f"expected 2 tab-separated fields, got {len(fields)}", path, lineno
                    )
                surface = tuple(fields[0].split())
                if not surface:
                    raise ParseError("empty surface form", path, lineno)
                try:
                    etype = EntityType(fields[1])
                except ValueError:
                    raise ParseError(f"unknown entity type {fields[1]!r}", path, lineno) from None
                if surface in entries:
                    raise ParseError(f"duplicate surface form {' '.join(surface)!r}", path, lineno)
                entries[surface] = etype
        return cls(entries)


def extract_anchors(body: str) -> tuple[list[str], list[Anchor]]:
    """Strip anchor markup from a body, returning plain tokens and the anchors.

    The plain text is the body with each ``[[...]]`` replaced by its surface;
    each anchor records the token span its surface occupies there.
    """
    parts: list[str] = []
    raw_anchors: list[tuple[str, str, int, int]] = []  # target, surface, char span
    pos = 0
    plain_len = 0
    while True:
        open_at = body.find("[[", pos)
        if open_at == -1:
            parts.append(body[pos:])
            break
        literal = body[pos:open_at]
        parts.append(literal)
        plain_len += len(literal)
        close_at = body.find("]]", open_at + 2)
        if close_at == -1:
            raise MarkupError(f"unterminated anchor at character offset {open_at}")
        inner = body[open_at + 2 : close_at]
        nested = inner.find("[[")
        if nested != -1:
            raise MarkupError(f"nested anchor at character offset {open_at + 2 + nested}")
        target, sep, surface = inner.partition("|")
        if not sep:
            target = surface = inner
        if not surface.split():
            raise MarkupError(f"empty anchor surface at character offset {open_at}")
        raw_anchors.append((target, surface, plain_len, plain_len + len(surface)))
        parts.append(surface)
        plain_len += len(surface)
        pos = close_at + 2
    plain = "".join(parts)

    tokens: list[str] = []
    offsets: list[tuple[int, int]] = []
    cursor = 0
    for token in plain.split():
        start = plain.index(token, cursor)
        tokens.append(token)
        offsets.append((start, start + len(token)))
        cursor = start + len(token)

    anchors: list[Anchor] = []
    for target, surface, char_start, char_end in raw_anchors:
        covering = [
            i for i, (s, e) in enumerate(offsets) if s < char_end and e > char_start
        ]
        anchors.append(
            Anchor(
                surface=tuple(surface.split()),
                target=target,
                start=covering[0],
                end=covering[-1],
            )
        )
    return tokens, anchors


def resolve_anchor_types(
    anchors: Sequence[Anchor], gazetteer: Gazetteer
) -> dict[Surface, EntityType]:
    """Map each anchor's surface to the entity type of its target.

    Anchors whose target is not in the gazetteer are dropped. If two anchors
    share a surface, the first resolution wins.
    """
    mapping: dict[Surface, EntityType] = {}
    for anchor in anchors:
        etype = gazetteer.lookup_target(anchor.target)
        if etype is None:
            continue
        mapping.setdefault(anchor.surface, etype)
    return mapping


def match_entities(
    tokens: Sequence[str], entries: Sequence[tuple[Surface, EntityType]]
) -> list[Iob2Label]:
    """Label all occurrences of the given surfaces, longest first.

    Candidates are applied in descending surface length, ties leftmost-first,
    then by entry order; a token already labeled is never relabeled. This is
    the one matching engine behind both distant annotation and gold-entity
    matching.
    """
    n = len(tokens)
    candidates: list[tuple[int, int, int, EntityType]] = []
    for order, (surface, etype) in enumerate(entries):
        width = len(surface)
        if width == 0 or width > n:
            continue
        for start in range(n - width + 1):
            if tuple(tokens[start : start + width]) == surface:
                candidates.append((-width, start, order, etype))
    candidates.sort(key=lambda c: c[:3])

    labels = [Iob2Label.O] * n
    taken = [False] * n
    for neg_width, start, _, etype in candidates:
        end = start - neg_width
        if any(taken[i] for i in range(start, end)):
            continue
        labels[start] = Iob2Label.begin(etype)
        for i in range(start + 1, end):
            labels[i] = Iob2Label.inside(etype)
        for i in range(start, end):
            taken[i] = True
    return labels


def annotate_exact(
    tokens: Sequence[str], mapping: Mapping[Surface, EntityType]
) -> list[Iob2Label]:
    """Label every occurrence of every surface form in the mapping."""
    entries = sorted(mapping.items(), key=lambda kv: (-len(kv[0]), kv[0]))
    return match_entities(tokens, entries)


def split_sentences(
    tokens: Sequence[str], terminators: frozenset[str] = SENTENCE_TERMINATORS
) -> list[list[str]]:
    """Split a token stream into sentences ending at terminator tokens."""
    sentences: list[list[str]] = []
    current: list[str] = []
    for token in tokens:
        current.append(token)
        if token in terminators:
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


def annotate_abstract(
    abstract: RawAbstract,
    gazetteer: Gazetteer,
    terminators: frozenset[str] = SENTENCE_TERMINATORS,
) -> Document:
    try:
        tokens, anchors = extract_anchors(abstract.body)
    except MarkupError as exc:
        raise MarkupError(f"document {abstract.id}: {exc}") from exc
    mapping = resolve_anchor_types(anchors, gazetteer)
    sentences = tuple(
        LabeledSentence(tuple(sent), tuple(annotate_exact(sent, mapping)))
        for sent in split_sentences(tokens, terminators)
    )
    return Document(abstract.id, sentences)


def annotate_corpus(
    abstracts: Sequence[RawAbstract],
    gazetteer: Gazetteer,
    terminators: frozenset[str] = SENTENCE_TERMINATORS,
    threads: int = 1,
) -> list[Document]:
    """Annotate all abstracts; output order always equals input order."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda a: annotate_abstract(a, gazetteer, terminators), abstracts))
    return [annotate_abstract(a, gazetteer, terminators) for a in abstracts]


def read_abstracts(path) -> list[RawAbstract]:
    """Read an abstract corpus: one record per line, "id<TAB>body"."""
    abstracts: list[RawAbstract] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            doc_id, sep, body = line.partition("\t")
            if not sep:
                raise ParseError("expected 'id<TAB>body'", path, lineno)
            if not doc_id:
                raise ParseError("empty document id", path, lineno)
            if doc_id in seen:
                raise ParseError(f"duplicate document id {doc_id!r}", path, lineno)
            seen.add(doc_id)
            abstracts.append(RawAbstract(doc_id, body))
    return abstracts
