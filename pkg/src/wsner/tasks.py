"""Auxiliary-task layout for windowed multi-task training.

Around every token we pose extra prediction problems about its neighbours:
for each binary window and entity type, "does that type occur within the
window on this side?"; for each positional window and offset, "which label
does the token at that offset carry?" (with a dedicated OUT_OF_SENTENCE
class past the sentence edge); plus the main task, the token's own label.

With b binary windows, positional window sizes w_1..w_q and k entity
types, the total task count is b*2*k + sum(2*w_j) + 1.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .corpus import ENTITY_TYPES, LABEL_INDEX, NUM_LABELS, EntityType, Iob2Label
from .errors import ConfigError

# Class index used by positional tasks for targets beyond the sentence.
OUT_OF_SENTENCE = NUM_LABELS

LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)


@dataclass(frozen=True)
class TaskConfig:
    """Window specification for the multi-task head layout.

    Window sizes are stored ascending; the entity type count is fixed by
    the label vocabulary (4 types).
    """

    binary_windows: tuple[int, ...] = ()
    positional_windows: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("binary_windows", "positional_windows"):
            windows = tuple(getattr(self, name))
            if any(not isinstance(w, int) or w < 1 for w in windows):
                raise ConfigError(f"{name} must be integers >= 1, got {windows}")
            if len(set(windows)) != len(windows):
                raise ConfigError(f"{name} contains duplicates: {windows}")
            object.__setattr__(self, name, tuple(sorted(windows)))

    @property
    def type_count(self) -> int:
        return len(ENTITY_TYPES)


@dataclass(frozen=True)
class TaskDescriptor:
    """One prediction task; the canonical head order is the descriptor order."""

    kind: str  # "binary" | "positional" | "main"
    side: str | None = None  # "left" | "right" | None for main
    window: int | None = None
    offset: int | None = None  # positional only, 1..window
    entity_type: EntityType | None = None  # binary only

    @property
    def num_classes(self) -> int:
        if self.kind == "binary":
            return 2
        if self.kind == "positional":
            return NUM_LABELS + 1  # 9 labels + OUT_OF_SENTENCE
        return NUM_LABELS


def task_count(config: TaskConfig) -> int:
    """Total number of tasks for a window configuration."""
    binary = len(config.binary_windows) * 2 * config.type_count
    positional = sum(2 * w for w in config.positional_windows)
    return binary + positional + 1


def describe_tasks(config: TaskConfig) -> list[TaskDescriptor]:
    """Enumerate the tasks in canonical order.

    Binary tasks grouped by window (ascending), then side (left, right),
    then entity type; positional tasks by window, side, then offset
    (1..window); the main task comes last.
    """
    descriptors: list[TaskDescriptor] = []
    for window in config.binary_windows:
        for side in SIDES:
            for etype in ENTITY_TYPES:
                descriptors.append(
                    TaskDescriptor(kind="binary", side=side, window=window, entity_type=etype)
                )
    for window in config.positional_windows:
        for side in SIDES:
            for offset in range(1, window + 1):
                descriptors.append(
                    TaskDescriptor(kind="positional", side=side, window=window, offset=offset)
                )
    descriptors.append(TaskDescriptor(kind="main"))
    assert len(descriptors) == task_count(config)
    return descriptors


def make_task_labels(labels: Sequence[Iob2Label], config: TaskConfig) -> list[list[int]]:
    """Derive the per-token class index for every task from the gold labels.

    Returns one row per token, columns in describe_tasks order. Binary tasks
    yield 0/1 (positions outside the sentence count as absent); positional
    tasks yield a label index or OUT_OF_SENTENCE; the main column is the
    token's own label index.
    """
    descriptors = describe_tasks(config)
    m = len(labels)
    types = [label.entity_type for label in labels]
    rows: list[list[int]] = []
    for i in range(m):
        row: list[int] = []
        for task in descriptors:
            if task.kind == "binary":
                if task.side == LEFT:
                    window = range(max(0, i - task.window), i)
                else:
                    window = range(i + 1, min(m, i + task.window + 1))
                row.append(1 if any(types[j] is task.entity_type for j in window) else 0)
            elif task.kind == "positional":
                j = i - task.offset if task.side == LEFT else i + task.offset
                row.append(LABEL_INDEX[labels[j]] if 0 <= j < m else OUT_OF_SENTENCE)
            else:
                row.append(LABEL_INDEX[labels[i]])
        rows.append(row)
    return rows
