"""Weak-supervision NER toolkit.

Distantly annotates anchored text with a gazetteer, corrects the noisy
labels with a trainable model that consumes them as input (scheduled by a
three-stage curriculum), and trains sequence taggers with a windowed
multi-task objective over surrounding labels.
"""

from .annotate import (
    Anchor,
    Gazetteer,
    RawAbstract,
    annotate_corpus,
    annotate_exact,
    extract_anchors,
    match_entities,
    read_abstracts,
    resolve_anchor_types,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import (
    Document,
    EntitySpan,
    EntityType,
    Iob2Label,
    LabeledSentence,
    compute_rat,
    iob_to_iob2,
    labels_from_spans,
    read_conll,
    spans_from_labels,
    validate_iob2,
    write_conll,
)
from .correction import (
    CorrectionPair,
    CurriculumSplit,
    build_correction_dataset,
    build_correction_dataset_from_inventory,
    inventory_from_documents,
    read_correction_file,
    read_inventory,
    sentence_f1,
    split_curriculum,
    write_correction_file,
)
from .errors import WsnerError
from .metrics import (
    DatasetStats,
    SpanF1Report,
    TokenReport,
    dataset_stats,
    span_f1,
    token_metrics,
)
from .model import (
    CorrectionModel,
    EncoderParams,
    HeadParams,
    LabelEmbedder,
    ModelConfig,
    TaggerModel,
    Vocabulary,
    correction_forward,
    correction_loss,
    correction_loss_and_grads,
    encode,
    finite_difference_grads,
    init_correction_model,
    init_tagger_model,
    model_tensors,
    multitask_forward,
    multitask_loss,
    repair_iob2,
    tagger_loss_and_grads,
)
from .tasks import (
    OUT_OF_SENTENCE,
    TaskConfig,
    TaskDescriptor,
    describe_tasks,
    make_task_labels,
    task_count,
)
from .train import (
    EpochRecord,
    TrainConfig,
    correct_labels,
    tag_documents,
    train_correction,
    train_tagger,
)

__version__ = "0.1.0"
