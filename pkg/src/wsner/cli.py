"""Command-line entry point wiring the pipeline end to end.

Subcommands: annotate, build-correction, train-correction, correct, train,
evaluate, stats. Options may also come from a key-value config file
(--config); explicit flags win. Diagnostics go to stderr, data to files;
every command exits 0 on success and nonzero on any pipeline error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .annotate import Gazetteer, annotate_corpus, read_abstracts
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import read_conll, write_conll
from .correction import (
    build_correction_dataset_from_inventory,
    read_correction_file,
    read_inventory,
    split_curriculum,
    write_correction_file,
)
from .errors import WsnerError
from .metrics import (
    dataset_stats,
    format_span_report,
    format_stats,
    format_token_report,
    span_f1,
    span_report_dict,
    stats_dict,
    token_metrics,
    token_report_dict,
)
from .model import (
    CorrectionModel,
    ModelConfig,
    Vocabulary,
    init_correction_model,
    init_tagger_model,
)
from .tasks import TaskConfig
from .train import (
    TrainConfig,
    correct_labels,
    tag_documents,
    train_correction,
    train_tagger,
    write_trace,
)


def _read_config_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, value = stripped.partition("=")
            if not sep:
                raise WsnerError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip()] = value.strip()
    return values


def _parse_windows(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise WsnerError(f"invalid window list {text!r}; expected e.g. '2,4'") from None


class _Options:
    """Flag values backed by the optional config file."""

    def __init__(self, args):
        self.args = args
        self.file_values = _read_config_file(args.config) if args.config else {}

    def get(self, key: str, default, cast=None):
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        if key in self.file_values:
            raw = self.file_values[key]
            return cast(raw) if cast else type(default)(raw)
        return default

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.get("learning_rate", 0.1, float),
            epochs_per_stage=self.get("epochs", 20, int),
            batch_size=self.get("batch_size", 8, int),
            seed=self.get("seed", 0, int),
        )

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            embedding_dim=self.get("embedding_dim", 16, int),
            hidden_dim=self.get("hidden_dim", 32, int),
            radius=self.get("radius", 1, int),
            label_dim=self.get("label_dim", 9, int),
        )

    def task_config(self) -> TaskConfig:
        return TaskConfig(
            binary_windows=_parse_windows(self.get("binary_windows", "", str)),
            positional_windows=_parse_windows(self.get("positional_windows", "", str)),
        )

    @property
    def seed(self) -> int:
        return self.get("seed", 0, int)

    @property
    def verbose(self) -> bool:
        return bool(self.args.verbose)

    def note(self, message: str) -> None:
        if self.verbose:
            print(message, file=sys.stderr)


def _cmd_annotate(args) -> int:
    opts = _Options(args)
    abstracts = read_abstracts(args.abstracts)
    gazetteer = Gazetteer.read(args.gazetteer)
    threads = opts.get("threads", 1, int)
    documents = annotate_corpus(abstracts, gazetteer, threads=threads)
    write_conll(documents, args.out)
    opts.note(f"annotated {len(documents)} documents -> {args.out}")
    return 0


def _cmd_build_correction(args) -> int:
    opts = _Options(args)
    noisy = read_conll(args.noisy)
    inventory = read_inventory(args.inventory)
    pairs = build_correction_dataset_from_inventory(noisy, inventory)
    write_correction_file(pairs, args.out)
    if not pairs:
        print("warning: no gold entity matched any sentence; output is empty", file=sys.stderr)
    opts.note(f"built {len(pairs)} correction pairs -> {args.out}")
    return 0


def _cmd_train_correction(args) -> int:
    opts = _Options(args)
    pairs = read_correction_file(args.data)
    vocab = Vocabulary.from_tokens(p.tokens for p in pairs)
    model = init_correction_model(
        vocab, opts.model_config(), opts.seed, use_noisy_input=not args.no_noisy_input
    )
    if args.no_curriculum:
        stages = [pairs]
    else:
        split = split_curriculum(pairs)
        # tiny datasets leave trailing stages empty; train on the occupied ones
        stages = [list(stage) for stage in split.stages if stage]
    trace = train_correction(model, stages, opts.train_config())
    save_checkpoint(args.out, model, opts.seed)
    if args.trace:
        write_trace(trace, args.trace)
    opts.note(f"trained on {len(pairs)} pairs over {len(stages)} stages -> {args.out}")
    return 0


def _cmd_correct(args) -> int:
    opts = _Options(args)
    model, _ = load_checkpoint(args.checkpoint)
    if not isinstance(model, CorrectionModel):
        raise WsnerError(f"{args.checkpoint}: not a correction-model checkpoint")
    documents = read_conll(args.input)
    corrected = correct_labels(documents, model)
    write_conll(corrected, args.out)
    opts.note(f"corrected {len(documents)} documents -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    opts = _Options(args)
    stages = [read_conll(path) for path in args.data]
    sentence_stages = [[s for doc in stage for s in doc.sentences] for stage in stages]
    vocab = Vocabulary.from_tokens(
        s.tokens for stage in sentence_stages for s in stage
    )
    model = init_tagger_model(vocab, opts.task_config(), opts.model_config(), opts.seed)
    trace = train_tagger(model, sentence_stages, opts.train_config())
    save_checkpoint(args.out, model, opts.seed)
    if args.trace:
        write_trace(trace, args.trace)
    opts.note(
        f"trained {len(model.heads)}-head tagger on {len(stages)} corpora -> {args.out}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    opts = _Options(args)
    if (args.predictions is None) == (args.checkpoint is None):
        raise WsnerError("provide exactly one of --predictions or --checkpoint")
    reference = read_conll(args.reference)
    if args.predictions is not None:
        predicted = read_conll(args.predictions)
    else:
        model, _ = load_checkpoint(args.checkpoint)
        inputs = read_conll(args.input if args.input else args.reference)
        if isinstance(model, CorrectionModel):
            predicted = correct_labels(inputs, model)
        else:
            predicted = tag_documents(inputs, model)
    spans = span_f1(predicted, reference)
    tokens = token_metrics(predicted, reference)
    text = format_span_report(spans) + format_token_report(tokens)
    _emit_report(text, args.report)
    if args.json:
        payload = {"span": span_report_dict(spans), "token": token_report_dict(tokens)}
        _write_json(payload, args.json)
    opts.note(f"span micro F1 = {spans.f1:.4f}, token accuracy = {tokens.accuracy:.4f}")
    return 0


def _cmd_stats(args) -> int:
    opts = _Options(args)
    stats = dataset_stats(read_conll(args.input))
    _emit_report(format_stats(stats), args.report)
    if args.json:
        _write_json(stats_dict(stats), args.json)
    opts.note(f"{stats.tokens} tokens, rat = {stats.rat:.4f}")
    return 0


def _emit_report(text: str, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    parser.add_argument("--verbose", action="store_true", help="progress notes on stderr")


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    parser.add_argument("--epochs", type=int, default=None, help="epochs per stage")
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    parser.add_argument("--embedding-dim", dest="embedding_dim", type=int, default=None)
    parser.add_argument("--hidden-dim", dest="hidden_dim", type=int, default=None)
    parser.add_argument("--radius", type=int, default=None, help="context window radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsner",
        description="Weak-supervision NER: distant annotation, label correction, tagging.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="distantly annotate anchored abstracts")
    p.add_argument("--abstracts", required=True, help="id<TAB>body corpus with [[...]] anchors")
    p.add_argument("--gazetteer", required=True, help="surface<TAB>TYPE lookup file")
    p.add_argument("--out", required=True, help="output CoNLL file")
    _add_common(p)
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("build-correction", help="align noisy labels with a gold inventory")
    p.add_argument("--noisy", required=True, help="noisy CoNLL file")
    p.add_argument("--inventory", required=True, help="id<TAB>surface<TAB>TYPE gold entities")
    p.add_argument("--out", required=True, help="output token<TAB>noisy<TAB>gold file")
    _add_common(p)
    p.set_defaults(func=_cmd_build_correction)

    p = sub.add_parser("train-correction", help="train the label-correction model")
    p.add_argument("--data", required=True, help="three-column correction file")
    p.add_argument("--out", required=True, help="output checkpoint")
    p.add_argument("--trace", default=None, help="write per-epoch loss trace here")
    p.add_argument(
        "--no-curriculum", action="store_true", help="train on the unsplit dataset"
    )
    p.add_argument(
        "--no-noisy-input", action="store_true", help="drop the noisy-label embeddings"
    )
    p.add_argument("--label-dim", dest="label_dim", type=int, default=None)
    _add_train_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_train_correction)

    p = sub.add_parser("correct", help="apply a correction model to noisy labels")
    p.add_argument("--input", required=True, help="noisy CoNLL file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True, help="corrected CoNLL file")
    _add_common(p)
    p.set_defaults(func=_cmd_correct)

    p = sub.add_parser("train", help="train a tagger on corpora in the given order")
    p.add_argument("--data", required=True, nargs="+", help="CoNLL files, trained in order")
    p.add_argument("--out", required=True, help="output checkpoint")
    p.add_argument("--trace", default=None, help="write per-epoch loss trace here")
    p.add_argument(
        "--binary-windows",
        dest="binary_windows",
        default=None,
        help="comma-separated sizes, e.g. 2,4 (omit for single-task)",
    )
    p.add_argument(
        "--positional-windows", dest="positional_windows", default=None, help="e.g. 1"
    )
    _add_train_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score predictions against a reference")
    p.add_argument("--predictions", default=None, help="predicted CoNLL file")
    p.add_argument("--checkpoint", default=None, help="tag/correct with this model instead")
    p.add_argument("--input", default=None, help="input CoNLL for --checkpoint mode")
    p.add_argument("--reference", required=True, help="reference CoNLL file")
    p.add_argument("--report", default=None, help="write the text report here (default stdout)")
    p.add_argument("--json", default=None, help="also write a JSON report here")
    _add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("stats", help="dataset statistics of a CoNLL file")
    p.add_argument("--input", required=True)
    p.add_argument("--report", default=None, help="write the report here (default stdout)")
    p.add_argument("--json", default=None, help="also write JSON here")
    _add_common(p)
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WsnerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
