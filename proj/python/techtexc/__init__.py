"""Text classification toolkit: preprocessing, trainable-embedding CNN/BiLSTM
classifiers with hand-written backward passes, Adam training with best-dev
checkpointing, and weighted-F1 evaluation."""

from ._core import (
    BatchPlan,
    Classifier,
    EpochRecord,
    Example,
    LabeledCorpus,
    Metrics,
    TrainHistory,
    Vocabulary,
    clean_text,
    compute_metrics,
    encode_and_pad,
    format_percent,
    format_report,
    keep_example,
    load_dataset,
    make_batches,
    tokenize,
    train,
    write_dataset,
)

__all__ = [
    "BatchPlan",
    "Classifier",
    "EpochRecord",
    "Example",
    "LabeledCorpus",
    "Metrics",
    "TrainHistory",
    "Vocabulary",
    "clean_text",
    "compute_metrics",
    "encode_and_pad",
    "format_percent",
    "format_report",
    "keep_example",
    "load_dataset",
    "make_batches",
    "tokenize",
    "train",
    "write_dataset",
]

__version__ = "0.1.0"
