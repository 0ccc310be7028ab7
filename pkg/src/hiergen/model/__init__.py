"""Sequence-to-sequence models: assembly, training, evaluation, checkpoints."""

from .batching import (
    Batch,
    Example,
    TASKS,
    encode_pair,
    iter_batches,
    make_batch,
    sentence_spans,
    task_examples,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .evaluation import EvalResult, doc_loglik_lower_bound, perplexity, sequence_logprob
from .seq2seq import ModelConfig, Seq2SeqModel, forward
from .training import EpochStats, TrainConfig, TrainingLog, nll_loss, train

__all__ = [
    "Batch",
    "EpochStats",
    "EvalResult",
    "Example",
    "ModelConfig",
    "Seq2SeqModel",
    "TASKS",
    "TrainConfig",
    "TrainingLog",
    "doc_loglik_lower_bound",
    "encode_pair",
    "forward",
    "iter_batches",
    "load_checkpoint",
    "make_batch",
    "nll_loss",
    "perplexity",
    "save_checkpoint",
    "sentence_spans",
    "sequence_logprob",
    "task_examples",
    "train",
]
