"""Padded batches of encoded source/target pairs with sentence spans."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..corpus import EOS_ID, NEWLINE_ID, PAD_ID, Vocabulary, encode
from ..errors import AlignmentError
from ..outline.dataset import DatasetTriple
from ..neuralcore.layers import Span

# An example is (source ids, target ids), both eos-terminated.
Example = tuple[list[int], list[int]]

TASKS = {
    "prompt2outline": ("prompt", "outline"),
    "outline2article": ("outline", "article"),
    "prompt2article": ("prompt", "article"),
}


def sentence_spans(ids: Sequence[int]) -> list[Span]:
    """Split a source row into spans ending after each newline/eos delimiter."""
    spans: list[Span] = []
    start = 0
    for i, t in enumerate(ids):
        if t in (NEWLINE_ID, EOS_ID):
            spans.append((start, i + 1))
            start = i + 1
    if start < len(ids):
        spans.append((start, len(ids)))
    return spans


def encode_pair(source_tokens: Sequence[str], target_tokens: Sequence[str],
                vocab: Vocabulary) -> Example:
    return (
        encode(source_tokens, vocab) + [EOS_ID],
        encode(target_tokens, vocab) + [EOS_ID],
    )


def task_examples(triples: Sequence[DatasetTriple], task: str,
                  vocab: Vocabulary) -> list[Example]:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {sorted(TASKS)}")
    src_field, tgt_field = TASKS[task]
    return [
        encode_pair(getattr(t, src_field), getattr(t, tgt_field), vocab)
        for t in triples
    ]


@dataclass
class Batch:
    """Right-padded id matrices plus the per-row source sentence spans."""

    source: np.ndarray       # (B, S) int64
    target: np.ndarray       # (B, T) int64
    target_mask: np.ndarray  # (B, T) bool, True on real tokens
    spans: list[list[Span]]

    @property
    def size(self) -> int:
        return self.source.shape[0]

    def source_row(self, b: int) -> np.ndarray:
        row = self.source[b]
        return row[row != PAD_ID]

    def target_row(self, b: int) -> np.ndarray:
        return self.target[b][self.target_mask[b]]


def make_batch(examples: Sequence[Example], max_positions: int | None = None) -> Batch:
    """Assemble one padded batch; sequences are clipped to max_positions."""
    if not examples:
        raise AlignmentError("cannot batch zero examples")
    sources = []
    targets = []
    for src, tgt in examples:
        if max_positions is not None:
            src = clip_to_eos(src, max_positions)
            tgt = clip_to_eos(tgt, max_positions)
        sources.append(src)
        targets.append(tgt)
    s_max = max(len(s) for s in sources)
    t_max = max(len(t) for t in targets)
    b = len(examples)
    source = np.full((b, s_max), PAD_ID, dtype=np.int64)
    target = np.full((b, t_max), PAD_ID, dtype=np.int64)
    mask = np.zeros((b, t_max), dtype=bool)
    spans = []
    for i, (src, tgt) in enumerate(zip(sources, targets)):
        source[i, : len(src)] = src
        target[i, : len(tgt)] = tgt
        mask[i, : len(tgt)] = True
        spans.append(sentence_spans(src))
    return Batch(source=source, target=target, target_mask=mask, spans=spans)


def clip_to_eos(ids: Sequence[int], max_len: int) -> list[int]:
    """Truncate to max_len, keeping the final position an eos."""
    ids = list(ids)
    if len(ids) <= max_len:
        return ids
    return ids[: max_len - 1] + [EOS_ID]


def iter_batches(examples: Sequence[Example], batch_size: int,
                 max_positions: int | None = None) -> Iterator[Batch]:
    for start in range(0, len(examples), batch_size):
        yield make_batch(examples[start : start + batch_size], max_positions)


def read_task_data(data_dir: str, task: str,
                   vocab: Vocabulary) -> tuple[list[Example], list[Example]]:
    """Load the train and valid splits of a data directory for one task."""
    from ..outline.dataset import read_split

    return (
        task_examples(read_split(data_dir, "train"), task, vocab),
        task_examples(read_split(data_dir, "valid"), task, vocab),
    )
